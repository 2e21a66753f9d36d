//! Distribution of `S_n = f(ξ_1) + ... + f(ξ_n)` for the symmetric
//! three-state chain, with `f(a1) = -1, f(a2) = 0, f(a3) = 1`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::ChainParams;
use crate::components::{build_component, transfer_weights, ComponentName};
use crate::error::{Error, Result};
use crate::measure::{LatticeMeasure, NormKind, TruncationBudget};

/// Number of independent streams a Monte Carlo run is split into. Fixed so
/// that the output does not depend on the thread count.
pub const MC_SHARDS: u64 = 64;

/// Forward dynamic program over (state, partial sum) pairs, stopping at each
/// requested `n`. The returned measures are in the order of `ns`.
pub fn exact_distributions(cp: &ChainParams, ns: &[u64]) -> Vec<LatticeMeasure> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let width = 2 * max_n as usize + 1;
    let center = max_n as usize;
    let [[a11, a12, _], [b21, b22, _], _] = cp.transition();
    // outer[k]: v(a1, k - center) etc.
    let mut left = vec![0.0; width];
    let mut mid = vec![0.0; width];
    let mut right = vec![0.0; width];
    left[center] = cp.p1;
    mid[center] = cp.p2;
    right[center] = cp.p3;
    let mut next_left = vec![0.0; width];
    let mut next_mid = vec![0.0; width];
    let mut next_right = vec![0.0; width];

    let snapshot = |i: u64, l: &[f64], m: &[f64], r: &[f64]| {
        let lo = center - i as usize;
        let hi = center + i as usize;
        let w: Vec<f64> = (lo..=hi).map(|k| l[k] + m[k] + r[k]).collect();
        LatticeMeasure::from_raw(-(i as i64), w)
    };

    let mut out: Vec<Option<LatticeMeasure>> = vec![None; ns.len()];
    for i in 0..=max_n {
        for (slot, &n) in out.iter_mut().zip(ns) {
            if n == i {
                *slot = Some(snapshot(i, &left, &mid, &right));
            }
        }
        if i == max_n {
            break;
        }
        // partial sums before step i+1 live in [-i, i]
        let lo = center - i as usize;
        let hi = center + i as usize;
        for k in lo.saturating_sub(1)..=(hi + 1).min(width - 1) {
            next_left[k] = 0.0;
            next_mid[k] = 0.0;
            next_right[k] = 0.0;
        }
        for k in lo..=hi {
            let outer = left[k] + right[k];
            let to_outer = a11 * outer + b21 * mid[k];
            next_left[k - 1] += to_outer;
            next_right[k + 1] += to_outer;
            next_mid[k] += a12 * outer + b22 * mid[k];
        }
        std::mem::swap(&mut left, &mut next_left);
        std::mem::swap(&mut mid, &mut next_mid);
        std::mem::swap(&mut right, &mut next_right);
    }
    out.into_iter().map(Option::unwrap).collect()
}

/// The exact law `F_n` of `S_n`.
pub fn exact_distribution(cp: &ChainParams, n: u64) -> LatticeMeasure {
    exact_distributions(cp, &[n]).pop().unwrap()
}

fn shard_counts(cp: &ChainParams, n: u64, samples: u64, seed: u64, shard: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let [p1, p2, _] = cp.start();
    let (a, b) = (cp.alpha, cp.beta);
    let mut counts = vec![0u64; 2 * n as usize + 1];
    for _ in 0..samples {
        let u: f64 = rng.random();
        // 0 = a1, 1 = a2, 2 = a3
        let mut state = if u < p1 {
            0
        } else if u < p1 + p2 {
            1
        } else {
            2
        };
        let mut sum = n as i64;
        for _ in 0..n {
            let out = if state == 1 { b } else { a };
            let u: f64 = rng.random();
            state = if u < out {
                0
            } else if u < 2.0 * out {
                2
            } else {
                1
            };
            sum += state as i64 - 1;
        }
        counts[sum as usize] += 1;
    }
    counts
}

/// Empirical law of `S_n` from `samples` simulated paths.
///
/// Paths are split over [`MC_SHARDS`] ChaCha8 streams, all seeded with
/// `seed` and distinguished by stream number; the counts are merged in shard
/// order, so the result depends only on the arguments.
pub fn monte_carlo_distribution(
    cp: &ChainParams,
    n: u64,
    samples: u64,
    seed: u64,
) -> Result<LatticeMeasure> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidInput(
            "monte carlo needs n >= 1 and samples >= 1".into(),
        ));
    }
    let per_shard = samples / MC_SHARDS;
    let extra = samples % MC_SHARDS;
    let parts: Vec<Vec<u64>> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = per_shard + u64::from(shard < extra);
            shard_counts(cp, n, count, seed, shard)
        })
        .collect();
    let mut total = vec![0u64; 2 * n as usize + 1];
    for part in &parts {
        for (t, c) in total.iter_mut().zip(part) {
            *t += c;
        }
    }
    let weights = total.iter().map(|&c| c as f64 / samples as f64).collect();
    Ok(LatticeMeasure::from_raw(-(n as i64), weights))
}

/// How the weights of the two-branch decomposition are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionVariant {
    /// `P_i * W_i` with `P_i = p₂/(1-2α)(Λ_i - I - 2αU)` as written.
    Displayed,
    /// Weights read off the transfer-operator eigendecomposition.
    Transfer,
}

impl DecompositionVariant {
    pub const ALL: [DecompositionVariant; 2] = [
        DecompositionVariant::Displayed,
        DecompositionVariant::Transfer,
    ];
}

impl fmt::Display for DecompositionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecompositionVariant::Displayed => "displayed",
            DecompositionVariant::Transfer => "transfer",
        })
    }
}

impl FromStr for DecompositionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "displayed" => Ok(DecompositionVariant::Displayed),
            "transfer" => Ok(DecompositionVariant::Transfer),
            _ => Err(Error::InvalidInput(format!(
                "unknown decomposition variant `{s}`"
            ))),
        }
    }
}

/// The two-branch decomposition `Λ1^{*n} * C1 + Λ2^{*n} * C2`.
pub fn decomposition(
    cp: &ChainParams,
    n: u64,
    variant: DecompositionVariant,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let l1 = build_component(cp, ComponentName::Lambda1, tb)?;
    let l2 = build_component(cp, ComponentName::Lambda2, tb)?;
    let (c1, c2) = match variant {
        DecompositionVariant::Displayed => {
            let p1 = build_component(cp, ComponentName::P1, tb)?;
            let p2 = build_component(cp, ComponentName::P2, tb)?;
            let w1 = build_component(cp, ComponentName::W1, tb)?;
            let w2 = build_component(cp, ComponentName::W2, tb)?;
            (p1.convolve(&w1), p2.convolve(&w2))
        }
        DecompositionVariant::Transfer => transfer_weights(cp, tb)?,
    };
    let first = l1.convolve_power(n).convolve(&c1);
    let second = l2.convolve_power(n).convolve(&c2);
    Ok(&first + &second)
}

/// `‖F_n - decomposition‖_TV` for the chosen variant. A diagnostic: the
/// value is reported, not checked against a threshold.
pub fn decomposition_residual(
    cp: &ChainParams,
    n: u64,
    variant: DecompositionVariant,
    tb: &mut TruncationBudget,
) -> Result<f64> {
    let exact = exact_distribution(cp, n);
    let approx = decomposition(cp, n, variant, tb)?;
    (&exact - &approx).norm(NormKind::TotalVariation)
}
