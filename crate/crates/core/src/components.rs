//! Named measures built from the chain parameters, and the approximants
//! assembled from them.
//!
//! Notation: `d = 1 - 2α + 2β`, `x = 2α / d`, `L = ½(I_{-1} + I_1)`,
//! `U = L - I`, `S = Σ_j (xU)^{*j}`.
//!
//! | name      | measure |
//! |-----------|---------|
//! | `l`       | `½(I_{-1} + I_1)` |
//! | `u`       | `L - I` |
//! | `h`       | `(1-2α) L * Σ_j (2αL)^{*j}` |
//! | `e`       | `(1 - 2αp₂/(1-2α)) I + (2αp₂/(1-2α)) L` |
//! | `k`       | `((1-2(α-β))/(1+2β)) Σ_j (2α/(1+2β) L)^{*j}`; proof form `Σ_j (xU)^{*j}` |
//! | `delta`   | `8βU/d² * S * S` |
//! | `lambda1/2` | `½((1+2α-2β) I + 2αU ± (dI - 2αU) * Σ_j binom(½,j) Δ^{*j})` |
//! | `w1/2`    | `½(I ± (I + xU) * S * Σ_j binom(-½,j) Δ^{*j})` |
//! | `p1/2`    | `p₂/(1-2α) (Λ_{1,2} - I - 2αU)` |
//! | `g`       | `exp{2β(1-2α)/d (H - I)}` |
//! | `d`       | `exp{β/d (I_1 - I + I_{-1} - I)}` |
//! | `a0`      | `-2β²(1-2α)/d² ((1+2α) I + 2(1-2α)K/d) * (H - I)^{*2}` |
//! | `a1`      | `2(α-β)/d ((1-2α)/d - p₂) (L - I)` |
//! | `a2`      | `2β/d² (2(α-β)(1-2α)/d - β) (L - I)^{*2}` |

use std::fmt;
use std::str::FromStr;

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::measure::{
    binomial_half_series, cp_exponential, neumann_series, HalfExponent, LatticeMeasure,
    TruncationBudget,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentName {
    L,
    U,
    H,
    E,
    K,
    Delta,
    Lambda1,
    Lambda2,
    W1,
    W2,
    P1,
    P2,
    G,
    D,
    A0,
    A1,
    A2,
}

impl ComponentName {
    pub const ALL: [ComponentName; 17] = [
        ComponentName::L,
        ComponentName::U,
        ComponentName::H,
        ComponentName::E,
        ComponentName::K,
        ComponentName::Delta,
        ComponentName::Lambda1,
        ComponentName::Lambda2,
        ComponentName::W1,
        ComponentName::W2,
        ComponentName::P1,
        ComponentName::P2,
        ComponentName::G,
        ComponentName::D,
        ComponentName::A0,
        ComponentName::A1,
        ComponentName::A2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentName::L => "l",
            ComponentName::U => "u",
            ComponentName::H => "h",
            ComponentName::E => "e",
            ComponentName::K => "k",
            ComponentName::Delta => "delta",
            ComponentName::Lambda1 => "lambda1",
            ComponentName::Lambda2 => "lambda2",
            ComponentName::W1 => "w1",
            ComponentName::W2 => "w2",
            ComponentName::P1 => "p1",
            ComponentName::P2 => "p2",
            ComponentName::G => "g",
            ComponentName::D => "d",
            ComponentName::A0 => "a0",
            ComponentName::A1 => "a1",
            ComponentName::A2 => "a2",
        }
    }
}

impl fmt::Display for ComponentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        ComponentName::ALL
            .into_iter()
            .find(|c| c.as_str() == lower)
            .ok_or_else(|| Error::InvalidInput(format!("unknown component `{s}`")))
    }
}

/// Which of the two equivalent series defines `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KVariant {
    /// Prefactor `(1-2(α-β))/(1+2β)` times powers of `2α/(1+2β) L`.
    #[default]
    Displayed,
    /// Powers of `2α/(1-2α+2β) U` without a prefactor.
    Proof,
}

impl FromStr for KVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "displayed" => Ok(KVariant::Displayed),
            "proof" => Ok(KVariant::Proof),
            _ => Err(Error::InvalidInput(format!("unknown K variant `{s}`"))),
        }
    }
}

fn identity() -> LatticeMeasure {
    LatticeMeasure::dirac(0)
}

fn l_measure() -> LatticeMeasure {
    LatticeMeasure::from_raw(-1, vec![0.5, 0.0, 0.5])
}

fn u_measure() -> LatticeMeasure {
    LatticeMeasure::from_raw(-1, vec![0.5, -1.0, 0.5])
}

fn tag(block: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::DivergentSeries { norm, .. } => Error::DivergentSeries {
            block: block.to_string(),
            norm,
        },
        other => other,
    }
}

/// `Σ_j (xU)^{*j}` with `x = 2α/d`.
fn u_geometric(cp: &ChainParams, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let x = 2.0 * cp.alpha / cp.denom();
    neumann_series(&u_measure().scale(x), tb).map_err(tag("u-geometric"))
}

fn h_measure(cp: &ChainParams, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let a = cp.alpha;
    let geo = neumann_series(&l_measure().scale(2.0 * a), tb).map_err(tag("h"))?;
    Ok(l_measure().scale(1.0 - 2.0 * a).convolve(&geo))
}

fn k_measure(
    cp: &ChainParams,
    variant: KVariant,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let (a, b) = (cp.alpha, cp.beta);
    match variant {
        KVariant::Displayed => {
            let geo = neumann_series(&l_measure().scale(2.0 * a / (1.0 + 2.0 * b)), tb)
                .map_err(tag("k"))?;
            Ok(geo.scale((1.0 - 2.0 * (a - b)) / (1.0 + 2.0 * b)))
        }
        KVariant::Proof => u_geometric(cp, tb).map_err(tag("k")),
    }
}

fn delta_measure(cp: &ChainParams, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let d = cp.denom();
    let s = u_geometric(cp, tb)?;
    Ok(u_measure()
        .scale(8.0 * cp.beta / (d * d))
        .convolve(&s)
        .convolve(&s))
}

fn lambda_measure(
    cp: &ChainParams,
    sign: f64,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let (a, b, d) = (cp.alpha, cp.beta, cp.denom());
    let delta = delta_measure(cp, tb)?;
    let root = binomial_half_series(HalfExponent::Plus, &delta, tb).map_err(tag("delta"))?;
    let two_a_u = u_measure().scale(2.0 * a);
    let head = &identity().scale(1.0 + 2.0 * a - 2.0 * b) + &two_a_u;
    let spread = (&identity().scale(d) - &two_a_u).convolve(&root);
    Ok(LatticeMeasure::linear_combine(
        0.5,
        &head,
        0.5 * sign,
        &spread,
    ))
}

/// `(I + xU) * S * Σ binom(-½, j) Δ^{*j}`, shared by `W1` and `W2`.
fn w_core(cp: &ChainParams, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let x = 2.0 * cp.alpha / cp.denom();
    let s = u_geometric(cp, tb)?;
    let delta = delta_measure(cp, tb)?;
    let inv_root = binomial_half_series(HalfExponent::Minus, &delta, tb).map_err(tag("delta"))?;
    let lead = &identity() + &u_measure().scale(x);
    Ok(lead.convolve(&s).convolve(&inv_root))
}

fn w_measure(cp: &ChainParams, sign: f64, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let core = w_core(cp, tb)?;
    Ok(LatticeMeasure::linear_combine(
        0.5,
        &identity(),
        0.5 * sign,
        &core,
    ))
}

fn p_measure(cp: &ChainParams, sign: f64, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let a = cp.alpha;
    let lambda = lambda_measure(cp, sign, tb)?;
    let inner = &(&lambda - &identity()) - &u_measure().scale(2.0 * a);
    Ok(inner.scale(cp.p2 / (1.0 - 2.0 * a)))
}

/// Coefficient of the exponent of `G`: `2β(1-2α)/d`.
fn g_rate(cp: &ChainParams) -> f64 {
    2.0 * cp.beta * (1.0 - 2.0 * cp.alpha) / cp.denom()
}

/// `G^{*n} = exp{n·2β(1-2α)/d (H - I)}`.
pub fn g_power(cp: &ChainParams, n: u64, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let h = h_measure(cp, tb)?;
    cp_exponential(n as f64 * g_rate(cp), &h, tb)
}

fn a0_measure(
    cp: &ChainParams,
    variant: KVariant,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let (a, b, d) = (cp.alpha, cp.beta, cp.denom());
    let k = k_measure(cp, variant, tb)?;
    let h_minus_i = &h_measure(cp, tb)? - &identity();
    let bracket =
        LatticeMeasure::linear_combine(1.0 + 2.0 * a, &identity(), 2.0 * (1.0 - 2.0 * a) / d, &k);
    let coeff = -2.0 * b * b * (1.0 - 2.0 * a) / (d * d);
    Ok(bracket
        .convolve(&h_minus_i.convolve(&h_minus_i))
        .scale(coeff))
}

/// Coefficient of `(L - I)` in `A1`.
pub fn a1_coefficient(cp: &ChainParams) -> f64 {
    let (a, b, d) = (cp.alpha, cp.beta, cp.denom());
    2.0 * (a - b) / d * ((1.0 - 2.0 * a) / d - cp.p2)
}

/// Coefficient of `(L - I)^{*2}` in `A2`.
pub fn a2_coefficient(cp: &ChainParams) -> f64 {
    let (a, b, d) = (cp.alpha, cp.beta, cp.denom());
    2.0 * b / (d * d) * (2.0 * (a - b) * (1.0 - 2.0 * a) / d - b)
}

/// The scalar `δ = -2β²/d² ((1+2α)/(1-2α) + 2/d)`.
pub fn delta_coefficient(cp: &ChainParams) -> f64 {
    let (a, b, d) = (cp.alpha, cp.beta, cp.denom());
    -2.0 * b * b / (d * d) * ((1.0 + 2.0 * a) / (1.0 - 2.0 * a) + 2.0 / d)
}

/// Builds a named measure with the default `K` definition.
pub fn build_component(
    cp: &ChainParams,
    name: ComponentName,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    build_component_with(cp, name, KVariant::default(), tb)
}

/// Builds a named measure; `k_variant` selects the series used for `K`
/// (and through it `A0`).
pub fn build_component_with(
    cp: &ChainParams,
    name: ComponentName,
    k_variant: KVariant,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let a = cp.alpha;
    match name {
        ComponentName::L => Ok(l_measure()),
        ComponentName::U => Ok(u_measure()),
        ComponentName::H => h_measure(cp, tb),
        ComponentName::E => {
            let c = 2.0 * a * cp.p2 / (1.0 - 2.0 * a);
            Ok(LatticeMeasure::linear_combine(
                1.0 - c,
                &identity(),
                c,
                &l_measure(),
            ))
        }
        ComponentName::K => k_measure(cp, k_variant, tb),
        ComponentName::Delta => delta_measure(cp, tb),
        ComponentName::Lambda1 => lambda_measure(cp, 1.0, tb),
        ComponentName::Lambda2 => lambda_measure(cp, -1.0, tb),
        ComponentName::W1 => w_measure(cp, 1.0, tb),
        ComponentName::W2 => w_measure(cp, -1.0, tb),
        ComponentName::P1 => p_measure(cp, 1.0, tb),
        ComponentName::P2 => p_measure(cp, -1.0, tb),
        ComponentName::G => g_power(cp, 1, tb),
        ComponentName::D => skellam_power(cp, 1, tb),
        ComponentName::A0 => a0_measure(cp, k_variant, tb),
        ComponentName::A1 => Ok(u_measure().scale(a1_coefficient(cp))),
        ComponentName::A2 => {
            let u = u_measure();
            Ok(u.convolve(&u).scale(a2_coefficient(cp)))
        }
    }
}

/// `D^{*n} = exp{2nλ (L - I)}` with `λ = β/(1-2α+2β)`.
pub fn skellam_power(
    cp: &ChainParams,
    n: u64,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    cp_exponential(2.0 * n as f64 * cp.skellam_lambda(), &l_measure(), tb)
}

/// The compound approximant `E * K * G^{*n}`.
pub fn theorem1_approx(
    cp: &ChainParams,
    n: u64,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let e = build_component(cp, ComponentName::E, tb)?;
    let k = build_component(cp, ComponentName::K, tb)?;
    let g = g_power(cp, n, tb)?;
    Ok(e.convolve(&k).convolve(&g))
}

/// The corrected Skellam approximant `D^{*n} * (I + A1 + n A2)`.
pub fn expansion_approx(
    cp: &ChainParams,
    n: u64,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let dn = skellam_power(cp, n, tb)?;
    let u = u_measure();
    let correction = &(&identity() + &u.scale(a1_coefficient(cp)))
        + &u.convolve(&u).scale(n as f64 * a2_coefficient(cp));
    Ok(dn.convolve(&correction))
}

/// Weights `(C1, C2)` with `F_n = Λ1^{*n} * C1 + Λ2^{*n} * C2`, read off the
/// spectral decomposition of the two-state transfer operator:
/// `C1 = W1 - 2p₂(α-β) U * R`, `C2 = W2 + 2p₂(α-β) U * R`, where
/// `R = (1/d) S * Σ binom(-½, j) Δ^{*j}` is the inverse of `Λ1 - Λ2`.
pub fn transfer_weights(
    cp: &ChainParams,
    tb: &mut TruncationBudget,
) -> Result<(LatticeMeasure, LatticeMeasure)> {
    let d = cp.denom();
    let s = u_geometric(cp, tb)?;
    let delta = delta_measure(cp, tb)?;
    let inv_root = binomial_half_series(HalfExponent::Minus, &delta, tb).map_err(tag("delta"))?;
    let r = s.convolve(&inv_root).scale(1.0 / d);
    let shift = u_measure()
        .convolve(&r)
        .scale(2.0 * cp.p2 * (cp.alpha - cp.beta));
    let w1 = w_measure(cp, 1.0, tb)?;
    let w2 = w_measure(cp, -1.0, tb)?;
    Ok((&w1 - &shift, &w2 + &shift))
}
