//! Inequality and identity checkers, and the randomized check suites built
//! on them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainParams, STRICT_LIMIT};
use crate::components::{build_component, ComponentName};
use crate::error::{Error, Result};
use crate::markov::{decomposition_residual, DecompositionVariant};
use crate::measure::{cp_exponential, LatticeMeasure, NormKind, TruncationBudget};
use crate::skellam::{skellam_pmf, SkellamParams};

/// Absolute slack for every inequality check.
pub const SLACK: f64 = 1e-12;

/// Truncation budget used when a check builds an exponential measure.
const CHECK_BUDGET: f64 = 1e-15;

const BERGSTROM_MAX_SUPPORT: usize = 32;
const BERGSTROM_MAX_N: u64 = 20;

/// Norm a smoothing estimate is stated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingKind {
    Tv,
    Local,
}

impl fmt::Display for SmoothingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothingKind::Tv => "tv",
            SmoothingKind::Local => "local",
        })
    }
}

impl FromStr for SmoothingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv" => Ok(SmoothingKind::Tv),
            "local" => Ok(SmoothingKind::Local),
            _ => Err(Error::InvalidInput(format!(
                "smoothing kind `{s}` is not tv or local"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Right side of the smoothing estimate for `‖(F-I)^{*j} * exp{t(F-I)}‖`.
pub fn smoothing_bound(kind: SmoothingKind, t: f64, j: u32) -> f64 {
    let e = std::f64::consts::E;
    match (kind, j) {
        (SmoothingKind::Tv, 1) => (2.0 / (e * t)).sqrt(),
        (SmoothingKind::Tv, 2) => 3.0 / (e * t),
        (SmoothingKind::Tv, _) => {
            let fact: f64 = (1..=j).map(f64::from).product();
            fact.sqrt() * t.powf(-f64::from(j) / 2.0)
        }
        (SmoothingKind::Local, _) => {
            let p = f64::from(j) + 0.5;
            2.0 * (p / (t * e)).powf(p)
        }
    }
}

fn is_symmetric(f: &LatticeMeasure) -> bool {
    f.iter().all(|(k, w)| f.get(-k) == w)
}

/// Evaluates `‖(F-I)^{*j} * exp{t(F-I)}‖` against its smoothing bound.
///
/// `F` must be a probability measure; for [`SmoothingKind::Local`] it must
/// also be symmetric with no mass at 0.
pub fn smoothing_check(
    f: &LatticeMeasure,
    t: f64,
    j: u32,
    kind: SmoothingKind,
) -> Result<SmoothingOutcome> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "t = {t} must be finite and > 0"
        )));
    }
    if j == 0 {
        return Err(Error::InvalidInput("j must be >= 1".into()));
    }
    if !f.is_nonnegative() || (f.mass() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(
            "F must be a probability measure".into(),
        ));
    }
    if kind == SmoothingKind::Local && (f.get(0) != 0.0 || !is_symmetric(f)) {
        return Err(Error::InvalidInput(
            "the local estimate needs F symmetric and concentrated off 0".into(),
        ));
    }
    let mut tb = TruncationBudget::new(CHECK_BUDGET);
    let smoothed = cp_exponential(t, f, &mut tb)?;
    let diff = f - &LatticeMeasure::dirac(0);
    let m = diff.convolve_power(u64::from(j)).convolve(&smoothed);
    let lhs = m.norm(match kind {
        SmoothingKind::Tv => NormKind::TotalVariation,
        SmoothingKind::Local => NormKind::Local,
    })?;
    let rhs = smoothing_bound(kind, t, j);
    Ok(SmoothingOutcome {
        lhs,
        rhs,
        ok: lhs <= rhs + SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergstromResidual {
    /// `‖V^{*n} - M^{*n} - (right side)‖_TV`.
    pub residual: f64,
    /// Largest TV norm among the terms of the right side.
    pub scale: f64,
}

impl BergstromResidual {
    pub fn ok(&self) -> bool {
        self.residual <= SLACK * self.scale
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn powers(m: &LatticeMeasure, up_to: u64) -> Vec<LatticeMeasure> {
    let mut out = vec![LatticeMeasure::dirac(0)];
    for i in 1..=up_to as usize {
        let next = out[i - 1].convolve(m);
        out.push(next);
    }
    out
}

/// Residual of the expansion
///
/// ```text
/// V^{*n} - M^{*n} = Σ_{m=1}^{k} binom(n,m) (V-M)^{*m} * M^{*(n-m)}
///     + (V-M)^{*(k+1)} * Σ_{m=k}^{n-1} binom(m,k) V^{*(n-1-m)} * M^{*(m-k)}
/// ```
///
/// with both sums evaluated term by term.
pub fn bergstrom_residual(
    v: &LatticeMeasure,
    m: &LatticeMeasure,
    n: u64,
    k: u64,
) -> Result<BergstromResidual> {
    if n == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "need n >= 1 and k < n, got n = {n}, k = {k}"
        )));
    }
    if n > BERGSTROM_MAX_N {
        return Err(Error::TooLarge(format!(
            "n = {n} exceeds {BERGSTROM_MAX_N}"
        )));
    }
    if v.len() > BERGSTROM_MAX_SUPPORT || m.len() > BERGSTROM_MAX_SUPPORT {
        return Err(Error::TooLarge(format!(
            "support length {} exceeds {BERGSTROM_MAX_SUPPORT}",
            v.len().max(m.len())
        )));
    }
    let diff = v - m;
    let vp = powers(v, n);
    let mp = powers(m, n);
    let dp = powers(&diff, k + 1);
    let mut terms = Vec::new();
    for j in 1..=k {
        terms.push(
            dp[j as usize]
                .convolve(&mp[(n - j) as usize])
                .scale(binomial(n, j)),
        );
    }
    for j in k..n {
        let inner = vp[(n - 1 - j) as usize].convolve(&mp[(j - k) as usize]);
        terms.push(dp[(k + 1) as usize].convolve(&inner).scale(binomial(j, k)));
    }
    let mut rest = &vp[n as usize] - &mp[n as usize];
    let mut scale: f64 = 0.0;
    for term in &terms {
        scale = scale.max(term.norm(NormKind::TotalVariation)?);
        rest = &rest - term;
    }
    Ok(BergstromResidual {
        residual: rest.norm(NormKind::TotalVariation)?,
        scale,
    })
}

/// Random probability measure with support inside `[-5, 5]`.
pub fn random_probability<R: Rng>(rng: &mut R) -> LatticeMeasure {
    let lo = rng.random_range(-5..=4);
    let len = rng.random_range(1..=(6 - lo) as usize);
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    LatticeMeasure::new(lo, raw.iter().map(|w| w / total).collect()).unwrap()
}

/// Random symmetric probability measure on `{±1, ..., ±m}`, `m <= 6`.
pub fn random_symmetric_off_zero<R: Rng>(rng: &mut R) -> LatticeMeasure {
    let m = rng.random_range(1..=6i64);
    let raw: Vec<f64> = (0..m)
        .map(|_| {
            if rng.random_bool(0.7) {
                rng.random_range(0.05..1.0)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = 2.0 * raw.iter().sum::<f64>();
    if total == 0.0 {
        return LatticeMeasure::from_points(&[(-1, 0.5), (1, 0.5)]).unwrap();
    }
    let mut points = Vec::new();
    for (i, w) in raw.iter().enumerate() {
        let k = i as i64 + 1;
        points.push((k, w / total));
        points.push((-k, w / total));
    }
    LatticeMeasure::from_points(&points).unwrap()
}

/// Random signed measure with at most `max_len` weights in `[-½, ½]`.
pub fn random_signed<R: Rng>(rng: &mut R, max_len: usize) -> LatticeMeasure {
    let lo = rng.random_range(-4..=4);
    let len = rng.random_range(1..=max_len);
    LatticeMeasure::new(lo, (0..len).map(|_| rng.random_range(-0.5..0.5)).collect()).unwrap()
}

/// Random signed measure of total mass zero.
pub fn random_zero_mass<R: Rng>(rng: &mut R, max_len: usize) -> LatticeMeasure {
    let m = random_signed(rng, max_len.max(2));
    let fix = m.mass();
    let (lo, _) = m.support().unwrap_or((0, 0));
    &m - &LatticeMeasure::dirac(lo - 1).scale(fix)
}

/// The check suites runnable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckSuite {
    Norms,
    Smoothing,
    Bergstrom,
    Decomposition,
    SkellamOracle,
}

impl CheckSuite {
    pub const ALL: [CheckSuite; 5] = [
        CheckSuite::Norms,
        CheckSuite::Smoothing,
        CheckSuite::Bergstrom,
        CheckSuite::Decomposition,
        CheckSuite::SkellamOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckSuite::Norms => "norms",
            CheckSuite::Smoothing => "smoothing",
            CheckSuite::Bergstrom => "bergstrom",
            CheckSuite::Decomposition => "decomposition",
            CheckSuite::SkellamOracle => "skellam-oracle",
        }
    }
}

impl fmt::Display for CheckSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckSuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckSuite::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown check suite `{s}`")))
    }
}

/// One evaluated check: `ok` iff `value <= limit`. Diagnostic records carry
/// a NaN limit and always pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub case: usize,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub ok: bool,
}

impl CheckRecord {
    fn bound(case: usize, name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            case,
            name: name.into(),
            value,
            limit,
            ok: value <= limit,
        }
    }

    fn diagnostic(case: usize, name: impl Into<String>, value: f64) -> Self {
        Self {
            case,
            name: name.into(),
            value,
            limit: f64::NAN,
            ok: true,
        }
    }

    pub fn is_diagnostic(&self) -> bool {
        self.limit.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: CheckSuite,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.ok)
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.ok)
    }

    /// Largest `value / limit` over the asserted records.
    pub fn worst_ratio(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| !r.is_diagnostic() && r.limit > 0.0)
            .map(|r| r.value / r.limit)
            .fold(0.0, f64::max)
    }
}

/// Runs `cases` randomized cases of a suite from a fixed seed.
pub fn run_suite(suite: CheckSuite, cases: usize, seed: u64) -> Result<SuiteReport> {
    if cases == 0 {
        return Err(Error::InvalidInput("cases must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = match suite {
        CheckSuite::Norms => norms_suite(&mut rng, cases)?,
        CheckSuite::Smoothing => smoothing_suite(&mut rng, cases)?,
        CheckSuite::Bergstrom => bergstrom_suite(&mut rng, cases)?,
        CheckSuite::Decomposition => decomposition_suite(&mut rng, cases)?,
        CheckSuite::SkellamOracle => skellam_oracle_suite()?,
    };
    Ok(SuiteReport { suite, records })
}

fn tv(m: &LatticeMeasure) -> f64 {
    m.norm(NormKind::TotalVariation).unwrap()
}

/// `lhs <= rhs` up to [`SLACK`], relative for large right sides.
fn leq(case: usize, name: &str, lhs: f64, rhs: f64) -> CheckRecord {
    CheckRecord::bound(case, name, lhs, rhs + SLACK * rhs.abs().max(1.0))
}

fn norms_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<CheckRecord>> {
    let one = LatticeMeasure::dirac(0);
    let step = &LatticeMeasure::dirac(1) - &one;
    let u = LatticeMeasure::from_points(&[(-1, 0.5), (0, -1.0), (1, 0.5)])?;
    let x2 = step.convolve(&step).shift(-1).scale(0.5);
    let mut out = Vec::new();
    for case in 0..cases {
        let m = random_signed(rng, 8);
        let v = random_signed(rng, 8);
        let z = random_zero_mass(rng, 8);
        let (loc_m, tv_m, tv_v) = (m.norm(NormKind::Local)?, tv(&m), tv(&v));

        out.push(leq(case, "local <= tv", loc_m, tv_m));
        out.push(leq(
            case,
            "tv(M*V) <= tv(M) tv(V)",
            tv(&m.convolve(&v)),
            tv_m * tv_v,
        ));
        out.push(leq(case, "tv <= exp(tv)", tv_m, tv_m.exp()));
        out.push(leq(
            case,
            "w(Z*V) <= w(Z) tv(V)",
            z.convolve(&v).norm(NormKind::Wasserstein)?,
            z.norm(NormKind::Wasserstein)? * tv_v,
        ));
        let dm = step.convolve(&m);
        out.push(leq(case, "local <= tv((I1-I)*M)", loc_m, tv(&dm)));
        out.push(CheckRecord::bound(
            case,
            "|tv(M) - w((I1-I)*M)|",
            (tv_m - dm.norm(NormKind::Wasserstein)?).abs(),
            SLACK * tv_m.max(1.0),
        ));
        out.push(CheckRecord::bound(
            case,
            "U*M = 1/2 (I1-I)^2 * I-1 * M",
            tv(&(&u.convolve(&m) - &x2.convolve(&m))),
            SLACK * tv_m.max(1.0),
        ));

        let f = random_probability(rng);
        let (u1, u2) = (rng.random_range(0.01..10.0), rng.random_range(0.01..10.0));
        let mut tb = TruncationBudget::new(CHECK_BUDGET);
        let joint = cp_exponential(u1 + u2, &f, &mut tb)?;
        let split = cp_exponential(u1, &f, &mut tb)?.convolve(&cp_exponential(u2, &f, &mut tb)?);
        out.push(CheckRecord::bound(
            case,
            "exp additivity",
            tv(&(&joint - &split)),
            SLACK,
        ));

        let (loc_z, tv_z, w_z) = (
            z.norm(NormKind::Local)?,
            tv(&z),
            z.norm(NormKind::Wasserstein)?,
        );
        for r in [1.5, 2.0, 3.0] {
            out.push(leq(
                case,
                &format!("lr:{r} interpolation"),
                z.norm(NormKind::Lr(r))?,
                loc_z.powf((r - 1.0) / r) * tv_z.powf(1.0 / r),
            ));
            out.push(leq(
                case,
                &format!("caplr:{r} interpolation"),
                z.norm(NormKind::CapLr(r))?,
                tv_z.powf((r - 1.0) / r) * w_z.powf(1.0 / r),
            ));
        }
    }
    Ok(out)
}

fn random_t<R: Rng>(rng: &mut R) -> f64 {
    // log-uniform on [0.1, 50]
    (rng.random_range(0.1f64.ln()..50f64.ln())).exp()
}

fn smoothing_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for case in 0..cases {
        let f = random_probability(rng);
        let t = random_t(rng);
        for j in 1..=4 {
            let r = smoothing_check(&f, t, j, SmoothingKind::Tv)?;
            out.push(CheckRecord::bound(
                case,
                format!("tv j={j} t={t:.4}"),
                r.lhs,
                r.rhs + SLACK,
            ));
        }
        let f = random_symmetric_off_zero(rng);
        let t = random_t(rng);
        for j in 1..=4 {
            let r = smoothing_check(&f, t, j, SmoothingKind::Local)?;
            out.push(CheckRecord::bound(
                case,
                format!("local j={j} t={t:.4}"),
                r.lhs,
                r.rhs + SLACK,
            ));
        }
    }
    Ok(out)
}

fn bergstrom_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for case in 0..cases {
        let v = random_signed(rng, 4);
        let m = random_signed(rng, 4);
        let n = rng.random_range(1..=BERGSTROM_MAX_N);
        let k = rng.random_range(0..=3u64.min(n - 1));
        let r = bergstrom_residual(&v, &m, n, k)?;
        out.push(CheckRecord::bound(
            case,
            format!("bergstrom n={n} k={k}"),
            r.residual,
            SLACK * r.scale,
        ));
    }
    Ok(out)
}

fn random_chain<R: Rng>(rng: &mut R) -> Result<ChainParams> {
    let alpha = rng.random_range(0.0..=STRICT_LIMIT);
    let beta = rng.random_range(0.001..=STRICT_LIMIT);
    let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let p1 = raw[0] / total;
    let p2 = raw[1] / total;
    ChainParams::new(alpha, beta, p1, p2, 1.0 - p1 - p2)
}

/// `‖Δ‖_TV` on the 10×10 grid `α, β ∈ {i/300 : i = 1..10}` and the two
/// reassembly identities at every grid point.
pub fn component_sanity_records() -> Result<Vec<CheckRecord>> {
    let one = LatticeMeasure::dirac(0);
    let u = LatticeMeasure::from_points(&[(-1, 0.5), (0, -1.0), (1, 0.5)])?;
    let mut out = Vec::new();
    let mut case = 0;
    for i in 1..=10 {
        for j in 1..=10 {
            let cp = ChainParams::uniform_start(
                i as f64 * STRICT_LIMIT / 10.0,
                j as f64 * STRICT_LIMIT / 10.0,
            )?;
            let mut tb = TruncationBudget::new(1e-14);
            let delta = build_component(&cp, ComponentName::Delta, &mut tb)?;
            out.push(CheckRecord::bound(
                case,
                format!("tv(Delta) a={} b={}", cp.alpha, cp.beta),
                tv(&delta),
                0.62,
            ));
            let l1 = build_component(&cp, ComponentName::Lambda1, &mut tb)?;
            let l2 = build_component(&cp, ComponentName::Lambda2, &mut tb)?;
            let expected = LatticeMeasure::linear_combine(
                1.0 + 2.0 * cp.alpha - 2.0 * cp.beta,
                &one,
                2.0 * cp.alpha,
                &u,
            );
            out.push(CheckRecord::bound(
                case,
                "Lambda1 + Lambda2 reassembly",
                tv(&(&(&l1 + &l2) - &expected)),
                1e-12,
            ));
            let w1 = build_component(&cp, ComponentName::W1, &mut tb)?;
            let w2 = build_component(&cp, ComponentName::W2, &mut tb)?;
            out.push(CheckRecord::bound(
                case,
                "W1 + W2 reassembly",
                tv(&(&(&w1 + &w2) - &one)),
                1e-12,
            ));
            case += 1;
        }
    }
    Ok(out)
}

fn decomposition_suite(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<CheckRecord>> {
    let mut out = component_sanity_records()?;
    let offset = out.len();
    for case in 0..cases {
        let cp = random_chain(rng)?;
        let n = rng.random_range(1..=30);
        for variant in DecompositionVariant::ALL {
            let mut tb = TruncationBudget::new(1e-14);
            let r = decomposition_residual(&cp, n, variant, &mut tb)?;
            out.push(CheckRecord::diagnostic(
                offset + case,
                format!(
                    "{variant} residual a={:.5} b={:.5} p2={:.3} n={n}",
                    cp.alpha, cp.beta, cp.p2
                ),
                r,
            ));
        }
    }
    Ok(out)
}

fn pois(lambda: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    (1..=k).fold((-lambda).exp(), |p, i| p * lambda / i as f64)
}

/// `Σ_j pois(λ1, j+k) pois(λ2, j)`, summed until the terms are negligible.
pub fn skellam_brute_force(l1: f64, l2: f64, k: i64) -> f64 {
    let start = (-k).max(0);
    let stop = start + 60 + (4.0 * (l1 + l2)) as i64;
    (start..=stop).map(|j| pois(l1, j + k) * pois(l2, j)).sum()
}

const ORACLE_RATES: [f64; 4] = [0.5, 1.0, 5.0, 10.0];

fn skellam_oracle_suite() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let mut case = 0;
    for l1 in ORACLE_RATES {
        for l2 in ORACLE_RATES {
            let p = SkellamParams::new(l1, l2)?;
            let mut worst: f64 = 0.0;
            for k in -30..=30 {
                let oracle = skellam_brute_force(l1, l2, k);
                worst = worst.max((skellam_pmf(p, k) - oracle).abs() / oracle);
            }
            out.push(CheckRecord::bound(
                case,
                format!("pmf vs convolution l1={l1} l2={l2}"),
                worst,
                1e-12,
            ));

            let mut tb = TruncationBudget::new(1e-15);
            let d = p.measure(&mut tb)?;
            let (lo, hi) = d.support().unwrap();
            let (lo, hi) = (lo.min(-60), hi.max(60));
            let gap: f64 = (lo..=hi)
                .map(|k| (skellam_pmf(p, k) - d.get(k)).abs())
                .sum();
            out.push(CheckRecord::bound(
                case,
                format!("pmf vs exponential l1={l1} l2={l2}"),
                gap,
                1e-12,
            ));
            case += 1;
        }
    }
    Ok(out)
}
