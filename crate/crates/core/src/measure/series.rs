//! Truncated series of measures: compound Poisson exponentials, geometric
//! (Neumann) series and the binomial series with exponent ±1/2.
//!
//! Every routine draws one allowance from a [`TruncationBudget`] and records
//! the ℓ₁ mass it discarded, so that experiment reports can carry the total.

use crate::error::{Error, Result};

use super::{LatticeMeasure, NormKind};

/// Per-operation allowance of discarded ℓ₁ mass plus a running total.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationBudget {
    budget: f64,
    accumulated: f64,
    granted: f64,
}

impl TruncationBudget {
    /// Panics if `budget` is negative or not finite.
    pub fn new(budget: f64) -> Self {
        assert!(
            budget >= 0.0 && budget.is_finite(),
            "truncation budget must be finite and >= 0, got {budget}"
        );
        Self {
            budget,
            accumulated: 0.0,
            granted: 0.0,
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Discarded mass recorded so far.
    pub fn accumulated(&self) -> f64 {
        self.accumulated
    }

    /// Sum of the allowances handed out so far.
    pub fn granted(&self) -> f64 {
        self.granted
    }

    fn grant(&mut self) -> f64 {
        self.granted += self.budget;
        self.budget
    }

    fn record(&mut self, discarded: f64) {
        self.accumulated += discarded;
    }
}

impl Default for TruncationBudget {
    fn default() -> Self {
        Self::new(1e-12)
    }
}

/// Drops end entries, smallest magnitude first, while the discarded ℓ₁ mass
/// stays within `allowance`. Returns the truncated measure and the discarded
/// mass.
pub(crate) fn truncate_within(m: &LatticeMeasure, allowance: f64) -> (LatticeMeasure, f64) {
    let w = m.weights();
    if w.is_empty() || allowance <= 0.0 {
        return (m.clone(), 0.0);
    }
    let (mut lo, mut hi) = (0usize, w.len());
    let mut discarded = 0.0;
    while lo < hi {
        let (left, right) = (w[lo].abs(), w[hi - 1].abs());
        let take_left = left <= right;
        let cost = if take_left { left } else { right };
        if discarded + cost > allowance {
            break;
        }
        discarded += cost;
        if take_left {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    if lo == 0 && hi == w.len() {
        return (m.clone(), 0.0);
    }
    (
        LatticeMeasure::from_raw(m.offset() + lo as i64, w[lo..hi].to_vec()),
        discarded,
    )
}

/// Removes small tail entries so that the discarded ℓ₁ mass is at most
/// `tb.budget()`.
pub fn truncate(m: &LatticeMeasure, tb: &mut TruncationBudget) -> LatticeMeasure {
    let allowance = tb.grant();
    let (out, discarded) = truncate_within(m, allowance);
    tb.record(discarded);
    out
}

/// `exp{t (Q - I)}` for a nonnegative measure `Q` and `t >= 0`.
///
/// The argument is halved `s` times until `t / 2^s <= 1`; the base term is
/// the Poisson mixture `e^{-τ} Σ τ^k Q^{*k} / k!` and the result is obtained
/// by squaring. All intermediate measures are nonnegative, so the total
/// variation error of the result equals its mass deficit, which is what the
/// budget bounds.
pub fn cp_exponential(
    t: f64,
    q: &LatticeMeasure,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "exponent scale t = {t} must be finite and >= 0"
        )));
    }
    if !q.is_nonnegative() {
        return Err(Error::InvalidInput(
            "compounding measure has a negative weight".into(),
        ));
    }
    let allowance = tb.grant();
    if t == 0.0 {
        return Ok(LatticeMeasure::dirac(0));
    }

    let mut squarings = 0u32;
    while t / 2f64.powi(squarings as i32) > 1.0 {
        squarings += 1;
    }
    let tau = t / 2f64.powi(squarings as i32);
    let m = q.mass();

    // amp[i]: growth of a deficit made at level i through the remaining squarings
    let level_mass = |i: u32| (2f64.powi(i as i32) * tau * (m - 1.0)).exp();
    let mut amp = vec![1.0; squarings as usize + 1];
    for i in (0..squarings as usize).rev() {
        amp[i] = amp[i + 1] * 2.0 * level_mass(i as u32);
    }
    let share = allowance / (squarings as f64 + 1.0);

    let (base, tail) = poisson_mixture(tau, q, share / (2.0 * amp[0]))?;
    let (mut p, cut) = truncate_within(&base, share / (2.0 * amp[0]));
    let mut discarded = (tail + cut) * amp[0];
    for &a in &amp[1..] {
        let sq = p.convolve(&p);
        let (next, cut) = truncate_within(&sq, share / a);
        discarded += cut * a;
        p = next;
    }
    tb.record(discarded);
    Ok(p)
}

/// `e^{-τ} Σ_{k<=K} τ^k Q^{*k} / k!` with `K` chosen so the omitted mass is
/// at most `tail_allowance`. Returns the partial sum and the omitted-mass
/// bound.
fn poisson_mixture(
    tau: f64,
    q: &LatticeMeasure,
    tail_allowance: f64,
) -> Result<(LatticeMeasure, f64)> {
    let scale = (-tau).exp();
    let rate = tau * q.mass();
    let mut sum = LatticeMeasure::dirac(0);
    let mut term = LatticeMeasure::dirac(0);
    // coefficient of the next term, τ^k m^k / k! (mass of τ^k Q^{*k} / k!)
    let mut next_mass = rate;
    let mut k = 0u64;
    loop {
        let remaining = k as f64 + 2.0;
        if rate < remaining {
            let tail = scale * next_mass / (1.0 - rate / remaining);
            if tail <= tail_allowance || next_mass == 0.0 {
                return Ok((sum.scale(scale), tail));
            }
        }
        if k > 10_000 {
            return Err(Error::InvalidInput(format!(
                "exponential series did not converge for rate {rate}"
            )));
        }
        k += 1;
        term = term.convolve(q).scale(tau / k as f64);
        sum = &sum + &term;
        next_mass *= rate / (k + 1) as f64;
    }
}

fn series_norm(m: &LatticeMeasure, block: &str) -> Result<f64> {
    let q = m.norm(NormKind::TotalVariation)?;
    if q >= 1.0 {
        return Err(Error::DivergentSeries {
            block: block.to_string(),
            norm: q,
        });
    }
    Ok(q)
}

/// Smallest `J` with `q^{J+1} / (1 - q) <= allowance`.
fn terms_needed(q: f64, allowance: f64) -> Result<usize> {
    if q == 0.0 {
        return Ok(0);
    }
    if allowance <= 0.0 {
        return Err(Error::InvalidInput(
            "an infinite series needs a positive truncation budget".into(),
        ));
    }
    let mut j = 0usize;
    let mut tail = q / (1.0 - q);
    while tail > allowance {
        j += 1;
        tail *= q;
    }
    Ok(j)
}

/// Σ_{j<=J} c_j M^{*j} for coefficients with |c_j| <= 1, with the tail and
/// the truncation of the powers kept within `allowance`.
fn power_series(
    m: &LatticeMeasure,
    q: f64,
    coeff: impl Fn(usize) -> f64,
    allowance: f64,
) -> Result<(LatticeMeasure, f64)> {
    let terms = terms_needed(q, allowance / 2.0)?;
    let tail = if q == 0.0 {
        0.0
    } else {
        q.powi(terms as i32 + 1) / (1.0 - q)
    };
    // a deficit in M^{*j} reaches later powers damped by q per step
    let per_power = allowance / 2.0 * (1.0 - q) / (terms.max(1) as f64);
    let mut discarded = tail;
    let mut sum = LatticeMeasure::dirac(0).scale(coeff(0));
    let mut power = LatticeMeasure::dirac(0);
    for j in 1..=terms {
        let (p, cut) = truncate_within(&power.convolve(m), per_power);
        discarded += cut / (1.0 - q);
        power = p;
        sum = LatticeMeasure::linear_combine(1.0, &sum, coeff(j), &power);
    }
    Ok((sum, discarded))
}

/// The geometric series `Σ_{j>=0} M^{*j}` for `‖M‖_TV < 1`.
pub fn neumann_series(m: &LatticeMeasure, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
    let q = series_norm(m, "neumann")?;
    let allowance = tb.grant();
    let (sum, discarded) = power_series(m, q, |_| 1.0, allowance)?;
    tb.record(discarded);
    Ok(sum)
}

/// Exponent of the binomial series `Σ binom(s, j) M^{*j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfExponent {
    /// `s = +1/2`, the square root of `I + M`.
    Plus,
    /// `s = -1/2`, the inverse square root of `I + M`.
    Minus,
}

impl HalfExponent {
    fn value(self) -> f64 {
        match self {
            HalfExponent::Plus => 0.5,
            HalfExponent::Minus => -0.5,
        }
    }
}

fn binomial_coefficients(s: f64, count: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(count);
    let mut cur = 1.0;
    for j in 0..count {
        c.push(cur);
        cur *= (s - j as f64) / (j as f64 + 1.0);
    }
    c
}

/// `Σ_{j>=0} binom(s, j) M^{*j}` for `s = ±1/2` and `‖M‖_TV < 1`.
pub fn binomial_half_series(
    s: HalfExponent,
    m: &LatticeMeasure,
    tb: &mut TruncationBudget,
) -> Result<LatticeMeasure> {
    let q = series_norm(m, "binomial")?;
    let allowance = tb.grant();
    let terms = terms_needed(q, allowance / 2.0)?;
    let coeffs = binomial_coefficients(s.value(), terms + 1);
    let (sum, discarded) = power_series(m, q, |j| coeffs[j], allowance)?;
    tb.record(discarded);
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tv(m: &LatticeMeasure) -> f64 {
        m.norm(NormKind::TotalVariation).unwrap()
    }

    fn poisson_pmf(lambda: f64, k: usize) -> f64 {
        (1..=k).fold((-lambda).exp(), |p, i| p * lambda / i as f64)
    }

    #[test]
    fn truncate_zero_budget_is_identity() {
        let m = LatticeMeasure::new(0, vec![1e-20, 0.5, 1e-30]).unwrap();
        let mut tb = TruncationBudget::new(0.0);
        assert_eq!(truncate(&m, &mut tb), m);
        assert_eq!(tb.accumulated(), 0.0);
    }

    #[test]
    fn truncate_poisson_keeps_minimal_head() {
        let w: Vec<f64> = (0..40).map(|k| poisson_pmf(1.0, k)).collect();
        let p = LatticeMeasure::new(0, w).unwrap();
        let mut tb = TruncationBudget::new(1e-3);
        let t = truncate(&p, &mut tb);
        let (lo, hi) = t.support().unwrap();
        assert_eq!(lo, 0);
        let tail = |from: usize| (from..200).map(|k| poisson_pmf(1.0, k)).sum::<f64>();
        // the tail beyond hi fits, the tail including hi does not
        assert!(tail(hi as usize + 1) <= 1e-3);
        assert!(tail(hi as usize) > 1e-3);
        assert_eq!(hi, 5);
        assert!(tv(&(&p - &t)) <= 1e-3);
        assert_abs_diff_eq!(tb.accumulated(), tv(&(&p - &t)), epsilon = 1e-15);
    }

    #[test]
    fn cp_exponential_trivial_cases() {
        let q = LatticeMeasure::new(-1, vec![0.25, 0.5, 0.25]).unwrap();
        let mut tb = TruncationBudget::default();
        assert_eq!(
            cp_exponential(0.0, &q, &mut tb).unwrap(),
            LatticeMeasure::dirac(0)
        );
        assert!(cp_exponential(-1.0, &q, &mut tb).is_err());
        let signed = LatticeMeasure::new(0, vec![0.5, -0.1]).unwrap();
        assert!(cp_exponential(1.0, &signed, &mut tb).is_err());
        // zero compounding measure: exp{-t I} = e^{-t} I
        let e = cp_exponential(2.0, &LatticeMeasure::zero(), &mut tb).unwrap();
        assert_abs_diff_eq!(e.get(0), (-2.0f64).exp(), epsilon = 1e-16);
    }

    #[test]
    fn cp_exponential_is_poisson() {
        let mut tb = TruncationBudget::new(1e-15);
        for lambda in [0.3, 1.0, 7.5, 40.0] {
            let p = cp_exponential(lambda, &LatticeMeasure::dirac(1), &mut tb).unwrap();
            for k in 0..60usize {
                assert_abs_diff_eq!(p.get(k as i64), poisson_pmf(lambda, k), epsilon = 1e-14);
            }
            assert!((1.0 - p.mass()).abs() <= 1e-13);
        }
        let p1 = cp_exponential(1.0, &LatticeMeasure::dirac(1), &mut tb).unwrap();
        assert_abs_diff_eq!(p1.get(0), 0.3678794, epsilon = 1e-7);
        assert!(tb.accumulated() <= tb.granted());
    }

    #[test]
    fn cp_exponential_is_additive_in_t() {
        let f = LatticeMeasure::new(-2, vec![0.1, 0.2, 0.0, 0.3, 0.4]).unwrap();
        let mut tb = TruncationBudget::new(1e-15);
        for (u1, u2) in [(0.5, 0.5), (0.3, 2.2), (5.0, 11.0)] {
            let a = cp_exponential(u1, &f, &mut tb).unwrap();
            let b = cp_exponential(u2, &f, &mut tb).unwrap();
            let c = cp_exponential(u1 + u2, &f, &mut tb).unwrap();
            assert!(tv(&(&a.convolve(&b) - &c)) <= 1e-12, "u1={u1} u2={u2}");
        }
    }

    #[test]
    fn cp_exponential_mass_deficit_within_budget() {
        let q = LatticeMeasure::new(-3, vec![0.1, 0.2, 0.1, 0.0, 0.2, 0.2, 0.2]).unwrap();
        for budget in [1e-6, 1e-9, 1e-12] {
            let mut tb = TruncationBudget::new(budget);
            let e = cp_exponential(150.0, &q, &mut tb).unwrap();
            assert!(e.is_nonnegative());
            assert!(1.0 - e.mass() <= budget + 1e-13);
            assert!(tb.accumulated() <= budget);
        }
    }

    #[test]
    fn neumann_examples() {
        let mut tb = TruncationBudget::default();
        let z = neumann_series(&LatticeMeasure::zero(), &mut tb).unwrap();
        assert_eq!(z, LatticeMeasure::dirac(0));
        let s = neumann_series(&LatticeMeasure::dirac(0).scale(0.3), &mut tb).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s.get(0), 1.0 / 0.7, epsilon = 1e-11);
        let (alpha, beta) = (0.03, 0.02);
        let l = LatticeMeasure::new(-1, vec![0.5, 0.0, 0.5]).unwrap();
        let s = neumann_series(&l.scale(2.0 * alpha / (1.0 + 2.0 * beta)), &mut tb).unwrap();
        assert_abs_diff_eq!(s.mass(), 1.0 / (1.0 - 0.06 / 1.04), epsilon = 1e-12);
        assert!(matches!(
            neumann_series(&l, &mut tb),
            Err(Error::DivergentSeries { .. })
        ));
    }

    #[test]
    fn neumann_inverts_i_minus_m() {
        let m = LatticeMeasure::new(-2, vec![0.1, -0.2, 0.05, 0.15, -0.1]).unwrap();
        let mut tb = TruncationBudget::new(1e-14);
        let s = neumann_series(&m, &mut tb).unwrap();
        let i_minus_m = &LatticeMeasure::dirac(0) - &m;
        let r = &i_minus_m.convolve(&s) - &LatticeMeasure::dirac(0);
        assert!(tv(&r) <= 2.0 * 1e-14);
    }

    #[test]
    fn binomial_half_examples() {
        let mut tb = TruncationBudget::default();
        let z = binomial_half_series(HalfExponent::Plus, &LatticeMeasure::zero(), &mut tb).unwrap();
        assert_eq!(z, LatticeMeasure::dirac(0));
        let s = binomial_half_series(
            HalfExponent::Plus,
            &LatticeMeasure::dirac(0).scale(0.4),
            &mut tb,
        )
        .unwrap();
        assert_abs_diff_eq!(s.get(0), 1.4f64.sqrt(), epsilon = 1e-12);
        let s = binomial_half_series(
            HalfExponent::Minus,
            &LatticeMeasure::dirac(0).scale(-0.5),
            &mut tb,
        )
        .unwrap();
        assert_abs_diff_eq!(s.get(0), 2f64.sqrt(), epsilon = 1e-12);
        assert!(
            binomial_half_series(HalfExponent::Minus, &LatticeMeasure::dirac(3), &mut tb).is_err()
        );
    }

    #[test]
    fn binomial_coefficients_match_closed_form() {
        let c = binomial_coefficients(0.5, 5);
        let expected = [1.0, 0.5, -0.125, 0.0625, -0.0390625];
        for (a, b) in c.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-16);
        }
        let c = binomial_coefficients(-0.5, 4);
        for (a, b) in c.iter().zip([1.0, -0.5, 0.375, -0.3125]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-16);
        }
    }
}
