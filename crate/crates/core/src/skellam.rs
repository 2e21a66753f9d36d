//! Modified Bessel functions of the first kind and the Skellam pmf.

use crate::error::{Error, Result};
use crate::measure::{cp_exponential, LatticeMeasure, TruncationBudget};

/// Largest argument served by the power series in [`bessel_i`].
pub const BESSEL_MAX_ARG: f64 = 60.0;

/// Intensities of the two independent Poisson components; the Skellam law is
/// that of their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkellamParams {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SkellamParams {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        Ok(Self { lambda1, lambda2 })
    }

    /// The Skellam law as a lattice measure, `exp{λ1(I_1 - I) + λ2(I_{-1} - I)}`.
    pub fn measure(&self, tb: &mut TruncationBudget) -> Result<LatticeMeasure> {
        let total = self.lambda1 + self.lambda2;
        if total == 0.0 {
            return Ok(LatticeMeasure::dirac(0));
        }
        let q =
            LatticeMeasure::from_points(&[(-1, self.lambda2 / total), (1, self.lambda1 / total)])?;
        cp_exponential(total, &q, tb)
    }
}

pub(crate) fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln I_k(x)` from the power series, summed relative to its first term.
fn ln_bessel_series(k: u64, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let half = 0.5 * x;
    let q = half * half;
    let ln_first = k as f64 * half.ln() - ln_factorial(k);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut m = 0u64;
    loop {
        let ratio = q / ((m + 1) as f64 * (m + k + 1) as f64);
        term *= ratio;
        sum += term;
        m += 1;
        // past the peak the remaining terms shrink at least geometrically
        let next_ratio = q / ((m + 1) as f64 * (m + k + 1) as f64);
        if next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) <= 1e-17 * sum {
            break;
        }
    }
    ln_first + sum.ln()
}

/// `I_k(x) = Σ_m (x/2)^{2m+k} / (m! (m+k)!)` for `0 <= x <= 60`.
pub fn bessel_i(k: u64, x: f64) -> Result<f64> {
    if !(0.0..=BESSEL_MAX_ARG).contains(&x) {
        return Err(Error::OutOfRange {
            x,
            max: BESSEL_MAX_ARG,
        });
    }
    Ok(ln_bessel_series(k, x).exp())
}

fn poisson_pmf(lambda: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + k as f64 * lambda.ln() - ln_factorial(k as u64)).exp()
}

/// `P(π_{λ1} - π_{λ2} = k) = e^{-λ1-λ2} (λ1/λ2)^{k/2} I_{|k|}(2 sqrt(λ1 λ2))`.
///
/// When the Bessel argument exceeds 60 the value is read off the measure
/// built by [`cp_exponential`].
pub fn skellam_pmf(p: SkellamParams, k: i64) -> f64 {
    let (l1, l2) = (p.lambda1, p.lambda2);
    if l2 == 0.0 {
        return poisson_pmf(l1, k);
    }
    if l1 == 0.0 {
        return poisson_pmf(l2, -k);
    }
    let x = 2.0 * (l1 * l2).sqrt();
    if x <= BESSEL_MAX_ARG {
        let ln =
            -l1 - l2 + 0.5 * k as f64 * (l1.ln() - l2.ln()) + ln_bessel_series(k.unsigned_abs(), x);
        return ln.exp();
    }
    let mut tb = TruncationBudget::new(1e-16);
    p.measure(&mut tb)
        .expect("Skellam intensities are validated")
        .get(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Poisson pmf by the product recursion, independent of the log-space path
    fn pois(lambda: f64, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        (1..=k).fold((-lambda).exp(), |p, i| p * lambda / i as f64)
    }

    fn brute(l1: f64, l2: f64, k: i64) -> f64 {
        (0..400).map(|j| pois(l1, j + k) * pois(l2, j)).sum()
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(3, 0.0).unwrap(), 0.0);
        // I_0(2) = Σ 1/(m!)^2, 25 terms
        let mut oracle = 0.0;
        let mut f = 1.0;
        for m in 0..25 {
            if m > 0 {
                f *= m as f64;
            }
            oracle += 1.0 / (f * f);
        }
        assert_relative_eq!(bessel_i(0, 2.0).unwrap(), oracle, max_relative = 1e-15);
        assert_relative_eq!(oracle, 2.2795853, max_relative = 1e-7);
        assert!(matches!(bessel_i(0, 61.0), Err(Error::OutOfRange { .. })));
        assert!(bessel_i(0, -1.0).is_err());
    }

    #[test]
    fn bessel_recurrence() {
        // I_{k-1}(x) - I_{k+1}(x) = (2k/x) I_k(x)
        for x in [0.5, 3.0, 17.0, 59.0] {
            for k in 1..20u64 {
                let lhs = bessel_i(k - 1, x).unwrap() - bessel_i(k + 1, x).unwrap();
                let rhs = 2.0 * k as f64 / x * bessel_i(k, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn skellam_unit_rates_at_zero() {
        let p = SkellamParams::new(1.0, 1.0).unwrap();
        assert_relative_eq!(skellam_pmf(p, 0), brute(1.0, 1.0, 0), max_relative = 1e-14);
        assert_relative_eq!(skellam_pmf(p, 0), 0.3085083, max_relative = 1e-7);
    }

    #[test]
    fn skellam_degenerate_branches() {
        let p = SkellamParams::new(2.5, 0.0).unwrap();
        for k in -3..20 {
            assert_relative_eq!(skellam_pmf(p, k), pois(2.5, k), max_relative = 1e-13);
        }
        let p = SkellamParams::new(0.0, 2.5).unwrap();
        assert_relative_eq!(skellam_pmf(p, -4), pois(2.5, 4), max_relative = 1e-13);
        assert_eq!(skellam_pmf(p, 1), 0.0);
        let p = SkellamParams::new(0.0, 0.0).unwrap();
        assert_eq!(skellam_pmf(p, 0), 1.0);
        assert_eq!(skellam_pmf(p, 2), 0.0);
        assert!(SkellamParams::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn skellam_symmetry() {
        let p = SkellamParams::new(3.7, 3.7).unwrap();
        for k in 0..30 {
            assert_relative_eq!(skellam_pmf(p, k), skellam_pmf(p, -k), max_relative = 1e-15);
        }
    }

    #[test]
    fn skellam_large_argument_uses_exponential() {
        let p = SkellamParams::new(40.0, 35.0).unwrap();
        let mut total = 0.0;
        for k in -100..150 {
            total += skellam_pmf(p, k);
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert_relative_eq!(
            skellam_pmf(p, 5),
            brute(40.0, 35.0, 5),
            max_relative = 1e-10
        );
    }
}
