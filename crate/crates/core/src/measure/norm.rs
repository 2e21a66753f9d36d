use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::LatticeMeasure;

/// Relative tolerance on the total mass for the partial-sum norms.
pub(crate) const ZERO_MASS_TOL: f64 = 1e-9;

/// The norms computed on lattice measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `sup_k |M{k}|`
    Local,
    /// `Σ |M{k}|`
    TotalVariation,
    /// `Σ |M{(-∞, k]}|`, finite only for zero-mass measures.
    Wasserstein,
    /// `(Σ |M{k}|^r)^{1/r}`
    Lr(f64),
    /// `(Σ |M{(-∞, k]}|^r)^{1/r}`, zero-mass measures only.
    CapLr(f64),
}

impl NormKind {
    fn check(self) -> Result<()> {
        match self {
            NormKind::Lr(r) | NormKind::CapLr(r) if !(r >= 1.0 && r.is_finite()) => Err(
                Error::InvalidInput(format!("norm exponent r = {r} must be finite and >= 1")),
            ),
            _ => Ok(()),
        }
    }

    pub(crate) fn needs_zero_mass(self) -> bool {
        matches!(self, NormKind::Wasserstein | NormKind::CapLr(_))
    }

    pub(crate) fn label(self) -> &'static str {
        match self {
            NormKind::Local => "local",
            NormKind::TotalVariation => "tv",
            NormKind::Wasserstein => "wasserstein",
            NormKind::Lr(_) => "lr",
            NormKind::CapLr(_) => "caplr",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Lr(r) | NormKind::CapLr(r) => write!(f, "{}:{}", self.label(), r),
            _ => f.write_str(self.label()),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "local" | "loc" => NormKind::Local,
            "tv" => NormKind::TotalVariation,
            "wasserstein" | "w" => NormKind::Wasserstein,
            _ => {
                let (name, r) = s
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidInput(format!("unknown metric `{s}`")))?;
                let r: f64 = r
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad exponent in metric `{s}`")))?;
                match name {
                    "lr" => NormKind::Lr(r),
                    "caplr" => NormKind::CapLr(r),
                    _ => return Err(Error::InvalidInput(format!("unknown metric `{s}`"))),
                }
            }
        };
        kind.check()?;
        Ok(kind)
    }
}

fn power_sum(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r == 1.0 {
        values.map(f64::abs).sum()
    } else {
        values.map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

pub(super) fn norm(m: &LatticeMeasure, kind: NormKind) -> Result<f64> {
    kind.check()?;
    let w = m.weights();
    if kind.needs_zero_mass() {
        let tv: f64 = w.iter().map(|x| x.abs()).sum();
        let mass = m.mass();
        if mass.abs() > ZERO_MASS_TOL * tv.max(1.0) {
            return Err(Error::NonZeroMass {
                kind: kind.label(),
                mass,
            });
        }
    }
    let partial_sums = || {
        w.iter().scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
    };
    Ok(match kind {
        NormKind::Local => w.iter().fold(0.0, |acc, x| acc.max(x.abs())),
        NormKind::TotalVariation => w.iter().map(|x| x.abs()).sum(),
        NormKind::Lr(r) => power_sum(w.iter().copied(), r),
        // beyond the support the partial sums equal the (negligible) total mass
        NormKind::Wasserstein => power_sum(partial_sums(), 1.0),
        NormKind::CapLr(r) => power_sum(partial_sums(), r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Direction;
    use approx::assert_abs_diff_eq;

    fn poisson(lambda: f64, kmax: usize) -> LatticeMeasure {
        let mut w = Vec::with_capacity(kmax + 1);
        let mut p = (-lambda).exp();
        for k in 0..=kmax {
            w.push(p);
            p *= lambda / (k + 1) as f64;
        }
        LatticeMeasure::new(0, w).unwrap()
    }

    #[test]
    fn probability_tv_is_one() {
        let p = poisson(3.0, 60);
        assert_abs_diff_eq!(
            p.norm(NormKind::TotalVariation).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn poisson_local_norm() {
        // max of Poisson(4) pmf is at k = 3 and k = 4: e^{-4} 4^4 / 4!
        let expected = (-4.0f64).exp() * 256.0 / 24.0;
        let got = poisson(4.0, 80).norm(NormKind::Local).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-16);
        assert_abs_diff_eq!(got, 0.1953668, epsilon = 1e-7);
    }

    #[test]
    fn wasserstein_of_difference_is_tv() {
        let m = LatticeMeasure::new(-2, vec![0.3, -1.2, 0.05, 0.8, -0.4]).unwrap();
        let d = m.diff_conv(Direction::Plus);
        let w = d.norm(NormKind::Wasserstein).unwrap();
        assert_abs_diff_eq!(
            w,
            m.norm(NormKind::TotalVariation).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn wasserstein_needs_zero_mass() {
        let p = poisson(1.0, 20);
        assert!(matches!(
            p.norm(NormKind::Wasserstein),
            Err(Error::NonZeroMass { .. })
        ));
        assert!(p.norm(NormKind::CapLr(2.0)).is_err());
        // rounding-level defects are tolerated
        let d = LatticeMeasure::new(0, vec![0.5, -0.5 + 1e-12]).unwrap();
        assert!(d.norm(NormKind::Wasserstein).is_ok());
    }

    #[test]
    fn lr_norms() {
        let m = LatticeMeasure::new(0, vec![3.0, -4.0]).unwrap();
        assert_abs_diff_eq!(m.norm(NormKind::Lr(2.0)).unwrap(), 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.norm(NormKind::Lr(1.0)).unwrap(), 7.0, epsilon = 1e-15);
        assert!(m.norm(NormKind::Lr(0.5)).is_err());
        let z = LatticeMeasure::new(0, vec![1.0, -2.0, 1.0]).unwrap();
        // partial sums 1, -1, 0
        assert_abs_diff_eq!(
            z.norm(NormKind::CapLr(2.0)).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            z.norm(NormKind::CapLr(1.0)).unwrap(),
            z.norm(NormKind::Wasserstein).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_measure_norms_vanish() {
        let z = LatticeMeasure::zero();
        for kind in [
            NormKind::Local,
            NormKind::TotalVariation,
            NormKind::Wasserstein,
            NormKind::Lr(2.0),
            NormKind::CapLr(3.0),
        ] {
            assert_eq!(z.norm(kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn parse_and_display() {
        for s in ["tv", "local", "wasserstein", "lr:1.5", "caplr:3"] {
            let k: NormKind = s.parse().unwrap();
            assert_eq!(k.to_string().parse::<NormKind>().unwrap(), k);
        }
        assert!("lr:0.9".parse::<NormKind>().is_err());
        assert!("sup".parse::<NormKind>().is_err());
    }
}
