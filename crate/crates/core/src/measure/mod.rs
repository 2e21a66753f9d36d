//! Finite signed measures on the integer lattice.
//!
//! A [`LatticeMeasure`] stores a dense run of weights starting at an integer
//! offset. Every constructor and every operation returns the canonical form:
//! the first and last stored weights are nonzero, and the zero measure has no
//! weights at all.

mod norm;
mod series;

pub use norm::NormKind;
pub use series::{
    binomial_half_series, cp_exponential, neumann_series, truncate, HalfExponent, TruncationBudget,
};

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite signed measure on ℤ: `weights[i]` is the weight of the point
/// `offset + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct LatticeMeasure {
    offset: i64,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    offset: i64,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for LatticeMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        LatticeMeasure::new(raw.offset, raw.weights)
    }
}

/// Which neighbour a difference operator looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(I_1 - I) * M`, i.e. `M{k-1} - M{k}`.
    Plus,
    /// `(I_{-1} - I) * M`, i.e. `M{k+1} - M{k}`.
    Minus,
}

impl LatticeMeasure {
    /// Builds a measure from an offset and weights, rejecting non-finite
    /// weights.
    pub fn new(offset: i64, weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite weight {w}")));
        }
        Ok(Self::from_raw(offset, weights))
    }

    /// Canonicalizes without validation. Callers guarantee finiteness.
    pub(crate) fn from_raw(offset: i64, mut weights: Vec<f64>) -> Self {
        let Some(first) = weights.iter().position(|&w| w != 0.0) else {
            return Self::zero();
        };
        let last = weights.iter().rposition(|&w| w != 0.0).unwrap();
        weights.truncate(last + 1);
        weights.drain(..first);
        Self {
            offset: offset + first as i64,
            weights,
        }
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            weights: Vec::new(),
        }
    }

    /// The point mass `I_a`.
    pub fn dirac(a: i64) -> Self {
        Self {
            offset: a,
            weights: vec![1.0],
        }
    }

    /// Builds a measure from `(point, weight)` pairs; repeated points add up.
    pub fn from_points(points: &[(i64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Ok(Self::zero());
        }
        let lo = points.iter().map(|p| p.0).min().unwrap();
        let hi = points.iter().map(|p| p.0).max().unwrap();
        let mut weights = vec![0.0; (hi - lo + 1) as usize];
        for &(k, w) in points {
            weights[(k - lo) as usize] += w;
        }
        Self::new(lo, weights)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of stored weights.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Smallest and largest point of the stored support.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.offset, self.offset + self.weights.len() as i64 - 1))
        }
    }

    /// The weight `M{k}`.
    pub fn get(&self, k: i64) -> f64 {
        let i = k - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.weights.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Iterates over `(point, weight)` pairs of the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.offset + i as i64, w))
    }

    /// Total mass `M{ℤ}`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.offset, self.weights.iter().map(|w| c * w).collect())
    }

    /// Translation by `a`, i.e. convolution with `I_a`.
    pub fn shift(&self, a: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            offset: self.offset + a,
            weights: self.weights.clone(),
        }
    }

    /// The reflection `k -> -k`.
    pub fn reflect(&self) -> Self {
        match self.support() {
            None => Self::zero(),
            Some((_, hi)) => Self {
                offset: -hi,
                weights: self.weights.iter().rev().copied().collect(),
            },
        }
    }

    /// Pointwise `c1 * m + c2 * v`.
    pub fn linear_combine(c1: f64, m: &Self, c2: f64, v: &Self) -> Self {
        let (lo, hi) = match (m.support(), v.support()) {
            (None, None) => return Self::zero(),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        };
        let mut weights = vec![0.0; (hi - lo + 1) as usize];
        for (k, w) in m.iter() {
            weights[(k - lo) as usize] += c1 * w;
        }
        for (k, w) in v.iter() {
            weights[(k - lo) as usize] += c2 * w;
        }
        Self::from_raw(lo, weights)
    }

    /// Exact discrete convolution `M * V`.
    pub fn convolve(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (a, b) = if self.len() >= other.len() {
            (&self.weights, &other.weights)
        } else {
            (&other.weights, &self.weights)
        };
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (j, &bj) in b.iter().enumerate() {
            if bj == 0.0 {
                continue;
            }
            for (o, &ai) in out[j..j + a.len()].iter_mut().zip(a) {
                *o += ai * bj;
            }
        }
        Self::from_raw(self.offset + other.offset, out)
    }

    /// The convolution power `M^{*k}` by repeated squaring; `M^{*0} = I`.
    pub fn convolve_power(&self, k: u64) -> Self {
        let mut result = Self::dirac(0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.convolve(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.convolve(&base);
            }
        }
        result
    }

    /// `(I_{±1} - I) * M` computed by a shifted subtraction.
    pub fn diff_conv(&self, direction: Direction) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let n = self.len();
        let mut out = vec![0.0; n + 1];
        match direction {
            Direction::Plus => {
                // out[i] is the weight at offset + i
                for (i, &w) in self.weights.iter().enumerate() {
                    out[i] -= w;
                    out[i + 1] += w;
                }
                Self::from_raw(self.offset, out)
            }
            Direction::Minus => {
                // out[i] is the weight at offset - 1 + i
                for (i, &w) in self.weights.iter().enumerate() {
                    out[i] += w;
                    out[i + 1] -= w;
                }
                Self::from_raw(self.offset - 1, out)
            }
        }
    }

    /// The Fourier transform `Σ e^{itk} M{k}`.
    pub fn ch_fn(&self, t: f64) -> Complex64 {
        self.iter()
            .map(|(k, w)| Complex64::from_polar(w, t * k as f64))
            .sum()
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        norm::norm(self, kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

impl Add for &LatticeMeasure {
    type Output = LatticeMeasure;

    fn add(self, rhs: Self) -> LatticeMeasure {
        LatticeMeasure::linear_combine(1.0, self, 1.0, rhs)
    }
}

impl Sub for &LatticeMeasure {
    type Output = LatticeMeasure;

    fn sub(self, rhs: Self) -> LatticeMeasure {
        LatticeMeasure::linear_combine(1.0, self, -1.0, rhs)
    }
}

impl Neg for &LatticeMeasure {
    type Output = LatticeMeasure;

    fn neg(self) -> LatticeMeasure {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &LatticeMeasure {
    type Output = LatticeMeasure;

    fn mul(self, c: f64) -> LatticeMeasure {
        self.scale(c)
    }
}

/// Convolution.
impl Mul for &LatticeMeasure {
    type Output = LatticeMeasure;

    fn mul(self, rhs: Self) -> LatticeMeasure {
        self.convolve(rhs)
    }
}
