//! Parameters of the symmetric three-state chain.
//!
//! States `a1, a2, a3` carry values `-1, 0, 1`. From `a1` or `a3` the chain
//! moves to each outer state with probability `alpha` and to `a2` with
//! `1 - 2 alpha`; from `a2` it moves to each outer state with probability
//! `beta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit for `alpha` and `beta` in strict mode.
pub const STRICT_LIMIT: f64 = 1.0 / 30.0;

const START_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub alpha: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Set when the parameters were admitted outside `[0, 1/30]`.
    #[serde(default)]
    pub exploratory: bool,
}

impl ChainParams {
    /// Strict mode: `0 <= alpha <= 1/30` and `0 < beta <= 1/30`.
    pub fn new(alpha: f64, beta: f64, p1: f64, p2: f64, p3: f64) -> Result<Self> {
        check_start(p1, p2, p3)?;
        if !(0.0..=STRICT_LIMIT).contains(&alpha) {
            return Err(Error::Constraint(format!(
                "alpha = {alpha} violates 0 ≤ α ≤ 1/30"
            )));
        }
        if !(beta > 0.0 && beta <= STRICT_LIMIT) {
            return Err(Error::Constraint(format!(
                "beta = {beta} violates 0 < β ≤ 1/30"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            p1,
            p2,
            p3,
            exploratory: false,
        })
    }

    /// Exploratory mode: `0 <= alpha < 1/2` and `0 < beta < 1/2`. The returned
    /// value reports a warning when it lies outside the strict region.
    pub fn exploratory(alpha: f64, beta: f64, p1: f64, p2: f64, p3: f64) -> Result<Self> {
        check_start(p1, p2, p3)?;
        if !(0.0..0.5).contains(&alpha) {
            return Err(Error::Constraint(format!(
                "alpha = {alpha} outside [0, 1/2)"
            )));
        }
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::Constraint(format!("beta = {beta} outside (0, 1/2)")));
        }
        let strict = Self::new(alpha, beta, p1, p2, p3).is_ok();
        Ok(Self {
            alpha,
            beta,
            p1,
            p2,
            p3,
            exploratory: !strict,
        })
    }

    /// Strict parameters with the uniform initial distribution.
    pub fn uniform_start(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    }

    pub fn warning(&self) -> Option<String> {
        self.exploratory.then(|| {
            format!(
                "alpha = {}, beta = {} lie outside 0 ≤ α, β ≤ 1/30; approximation bounds do not apply",
                self.alpha, self.beta
            )
        })
    }

    /// `1 - 2 alpha + 2 beta`, the denominator shared by most blocks.
    pub fn denom(&self) -> f64 {
        1.0 - 2.0 * self.alpha + 2.0 * self.beta
    }

    /// Intensity `beta / (1 - 2 alpha + 2 beta)` of each Poisson component of
    /// the one-step Skellam law.
    pub fn skellam_lambda(&self) -> f64 {
        self.beta / self.denom()
    }

    /// Start distribution as `[p1, p2, p3]`.
    pub fn start(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    /// Row-stochastic transition matrix over `[a1, a2, a3]`.
    pub fn transition(&self) -> [[f64; 3]; 3] {
        let (a, b) = (self.alpha, self.beta);
        [
            [a, 1.0 - 2.0 * a, a],
            [b, 1.0 - 2.0 * b, b],
            [a, 1.0 - 2.0 * a, a],
        ]
    }
}

fn check_start(p1: f64, p2: f64, p3: f64) -> Result<()> {
    if [p1, p2, p3].iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::Constraint(format!(
            "initial probabilities ({p1}, {p2}, {p3}) must be >= 0"
        )));
    }
    if (p1 + p2 + p3 - 1.0).abs() > START_TOL {
        return Err(Error::Constraint(format!(
            "initial probabilities sum to {}, not 1",
            p1 + p2 + p3
        )));
    }
    Ok(())
}
