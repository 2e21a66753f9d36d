//! Signed measures on the integer lattice, Skellam and compound Poisson
//! approximants for sums of a symmetric three-state Markov chain, exact
//! distributions of those sums, and a harness that measures approximation
//! errors against their bound shapes.

pub mod bounds;
pub mod chain;
pub mod checks;
pub mod components;
pub mod error;
pub mod markov;
pub mod measure;
pub mod skellam;

pub use bounds::{
    bound_shape, distance, rate_fit, sweep, RateFit, SweepOptions, SweepRow, TheoremId,
};
pub use chain::ChainParams;
pub use checks::{
    bergstrom_residual, run_suite, smoothing_check, CheckSuite, SmoothingKind, SuiteReport,
};
pub use components::{
    build_component, build_component_with, expansion_approx, skellam_power, theorem1_approx,
    ComponentName, KVariant,
};
pub use error::{Error, Result};
pub use markov::{
    decomposition_residual, exact_distribution, exact_distributions, monte_carlo_distribution,
    DecompositionVariant,
};
pub use measure::{
    binomial_half_series, cp_exponential, neumann_series, truncate, Direction, HalfExponent,
    LatticeMeasure, NormKind, TruncationBudget,
};
pub use skellam::{bessel_i, skellam_pmf, SkellamParams};
