//! Statistical estimation when the parameter space is a finite set.
//!
//! The crate covers the full pipeline for models indexed by a finite set
//! Θ = {θ₀, …, θ_J}:
//!
//! * [`model`] — parameter spaces, model families (Gaussian with known
//!   variance, Poisson, Bernoulli-power, categorical, external callbacks),
//!   priors, sampling and support enumeration;
//! * [`estimator`] — m-estimates, posterior-mode Bayes estimates and the
//!   two-point shifted estimator family;
//! * [`llr`] — log-likelihood-ratio vector processes, their log-moment
//!   generating functions, Cramér transforms and the Hellinger-transform
//!   identity;
//! * [`rates`] — large-deviation error exponents with dual certificates and
//!   dominating points, pairwise KL divergence and Chernoff information;
//! * [`asymptotics`] — n-indexed approximations: crude `e^{-nI}`, the exact
//!   two-point expansion and the leading-order saddlepoint;
//! * [`bounds`] — Chapman–Robbins and minimax information inequalities plus
//!   efficiency verdicts measured from probability curves;
//! * [`verify`] — ground-truth engines: exact enumeration over multinomial
//!   count vectors, seeded Monte Carlo, Gaussian closed forms and risk
//!   tables.
//!
//! All probability arithmetic is carried out in the log domain; sampling is
//! deterministic in an explicit `(master seed, stream)` pair so results are
//! reproducible across runs and thread counts.

pub mod asymptotics;
pub mod bounds;
pub mod error;
pub mod estimator;
pub mod llr;
pub mod model;
pub mod numeric;
pub mod optim;
pub mod rates;
pub mod rng;
#[cfg(test)]
pub(crate) mod testutil;
pub mod verify;

pub use error::{Error, Result};
pub use estimator::{bayes_estimate, m_estimate, shifted_estimate, EstimationResult};
pub use llr::{Backend, ExtReal, LlrSystem, TruthSpec};
pub use model::{
    Family, Model, ModelSpec, Observation, ParamIndex, ParamPoint, ParameterSpace, Prior,
    SeedState,
};
pub use rates::{alternative_rate, total_error_rate, AlternativeRate, RateReport};
pub use verify::EstimatorSpec;
