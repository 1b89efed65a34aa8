//! m-estimates, Bayes posterior-mode estimates, and the two-point shifted
//! estimator family.
//!
//! All three estimators reduce to the argmax of a decision vector over the
//! parameter points, with ties broken to the smallest index so the estimator
//! is a deterministic function of the data:
//!
//! * m-estimate — mean log objective Q_n(θ) = (1/n) Σ ln q(yᵢ; θ);
//! * Bayes       — penalized objective Q_n(θ) + ln π(θ)/n, the posterior mode;
//! * shifted(k)  — two-point rule that hands the second point a handicap k:
//!   the first point wins iff its mean log-likelihood advantage is ≥ −k.
//!   k = 0 reproduces the m-estimate exactly, and positive k enlarges the
//!   first point's acceptance region.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, Observation, ParamIndex, Prior};
use crate::numeric::log_sum_exp;

/// Outcome of an estimation: the chosen index, the decision vector that was
/// maximized, the normalized log posterior when a prior was involved, and
/// whether the maximum was tied.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationResult {
    pub chosen_index: ParamIndex,
    /// Decision vector, one entry per parameter point (mean log scale).
    pub objective_values: Vec<f64>,
    /// ln posterior weights, normalized to sum to one when exponentiated;
    /// present only for Bayes estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior_log_weights: Option<Vec<f64>>,
    pub tie_occurred: bool,
}

pub(crate) fn argmax_smallest(values: &[f64]) -> (ParamIndex, bool) {
    let mut best = 0usize;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    let tie = values
        .iter()
        .enumerate()
        .any(|(i, v)| i != best && *v == values[best]);
    (best, tie)
}

/// Mean log objective per parameter point.
fn mean_log_objectives(model: &Model, data: &[Observation]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.len() as f64;
    let mut sums = vec![0.0f64; model.space().len()];
    for y in data {
        for (i, s) in sums.iter_mut().enumerate() {
            *s += model.log_density(i, y)?;
        }
    }
    for s in &mut sums {
        *s /= n;
    }
    Ok(sums)
}

/// Maximize the sample-mean log objective over the parameter space.
pub fn m_estimate(model: &Model, data: &[Observation]) -> Result<EstimationResult> {
    let objective_values = mean_log_objectives(model, data)?;
    let (chosen_index, tie_occurred) = argmax_smallest(&objective_values);
    Ok(EstimationResult {
        chosen_index,
        objective_values,
        posterior_log_weights: None,
        tie_occurred,
    })
}

/// Posterior-mode estimate: maximize Q_n(θ) + ln π(θ)/n. With a uniform
/// prior the chosen index coincides with [`m_estimate`] on every dataset.
pub fn bayes_estimate(model: &Model, data: &[Observation], prior: &Prior) -> Result<EstimationResult> {
    if prior.len() != model.space().len() {
        return Err(Error::InvalidPrior(format!(
            "prior has {} weights for {} parameter points",
            prior.len(),
            model.space().len()
        )));
    }
    let n = data.len() as f64;
    let raw = mean_log_objectives(model, data)?;
    let log_prior = prior.log_weights();
    let objective_values: Vec<f64> = raw
        .iter()
        .zip(&log_prior)
        .map(|(q, lp)| q + lp / n)
        .collect();
    let (chosen_index, tie_occurred) = argmax_smallest(&objective_values);

    // ln P{θ_k | Y} up to normalization is n * (Q_n + ln π / n).
    let unnorm: Vec<f64> = objective_values.iter().map(|v| v * n).collect();
    let log_z = log_sum_exp(&unnorm);
    let posterior_log_weights = unnorm.iter().map(|v| v - log_z).collect();

    Ok(EstimationResult {
        chosen_index,
        objective_values,
        posterior_log_weights: Some(posterior_log_weights),
        tie_occurred,
    })
}

/// Two-point shifted estimator: with mean log-likelihoods (L̄₀, L̄₁), the
/// decision vector is (L̄₀ + k, L̄₁), so the first point is chosen iff
/// L̄₀ − L̄₁ ≥ −k. Requires J = 1.
pub fn shifted_estimate(model: &Model, data: &[Observation], k: f64) -> Result<EstimationResult> {
    if model.space().alternatives() != 1 {
        return Err(Error::InvalidArgument(format!(
            "shifted estimator needs a two-point space, got {} points",
            model.space().len()
        )));
    }
    let raw = mean_log_objectives(model, data)?;
    let objective_values = vec![raw[0] + k, raw[1]];
    let (chosen_index, tie_occurred) = argmax_smallest(&objective_values);
    Ok(EstimationResult {
        chosen_index,
        objective_values,
        posterior_log_weights: None,
        tie_occurred,
    })
}
