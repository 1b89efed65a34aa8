//! Ground-truth engines: exact enumeration of the estimator's law, seeded
//! Monte Carlo, Gaussian closed forms, and risk tables.
//!
//! Enumeration iterates multinomial count vectors instead of raw symbol
//! sequences — the decision vector of every shipped estimator is a linear
//! function of the per-symbol counts, so a dataset's estimate depends on the
//! data only through its counts. That collapses the 2²⁰ sequences of a
//! two-symbol n = 20 problem into 21 count vectors.
//!
//! Monte Carlo replicates are keyed by `(master seed, replicate index)`
//! streams and reduced with exact integer counts, so a simulation is
//! bit-identical across runs and worker counts.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimator::{argmax_smallest, bayes_estimate, m_estimate, shifted_estimate};
use crate::model::{Model, ParamIndex, ParameterSpace, Prior, SeedState};
use crate::numeric::{log_sum_exp, norm_cdf, wilson_interval};

/// Which estimator a verification run studies.
#[derive(Debug, Clone)]
pub enum EstimatorSpec {
    Mle,
    Bayes(Prior),
    Shifted(f64),
}

impl EstimatorSpec {
    pub fn name(&self) -> String {
        match self {
            EstimatorSpec::Mle => "mle".into(),
            EstimatorSpec::Bayes(_) => "bayes".into(),
            EstimatorSpec::Shifted(k) => format!("shifted({k})"),
        }
    }

    fn validate(&self, model: &Model) -> Result<()> {
        match self {
            EstimatorSpec::Mle => Ok(()),
            EstimatorSpec::Bayes(prior) => {
                if prior.len() != model.space().len() {
                    Err(Error::InvalidPrior(format!(
                        "prior has {} weights for {} parameter points",
                        prior.len(),
                        model.space().len()
                    )))
                } else {
                    Ok(())
                }
            }
            EstimatorSpec::Shifted(_) => {
                if model.space().alternatives() != 1 {
                    Err(Error::InvalidArgument(
                        "the shifted estimator needs a two-point space".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Run the estimator on raw data.
    pub fn estimate(
        &self,
        model: &Model,
        data: &[crate::model::Observation],
    ) -> Result<crate::estimator::EstimationResult> {
        match self {
            EstimatorSpec::Mle => m_estimate(model, data),
            EstimatorSpec::Bayes(prior) => bayes_estimate(model, data, prior),
            EstimatorSpec::Shifted(k) => shifted_estimate(model, data, *k),
        }
    }

    /// Decision from a per-symbol count vector (unnormalized log scale).
    fn decide_from_counts(&self, log_pmf: &[Vec<f64>], counts: &[u64], n: u64) -> ParamIndex {
        let objective = |p: usize| -> f64 {
            counts
                .iter()
                .zip(&log_pmf[p])
                .map(|(&c, &lp)| c as f64 * lp)
                .sum()
        };
        let values: Vec<f64> = match self {
            EstimatorSpec::Mle => (0..log_pmf.len()).map(objective).collect(),
            EstimatorSpec::Bayes(prior) => {
                let lw = prior.log_weights();
                (0..log_pmf.len()).map(|p| objective(p) + lw[p]).collect()
            }
            EstimatorSpec::Shifted(k) => {
                vec![objective(0) + k * n as f64, objective(1)]
            }
        };
        argmax_smallest(&values).0
    }
}

/// Exact law of the estimator at sample size n under one truth point.
#[derive(Debug, Clone, Serialize)]
pub struct ExactDistribution {
    pub n: u64,
    pub truth: ParamIndex,
    pub estimator: String,
    /// ln ℙ₀(estimator = θᵢ) per parameter index; −∞ for indices that no
    /// dataset selects.
    pub log_prob: Vec<f64>,
}

impl ExactDistribution {
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_prob.iter().map(|lp| lp.exp()).collect()
    }

    /// ℙ₀(estimator ≠ θ_truth).
    pub fn error_probability(&self) -> f64 {
        1.0 - self.log_prob[self.truth].exp()
    }
}

fn for_each_count_vector(n: u64, parts: usize, f: &mut impl FnMut(&[u64])) {
    fn recurse(n: u64, parts: usize, prefix: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if parts == 1 {
            prefix.push(n);
            f(prefix);
            prefix.pop();
            return;
        }
        for c in 0..=n {
            prefix.push(c);
            recurse(n - c, parts - 1, prefix, f);
            prefix.pop();
        }
    }
    recurse(n, parts, &mut Vec::with_capacity(parts), f);
}

/// Brute-force oracle: the exact distribution of the estimator over all
/// datasets of size n, for enumerable (categorical) models.
///
/// Guard: |support|ⁿ must not exceed 10⁸.
pub fn enumerate_exact(
    model: &Model,
    estimator: &EstimatorSpec,
    truth: ParamIndex,
    n: u64,
) -> Result<ExactDistribution> {
    model.space().check_index(truth)?;
    estimator.validate(model)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (support, _) = model.enumerate_support()?;
    let s = support.len();
    if (s as f64).powf(n as f64) > 1e8 {
        return Err(Error::EnumerationGuard(format!(
            "|support|^n = {s}^{n} exceeds 1e8"
        )));
    }
    let log_pmf = model.finite_support_log_pmf().expect("categorical");
    let ln_n_fact = ln_gamma(n as f64 + 1.0);

    let mut per_index: Vec<Vec<f64>> = vec![Vec::new(); model.space().len()];
    for_each_count_vector(n, s, &mut |counts| {
        let chosen = estimator.decide_from_counts(&log_pmf, counts, n);
        let mut lp = ln_n_fact;
        for (y, &c) in counts.iter().enumerate() {
            lp += c as f64 * log_pmf[truth][y] - ln_gamma(c as f64 + 1.0);
        }
        per_index[chosen].push(lp);
    });

    let log_prob = per_index.iter().map(|v| log_sum_exp(v)).collect();
    Ok(ExactDistribution {
        n,
        truth,
        estimator: estimator.name(),
        log_prob,
    })
}

/// Monte Carlo estimate of the estimator's law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub n: u64,
    pub replicates: u64,
    pub truth: ParamIndex,
    pub estimator: String,
    pub master_seed: u64,
    /// Times each index was chosen; sums to `replicates`.
    pub counts: Vec<u64>,
    pub p_hat: Vec<f64>,
    /// Wilson 95% interval per index.
    pub wilson95: Vec<(f64, f64)>,
}

impl SimulationResult {
    /// ℙ̂₀(estimator ≠ θ_truth).
    pub fn error_probability(&self) -> f64 {
        1.0 - self.p_hat[self.truth]
    }
}

/// R independent replicates of: draw n observations under the truth, apply
/// the estimator. Replicate r uses stream id r, so the result is a pure
/// function of `(seed, truth, n, R)`.
pub fn simulate(
    model: &Model,
    estimator: &EstimatorSpec,
    truth: ParamIndex,
    n: u64,
    replicates: u64,
    seed: u64,
) -> Result<SimulationResult> {
    model.space().check_index(truth)?;
    estimator.validate(model)?;
    if !model.can_sample() {
        return Err(Error::MissingCapability("sample"));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let len = model.space().len();
    let counts = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let data = model.sample(truth, SeedState::new(seed, r), n as usize)?;
            Ok(estimator.estimate(model, &data)?.chosen_index)
        })
        .try_fold(
            || vec![0u64; len],
            |mut acc, chosen: Result<usize>| {
                acc[chosen?] += 1;
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    let p_hat = counts
        .iter()
        .map(|&c| c as f64 / replicates as f64)
        .collect();
    let wilson95 = counts
        .iter()
        .map(|&c| wilson_interval(c, replicates, 1.959963984540054))
        .collect();
    Ok(SimulationResult {
        n,
        replicates,
        truth,
        estimator: estimator.name(),
        master_seed: seed,
        counts,
        p_hat,
        wilson95,
    })
}

/// Closed-form error probabilities of the shifted estimator θ̃(k) on the
/// symmetric two-point Gaussian model Θ = {θ₀, θ₁} with |θ₁ − θ₀| = 2α:
///
/// ```text
/// ℙ_{θ₀}(θ̃ ≠ θ₀) = Φ(−(kσ² + 2α²)√n / (2ασ)),
/// ℙ_{θ₁}(θ̃ ≠ θ₁) = Φ( (kσ² − 2α²)√n / (2ασ)).
/// ```
///
/// k = 0 reduces both to Φ(−√n·α/σ), the maximum-likelihood error.
pub fn gaussian_closed_form(alpha: f64, sigma: f64, n: u64, k: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha and sigma must be positive, got {alpha}, {sigma}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let root_n = (n as f64).sqrt();
    let denom = 2.0 * alpha * sigma;
    let err0 = norm_cdf(-(k * sigma * sigma + 2.0 * alpha * alpha) * root_n / denom);
    let err1 = norm_cdf((k * sigma * sigma - 2.0 * alpha * alpha) * root_n / denom);
    Ok((err0, err1))
}

/// Risks at one truth point.
#[derive(Debug, Clone, Serialize)]
pub struct RiskRow {
    pub truth: ParamIndex,
    /// Misclassification probability ℙ_{θ₀}(θ̃ ≠ θ₀).
    pub r1: f64,
    /// Mean squared error over the numeric embedding; absent without one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    /// Weighted misclassification Σ_{j≠0} aⱼ(θ₀)·ℙ_{θ₀}(θ̃ = θⱼ).
    pub r3: f64,
}

/// Risk table across all truth points.
#[derive(Debug, Clone, Serialize)]
pub struct RiskTable {
    pub per_truth: Vec<RiskRow>,
    /// Bayes risk r₁ = Σ π(θⱼ)·ℙ_{θⱼ}(θ̃ ≠ θⱼ) under the supplied prior.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes_risk: Option<f64>,
    /// Average probability of error: the uniform-prior Bayes risk.
    pub average_error: f64,
}

/// Assemble R₁/R₂/R₃, the Bayes risk and the average error probability from
/// a probability matrix `probs[t][j] = ℙ_{θ_t}(θ̃ = θⱼ)` (one row per truth
/// point, rows summing to one).
///
/// `weights[t][j]` are the R₃ misclassification weights; `None` means unit
/// weights, which makes R₃ = R₁. R₂ is reported when every point carries a
/// numeric embedding.
pub fn risk_table(
    probs: &[Vec<f64>],
    space: &ParameterSpace,
    weights: Option<&[Vec<f64>]>,
    prior: Option<&Prior>,
) -> Result<RiskTable> {
    let len = space.len();
    if probs.len() != len {
        return Err(Error::InvalidArgument(format!(
            "probability matrix has {} rows for {len} parameter points",
            probs.len()
        )));
    }
    for (t, row) in probs.iter().enumerate() {
        if row.len() != len {
            return Err(Error::InvalidArgument(format!(
                "probability row {t} has {} entries for {len} points",
                row.len()
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-8 || row.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "probability row {t} is not a distribution (sum {sum})"
            )));
        }
    }
    if let Some(w) = weights {
        if w.len() != len || w.iter().any(|row| row.len() != len) {
            return Err(Error::InvalidArgument(
                "weight matrix shape must match the parameter space".into(),
            ));
        }
        if w.iter().flatten().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidArgument(
                "misclassification weights must be positive".into(),
            ));
        }
    }
    if let Some(p) = prior {
        if p.len() != len {
            return Err(Error::InvalidPrior(format!(
                "prior has {} weights for {len} parameter points",
                p.len()
            )));
        }
    }
    let embedded = (0..len).all(|i| space.points()[i].value.is_some());

    let mut per_truth = Vec::with_capacity(len);
    for t in 0..len {
        // Off-diagonal sum rather than 1 − p[t][t]: keeps the unit-weight
        // R₃ = R₁ identity exact in floating point.
        let r1: f64 = (0..len).filter(|&j| j != t).map(|j| probs[t][j]).sum();
        let r2 = if embedded {
            let mut mse = 0.0;
            for j in 0..len {
                let d = space.embedding_distance(t, j)?;
                mse += d * d * probs[t][j];
            }
            Some(mse)
        } else {
            None
        };
        let r3 = (0..len)
            .filter(|&j| j != t)
            .map(|j| weights.map_or(1.0, |w| w[t][j]) * probs[t][j])
            .sum();
        per_truth.push(RiskRow { truth: t, r1, r2, r3 });
    }
    let bayes_risk = prior.map(|p| {
        p.weights()
            .iter()
            .zip(&per_truth)
            .map(|(w, row)| w * row.r1)
            .sum()
    });
    let average_error = per_truth.iter().map(|row| row.r1).sum::<f64>() / len as f64;
    Ok(RiskTable {
        per_truth,
        bayes_risk,
        average_error,
    })
}
