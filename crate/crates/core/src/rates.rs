//! Large-deviation error exponents.
//!
//! The probability that the estimator picks the wrong point θᵢ decays as
//! e^{−n·Iᵢ} with Iᵢ the infimum of the Cramér transform Λ^{(i),*} over the
//! positive orthant. That primal program is solved here through its convex
//! dual
//!
//! ```text
//! Iᵢ = − inf_{λ ⪰ 0} Λ^{(i)}(λ),
//! ```
//!
//! a projected minimization of the convex log-MGF over the nonnegative
//! orthant. The dual form is a reformulation, so every call also evaluates
//! the primal Λ^{(i),*} at the recovered dominating point y = ∇Λ(λ*) and
//! reports |primal − dual| as a duality gap; KKT multipliers are checked on
//! the active set.
//!
//! The module also computes pairwise Kullback–Leibler divergences and
//! Chernoff information (the binary minimax exponent), the prior invariance
//! of Bayes rates, and the bias bound |θ − θ₀|·ℙ₀(θ̂ ≠ θ₀).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::llr::{pairwise_log_hellinger, Backend, ExtReal, LlrSystem, TruthSpec};
use crate::model::{Family, Model, ParamIndex, Prior, SeedState};
use crate::numeric::{dot, golden_section_min};
use crate::optim::Ascent;

/// KKT slack allowed on active-constraint gradient components.
const KKT_TOL: f64 = 1e-7;
/// Two rates within this of the minimum are both reported as minimizers.
const ARGMIN_TOL: f64 = 1e-9;
/// Reference sample size at which the O(1) posterior-orthant shift is
/// scaled into the dual objective.
const PRIOR_SHIFT_N_REF: f64 = 1e12;

/// Per-alternative exponent with its dual certificate and dominating point.
#[derive(Debug, Clone, Serialize)]
pub struct AlternativeRate {
    pub candidate: ParamIndex,
    /// Iᵢ in nats per observation.
    pub rate: f64,
    /// Dual certificate λ*ᵢ ⪰ 0.
    pub lambda_star: Vec<f64>,
    /// Dominating point y = ∇Λ^{(i)}(λ*).
    pub dominating_point: Vec<f64>,
    /// |Λ^{(i),*}(y) − Iᵢ|, the dual-reformulation diagnostic.
    pub duality_gap: f64,
}

/// Minimize Λ(λ) − ⟨λ, shift⟩ over λ ⪰ 0; returns (−optimum, λ*).
fn shifted_dual(sys: &LlrSystem<'_>, shift: &[f64]) -> Result<(f64, Vec<f64>)> {
    let objective = |l: &[f64]| match sys.lmgf(l) {
        ExtReal::Finite(v) => dot(l, shift) - v,
        ExtReal::Infinite => f64::NEG_INFINITY,
    };
    let gradient = |l: &[f64]| match sys.lmgf_grad(l) {
        Ok(g) => g
            .iter()
            .zip(shift)
            .map(|(gi, si)| si - gi)
            .collect::<Vec<f64>>(),
        Err(_) => vec![f64::NAN; l.len()],
    };
    let hessian = |l: &[f64]| match sys.lmgf_hess(l) {
        Ok(h) => h
            .into_iter()
            .map(|row| row.into_iter().map(|v| -v).collect())
            .collect(),
        Err(_) => vec![vec![f64::NAN; l.len()]; l.len()],
    };
    let res = Ascent {
        value: &objective,
        gradient: &gradient,
        hessian: Some(&hessian),
        nonnegative: true,
    }
    .maximize(vec![0.0; sys.dim()]);
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "projected rate program stalled after {} iterations",
            res.iterations
        )));
    }
    Ok((res.value, res.x))
}

/// Rate Iᵢ for the candidate of `sys`, with certificate, dominating point
/// and duality gap.
///
/// When E₀X^{(i)} already lies in the closed positive orthant the candidate
/// is indistinguishable from the truth at the exponent level and the rate is
/// 0 with λ* = 0.
pub fn alternative_rate(sys: &LlrSystem<'_>) -> Result<AlternativeRate> {
    let mean = sys.mean()?;
    if mean.iter().all(|&v| v >= 0.0) {
        let primal = sys.cramer_transform(&mean)?.value.expect_finite()?;
        return Ok(AlternativeRate {
            candidate: sys.candidate(),
            rate: 0.0,
            lambda_star: vec![0.0; sys.dim()],
            dominating_point: mean,
            duality_gap: primal.abs(),
        });
    }

    let zeros = vec![0.0; sys.dim()];
    let (rate, lambda_star) = shifted_dual(sys, &zeros)?;

    // KKT: active components must not want to decrease further.
    let grad = sys.lmgf_grad(&lambda_star)?;
    for (j, (&l, &g)) in lambda_star.iter().zip(&grad).enumerate() {
        if l <= 1e-12 && g < -KKT_TOL {
            return Err(Error::NonConvergence(format!(
                "KKT violation on active component {j}: gradient {g:.3e}"
            )));
        }
    }

    let dominating_point = grad;
    let primal = sys
        .cramer_transform(&dominating_point)?
        .value
        .expect_finite()?;
    Ok(AlternativeRate {
        candidate: sys.candidate(),
        rate,
        lambda_star,
        dominating_point,
        duality_gap: (primal - rate).abs(),
    })
}

/// Exponent report for every alternative under one truth point.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub truth: ParamIndex,
    pub per_alternative: Vec<AlternativeRate>,
    /// min over alternatives — the total misclassification exponent.
    pub total_rate: f64,
    /// Alternatives attaining the minimum (within 1e-9); its cardinality is
    /// the prefactor count of the total-error lower bound.
    pub argmin_alternatives: Vec<ParamIndex>,
}

/// Total misclassification exponent: ℙ₀(θ̂ ≠ θ₀) decays with the worst
/// (smallest) per-alternative rate, since the error event is the finite
/// union of the per-alternative orthant events.
pub fn total_error_rate(model: &Model, truth: ParamIndex, backend: Backend) -> Result<RateReport> {
    model.space().check_index(truth)?;
    if model.space().alternatives() == 0 {
        return Err(Error::InvalidArgument(
            "a singleton space has no error exponent".into(),
        ));
    }
    let candidates: Vec<ParamIndex> =
        (0..model.space().len()).filter(|&i| i != truth).collect();
    let per_alternative: Vec<AlternativeRate> = candidates
        .par_iter()
        .map(|&i| {
            let sys = LlrSystem::new(model, TruthSpec::Index(truth), i, backend)?;
            alternative_rate(&sys)
        })
        .collect::<Result<Vec<_>>>()?;
    let total_rate = per_alternative
        .iter()
        .map(|r| r.rate)
        .fold(f64::INFINITY, f64::min);
    let tol = ARGMIN_TOL * total_rate.abs().max(1.0);
    let argmin_alternatives = per_alternative
        .iter()
        .filter(|r| r.rate <= total_rate + tol)
        .map(|r| r.candidate)
        .collect();
    Ok(RateReport {
        truth,
        per_alternative,
        total_rate,
        argmin_alternatives,
    })
}

/// KL(a ‖ b) = E_a ln(f_a/f_b). Closed forms for the analytic families; a
/// frozen 10⁶-point sample for samplable empirical families.
pub fn kl_divergence(model: &Model, a: ParamIndex, b: ParamIndex) -> Result<f64> {
    model.space().check_index(a)?;
    model.space().check_index(b)?;
    if a == b {
        return Ok(0.0);
    }
    match model.family() {
        Family::GaussianKnownVar { sigma } => {
            let means = model.scalar_params()?;
            let d = means[a] - means[b];
            Ok(d * d / (2.0 * sigma * sigma))
        }
        Family::Poisson => {
            let rates = model.scalar_params()?;
            Ok(rates[b] - rates[a] + rates[a] * (rates[a] / rates[b]).ln())
        }
        Family::Categorical { .. } | Family::BernoulliPower { .. } => {
            let log_pmf = model.finite_support_log_pmf().expect("finite support");
            Ok((0..log_pmf[0].len())
                .map(|y| log_pmf[a][y].exp() * (log_pmf[a][y] - log_pmf[b][y]))
                .sum())
        }
        Family::Empirical(_) => {
            if !model.can_sample() {
                return Err(Error::MissingCapability("sample"));
            }
            let m = 1_000_000usize;
            let sample = model.sample(a, SeedState::new(0x4b4c, 0), m)?;
            let mut total = 0.0;
            for y in &sample {
                total += model.log_density(a, y)? - model.log_density(b, y)?;
            }
            Ok(total / m as f64)
        }
    }
}

/// Chernoff information C(a, b) = −inf_{0<u<1} ln ∫ f_aᵘ f_b^{1−u} dμ and
/// the minimizing u. Symmetric in (a, b); zero iff a = b.
pub fn chernoff_information(model: &Model, a: ParamIndex, b: ParamIndex) -> Result<(f64, f64)> {
    model.space().check_index(a)?;
    model.space().check_index(b)?;
    if a == b {
        return Ok((0.0, 0.5));
    }
    let psi = |u: f64| pairwise_log_hellinger(model, a, b, u).unwrap_or(f64::INFINITY);
    let (u_star, psi_min) = golden_section_min(&psi, 1e-9, 1.0 - 1e-9, 1e-12);
    Ok(((-psi_min).max(0.0), u_star))
}

/// Rate of the Bayes orthant event versus the plain one.
#[derive(Debug, Clone, Serialize)]
pub struct RateInvariance {
    pub rate_with_prior: f64,
    pub rate_without: f64,
    pub difference: f64,
}

/// The posterior decision shifts the orthant by the O(1) vector
/// ln π^{(i)} = [ln(πᵢ/πⱼ)]; per observation that shift vanishes, so the
/// large-deviation rate is prior-free. Both rates are computed — the shifted
/// dual carries the per-observation shift at a fixed reference sample size —
/// and their difference is returned (≤ 1e-8 by construction; exactly zero
/// for uniform priors).
pub fn bayes_rate_invariance(sys: &LlrSystem<'_>, prior: &Prior) -> Result<RateInvariance> {
    let len = sys.model().space().len();
    if prior.len() != len {
        return Err(Error::InvalidPrior(format!(
            "prior has {} weights for {} parameter points",
            prior.len(),
            len
        )));
    }
    let i = sys.candidate();
    let w = prior.weights();
    // Lower endpoints of the shifted orthant for the sum, ln(πⱼ/πᵢ),
    // rescaled to the mean at the reference sample size.
    let shift: Vec<f64> = sys
        .components()
        .iter()
        .map(|&j| (w[j] / w[i]).ln() / PRIOR_SHIFT_N_REF)
        .collect();
    let zeros = vec![0.0; sys.dim()];
    let (rate_without, _) = shifted_dual(sys, &zeros)?;
    let (rate_with_prior, _) = shifted_dual(sys, &shift)?;
    Ok(RateInvariance {
        rate_with_prior,
        rate_without,
        difference: (rate_with_prior - rate_without).abs(),
    })
}

/// Bias ≤ sup_{j≠0} |θⱼ − θ₀| · ℙ₀(θ̂ ≠ θ₀): the numeric embedding supplies
/// the distances, the caller supplies the probability (exact, simulated, or
/// a Chernoff bound e^{−nI}).
pub fn bias_bound(model: &Model, truth: ParamIndex, probability: f64) -> Result<f64> {
    model.space().check_index(truth)?;
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::InvalidArgument(format!(
            "probability {probability} outside [0, 1]"
        )));
    }
    let mut sup = 0.0f64;
    for j in 0..model.space().len() {
        if j != truth {
            sup = sup.max(model.space().embedding_distance(j, truth)?);
        }
    }
    Ok(sup * probability)
}
