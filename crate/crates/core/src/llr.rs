//! Log-likelihood-ratio vector processes and their tilting machinery.
//!
//! For a candidate point θᵢ the per-observation vector
//!
//! ```text
//! X^{(i)}(y) = [ ln q(y; θᵢ) − ln q(y; θⱼ) ]  for j ≠ i, increasing j
//! ```
//!
//! drives everything downstream: the estimator picks θᵢ exactly when the
//! partial sums of X^{(i)} land in the positive orthant. This module builds
//! X^{(i)} under a truth specification (a parameter index for correct
//! specification, or an external dataset for the misspecified case) and
//! exposes its log-moment generating function
//!
//! ```text
//! Λ^{(i)}(λ) = ln E₀ exp(λᵀ X^{(i)}),
//! ```
//!
//! the gradient (tilted mean), the Hessian (tilted covariance), and the
//! Cramér transform Λ^{(i),*}(y) = sup_λ [⟨y, λ⟩ − Λ^{(i)}(λ)].
//!
//! Under correct specification the MGF is a Hellinger transform
//! ∫ Π fⱼ^{γⱼ} dμ after a linear reparameterization of λ into γ;
//! [`check_hellinger_identity`] verifies that identity numerically.
//!
//! Component ordering (increasing j, skipping i) is part of the contract:
//! every orthant statement in the rates and asymptotics modules relies on it.

use crate::error::{Error, Result};
use crate::model::{Family, Model, Observation, ParamIndex, SeedState};
use crate::numeric::{dot, log_sum_exp, norm_inf};
use crate::optim::Ascent;

/// What the data-generating measure is.
#[derive(Debug, Clone)]
pub enum TruthSpec {
    /// Correct specification: data drawn from ℙ_{θ_t}.
    Index(ParamIndex),
    /// Misspecified / empirical case: expectations are taken under the
    /// empirical measure of this dataset.
    Data(Vec<Observation>),
}

/// How expectations are computed.
#[derive(Debug, Clone, Copy)]
pub enum Backend {
    /// Family closed forms (quadratic in λ for the Gaussian, exact finite
    /// sums for finite-support families, the Poisson MGF closed form).
    Analytic,
    /// A frozen sample of the given size drawn once at construction; the
    /// empirical Λ̂ is then a deterministic smooth function of λ.
    Empirical { sample_size: usize, seed: SeedState },
}

/// Extended real line: the value of an MGF that may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn expect_finite(self) -> Result<f64> {
        self.finite().ok_or(Error::DivergentLmgf)
    }
}

enum Evaluator {
    /// X = slope·y + intercept with y ~ N(truth_mean, σ²).
    Gaussian {
        slope: Vec<f64>,
        intercept: Vec<f64>,
        truth_mean: f64,
        sigma: f64,
    },
    /// X_j = y·log_ratio_j + rate_gap_j with y ~ Poisson(truth_rate).
    Poisson {
        log_ratio: Vec<f64>,
        rate_gap: Vec<f64>,
        truth_rate: f64,
    },
    /// Finite mixture of rows: exact for finite-support families, the
    /// frozen-sample empirical measure otherwise.
    Weighted {
        log_weights: Vec<f64>,
        rows: Vec<Vec<f64>>,
    },
}

/// The vector process X^{(i)} with its log-MGF machinery.
pub struct LlrSystem<'a> {
    model: &'a Model,
    candidate: ParamIndex,
    truth_index: Option<ParamIndex>,
    components: Vec<ParamIndex>,
    eval: Evaluator,
}

impl<'a> LlrSystem<'a> {
    pub fn new(
        model: &'a Model,
        truth: TruthSpec,
        candidate: ParamIndex,
        backend: Backend,
    ) -> Result<Self> {
        let len = model.space().len();
        model.space().check_index(candidate)?;
        if len < 2 {
            return Err(Error::InvalidArgument(
                "a singleton space has no alternatives".into(),
            ));
        }
        let components: Vec<ParamIndex> = (0..len).filter(|j| *j != candidate).collect();

        let (truth_index, eval) = match truth {
            TruthSpec::Index(t) => {
                model.space().check_index(t)?;
                let eval = match backend {
                    Backend::Analytic => {
                        Self::analytic_evaluator(model, t, candidate, &components)?
                    }
                    Backend::Empirical { sample_size, seed } => {
                        if sample_size == 0 {
                            return Err(Error::InvalidArgument(
                                "empirical backend needs a positive sample size".into(),
                            ));
                        }
                        let sample = model.sample(t, seed, sample_size)?;
                        Self::data_evaluator(model, candidate, &components, &sample)?
                    }
                };
                (Some(t), eval)
            }
            TruthSpec::Data(data) => {
                if matches!(backend, Backend::Analytic) {
                    return Err(Error::InvalidArgument(
                        "the analytic backend requires an index truth; datasets are \
                         evaluated empirically"
                            .into(),
                    ));
                }
                if data.is_empty() {
                    return Err(Error::EmptyData);
                }
                let eval = Self::data_evaluator(model, candidate, &components, &data)?;
                (None, eval)
            }
        };

        Ok(Self {
            model,
            candidate,
            truth_index,
            components,
            eval,
        })
    }

    fn analytic_evaluator(
        model: &Model,
        truth: ParamIndex,
        candidate: ParamIndex,
        components: &[ParamIndex],
    ) -> Result<Evaluator> {
        match model.family() {
            Family::GaussianKnownVar { sigma } => {
                let means = model.scalar_params()?;
                let mi = means[candidate];
                let s2 = sigma * sigma;
                let slope: Vec<f64> = components.iter().map(|&j| (mi - means[j]) / s2).collect();
                let intercept: Vec<f64> = components
                    .iter()
                    .map(|&j| (means[j] * means[j] - mi * mi) / (2.0 * s2))
                    .collect();
                Ok(Evaluator::Gaussian {
                    slope,
                    intercept,
                    truth_mean: means[truth],
                    sigma: *sigma,
                })
            }
            Family::Poisson => {
                let rates = model.scalar_params()?;
                let ri = rates[candidate];
                let log_ratio: Vec<f64> =
                    components.iter().map(|&j| (ri / rates[j]).ln()).collect();
                let rate_gap: Vec<f64> = components.iter().map(|&j| rates[j] - ri).collect();
                Ok(Evaluator::Poisson {
                    log_ratio,
                    rate_gap,
                    truth_rate: rates[truth],
                })
            }
            Family::Categorical { .. } | Family::BernoulliPower { .. } => {
                let log_pmf = model.finite_support_log_pmf().expect("finite support");
                let support = log_pmf[0].len();
                let rows: Vec<Vec<f64>> = (0..support)
                    .map(|y| {
                        components
                            .iter()
                            .map(|&j| log_pmf[candidate][y] - log_pmf[j][y])
                            .collect()
                    })
                    .collect();
                let log_weights: Vec<f64> = (0..support).map(|y| log_pmf[truth][y]).collect();
                Ok(Evaluator::Weighted { log_weights, rows })
            }
            Family::Empirical(_) => Err(Error::MissingCapability("analytic lmgf")),
        }
    }

    fn data_evaluator(
        model: &Model,
        candidate: ParamIndex,
        components: &[ParamIndex],
        data: &[Observation],
    ) -> Result<Evaluator> {
        let m = data.len() as f64;
        let rows = data
            .iter()
            .map(|y| {
                let li = model.log_density(candidate, y)?;
                components
                    .iter()
                    .map(|&j| Ok(li - model.log_density(j, y)?))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Evaluator::Weighted {
            log_weights: vec![-m.ln(); data.len()],
            rows,
        })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn candidate(&self) -> ParamIndex {
        self.candidate
    }

    /// Truth index under correct specification, `None` for dataset truths.
    pub fn truth_index(&self) -> Option<ParamIndex> {
        self.truth_index
    }

    /// Component order of X^{(i)}: increasing j, skipping the candidate.
    pub fn components(&self) -> &[ParamIndex] {
        &self.components
    }

    /// Vector dimension J.
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// The Prop-5 nonlattice assumption fails for every built-in family
    /// except the Gaussian; downstream asymptotics carry this flag as a
    /// warning rather than refusing to compute.
    pub fn lattice_warning(&self) -> bool {
        !matches!(self.model.family(), Family::GaussianKnownVar { .. })
    }

    /// Λ^{(i)}(λ). Exactly zero at λ = 0.
    pub fn lmgf(&self, lambda: &[f64]) -> ExtReal {
        assert_eq!(lambda.len(), self.dim(), "lambda dimension mismatch");
        if lambda.iter().all(|&v| v == 0.0) {
            return ExtReal::Finite(0.0);
        }
        match &self.eval {
            Evaluator::Gaussian {
                slope,
                intercept,
                truth_mean,
                sigma,
            } => {
                let s = dot(lambda, slope);
                let v = dot(lambda, intercept) + truth_mean * s + 0.5 * sigma * sigma * s * s;
                if v.is_finite() {
                    ExtReal::Finite(v)
                } else {
                    ExtReal::Infinite
                }
            }
            Evaluator::Poisson {
                log_ratio,
                rate_gap,
                truth_rate,
            } => {
                let s = dot(lambda, log_ratio);
                let v = dot(lambda, rate_gap) + truth_rate * s.exp_m1();
                if v.is_finite() {
                    ExtReal::Finite(v)
                } else {
                    ExtReal::Infinite
                }
            }
            Evaluator::Weighted { log_weights, rows } => {
                let terms: Vec<f64> = log_weights
                    .iter()
                    .zip(rows)
                    .map(|(lw, row)| lw + dot(lambda, row))
                    .collect();
                let v = log_sum_exp(&terms);
                if v.is_finite() {
                    ExtReal::Finite(v)
                } else {
                    ExtReal::Infinite
                }
            }
        }
    }

    /// ∇Λ^{(i)}(λ): the mean of X^{(i)} under the λ-tilted measure.
    pub fn lmgf_grad(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(lambda.len(), self.dim(), "lambda dimension mismatch");
        let g = match &self.eval {
            Evaluator::Gaussian {
                slope,
                intercept,
                truth_mean,
                sigma,
            } => {
                let s = dot(lambda, slope);
                let tilted = truth_mean + sigma * sigma * s;
                slope
                    .iter()
                    .zip(intercept)
                    .map(|(a, b)| b + a * tilted)
                    .collect()
            }
            Evaluator::Poisson {
                log_ratio,
                rate_gap,
                truth_rate,
            } => {
                let s = dot(lambda, log_ratio);
                let tilted = truth_rate * s.exp();
                log_ratio
                    .iter()
                    .zip(rate_gap)
                    .map(|(c, d)| d + tilted * c)
                    .collect::<Vec<f64>>()
            }
            Evaluator::Weighted { log_weights, rows } => {
                let w = self.tilted_weights(lambda, log_weights, rows);
                let mut g = vec![0.0; self.dim()];
                for (wy, row) in w.iter().zip(rows) {
                    for (gk, xk) in g.iter_mut().zip(row) {
                        *gk += wy * xk;
                    }
                }
                g
            }
        };
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::DivergentLmgf)
        }
    }

    /// ∇²Λ^{(i)}(λ): the covariance of X^{(i)} under the tilted measure;
    /// symmetric positive semidefinite.
    pub fn lmgf_hess(&self, lambda: &[f64]) -> Result<Vec<Vec<f64>>> {
        assert_eq!(lambda.len(), self.dim(), "lambda dimension mismatch");
        let d = self.dim();
        let h = match &self.eval {
            Evaluator::Gaussian { slope, sigma, .. } => {
                let s2 = sigma * sigma;
                (0..d)
                    .map(|r| (0..d).map(|c| s2 * slope[r] * slope[c]).collect())
                    .collect()
            }
            Evaluator::Poisson {
                log_ratio,
                truth_rate,
                ..
            } => {
                let s = dot(lambda, log_ratio);
                let tilted = truth_rate * s.exp();
                (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|c| tilted * log_ratio[r] * log_ratio[c])
                            .collect()
                    })
                    .collect()
            }
            Evaluator::Weighted { log_weights, rows } => {
                let w = self.tilted_weights(lambda, log_weights, rows);
                let mut mean = vec![0.0; d];
                for (wy, row) in w.iter().zip(rows) {
                    for (mk, xk) in mean.iter_mut().zip(row) {
                        *mk += wy * xk;
                    }
                }
                let mut h = vec![vec![0.0; d]; d];
                for (wy, row) in w.iter().zip(rows) {
                    for r in 0..d {
                        let dr = row[r] - mean[r];
                        for c in 0..d {
                            h[r][c] += wy * dr * (row[c] - mean[c]);
                        }
                    }
                }
                h
            }
        };
        let finite = h
            .iter()
            .all(|row: &Vec<f64>| row.iter().all(|v| v.is_finite()));
        if finite {
            Ok(h)
        } else {
            Err(Error::DivergentLmgf)
        }
    }

    fn tilted_weights(&self, lambda: &[f64], log_weights: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
        let terms: Vec<f64> = log_weights
            .iter()
            .zip(rows)
            .map(|(lw, row)| lw + dot(lambda, row))
            .collect();
        let z = log_sum_exp(&terms);
        terms.iter().map(|t| (t - z).exp()).collect()
    }

    /// E₀ X^{(i)} (the untilted mean).
    pub fn mean(&self) -> Result<Vec<f64>> {
        self.lmgf_grad(&vec![0.0; self.dim()])
    }

    /// Cramér transform Λ^{(i),*}(y) with its maximizing λ*.
    ///
    /// The objective ⟨y, λ⟩ − Λ(λ) is concave; a damped ascent from λ = 0
    /// (gradient ∞-norm tolerance 1e-9, budget 10⁴ iterations) is run and
    /// non-convergence is reported as an error. The value is nonnegative and
    /// vanishes at y = E₀X^{(i)}.
    pub fn cramer_transform(&self, y: &[f64]) -> Result<CramerTransform> {
        assert_eq!(y.len(), self.dim(), "y dimension mismatch");
        let value = |l: &[f64]| match self.lmgf(l) {
            ExtReal::Finite(v) => dot(y, l) - v,
            ExtReal::Infinite => f64::NEG_INFINITY,
        };
        let gradient = |l: &[f64]| match self.lmgf_grad(l) {
            Ok(g) => y.iter().zip(&g).map(|(yi, gi)| yi - gi).collect(),
            Err(_) => vec![f64::NAN; l.len()],
        };
        let hessian = |l: &[f64]| match self.lmgf_hess(l) {
            Ok(h) => h
                .into_iter()
                .map(|row| row.into_iter().map(|v| -v).collect())
                .collect(),
            Err(_) => vec![vec![f64::NAN; l.len()]; l.len()],
        };
        let res = Ascent {
            value: &value,
            gradient: &gradient,
            hessian: Some(&hessian),
            nonnegative: false,
        }
        .maximize(vec![0.0; self.dim()]);
        if !res.converged {
            return Err(Error::NonConvergence(format!(
                "Cramér transform ascent stopped with gradient norm {:.3e} after {} iterations",
                norm_inf(&res.gradient),
                res.iterations
            )));
        }
        Ok(CramerTransform {
            value: ExtReal::Finite(res.value),
            lambda_star: res.x,
        })
    }
}

/// Result of a Cramér-transform evaluation.
#[derive(Debug, Clone)]
pub struct CramerTransform {
    pub value: ExtReal,
    pub lambda_star: Vec<f64>,
}

/// Hellinger transform H_γ = ∫ Π_j f(y; θⱼ)^{γⱼ} μ(dy) for γ summing to 1.
///
/// Only defined under correct specification; the truth index marks that
/// context (the transform itself integrates over all points). Closed forms
/// per family; the empirical family has no integrable representation.
pub fn hellinger_transform(model: &Model, truth: ParamIndex, gamma: &[f64]) -> Result<f64> {
    model.space().check_index(truth)?;
    let len = model.space().len();
    if gamma.len() != len {
        return Err(Error::InvalidArgument(format!(
            "gamma has {} entries for {} parameter points",
            gamma.len(),
            len
        )));
    }
    let sum: f64 = gamma.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "gamma sums to {sum}, expected 1"
        )));
    }
    match model.family() {
        Family::Categorical { .. } | Family::BernoulliPower { .. } => {
            let log_pmf = model.finite_support_log_pmf().expect("finite support");
            let support = log_pmf[0].len();
            let total: f64 = (0..support)
                .map(|y| {
                    (0..len)
                        .map(|j| gamma[j] * log_pmf[j][y])
                        .sum::<f64>()
                        .exp()
                })
                .sum();
            Ok(total)
        }
        Family::GaussianKnownVar { sigma } => {
            let means = model.scalar_params()?;
            let first = dot(gamma, &means);
            let second: f64 = gamma.iter().zip(&means).map(|(g, m)| g * m * m).sum();
            Ok((-(second - first * first) / (2.0 * sigma * sigma)).exp())
        }
        Family::Poisson => {
            let rates = model.scalar_params()?;
            let geo: f64 = gamma
                .iter()
                .zip(&rates)
                .map(|(g, r)| g * r.ln())
                .sum::<f64>()
                .exp();
            let arith = dot(gamma, &rates);
            Ok((geo - arith).exp())
        }
        Family::Empirical(_) => Err(Error::MissingCapability("hellinger transform")),
    }
}

/// The linear map from λ to γ under which M^{(i)}(λ) = H_γ for truth index
/// t ≠ i: γᵢ = Σ_{j≠i} λⱼ, γ_t = 1 − λ_t, γⱼ = −λⱼ otherwise. Always sums
/// to one.
pub fn hellinger_gamma(
    len: usize,
    candidate: ParamIndex,
    truth: ParamIndex,
    lambda: &[f64],
) -> Vec<f64> {
    debug_assert_eq!(lambda.len(), len - 1);
    let mut gamma = vec![0.0; len];
    let mut pos = 0usize;
    let mut total = 0.0;
    for j in 0..len {
        if j == candidate {
            continue;
        }
        let lj = lambda[pos];
        pos += 1;
        total += lj;
        gamma[j] = if j == truth { 1.0 - lj } else { -lj };
    }
    gamma[candidate] = total;
    gamma
}

/// |M^{(i)}(λ) − H_γ(λ)| under correct specification. Offered for
/// candidates distinct from the truth index; the paper's map leaves the
/// i = t specialization undefined.
pub fn check_hellinger_identity(sys: &LlrSystem<'_>, lambda: &[f64]) -> Result<f64> {
    let truth = sys.truth_index().ok_or_else(|| {
        Error::InvalidArgument("the Hellinger identity needs an index truth".into())
    })?;
    if truth == sys.candidate() {
        return Err(Error::InvalidArgument(
            "the Hellinger identity is undefined when the candidate equals the truth index"
                .into(),
        ));
    }
    let mgf = sys.lmgf(lambda).expect_finite()?.exp();
    let gamma = hellinger_gamma(sys.model().space().len(), sys.candidate(), truth, lambda);
    let h = hellinger_transform(sys.model(), truth, &gamma)?;
    Ok((mgf - h).abs())
}

/// ln ∫ f_a^u f_b^{1−u} dμ: the pairwise Hellinger integrand that drives
/// Chernoff information. Closed forms for the analytic families; a frozen
/// 10⁶-point sample under a for samplable empirical families.
pub fn pairwise_log_hellinger(model: &Model, a: ParamIndex, b: ParamIndex, u: f64) -> Result<f64> {
    model.space().check_index(a)?;
    model.space().check_index(b)?;
    match model.family() {
        Family::Categorical { .. } | Family::BernoulliPower { .. } => {
            let log_pmf = model.finite_support_log_pmf().expect("finite support");
            let terms: Vec<f64> = (0..log_pmf[0].len())
                .map(|y| u * log_pmf[a][y] + (1.0 - u) * log_pmf[b][y])
                .collect();
            Ok(log_sum_exp(&terms))
        }
        Family::GaussianKnownVar { sigma } => {
            let means = model.scalar_params()?;
            let d = means[a] - means[b];
            Ok(-u * (1.0 - u) * d * d / (2.0 * sigma * sigma))
        }
        Family::Poisson => {
            let rates = model.scalar_params()?;
            Ok(rates[a].powf(u) * rates[b].powf(1.0 - u) - u * rates[a] - (1.0 - u) * rates[b])
        }
        Family::Empirical(_) => {
            if !model.can_sample() {
                return Err(Error::MissingCapability("sample"));
            }
            let m = 1_000_000usize;
            let sample = model.sample(a, SeedState::new(0x4845_4c4c, 0), m)?;
            let terms = sample
                .iter()
                .map(|y| {
                    Ok((1.0 - u) * (model.log_density(b, y)? - model.log_density(a, y)?))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(log_sum_exp(&terms) - (m as f64).ln())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, ParamPoint, ParameterSpace};
    use crate::testutil::{categorical_three_by_three, categorical_two_point, poisson_pair};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Θ = {+1, −1} (in that order), truth +1, candidate index 1, so
    /// X^{(1)} = −2Y and Λ^{(1)}(λ) = −2λ + 2λ².
    fn gaussian_flipped() -> Model {
        let space = ParameterSpace::new(vec![
            ParamPoint::scalar("+1", 1.0),
            ParamPoint::scalar("-1", -1.0),
        ])
        .unwrap();
        Model::new(space, crate::model::Family::GaussianKnownVar { sigma: 1.0 }).unwrap()
    }

    fn all_analytic_systems(model: &Model) -> Vec<LlrSystem<'_>> {
        let len = model.space().len();
        let mut out = Vec::new();
        for t in 0..len {
            for i in 0..len {
                if i != t {
                    out.push(
                        LlrSystem::new(model, TruthSpec::Index(t), i, Backend::Analytic).unwrap(),
                    );
                }
            }
        }
        out
    }

    #[test]
    fn lmgf_is_exactly_zero_at_origin() {
        let cat = categorical_two_point();
        let poi = poisson_pair();
        let gau = gaussian_flipped();
        for sys in all_analytic_systems(&cat)
            .iter()
            .chain(all_analytic_systems(&poi).iter())
            .chain(all_analytic_systems(&gau).iter())
        {
            assert_eq!(sys.lmgf(&vec![0.0; sys.dim()]), ExtReal::Finite(0.0));
        }
        let emp = LlrSystem::new(
            &cat,
            TruthSpec::Index(0),
            1,
            Backend::Empirical {
                sample_size: 1000,
                seed: SeedState::new(3, 0),
            },
        )
        .unwrap();
        assert_eq!(emp.lmgf(&[0.0]), ExtReal::Finite(0.0));
    }

    #[test]
    fn gaussian_closed_form_reference() {
        let m = gaussian_flipped();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        // Λ(λ) = −2λ + 2λ²: value −0.5 at λ = 0.5, gradient 0 there,
        // plain mean −2 at the origin.
        assert_relative_eq!(sys.lmgf(&[0.5]).finite().unwrap(), -0.5, epsilon = 1e-15);
        assert_relative_eq!(sys.lmgf_grad(&[0.5]).unwrap()[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(sys.mean().unwrap()[0], -2.0, epsilon = 1e-15);
        assert_relative_eq!(sys.lmgf_hess(&[0.3]).unwrap()[0][0], 4.0, epsilon = 1e-15);
    }

    #[test]
    fn categorical_unit_tilt_integrates_the_other_density() {
        // λ = 1 turns E₀[(p₁/p₀)^λ] into ∫ p₁ = 1, so Λ = 0.
        let m = categorical_two_point();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        assert_relative_eq!(sys.lmgf(&[1.0]).finite().unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn component_order_is_increasing_and_skips_candidate() {
        let m = categorical_three_by_three();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        assert_eq!(sys.components(), &[0, 2]);
        assert_eq!(sys.dim(), 2);
        let sys0 = LlrSystem::new(&m, TruthSpec::Index(1), 0, Backend::Analytic).unwrap();
        assert_eq!(sys0.components(), &[1, 2]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let models = vec![
            gaussian_flipped(),
            poisson_pair(),
            categorical_three_by_three(),
            crate::testutil::tumor_model(0.5),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for model in &models {
            for sys in all_analytic_systems(model) {
                for _ in 0..20 {
                    let lambda: Vec<f64> =
                        (0..sys.dim()).map(|_| rng.gen_range(-0.8..0.8)).collect();
                    let g = sys.lmgf_grad(&lambda).unwrap();
                    for k in 0..sys.dim() {
                        let h = 1e-5;
                        let mut up = lambda.clone();
                        up[k] += h;
                        let mut dn = lambda.clone();
                        dn[k] -= h;
                        let fd = (sys.lmgf(&up).finite().unwrap()
                            - sys.lmgf(&dn).finite().unwrap())
                            / (2.0 * h);
                        let denom = g[k].abs().max(1e-3);
                        assert!(
                            ((g[k] - fd) / denom).abs() < 1e-6,
                            "family {} grad[{k}] {} vs fd {}",
                            model.family().name(),
                            g[k],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_positive_semidefinite() {
        let m = categorical_three_by_three();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let lambda: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = sys.lmgf_hess(&lambda).unwrap();
            assert_relative_eq!(h[0][1], h[1][0], epsilon = 1e-12);
            for _ in 0..10 {
                let z: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q = z[0] * (h[0][0] * z[0] + h[0][1] * z[1])
                    + z[1] * (h[1][0] * z[0] + h[1][1] * z[1]);
                assert!(q >= -1e-9, "negative quadratic form {q}");
            }
        }
    }

    #[test]
    fn convexity_along_random_segments() {
        let m = categorical_three_by_three();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 2, Backend::Analytic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let l1: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let l2: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t: f64 = rng.gen_range(0.01..0.99);
            let mid: Vec<f64> = l1
                .iter()
                .zip(&l2)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            let lhs = sys.lmgf(&mid).finite().unwrap();
            let rhs = t * sys.lmgf(&l1).finite().unwrap()
                + (1.0 - t) * sys.lmgf(&l2).finite().unwrap();
            assert!(lhs <= rhs + 1e-10, "convexity violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn cramer_transform_vanishes_at_the_mean() {
        for model in [
            gaussian_flipped(),
            poisson_pair(),
            categorical_three_by_three(),
        ] {
            let sys = LlrSystem::new(&model, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
            let mean = sys.mean().unwrap();
            let c = sys.cramer_transform(&mean).unwrap();
            assert!(c.value.finite().unwrap().abs() <= 1e-10);
            assert!(norm_inf(&c.lambda_star) <= 1e-6);
        }
    }

    #[test]
    fn gaussian_cramer_at_origin_reaches_half() {
        let m = gaussian_flipped();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        let c = sys.cramer_transform(&[0.0]).unwrap();
        assert_relative_eq!(c.value.finite().unwrap(), 0.5, epsilon = 1e-9);
        assert_relative_eq!(c.lambda_star[0], 0.5, epsilon = 1e-7);
    }

    #[test]
    fn categorical_cramer_matches_grid_search() {
        let m = categorical_two_point();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        let c = sys.cramer_transform(&[0.0]).unwrap();
        // Brute-force sup over λ ∈ [−20, 20] in steps of 1e-4.
        let mut best = f64::NEG_INFINITY;
        let mut l = -20.0f64;
        while l <= 20.0 {
            let v = -sys.lmgf(&[l]).finite().unwrap();
            if v > best {
                best = v;
            }
            l += 1e-4;
        }
        assert!(
            (c.value.finite().unwrap() - best).abs() < 1e-8,
            "ascent {} vs grid {}",
            c.value.finite().unwrap(),
            best
        );
    }

    #[test]
    fn fenchel_equality_at_exposed_points() {
        let m = categorical_three_by_three();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..30 {
            let lambda: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let y = sys.lmgf_grad(&lambda).unwrap();
            let expected = dot(&y, &lambda) - sys.lmgf(&lambda).finite().unwrap();
            let star = sys.cramer_transform(&y).unwrap().value.finite().unwrap();
            assert!(
                (star - expected).abs() < 1e-7,
                "Fenchel gap {} at λ {lambda:?}",
                star - expected
            );
            assert!(star >= -1e-10);
        }
    }

    #[test]
    fn empirical_backend_tracks_analytic_lmgf() {
        let m = categorical_two_point();
        let analytic = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        let empirical = LlrSystem::new(
            &m,
            TruthSpec::Index(0),
            1,
            Backend::Empirical {
                sample_size: 1_000_000,
                seed: SeedState::new(101, 0),
            },
        )
        .unwrap();
        let mut l = -1.0f64;
        while l <= 1.0 + 1e-9 {
            let a = analytic.lmgf(&[l]).finite().unwrap();
            let e = empirical.lmgf(&[l]).finite().unwrap();
            assert!(
                (a - e).abs() < 5e-3,
                "lambda {l}: analytic {a} empirical {e}"
            );
            l += 0.25;
        }
    }

    #[test]
    fn dataset_truth_builds_an_empirical_system() {
        let m = categorical_two_point();
        let data = m.sample(0, SeedState::new(5, 9), 5000).unwrap();
        let sys = LlrSystem::new(
            &m,
            TruthSpec::Data(data.clone()),
            1,
            Backend::Empirical {
                sample_size: 1,
                seed: SeedState::new(0, 0),
            },
        )
        .unwrap();
        assert!(sys.truth_index().is_none());
        // Mean equals the dataset average of X.
        let mut manual = 0.0;
        for y in &data {
            manual += m.log_density(1, y).unwrap() - m.log_density(0, y).unwrap();
        }
        manual /= data.len() as f64;
        assert_relative_eq!(sys.mean().unwrap()[0], manual, epsilon = 1e-12);
        // Analytic backend with a dataset truth is a contract violation.
        assert!(LlrSystem::new(
            &m,
            TruthSpec::Data(data),
            1,
            Backend::Analytic
        )
        .is_err());
    }

    #[test]
    fn hellinger_indicator_gamma_gives_one() {
        for model in [
            categorical_three_by_three(),
            gaussian_flipped(),
            poisson_pair(),
        ] {
            let len = model.space().len();
            let mut gamma = vec![0.0; len];
            gamma[0] = 1.0;
            let h = hellinger_transform(&model, 0, &gamma).unwrap();
            assert_relative_eq!(h, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hellinger_identity_residual_is_tiny() {
        let m = categorical_three_by_three();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let truth = rng.gen_range(0..3);
            let mut candidate = rng.gen_range(0..3);
            if candidate == truth {
                candidate = (candidate + 1) % 3;
            }
            let sys =
                LlrSystem::new(&m, TruthSpec::Index(truth), candidate, Backend::Analytic).unwrap();
            let lambda: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.9..0.9)).collect();
            let gamma = hellinger_gamma(3, candidate, truth, &lambda);
            assert!((gamma.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let residual = check_hellinger_identity(&sys, &lambda).unwrap();
            assert!(residual <= 1e-12, "residual {residual}");
        }
        // The gaussian closed form satisfies the same identity.
        let g = gaussian_flipped();
        let sys = LlrSystem::new(&g, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        for _ in 0..20 {
            let lambda = [rng.gen_range(-0.9..0.9)];
            let residual = check_hellinger_identity(&sys, &lambda).unwrap();
            assert!(residual <= 1e-12, "gaussian residual {residual}");
        }
    }

    #[test]
    fn hellinger_identity_rejects_candidate_equal_truth() {
        let m = categorical_two_point();
        let sys = LlrSystem::new(&m, TruthSpec::Index(0), 1, Backend::Analytic).unwrap();
        assert!(check_hellinger_identity(&sys, &[0.2]).is_ok());
        let data = m.sample(0, SeedState::new(1, 1), 100).unwrap();
        let missp = LlrSystem::new(
            &m,
            TruthSpec::Data(data),
            1,
            Backend::Empirical {
                sample_size: 1,
                seed: SeedState::new(0, 0),
            },
        )
        .unwrap();
        assert!(check_hellinger_identity(&missp, &[0.2]).is_err());
    }

    #[test]
    fn two_point_hellinger_is_the_chernoff_integrand() {
        let m = categorical_two_point();
        for u in [0.1, 0.5, 0.9] {
            let gamma = vec![1.0 - u, u];
            let h = hellinger_transform(&m, 0, &gamma).unwrap();
            let pair = pairwise_log_hellinger(&m, 1, 0, u).unwrap();
            assert_relative_eq!(h.ln(), pair, epsilon = 1e-12);
        }
    }
}
