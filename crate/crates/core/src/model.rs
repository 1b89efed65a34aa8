//! Finite parameter spaces and model families.
//!
//! A [`Model`] couples a [`ParameterSpace`] (an ordered finite set of labeled
//! points, optionally carrying a numeric embedding) with a distribution
//! family. Families expose tiered capabilities: every family evaluates log
//! densities; the built-in ones also sample and carry closed-form
//! log-moment-generating functions; only the categorical family enumerates
//! its support.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub type ParamIndex = usize;

/// Tolerance for probability vectors that must sum to one.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A single observation. The active variant is dictated by the family:
/// `Real` for Gaussian data, `Count` for Poisson and Bernoulli-power data,
/// `Symbol` (an index into the declared support) for categorical data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Real(f64),
    Count(u64),
    Symbol(usize),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Real(x) => write!(f, "{x}"),
            Observation::Count(c) => write!(f, "{c}"),
            Observation::Symbol(s) => write!(f, "{s}"),
        }
    }
}

/// Seed state for reproducible sampling: a master seed plus a stream id.
/// Distinct streams under one master seed are independent ChaCha8 streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedState {
    pub master: u64,
    pub stream: u64,
}

impl SeedState {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }
}

/// One point of the parameter space: a label and an optional numeric
/// embedding (used by the bias bound and the squared-error risk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Vec<f64>>,
}

impl ParamPoint {
    pub fn labeled(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            value: None,
        }
    }

    pub fn scalar(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value: Some(vec![value]),
        }
    }
}

/// Ordered finite parameter set Θ = {θ₀, …, θ_J}. Indexing is stable for the
/// life of the object; J = cardinality − 1 is the number of alternatives.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterSpace {
    points: Vec<ParamPoint>,
}

impl ParameterSpace {
    pub fn new(points: Vec<ParamPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidModel("parameter space is empty".into()));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i].label == points[j].label {
                    return Err(Error::InvalidModel(format!(
                        "duplicate label {:?} at indices {i} and {j}",
                        points[i].label
                    )));
                }
                if let (Some(a), Some(b)) = (&points[i].value, &points[j].value) {
                    if a == b {
                        return Err(Error::InvalidModel(format!(
                            "points {i} and {j} share the value {a:?}"
                        )));
                    }
                }
            }
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of alternatives J (cardinality − 1).
    pub fn alternatives(&self) -> usize {
        self.points.len() - 1
    }

    pub fn point(&self, i: ParamIndex) -> Result<&ParamPoint> {
        self.points.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.points.len(),
        })
    }

    pub fn points(&self) -> &[ParamPoint] {
        &self.points
    }

    pub fn check_index(&self, i: ParamIndex) -> Result<()> {
        self.point(i).map(|_| ())
    }

    /// Scalar embedding of point i; errors when the point has no value or a
    /// non-scalar one.
    pub fn scalar_value(&self, i: ParamIndex) -> Result<f64> {
        let p = self.point(i)?;
        match p.value.as_deref() {
            Some([v]) => Ok(*v),
            Some(v) => Err(Error::InvalidModel(format!(
                "point {i} ({:?}) carries a {}-dimensional value where a scalar is required",
                p.label,
                v.len()
            ))),
            None => Err(Error::InvalidModel(format!(
                "point {i} ({:?}) has no numeric value",
                p.label
            ))),
        }
    }

    /// Euclidean distance between the embeddings of two points.
    pub fn embedding_distance(&self, a: ParamIndex, b: ParamIndex) -> Result<f64> {
        let va = self.point(a)?.value.as_deref().ok_or_else(|| {
            Error::InvalidModel(format!("point {a} has no numeric embedding"))
        })?;
        let vb = self.point(b)?.value.as_deref().ok_or_else(|| {
            Error::InvalidModel(format!("point {b} has no numeric embedding"))
        })?;
        if va.len() != vb.len() {
            return Err(Error::InvalidModel(
                "embedding dimensions differ between points".into(),
            ));
        }
        Ok(va
            .iter()
            .zip(vb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt())
    }
}

/// Strictly positive prior over the parameter space.
#[derive(Debug, Clone, Serialize)]
pub struct Prior {
    weights: Vec<f64>,
}

impl Prior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPrior("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::InvalidPrior(format!(
                "all weights must be strictly positive, found {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidPrior(format!(
                "weights sum to {sum}, expected 1 within {PROB_SUM_TOL:e}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![1.0 / len as f64; len],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.ln()).collect()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// External log-density callbacks; the escape hatch for models that are not
/// one of the built-in families. Evaluation is always available; sampling is
/// optional.
#[derive(Clone)]
pub struct EmpiricalFamily {
    pub log_density: Arc<dyn Fn(ParamIndex, &Observation) -> f64 + Send + Sync>,
    pub sampler: Option<Arc<dyn Fn(ParamIndex, &mut ChaCha8Rng) -> Observation + Send + Sync>>,
}

impl EmpiricalFamily {
    pub fn new(
        log_density: impl Fn(ParamIndex, &Observation) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            log_density: Arc::new(log_density),
            sampler: None,
        }
    }

    pub fn with_sampler(
        mut self,
        sampler: impl Fn(ParamIndex, &mut ChaCha8Rng) -> Observation + Send + Sync + 'static,
    ) -> Self {
        self.sampler = Some(Arc::new(sampler));
        self
    }
}

impl fmt::Debug for EmpiricalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmpiricalFamily")
            .field("can_sample", &self.sampler.is_some())
            .finish()
    }
}

/// Distribution family shared by every point of the parameter space.
#[derive(Debug, Clone)]
pub enum Family {
    /// N(θ, σ²) with known σ; the point value is the mean.
    GaussianKnownVar { sigma: f64 },
    /// Poisson(θ); the point value is the rate.
    Poisson,
    /// Single-trial Bernoulli with success probability k^θ (tumor
    /// transplantability model); the point value is the exponent θ > 0.
    BernoulliPower { k: f64 },
    /// Finite shared support with one pmf row per parameter point.
    Categorical {
        support: Vec<String>,
        pmf: Vec<Vec<f64>>,
    },
    /// External callbacks.
    Empirical(EmpiricalFamily),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianKnownVar { .. } => "gaussian_known_var",
            Family::Poisson => "poisson",
            Family::BernoulliPower { .. } => "bernoulli_power",
            Family::Categorical { .. } => "categorical",
            Family::Empirical(_) => "empirical",
        }
    }
}

/// A model: a parameter space plus a family, validated at construction.
#[derive(Debug, Clone)]
pub struct Model {
    space: ParameterSpace,
    family: Family,
}

impl Model {
    pub fn new(space: ParameterSpace, family: Family) -> Result<Self> {
        match &family {
            Family::GaussianKnownVar { sigma } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "gaussian sigma must be positive, got {sigma}"
                    )));
                }
                for i in 0..space.len() {
                    space.scalar_value(i)?;
                }
            }
            Family::Poisson => {
                for i in 0..space.len() {
                    let r = space.scalar_value(i)?;
                    if !(r > 0.0) {
                        return Err(Error::InvalidModel(format!(
                            "poisson rate at point {i} must be positive, got {r}"
                        )));
                    }
                }
            }
            Family::BernoulliPower { k } => {
                if !(*k > 0.0 && *k < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "bernoulli_power k must lie in (0,1), got {k}"
                    )));
                }
                for i in 0..space.len() {
                    let theta = space.scalar_value(i)?;
                    if !(theta > 0.0) {
                        return Err(Error::InvalidModel(format!(
                            "bernoulli_power exponent at point {i} must be positive, got {theta}"
                        )));
                    }
                }
            }
            Family::Categorical { support, pmf } => {
                if support.is_empty() {
                    return Err(Error::InvalidModel("empty categorical support".into()));
                }
                if pmf.len() != space.len() {
                    return Err(Error::InvalidModel(format!(
                        "pmf has {} rows for {} parameter points",
                        pmf.len(),
                        space.len()
                    )));
                }
                for (i, row) in pmf.iter().enumerate() {
                    if row.len() != support.len() {
                        return Err(Error::InvalidModel(format!(
                            "pmf row {i} has {} entries for a support of size {}",
                            row.len(),
                            support.len()
                        )));
                    }
                    // Shared support: every cell strictly positive, so all
                    // measures are mutually equivalent.
                    if let Some(p) = row.iter().find(|p| !(**p > 0.0)) {
                        return Err(Error::InvalidModel(format!(
                            "pmf row {i} contains a nonpositive cell ({p}); zero-probability \
                             cells are rejected because rows must share one support"
                        )));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > PROB_SUM_TOL {
                        return Err(Error::InvalidModel(format!(
                            "pmf row {i} sums to {sum}, expected 1 within {PROB_SUM_TOL:e}"
                        )));
                    }
                }
                for i in 0..pmf.len() {
                    for j in (i + 1)..pmf.len() {
                        if pmf[i] == pmf[j] {
                            return Err(Error::InvalidModel(format!(
                                "pmf rows {i} and {j} are identical; points are not identified"
                            )));
                        }
                    }
                }
            }
            Family::Empirical(_) => {}
        }
        Ok(Self { space, family })
    }

    /// Symmetric two-point Gaussian model Θ = {−α, +α} with known σ.
    pub fn gaussian_two_point(alpha: f64, sigma: f64) -> Result<Self> {
        let space = ParameterSpace::new(vec![
            ParamPoint::scalar(format!("{}", -alpha), -alpha),
            ParamPoint::scalar(format!("{alpha}"), alpha),
        ])?;
        Model::new(space, Family::GaussianKnownVar { sigma })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn can_sample(&self) -> bool {
        match &self.family {
            Family::Empirical(e) => e.sampler.is_some(),
            _ => true,
        }
    }

    pub fn can_enumerate(&self) -> bool {
        matches!(self.family, Family::Categorical { .. })
    }

    pub fn has_analytic_lmgf(&self) -> bool {
        !matches!(self.family, Family::Empirical(_))
    }

    /// Gaussian σ.
    pub fn sigma(&self) -> Result<f64> {
        match &self.family {
            Family::GaussianKnownVar { sigma } => Ok(*sigma),
            _ => Err(Error::InvalidArgument(format!(
                "sigma is only defined for the gaussian family, not {}",
                self.family.name()
            ))),
        }
    }

    /// Scalar parameter of every point (gaussian mean, poisson rate,
    /// bernoulli_power exponent).
    pub fn scalar_params(&self) -> Result<Vec<f64>> {
        (0..self.space.len())
            .map(|i| self.space.scalar_value(i))
            .collect()
    }

    /// Success probabilities k^θ of the bernoulli_power family.
    pub fn success_probs(&self) -> Result<Vec<f64>> {
        match &self.family {
            Family::BernoulliPower { k } => Ok(self
                .scalar_params()?
                .iter()
                .map(|theta| k.powf(*theta))
                .collect()),
            _ => Err(Error::InvalidArgument(format!(
                "success probabilities are only defined for bernoulli_power, not {}",
                self.family.name()
            ))),
        }
    }

    /// Log-pmf table over a finite support, for the families that have one
    /// (categorical; bernoulli_power over {0, 1}). Drives the exact finite
    /// sums in the log-MGF and Hellinger machinery.
    pub fn finite_support_log_pmf(&self) -> Option<Vec<Vec<f64>>> {
        match &self.family {
            Family::Categorical { pmf, .. } => Some(
                pmf.iter()
                    .map(|row| row.iter().map(|p| p.ln()).collect())
                    .collect(),
            ),
            Family::BernoulliPower { .. } => {
                let ps = self.success_probs().ok()?;
                Some(
                    ps.iter()
                        .map(|p| vec![(1.0 - p).ln(), p.ln()])
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// ln q(y; θᵢ).
    pub fn log_density(&self, i: ParamIndex, y: &Observation) -> Result<f64> {
        self.space.check_index(i)?;
        match (&self.family, y) {
            (Family::GaussianKnownVar { sigma }, Observation::Real(x)) => {
                let m = self.space.scalar_value(i)?;
                let z = (x - m) / sigma;
                Ok(-0.5 * (2.0 * std::f64::consts::PI).ln() - sigma.ln() - 0.5 * z * z)
            }
            (Family::Poisson, Observation::Count(c)) => {
                let r = self.space.scalar_value(i)?;
                Ok(-r + (*c as f64) * r.ln() - ln_gamma(*c as f64 + 1.0))
            }
            (Family::BernoulliPower { k }, Observation::Count(c)) if *c <= 1 => {
                let theta = self.space.scalar_value(i)?;
                let ln_p = theta * k.ln();
                if *c == 1 {
                    Ok(ln_p)
                } else {
                    Ok((-ln_p.exp()).ln_1p())
                }
            }
            (Family::Categorical { support, pmf }, Observation::Symbol(s)) => {
                if *s >= support.len() {
                    return Err(Error::DomainViolation {
                        family: "categorical",
                        detail: format!("symbol index {s} >= support size {}", support.len()),
                    });
                }
                Ok(pmf[i][*s].ln())
            }
            (Family::Empirical(e), y) => Ok((e.log_density)(i, y)),
            (f, y) => Err(Error::DomainViolation {
                family: f.name(),
                detail: format!("observation {y:?} does not match the family domain"),
            }),
        }
    }

    /// Draw `count` i.i.d. observations from ℙ_{θᵢ}, deterministically in
    /// `(seed, i, count)`.
    pub fn sample(&self, i: ParamIndex, seed: SeedState, count: usize) -> Result<Vec<Observation>> {
        let mut rng = stream_rng(seed);
        self.sample_with_rng(i, &mut rng, count)
    }

    pub fn sample_with_rng(
        &self,
        i: ParamIndex,
        rng: &mut ChaCha8Rng,
        count: usize,
    ) -> Result<Vec<Observation>> {
        self.space.check_index(i)?;
        let mut out = Vec::with_capacity(count);
        match &self.family {
            Family::GaussianKnownVar { sigma } => {
                let m = self.space.scalar_value(i)?;
                for _ in 0..count {
                    let z: f64 = rng.sample(StandardNormal);
                    out.push(Observation::Real(m + sigma * z));
                }
            }
            Family::Poisson => {
                let r = self.space.scalar_value(i)?;
                let dist = Poisson::new(r)
                    .map_err(|e| Error::InvalidModel(format!("poisson rate {r}: {e}")))?;
                for _ in 0..count {
                    out.push(Observation::Count(dist.sample(rng) as u64));
                }
            }
            Family::BernoulliPower { k } => {
                let p = k.powf(self.space.scalar_value(i)?);
                for _ in 0..count {
                    out.push(Observation::Count(u64::from(rng.gen::<f64>() < p)));
                }
            }
            Family::Categorical { pmf, .. } => {
                let row = &pmf[i];
                for _ in 0..count {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut sym = row.len() - 1;
                    for (s, p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            sym = s;
                            break;
                        }
                    }
                    out.push(Observation::Symbol(sym));
                }
            }
            Family::Empirical(e) => {
                let sampler = e
                    .sampler
                    .as_ref()
                    .ok_or(Error::MissingCapability("sample"))?;
                for _ in 0..count {
                    out.push(sampler(i, rng));
                }
            }
        }
        Ok(out)
    }

    /// Shared support symbols and the (J+1)×|support| probability table.
    /// Categorical models only.
    pub fn enumerate_support(&self) -> Result<(&[String], &[Vec<f64>])> {
        match &self.family {
            Family::Categorical { support, pmf } => Ok((support, pmf)),
            _ => Err(Error::MissingCapability("enumerate")),
        }
    }

    /// Parse one observation from a data-file line.
    pub fn parse_observation(&self, line: &str) -> Result<Observation> {
        let s = line.trim();
        match &self.family {
            Family::GaussianKnownVar { .. } => s
                .parse::<f64>()
                .map(Observation::Real)
                .map_err(|e| Error::DomainViolation {
                    family: "gaussian_known_var",
                    detail: format!("{s:?}: {e}"),
                }),
            Family::Poisson => s
                .parse::<u64>()
                .map(Observation::Count)
                .map_err(|e| Error::DomainViolation {
                    family: "poisson",
                    detail: format!("{s:?}: {e}"),
                }),
            Family::BernoulliPower { .. } => match s {
                "0" | "failure" => Ok(Observation::Count(0)),
                "1" | "success" => Ok(Observation::Count(1)),
                other => Err(Error::DomainViolation {
                    family: "bernoulli_power",
                    detail: format!("{other:?} is not 0/1/failure/success"),
                }),
            },
            Family::Categorical { support, .. } => {
                if let Some(idx) = support.iter().position(|sym| sym == s) {
                    return Ok(Observation::Symbol(idx));
                }
                if let Ok(idx) = s.parse::<usize>() {
                    if idx < support.len() {
                        return Ok(Observation::Symbol(idx));
                    }
                }
                Err(Error::DomainViolation {
                    family: "categorical",
                    detail: format!("{s:?} is not a support symbol or index"),
                })
            }
            Family::Empirical(_) => Err(Error::Unsupported(
                "empirical families have no text observation format".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON model specification (the CLI file contract).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub space: SpaceSpec,
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub points: Vec<ParamPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilySpec {
    GaussianKnownVar { sigma: f64 },
    Poisson,
    BernoulliPower { k: f64 },
    Categorical { support: Vec<String>, pmf: Vec<Vec<f64>> },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidModel(format!("model spec JSON: {e}")))
    }

    pub fn build(&self) -> Result<(Model, Option<Prior>)> {
        let space = ParameterSpace::new(self.space.points.clone())?;
        let family = match &self.family {
            FamilySpec::GaussianKnownVar { sigma } => Family::GaussianKnownVar { sigma: *sigma },
            FamilySpec::Poisson => Family::Poisson,
            FamilySpec::BernoulliPower { k } => Family::BernoulliPower { k: *k },
            FamilySpec::Categorical { support, pmf } => Family::Categorical {
                support: support.clone(),
                pmf: pmf.clone(),
            },
        };
        let model = Model::new(space, family)?;
        let prior = match &self.prior {
            Some(w) => {
                let p = Prior::new(w.clone())?;
                if p.len() != model.space().len() {
                    return Err(Error::InvalidPrior(format!(
                        "prior has {} weights for {} parameter points",
                        p.len(),
                        model.space().len()
                    )));
                }
                Some(p)
            }
            None => None,
        };
        Ok((model, prior))
    }
}
