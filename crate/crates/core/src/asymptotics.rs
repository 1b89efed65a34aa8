//! n-indexed approximations of ℙ₀(θ̂ⁿ = θᵢ).
//!
//! Three approximation ladders, from crude to sharp:
//!
//! * `crude_ld` — the plain exponent e^{−nI};
//! * `exact_asymptotic_two_point` — for J = 1, the refined expansion
//!   e^{nΛ(μ)} / (μ·√(2πn·Λ″(μ))) with μ the positive root of Λ′;
//! * `saddlepoint_leading` — the leading term of the multivariate
//!   saddlepoint expansion around the dominating tilt u of the rate
//!   program: exp(n[Λ(u) − uᵀ∇Λ(u)]) times a tilted Gaussian integral over
//!   the shifted orthant.
//!
//! For J = 1 the dominating point sits on the orthant boundary and the
//! saddlepoint orthant integral reduces, in its large-n (Mills-ratio) limit,
//! to exactly the two-point formula; that closed form is what the J = 1
//! branch returns. For J ∈ {2, 3} the exponentially weighted Gaussian
//! orthant integral is evaluated exactly via a completion of the square and
//! deterministic nested quadrature (relative tolerance 1e-6). Larger J is
//! not supported.
//!
//! Finite-support (lattice-valued) families violate the nonlattice
//! assumption behind the two-point prefactor; results carry a
//! `lattice_warning` flag and the prefactor may oscillate with n.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::llr::LlrSystem;
use crate::numeric::{adaptive_simpson, determinant, dot, golden_section_min, ln_norm_cdf};
use crate::rates::alternative_rate;

/// Crude large-deviation estimate: ln ℙ ≈ −n·I. A zero rate yields 0
/// (probability estimate one — a non-decaying error).
pub fn crude_ld(rate: f64, n: u64) -> f64 {
    -(n as f64) * rate
}

/// Output of the two-point exact asymptotic.
#[derive(Debug, Clone, Serialize)]
pub struct TwoPointAsymptotic {
    pub n: u64,
    pub log_prob: f64,
    /// Positive root μ of Λ^{(1)′}.
    pub mu: f64,
    /// Λ^{(1)″}(μ), the tilted variance.
    pub second_derivative: f64,
    /// Set for finite-support families, where the nonlattice assumption
    /// fails and the prefactor may oscillate.
    pub lattice_warning: bool,
}

/// μ, Λ(μ) and Λ″(μ) for a two-point system.
fn two_point_root(sys: &LlrSystem<'_>) -> Result<(f64, f64, f64)> {
    if sys.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "the two-point asymptotic needs J = 1, got J = {}",
            sys.dim()
        )));
    }
    let mean = sys.mean()?[0];
    if mean >= 0.0 {
        return Err(Error::NoDominatingPoint(format!(
            "E₀X = {mean} is not strictly negative; the candidate is not \
             distinguishable from the truth"
        )));
    }
    let deriv = |l: f64| match sys.lmgf_grad(&[l]) {
        Ok(g) => g[0],
        // Past the numeric domain the derivative is effectively +∞.
        Err(_) => f64::INFINITY,
    };
    // Bracket [1e-6, 1], doubling the right endpoint up to 2^40.
    let (mut lo, mut hi) = (1e-6f64, 1.0f64);
    if deriv(lo) > 0.0 {
        lo = 0.0;
        hi = 1e-6;
    } else {
        while deriv(hi) < 0.0 {
            hi *= 2.0;
            if hi > (1u64 << 40) as f64 {
                return Err(Error::NoDominatingPoint(
                    "Λ′ kept its sign out to 2^40; degenerate or misidentified pair".into(),
                ));
            }
        }
    }
    let mu = crate::numeric::bisect(&deriv, lo, hi);
    let value = sys.lmgf(&[mu]).expect_finite()?;
    let second = sys.lmgf_hess(&[mu])?[0][0];
    if !(second > 0.0) {
        return Err(Error::NoDominatingPoint(format!(
            "tilted variance {second} is not positive at μ = {mu}"
        )));
    }
    Ok((mu, value, second))
}

/// ln ℙ₀(θ̂ⁿ = θ₁) ≈ nΛ(μ) − ln μ − ½ ln(2πn·Λ″(μ)) for two-point spaces,
/// μ being the interior root of Λ′ (located by geometric bracket expansion
/// and bisection).
pub fn exact_asymptotic_two_point(sys: &LlrSystem<'_>, n: u64) -> Result<TwoPointAsymptotic> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (mu, value, second) = two_point_root(sys)?;
    let nf = n as f64;
    let log_prob = nf * value - mu.ln() - 0.5 * (2.0 * std::f64::consts::PI * nf * second).ln();
    Ok(TwoPointAsymptotic {
        n,
        log_prob,
        mu,
        second_derivative: second,
        lattice_warning: sys.lattice_warning(),
    })
}

/// Output of the leading-order saddlepoint approximation.
#[derive(Debug, Clone, Serialize)]
pub struct SaddlepointApprox {
    pub n: u64,
    pub log_prob: f64,
    /// Dominating tilt u (the rate program's dual certificate).
    pub tilt: Vec<f64>,
    /// ∇Λ(u), the dominating point.
    pub dominating_point: Vec<f64>,
    /// det ∇²Λ(u).
    pub hessian_det: f64,
    pub lattice_warning: bool,
}

/// ln ℙ of a Gaussian N(mean, cov) landing in the upper orthant {z ⪰ a},
/// by conditioning on the first coordinate and integrating the product in
/// the log domain. Dimensions 1–3.
fn ln_mvn_upper_orthant(mean: &[f64], cov: &[Vec<f64>], a: &[f64]) -> f64 {
    let d = mean.len();
    if d == 1 {
        return ln_norm_cdf((mean[0] - a[0]) / cov[0][0].sqrt());
    }
    let s1 = cov[0][0].sqrt();
    // Conditional law of the remaining coordinates given z₁.
    let beta: Vec<f64> = (1..d).map(|j| cov[j][0] / cov[0][0]).collect();
    let cond_cov: Vec<Vec<f64>> = (1..d)
        .map(|j| {
            (1..d)
                .map(|k| cov[j][k] - cov[j][0] * cov[k][0] / cov[0][0])
                .collect()
        })
        .collect();
    let rest_a = &a[1..];
    let log_integrand = |z1: f64| -> f64 {
        let zc = (z1 - mean[0]) / s1;
        let cond_mean: Vec<f64> = (1..d)
            .map(|j| mean[j] + beta[j - 1] * (z1 - mean[0]))
            .collect();
        -0.5 * zc * zc - s1.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + ln_mvn_upper_orthant(&cond_mean, &cond_cov, rest_a)
    };

    // The integrand is log-concave: walk uphill from the clipped mode, pin
    // the peak by golden section, then integrate exp(f − f*) over the region
    // where it exceeds e^{−46}.
    let lower = a[0];
    let mut z0 = mean[0].max(lower);
    let mut f0 = log_integrand(z0);
    let mut step = s1;
    loop {
        let trial = z0 + step;
        let ft = log_integrand(trial);
        if ft > f0 {
            z0 = trial;
            f0 = ft;
            step *= 2.0;
        } else {
            break;
        }
    }
    let bracket_lo = (z0 - 2.0 * step).max(lower);
    let bracket_hi = z0 + 2.0 * step;
    let (peak, neg_peak) =
        golden_section_min(&|z| -log_integrand(z), bracket_lo, bracket_hi, 1e-10 * s1);
    let f_peak = -neg_peak;

    // Expand outward until the integrand has dropped 46 nats.
    let drop = 46.0;
    let mut z_lo = peak;
    let mut h = 0.5 * s1;
    while z_lo > lower && log_integrand(z_lo) > f_peak - drop {
        z_lo = (z_lo - h).max(lower);
        h *= 2.0;
    }
    let mut z_hi = peak;
    h = 0.5 * s1;
    while log_integrand(z_hi) > f_peak - drop {
        z_hi += h;
        h *= 2.0;
    }
    let integral = adaptive_simpson(&|z| (log_integrand(z) - f_peak).exp(), z_lo, z_hi, 1e-7);
    f_peak + integral.ln()
}

/// Leading-order saddlepoint approximation of ln ℙ₀(θ̂ⁿ = θᵢ) at the
/// dominating tilt u solving the rate program.
///
/// J = 1 reduces algebraically (via the Mills-ratio limit of the boundary
/// orthant integral) to the two-point exact asymptotic and that closed form
/// is returned. J ∈ {2, 3} evaluates
///
/// ```text
/// exp(n[Λ(u) − uᵀ∇Λ(u)]) · ∫_{z ⪰ −n∇Λ(u)} e^{−uᵀz} N(z; 0, nV) dz,
/// ```
///
/// with V = ∇²Λ(u), the integral computed exactly as
/// e^{uᵀ(nV)u/2}·ℙ{N(−nVu, nV) ⪰ −n∇Λ(u)}.
pub fn saddlepoint_leading(sys: &LlrSystem<'_>, n: u64) -> Result<SaddlepointApprox> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let rate = alternative_rate(sys)?;
    if rate.rate <= 1e-12 {
        return Err(Error::NoDominatingPoint(
            "the rate is zero; no dominating point exists for a non-decaying error".into(),
        ));
    }
    let u = rate.lambda_star.clone();
    let y = rate.dominating_point.clone();
    let v = sys.lmgf_hess(&u)?;
    let hessian_det = determinant(&v);
    let nf = n as f64;
    let lattice_warning = sys.lattice_warning();

    let log_prob = match sys.dim() {
        1 => {
            let second = v[0][0];
            if !(second > 0.0) {
                return Err(Error::NoDominatingPoint(format!(
                    "tilted variance {second} is not positive"
                )));
            }
            let lam = sys.lmgf(&u).expect_finite()?;
            nf * lam - u[0].ln() - 0.5 * (2.0 * std::f64::consts::PI * nf * second).ln()
        }
        2 | 3 => {
            let d = sys.dim();
            let lam = sys.lmgf(&u).expect_finite()?;
            let prefactor = nf * (lam - dot(&u, &y));
            // Complete the square: ∫ e^{−uᵀz} N(z; 0, Σ) dz over {z ⪰ a}
            // equals e^{uᵀΣu/2} ℙ{N(−Σu, Σ) ⪰ a} with Σ = nV.
            let sigma: Vec<Vec<f64>> = v
                .iter()
                .map(|row| row.iter().map(|x| nf * x).collect())
                .collect();
            let mut sigma_u = vec![0.0; d];
            for (j, su) in sigma_u.iter_mut().enumerate() {
                *su = dot(&sigma[j], &u);
            }
            let quad = 0.5 * dot(&u, &sigma_u);
            let mean: Vec<f64> = sigma_u.iter().map(|x| -x).collect();
            let a: Vec<f64> = y.iter().map(|yj| -nf * yj).collect();
            prefactor + quad + ln_mvn_upper_orthant(&mean, &sigma, &a)
        }
        d => {
            return Err(Error::Unsupported(format!(
                "saddlepoint orthant integral implemented for J ≤ 3, got J = {d}"
            )))
        }
    };

    Ok(SaddlepointApprox {
        n,
        log_prob,
        tilt: u,
        dominating_point: y,
        hessian_det,
        lattice_warning,
    })
}

/// Approximation curves over an n grid.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxCurve {
    pub n_grid: Vec<u64>,
    /// The per-alternative rate Iᵢ the curves decay with.
    pub rate: f64,
    /// True when the rate is zero: the error probability does not decay and
    /// only the crude curve (identically zero) is reported.
    pub non_decaying: bool,
    pub lattice_warning: bool,
    /// ln ℙ per method at each grid point.
    pub crude: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_two_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saddlepoint: Option<Vec<f64>>,
    /// μ of the two-point expansion (J = 1 only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Dominating tilt u of the saddlepoint.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilt: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_det: Option<f64>,
}

/// All applicable approximation methods on one n grid.
pub fn approx_curve(sys: &LlrSystem<'_>, n_grid: &[u64]) -> Result<ApproxCurve> {
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::InvalidArgument(
            "the n grid must be nonempty with positive entries".into(),
        ));
    }
    let rate = alternative_rate(sys)?;
    let crude: Vec<f64> = n_grid.iter().map(|&n| crude_ld(rate.rate, n)).collect();
    if rate.rate <= 1e-12 {
        return Ok(ApproxCurve {
            n_grid: n_grid.to_vec(),
            rate: rate.rate,
            non_decaying: true,
            lattice_warning: sys.lattice_warning(),
            crude,
            exact_two_point: None,
            saddlepoint: None,
            mu: None,
            tilt: None,
            hessian_det: None,
        });
    }

    let exact = if sys.dim() == 1 {
        Some(
            n_grid
                .iter()
                .map(|&n| exact_asymptotic_two_point(sys, n).map(|r| r.log_prob))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };
    let mu = if sys.dim() == 1 {
        Some(two_point_root(sys)?.0)
    } else {
        None
    };
    let saddle: Vec<SaddlepointApprox> = n_grid
        .par_iter()
        .map(|&n| saddlepoint_leading(sys, n))
        .collect::<Result<Vec<_>>>()?;

    Ok(ApproxCurve {
        n_grid: n_grid.to_vec(),
        rate: rate.rate,
        non_decaying: false,
        lattice_warning: sys.lattice_warning(),
        crude,
        exact_two_point: exact,
        tilt: Some(saddle[0].tilt.clone()),
        hessian_det: Some(saddle[0].hessian_det),
        saddlepoint: Some(saddle.into_iter().map(|s| s.log_prob).collect()),
        mu,
    })
}
