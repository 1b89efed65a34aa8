//! Information-inequality benchmarks and efficiency verdicts.
//!
//! Two exponent-level lower bounds on the misclassification risk:
//!
//! * Chapman–Robbins: for consistent estimators,
//!   lim (1/n) ln R₁(θ₀) ≥ −min_{θ₁≠θ₀} KL(θ₁ ‖ θ₀);
//! * minimax: for any estimator,
//!   liminf (1/n) ln sup_{θ₀} R₁ ≥ −min over pairs of Chernoff information.
//!
//! The negated Chapman–Robbins bound is also the cap on the inaccuracy
//! rate. Verdicts compare an estimator's measured exponents — least-squares
//! slopes of ln P against n over a grid with smallest n ≥ 25, with a ln n
//! regressor absorbing the √n-prefactor drift in two-point problems —
//! against the two bounds at a tolerance of 0.02 nats.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, ParamIndex};
use crate::numeric::least_squares;
use crate::rates::{chernoff_information, kl_divergence};

/// Verdict tolerance in nats, sized so the ½·ln n/n prefactor drift left
/// after the ln n regressor stays absorbed at n = 25.
pub const DEFAULT_TOLERANCE: f64 = 0.02;
/// Smallest sample size admitted into the exponent regression.
pub const MIN_REGRESSION_N: u64 = 25;

/// The information-inequality benchmarks for one truth point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub truth: ParamIndex,
    /// −min_{θ₁≠θ₀} KL(θ₁ ‖ θ₀) ≤ 0.
    pub cr_rate_bound: f64,
    /// −min over unordered pairs of Chernoff information ≤ 0.
    pub minimax_rate_bound: f64,
    /// min_{θ₁≠θ₀} KL(θ₁ ‖ θ₀) = −cr_rate_bound.
    pub inaccuracy_cap: f64,
    /// kl_matrix[a][b] = KL(a ‖ b).
    pub kl_matrix: Vec<Vec<f64>>,
    /// Symmetric Chernoff-information matrix.
    pub chernoff_matrix: Vec<Vec<f64>>,
}

/// Chapman–Robbins rate bound at θ₀: sup over alternatives of −KL(θ₁ ‖ θ₀).
pub fn chapman_robbins_bound(model: &Model, truth: ParamIndex) -> Result<f64> {
    model.space().check_index(truth)?;
    if model.space().alternatives() == 0 {
        return Err(Error::InvalidArgument(
            "a singleton space admits no information bound".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for j in 0..model.space().len() {
        if j != truth {
            best = best.max(-kl_divergence(model, j, truth)?);
        }
    }
    Ok(best)
}

/// Minimax rate bound: −min over pairs of Chernoff information (ordered and
/// unordered coincide by symmetry).
pub fn minimax_bound(model: &Model) -> Result<f64> {
    let len = model.space().len();
    if len < 2 {
        return Err(Error::InvalidArgument(
            "a singleton space admits no minimax bound".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    for a in 0..len {
        for b in (a + 1)..len {
            best = best.max(-chernoff_information(model, a, b)?.0);
        }
    }
    Ok(best)
}

/// Assemble both bounds plus the pairwise KL and Chernoff matrices.
pub fn bounds_report(model: &Model, truth: ParamIndex) -> Result<BoundsReport> {
    let len = model.space().len();
    let cr = chapman_robbins_bound(model, truth)?;
    let minimax = minimax_bound(model)?;
    let mut kl_matrix = vec![vec![0.0; len]; len];
    let mut chernoff_matrix = vec![vec![0.0; len]; len];
    for a in 0..len {
        for b in 0..len {
            kl_matrix[a][b] = kl_divergence(model, a, b)?;
        }
    }
    for a in 0..len {
        for b in (a + 1)..len {
            let (c, _) = chernoff_information(model, a, b)?;
            chernoff_matrix[a][b] = c;
            chernoff_matrix[b][a] = c;
        }
    }
    Ok(BoundsReport {
        truth,
        cr_rate_bound: cr,
        minimax_rate_bound: minimax,
        inaccuracy_cap: -cr,
        kl_matrix,
        chernoff_matrix,
    })
}

/// Measured error probabilities per truth point over an n grid:
/// `error_prob[t][k]` is ℙ_{θ_t}(estimator ≠ θ_t) at `n_grid[k]`.
#[derive(Debug, Clone)]
pub struct MeasuredCurves {
    pub n_grid: Vec<u64>,
    pub error_prob: Vec<Vec<f64>>,
}

/// Efficiency verdicts for a measured estimator.
#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyVerdict {
    /// Fitted exponent per truth point; `None` flags a degenerate (zero
    /// probability, slope −∞) curve.
    pub slope_per_truth: Vec<Option<f64>>,
    /// Fitted exponent of the worst-case (max over truth) probability.
    pub minimax_slope: Option<f64>,
    pub cr_rate_bound: f64,
    pub minimax_rate_bound: f64,
    pub tolerance: f64,
    /// |slope(θ₀) − cr_rate_bound| ≤ tolerance at the report's truth point.
    pub attains_cr: bool,
    /// |minimax slope − minimax_rate_bound| ≤ tolerance.
    pub attains_minimax: bool,
}

fn fit_slope(ns: &[u64], probs: &[f64], include_log_regressor: bool) -> Option<f64> {
    if probs.iter().any(|p| !(*p > 0.0)) {
        return None;
    }
    let rows: Vec<Vec<f64>> = ns
        .iter()
        .map(|&n| {
            let nf = n as f64;
            if include_log_regressor {
                vec![1.0, nf, nf.ln()]
            } else {
                vec![1.0, nf]
            }
        })
        .collect();
    let y: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    least_squares(&rows, &y).map(|beta| beta[1])
}

/// Compare measured exponents against the information bounds.
///
/// The grid is filtered to n ≥ 25 and at least four points must remain.
/// `include_log_regressor` adds a ln n column, which absorbs the n^{−1/2}
/// prefactor of two-point problems; verdicts use |slope − bound| ≤ tol.
pub fn efficiency_verdict(
    measured: &MeasuredCurves,
    report: &BoundsReport,
    include_log_regressor: bool,
    tolerance: f64,
) -> Result<EfficiencyVerdict> {
    let len = measured.error_prob.len();
    if report.truth >= len {
        return Err(Error::IndexOutOfRange {
            index: report.truth,
            len,
        });
    }
    if measured
        .error_prob
        .iter()
        .any(|row| row.len() != measured.n_grid.len())
    {
        return Err(Error::InvalidArgument(
            "curve rows must match the n grid".into(),
        ));
    }
    let keep: Vec<usize> = measured
        .n_grid
        .iter()
        .enumerate()
        .filter(|(_, &n)| n >= MIN_REGRESSION_N)
        .map(|(k, _)| k)
        .collect();
    if keep.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 grid points with n ≥ {MIN_REGRESSION_N}, have {}",
            keep.len()
        )));
    }
    let ns: Vec<u64> = keep.iter().map(|&k| measured.n_grid[k]).collect();

    let slope_per_truth: Vec<Option<f64>> = measured
        .error_prob
        .iter()
        .map(|row| {
            let probs: Vec<f64> = keep.iter().map(|&k| row[k]).collect();
            fit_slope(&ns, &probs, include_log_regressor)
        })
        .collect();

    let worst: Vec<f64> = keep
        .iter()
        .map(|&k| {
            measured
                .error_prob
                .iter()
                .map(|row| row[k])
                .fold(0.0f64, f64::max)
        })
        .collect();
    let minimax_slope = fit_slope(&ns, &worst, include_log_regressor);

    let attains_cr = slope_per_truth[report.truth]
        .map(|s| (s - report.cr_rate_bound).abs() <= tolerance)
        .unwrap_or(false);
    let attains_minimax = minimax_slope
        .map(|s| (s - report.minimax_rate_bound).abs() <= tolerance)
        .unwrap_or(false);

    Ok(EfficiencyVerdict {
        slope_per_truth,
        minimax_slope,
        cr_rate_bound: report.cr_rate_bound,
        minimax_rate_bound: report.minimax_rate_bound,
        tolerance,
        attains_cr,
        attains_minimax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, Model, ParamPoint, ParameterSpace};
    use crate::numeric::norm_cdf;
    use crate::testutil::gaussian_three_point;
    use crate::verify::gaussian_closed_form;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_gaussian_bounds() {
        let m = Model::gaussian_two_point(1.0, 1.0).unwrap();
        let cr = chapman_robbins_bound(&m, 0).unwrap();
        let mm = minimax_bound(&m).unwrap();
        assert_relative_eq!(cr, -2.0, epsilon = 1e-9);
        assert_relative_eq!(mm, -0.5, epsilon = 1e-9);
        // The minimax bound is the larger (less negative) of the two.
        assert!(mm > cr);
        let report = bounds_report(&m, 0).unwrap();
        assert_relative_eq!(report.inaccuracy_cap, 2.0, epsilon = 1e-9);
        assert_relative_eq!(report.kl_matrix[0][1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(report.chernoff_matrix[0][1], 0.5, epsilon = 1e-9);
        assert_eq!(report.kl_matrix[0][0], 0.0);
    }

    #[test]
    fn three_point_bounds_pick_the_nearest_alternative() {
        let m = gaussian_three_point();
        // KL(N(1,1) ‖ N(0,1)) = 1/2 is the smallest divergence into truth 0.
        assert_relative_eq!(chapman_robbins_bound(&m, 0).unwrap(), -0.5, epsilon = 1e-9);
        // Chernoff over the pair {0, 1}: 1/8.
        assert_relative_eq!(minimax_bound(&m).unwrap(), -0.125, epsilon = 1e-9);
    }

    #[test]
    fn tied_alternatives_leave_the_bound_unchanged() {
        // Rows at symmetric KL distance from the uniform truth row.
        let space = ParameterSpace::new(vec![
            ParamPoint::labeled("mid"),
            ParamPoint::labeled("hi"),
            ParamPoint::labeled("lo"),
        ])
        .unwrap();
        let m = Model::new(
            space,
            Family::Categorical {
                support: vec!["a".into(), "b".into()],
                pmf: vec![vec![0.5, 0.5], vec![0.6, 0.4], vec![0.4, 0.6]],
            },
        )
        .unwrap();
        let kl1 = kl_divergence(&m, 1, 0).unwrap();
        let kl2 = kl_divergence(&m, 2, 0).unwrap();
        assert_relative_eq!(kl1, kl2, epsilon = 1e-15);
        assert_relative_eq!(
            chapman_robbins_bound(&m, 0).unwrap(),
            -kl1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn singleton_space_is_rejected() {
        let space = ParameterSpace::new(vec![ParamPoint::scalar("only", 1.0)]).unwrap();
        let m = Model::new(space, Family::Poisson).unwrap();
        assert!(chapman_robbins_bound(&m, 0).is_err());
        assert!(minimax_bound(&m).is_err());
    }

    fn mle_curves(grid: &[u64]) -> MeasuredCurves {
        let error_prob: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                grid.iter()
                    .map(|&n| gaussian_closed_form(1.0, 1.0, n, 0.0).unwrap().0)
                    .collect()
            })
            .collect();
        MeasuredCurves {
            n_grid: grid.to_vec(),
            error_prob,
        }
    }

    #[test]
    fn mle_attains_minimax_but_not_chapman_robbins() {
        let m = Model::gaussian_two_point(1.0, 1.0).unwrap();
        let report = bounds_report(&m, 0).unwrap();
        let grid = [25u64, 50, 100, 200];
        let verdict =
            efficiency_verdict(&mle_curves(&grid), &report, true, DEFAULT_TOLERANCE).unwrap();
        assert!(verdict.attains_minimax, "slope {:?}", verdict.minimax_slope);
        assert!(!verdict.attains_cr);
        let slope = verdict.slope_per_truth[0].unwrap();
        assert!((slope + 0.5).abs() <= DEFAULT_TOLERANCE, "slope {slope}");
    }

    #[test]
    fn shifted_estimator_trades_pointwise_rate_for_worst_case() {
        let m = Model::gaussian_two_point(1.0, 1.0).unwrap();
        let report = bounds_report(&m, 0).unwrap();
        let grid = [25u64, 50, 100, 200];
        let shifted = MeasuredCurves {
            n_grid: grid.to_vec(),
            error_prob: vec![
                grid.iter()
                    .map(|&n| gaussian_closed_form(1.0, 1.0, n, 1.0).unwrap().0)
                    .collect(),
                grid.iter()
                    .map(|&n| gaussian_closed_form(1.0, 1.0, n, 1.0).unwrap().1)
                    .collect(),
            ],
        };
        let v_mle =
            efficiency_verdict(&mle_curves(&grid), &report, true, DEFAULT_TOLERANCE).unwrap();
        let v_shift =
            efficiency_verdict(&shifted, &report, true, DEFAULT_TOLERANCE).unwrap();
        // Faster under θ₀ (more negative slope), slower in the worst case.
        assert!(
            v_shift.slope_per_truth[0].unwrap() < v_mle.slope_per_truth[0].unwrap(),
            "{:?} vs {:?}",
            v_shift.slope_per_truth,
            v_mle.slope_per_truth
        );
        assert!(v_shift.minimax_slope.unwrap() > v_mle.minimax_slope.unwrap());
        assert!(!v_shift.attains_minimax);
    }

    #[test]
    fn constant_estimator_is_flagged() {
        let m = Model::gaussian_two_point(1.0, 1.0).unwrap();
        let report = bounds_report(&m, 0).unwrap();
        let grid = [25u64, 50, 100, 200];
        let constant = MeasuredCurves {
            n_grid: grid.to_vec(),
            error_prob: vec![vec![0.0; 4], vec![1.0; 4]],
        };
        let v = efficiency_verdict(&constant, &report, true, DEFAULT_TOLERANCE).unwrap();
        assert!(v.slope_per_truth[0].is_none());
        assert!(!v.attains_cr);
        // Worst-case probability is identically 1: slope 0, far from −1/2.
        assert_relative_eq!(v.minimax_slope.unwrap(), 0.0, epsilon = 1e-9);
        assert!(!v.attains_minimax);
    }

    #[test]
    fn too_few_grid_points_is_an_error() {
        let m = Model::gaussian_two_point(1.0, 1.0).unwrap();
        let report = bounds_report(&m, 0).unwrap();
        assert!(efficiency_verdict(
            &mle_curves(&[25, 50, 100]),
            &report,
            true,
            DEFAULT_TOLERANCE
        )
        .is_err());
        // Points below n = 25 are dropped before the count check.
        assert!(efficiency_verdict(
            &mle_curves(&[5, 10, 25, 50, 100]),
            &report,
            true,
            DEFAULT_TOLERANCE
        )
        .is_err());
    }

    #[test]
    fn no_estimator_in_the_family_beats_chapman_robbins() {
        // MLE, Bayes posterior modes and every consistent θ̃(k) keep their
        // per-truth exponents above the CR bound.
        let m = Model::gaussian_two_point(1.0, 1.0).unwrap();
        let report = bounds_report(&m, 0).unwrap();
        let grid: Vec<u64> = vec![25, 50, 100, 200, 400];

        let mut curve_sets: Vec<MeasuredCurves> = Vec::new();
        // θ̃(k) across the consistency range |k| < 2(α/σ)²; k = 0 is the MLE.
        for k in [-1.9, -1.0, 0.0, 0.5, 1.0, 1.9] {
            let rows: Vec<Vec<f64>> = vec![
                grid.iter()
                    .map(|&n| gaussian_closed_form(1.0, 1.0, n, k).unwrap().0)
                    .collect(),
                grid.iter()
                    .map(|&n| gaussian_closed_form(1.0, 1.0, n, k).unwrap().1)
                    .collect(),
            ];
            curve_sets.push(MeasuredCurves {
                n_grid: grid.clone(),
                error_prob: rows,
            });
        }
        // Bayes with prior (0.9, 0.1): the posterior threshold shifts the
        // sum criterion by ln(π₀/π₁), i.e. the mean criterion by O(1/n).
        let c = (0.9f64 / 0.1).ln();
        let bayes_rows: Vec<Vec<f64>> = vec![
            grid.iter()
                .map(|&n| {
                    let nf = n as f64;
                    norm_cdf(-(c / (2.0 * nf.sqrt()) + nf.sqrt()))
                })
                .collect(),
            grid.iter()
                .map(|&n| {
                    let nf = n as f64;
                    norm_cdf(c / (2.0 * nf.sqrt()) - nf.sqrt())
                })
                .collect(),
        ];
        curve_sets.push(MeasuredCurves {
            n_grid: grid.clone(),
            error_prob: bayes_rows,
        });

        for curves in &curve_sets {
            let v = efficiency_verdict(curves, &report, true, DEFAULT_TOLERANCE).unwrap();
            for slope in v.slope_per_truth.iter().flatten() {
                assert!(
                    *slope >= report.cr_rate_bound - DEFAULT_TOLERANCE,
                    "slope {slope} beats the CR bound {}",
                    report.cr_rate_bound
                );
            }
        }
    }
}
