//! Damped ascent with backtracking line search, with an optional projection
//! onto the nonnegative orthant.
//!
//! The objectives maximized here are concave (negated log-MGFs and
//! Fenchel-type objectives). The direction is a Newton step restricted to
//! the free variables when the reduced curvature admits a Cholesky factor,
//! and the gradient otherwise — in the gradient case the initial step is the
//! exact 1-D quadratic step gᵀg / gᵀ(−H)g so rank-deficient curvature (flat
//! subspaces) cannot slow the curved directions down.
//!
//! Termination targets a projected-gradient ∞-norm of 1e-9. Near a flat
//! optimum the objective improvement per step falls below f64 resolution, so
//! the line search also accepts value-neutral steps that strictly decrease
//! the projected gradient norm.

use crate::numeric::{cholesky, cholesky_solve, dot, norm_inf};

/// Convergence tolerance on the ∞-norm of the (projected) gradient.
pub const GRAD_TOL: f64 = 1e-9;
/// Iteration budget.
pub const MAX_ITERS: usize = 10_000;

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

pub struct Ascent<'a> {
    pub value: &'a dyn Fn(&[f64]) -> f64,
    pub gradient: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// Hessian of the *objective* (negative semidefinite for concave f).
    pub hessian: Option<&'a dyn Fn(&[f64]) -> Vec<Vec<f64>>>,
    /// Restrict the iterates to the nonnegative orthant.
    pub nonnegative: bool,
}

#[derive(Debug, Clone)]
pub struct AscentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn projected_gradient_norm(x: &[f64], g: &[f64], constrained: bool) -> f64 {
    if !constrained {
        return norm_inf(g);
    }
    let mut m = 0.0f64;
    for (&xi, &gi) in x.iter().zip(g) {
        let eff = if xi <= 0.0 { gi.max(0.0) } else { gi };
        m = m.max(eff.abs());
    }
    m
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

impl Ascent<'_> {
    /// Ascent direction and suggested initial step.
    fn direction(&self, x: &[f64], g: &[f64]) -> (Vec<f64>, f64) {
        let n = x.len();
        // Components pinned at the boundary and pulled outward stay frozen.
        let free: Vec<usize> = (0..n)
            .filter(|&j| !(self.nonnegative && x[j] <= 0.0 && g[j] <= 0.0))
            .collect();
        let mut dir = vec![0.0; n];
        if free.is_empty() {
            return (dir, 1.0);
        }
        let hess = match self.hessian {
            Some(h) => h(x),
            None => {
                for &j in &free {
                    dir[j] = g[j];
                }
                return (dir, 1.0);
            }
        };
        if hess.iter().flatten().any(|v| !v.is_finite()) {
            for &j in &free {
                dir[j] = g[j];
            }
            return (dir, 1.0);
        }
        // Reduced Newton on the free set.
        let neg: Vec<Vec<f64>> = free
            .iter()
            .map(|&r| free.iter().map(|&c| -hess[r][c]).collect())
            .collect();
        let g_free: Vec<f64> = free.iter().map(|&j| g[j]).collect();
        if let Some(l) = cholesky(&neg) {
            let d = cholesky_solve(&l, &g_free);
            if d.iter().all(|v| v.is_finite()) {
                for (k, &j) in free.iter().enumerate() {
                    dir[j] = d[k];
                }
                return (dir, 1.0);
            }
        }
        // Singular curvature: steepest ascent on the free set with the exact
        // step for the quadratic model, t* = gᵀg / gᵀ(−H)g.
        let mut hg = vec![0.0; free.len()];
        for (r, hr) in hg.iter_mut().enumerate() {
            *hr = neg[r].iter().zip(&g_free).map(|(h, gj)| h * gj).sum();
        }
        let curv = dot(&g_free, &hg);
        let gg = dot(&g_free, &g_free);
        let t = if curv > 0.0 {
            (gg / curv).clamp(1e-12, 1e12)
        } else {
            1.0
        };
        for &j in &free {
            dir[j] = g[j];
        }
        (dir, t)
    }

    /// Run the ascent from `x0`. Steps into non-finite territory are
    /// rejected by the line search.
    pub fn maximize(&self, x0: Vec<f64>) -> AscentResult {
        let mut x = x0;
        if self.nonnegative {
            project(&mut x);
        }
        let mut fx = (self.value)(&x);
        let mut g = (self.gradient)(&x);
        for iter in 0..MAX_ITERS {
            let gnorm = projected_gradient_norm(&x, &g, self.nonnegative);
            if gnorm <= GRAD_TOL {
                return AscentResult {
                    x,
                    value: fx,
                    gradient: g,
                    iterations: iter,
                    converged: true,
                };
            }

            let (dir, t0) = self.direction(&x, &g);
            let mut t = t0;
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                let mut cand: Vec<f64> =
                    x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
                if self.nonnegative {
                    project(&mut cand);
                }
                let gain: f64 = cand
                    .iter()
                    .zip(&x)
                    .zip(&g)
                    .map(|((c, xi), gi)| (c - xi) * gi)
                    .sum();
                if gain <= 0.0 {
                    t *= 0.5;
                    continue;
                }
                let fc = (self.value)(&cand);
                if fc.is_finite() && fc >= fx + ARMIJO_C1 * gain {
                    x = cand;
                    fx = fc;
                    g = (self.gradient)(&x);
                    accepted = true;
                    break;
                }
                // Plateau: the objective no longer resolves the step, so a
                // value-neutral move that shrinks the gradient still counts.
                if fc.is_finite() && fc >= fx - 1e-15 * fx.abs().max(1.0) {
                    let gc = (self.gradient)(&cand);
                    if projected_gradient_norm(&cand, &gc, self.nonnegative) < gnorm {
                        x = cand;
                        fx = fc.max(fx);
                        g = gc;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                let converged =
                    projected_gradient_norm(&x, &g, self.nonnegative) <= GRAD_TOL;
                return AscentResult {
                    x,
                    value: fx,
                    gradient: g,
                    iterations: iter + 1,
                    converged,
                };
            }
        }
        let converged = projected_gradient_norm(&x, &g, self.nonnegative) <= GRAD_TOL;
        AscentResult {
            x,
            value: fx,
            gradient: g,
            iterations: MAX_ITERS,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn maximizes_concave_quadratic() {
        // f(x) = -(x0-1)^2 - 2(x1+0.5)^2, max at (1, -0.5)
        let value = |x: &[f64]| -(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2);
        let gradient = |x: &[f64]| vec![-2.0 * (x[0] - 1.0), -4.0 * (x[1] + 0.5)];
        let hessian = |_: &[f64]| vec![vec![-2.0, 0.0], vec![0.0, -4.0]];
        let res = Ascent {
            value: &value,
            gradient: &gradient,
            hessian: Some(&hessian),
            nonnegative: false,
        }
        .maximize(vec![0.0, 0.0]);
        assert!(res.converged);
        assert_relative_eq!(res.x[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(res.x[1], -0.5, epsilon = 1e-8);
    }

    #[test]
    fn respects_nonnegativity_constraint() {
        // max of -(x0-1)^2 - (x1+2)^2 over x >= 0 is at (1, 0)
        let value = |x: &[f64]| -(x[0] - 1.0).powi(2) - (x[1] + 2.0).powi(2);
        let gradient = |x: &[f64]| vec![-2.0 * (x[0] - 1.0), -2.0 * (x[1] + 2.0)];
        let res = Ascent {
            value: &value,
            gradient: &gradient,
            hessian: None,
            nonnegative: true,
        }
        .maximize(vec![0.5, 0.5]);
        assert!(res.converged);
        assert_relative_eq!(res.x[0], 1.0, epsilon = 1e-7);
        assert_eq!(res.x[1], 0.0);
        // The active constraint keeps its negative multiplier.
        assert!(res.gradient[1] < 0.0);
    }

    #[test]
    fn flat_directions_do_not_stall_the_curved_ones() {
        // f(x) = -(x0+x1)^2 has rank-1 curvature; the exact-quadratic
        // gradient step lands on the flat optimum set in one move.
        let value = |x: &[f64]| -(x[0] + x[1]).powi(2);
        let gradient = |x: &[f64]| {
            let s = -2.0 * (x[0] + x[1]);
            vec![s, s]
        };
        let hessian = |_: &[f64]| vec![vec![-2.0, -2.0], vec![-2.0, -2.0]];
        let res = Ascent {
            value: &value,
            gradient: &gradient,
            hessian: Some(&hessian),
            nonnegative: false,
        }
        .maximize(vec![3.0, -1.0]);
        assert!(res.converged);
        assert_relative_eq!(res.x[0] + res.x[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn newton_from_an_active_corner_releases_the_right_component() {
        // Minimize a quadratic over x ⪰ 0 whose optimum pins x1 at zero
        // while x0 moves: f = -(x0-2)^2 - (x1+3)^2 - 0.1 x0 x1.
        let value = |x: &[f64]| -(x[0] - 2.0).powi(2) - (x[1] + 3.0).powi(2) - 0.1 * x[0] * x[1];
        let gradient = |x: &[f64]| {
            vec![
                -2.0 * (x[0] - 2.0) - 0.1 * x[1],
                -2.0 * (x[1] + 3.0) - 0.1 * x[0],
            ]
        };
        let hessian = |_: &[f64]| vec![vec![-2.0, -0.1], vec![-0.1, -2.0]];
        let res = Ascent {
            value: &value,
            gradient: &gradient,
            hessian: Some(&hessian),
            nonnegative: true,
        }
        .maximize(vec![0.0, 0.0]);
        assert!(res.converged);
        assert_relative_eq!(res.x[0], 2.0, epsilon = 1e-8);
        assert_eq!(res.x[1], 0.0);
    }
}
