//! Derivative-free 1-D search and a smooth descent driver shared by the
//! geometry routines and the representer solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_abs;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Brackets a minimiser of a convex, coercive `f` around `x0` by doubling.
///
/// Returns `(lo, hi)` with `lo < hi` and the minimiser inside.
pub fn bracket_minimum<F: FnMut(f64) -> f64>(
    f: &mut F,
    x0: f64,
    initial_step: f64,
    max_doublings: usize,
) -> Result<(f64, f64)> {
    let f0 = f(x0);
    let mut step = initial_step.abs().max(f64::MIN_POSITIVE);
    let (fr, fl) = (f(x0 + step), f(x0 - step));
    if fr >= f0 && fl >= f0 {
        return Ok((x0 - step, x0 + step));
    }
    let dir = if fr < fl { 1.0 } else { -1.0 };
    let mut prev = x0;
    let mut cur = x0 + dir * step;
    let mut f_cur = fr.min(fl);
    for _ in 0..max_doublings {
        step *= 2.0;
        let next = cur + dir * step;
        let f_next = f(next);
        if f_next >= f_cur {
            return Ok(if dir > 0.0 { (prev, next) } else { (next, prev) });
        }
        prev = cur;
        cur = next;
        f_cur = f_next;
    }
    let (lo, hi) = if dir > 0.0 { (prev, cur) } else { (cur, prev) };
    Err(Error::LineSearch {
        iterations: max_doublings,
        lo,
        hi,
    })
}

/// Golden-section search on `[lo, hi]` until the bracket is narrower than
/// `width`. Returns the best abscissa seen and its value.
pub fn golden_section<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut lo: f64,
    mut hi: f64,
    width: f64,
    max_iterations: usize,
) -> Result<(f64, f64)> {
    let mut b = hi - INV_PHI * (hi - lo);
    let mut c = lo + INV_PHI * (hi - lo);
    let mut fb = f(b);
    let mut fc = f(c);
    for _ in 0..max_iterations {
        if hi - lo <= width {
            return Ok(if fb <= fc { (b, fb) } else { (c, fc) });
        }
        if fb <= fc {
            hi = c;
            c = b;
            fc = fb;
            b = hi - INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            lo = b;
            b = c;
            fb = fc;
            c = lo + INV_PHI * (hi - lo);
            fc = f(c);
        }
    }
    if hi - lo <= width {
        return Ok(if fb <= fc { (b, fb) } else { (c, fc) });
    }
    Err(Error::LineSearch {
        iterations: max_iterations,
        lo,
        hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktrackingParams {
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Step contraction per rejected trial.
    pub contraction: f64,
    pub max_backtracks: usize,
}

impl Default for BacktrackingParams {
    fn default() -> Self {
        Self {
            armijo: 1e-4,
            contraction: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub max_iterations: usize,
    /// Stop once the gradient max-norm is at or below this.
    pub gradient_tolerance: f64,
    pub line_search: BacktrackingParams,
    /// Abort when the iterate's Euclidean norm exceeds this.
    pub divergence_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
}

/// Quasi-Newton (BFGS) descent with backtracking, optionally taking damped
/// Newton steps when `hessian` returns a matrix.
///
/// `objective` returns the value and gradient. Steps are accepted under a
/// sufficient-decrease test. Once value changes drop below rounding, a step
/// that shrinks the gradient is accepted if the decrease estimated from the
/// slopes at both ends is sufficient, so progress on the gradient continues.
pub fn minimize_smooth<F, H>(
    mut objective: F,
    mut hessian: Option<H>,
    x0: Vec<f64>,
    options: &DescentOptions,
) -> DescentOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    H: FnMut(&[f64]) -> Option<DMatrix<f64>>,
{
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let (mut fx, g) = objective(x.as_slice());
    let mut g = DVector::from_vec(g);
    let mut inv_h = DMatrix::<f64>::identity(n, n);
    let mut fresh_metric = true;
    let ls = options.line_search;

    let mut iterations = 0;
    loop {
        let gmax = max_abs(g.as_slice());
        if gmax <= options.gradient_tolerance {
            return outcome(x, fx, g, iterations, true, false);
        }
        if iterations >= options.max_iterations {
            return outcome(x, fx, g, iterations, false, false);
        }
        iterations += 1;

        let newton = hessian
            .as_mut()
            .and_then(|h| h(x.as_slice()))
            .and_then(|h| damped_newton_direction(&h, &g));
        let quasi = -(&inv_h * &g);
        let mut candidates = Vec::with_capacity(3);
        if let Some(d) = newton {
            candidates.push(d);
        }
        if quasi.dot(&g) < 0.0 {
            candidates.push(quasi);
        }
        // steepest descent, scaled to unit length on the first step
        let scale = if fresh_metric { 1.0 / g.norm().max(1.0) } else { 1.0 };
        candidates.push(-&g * scale);

        let mut accepted = None;
        for d in candidates {
            if let Some(step) = backtrack(&mut objective, &x, fx, &g, &d, &ls) {
                accepted = Some(step);
                break;
            }
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            let converged = max_abs(g.as_slice()) <= options.gradient_tolerance;
            return outcome(x, fx, g, iterations, converged, false);
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() && sy > 0.0 {
            if fresh_metric {
                inv_h = DMatrix::identity(n, n) * (sy / y.dot(&y));
                fresh_metric = false;
            }
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let left = &i - (&s * y.transpose()) * rho;
            let right = &i - (&y * s.transpose()) * rho;
            inv_h = &left * &inv_h * &right + (&s * s.transpose()) * rho;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if let Some(bound) = options.divergence_bound {
            if x.norm() > bound {
                return outcome(x, fx, g, iterations, false, true);
            }
        }
    }
}

fn outcome(
    x: DVector<f64>,
    value: f64,
    g: DVector<f64>,
    iterations: usize,
    converged: bool,
    diverged: bool,
) -> DescentOutcome {
    DescentOutcome {
        x: x.as_slice().to_vec(),
        value,
        gradient: g.as_slice().to_vec(),
        iterations,
        converged,
        diverged,
    }
}

fn damped_newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let diag_scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut damping = 0.0;
    for _ in 0..12 {
        let shifted = h + DMatrix::<f64>::identity(n, n) * damping;
        if let Some(chol) = shifted.cholesky() {
            let d = -chol.solve(g);
            if d.iter().all(|v| v.is_finite()) && d.dot(g) < 0.0 {
                return Some(d);
            }
        }
        damping = if damping == 0.0 { 1e-10 * diag_scale } else { damping * 100.0 };
    }
    None
}

fn backtrack<F>(
    objective: &mut F,
    x: &DVector<f64>,
    fx: f64,
    g: &DVector<f64>,
    d: &DVector<f64>,
    ls: &BacktrackingParams,
) -> Option<(DVector<f64>, f64, DVector<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let slope = g.dot(d);
    if !(slope < 0.0) {
        return None;
    }
    let noise = 8.0 * f64::EPSILON * (1.0 + fx.abs());
    let g_max = max_abs(g.as_slice());
    let mut alpha = 1.0;
    for _ in 0..ls.max_backtracks {
        let trial = x + d * alpha;
        let (ft, gt) = objective(trial.as_slice());
        if ft.is_finite() {
            let sufficient = ft <= fx + ls.armijo * alpha * slope;
            let shrinks = max_abs(&gt) < g_max;
            let within_noise = ft <= fx + noise && shrinks;
            // value differences near the optimum drown in cancellation;
            // estimate the decrease from the end slopes instead
            let end_slope = DVector::from_column_slice(&gt).dot(d);
            let trapezoid = 0.5 * alpha * (slope + end_slope) <= ls.armijo * alpha * slope;
            let flat = (ft - fx).abs() <= 1e-6 * (1.0 + fx.abs());
            if sufficient || within_noise || (flat && trapezoid && shrinks) {
                return Some((trial, ft, DVector::from_vec(gt)));
            }
        }
        alpha *= ls.contraction;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let mut f = |x: f64| (x - 0.3).powi(2) + 1.0;
        let (lo, hi) = bracket_minimum(&mut f, 5.0, 1.0, 60).unwrap();
        assert!(lo < 0.3 && 0.3 < hi);
        let (x, fx) = golden_section(&mut f, lo, hi, 1e-10, 500).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bracket_reports_failure_on_unbounded_descent() {
        let mut f = |x: f64| -x;
        let err = bracket_minimum(&mut f, 0.0, 1.0, 10).unwrap_err();
        assert!(matches!(err, Error::LineSearch { iterations: 10, .. }));
    }

    #[test]
    fn golden_section_reports_iteration_cap() {
        let mut f = |x: f64| x * x;
        assert!(golden_section(&mut f, -1.0, 1.0, 1e-12, 3).is_err());
    }

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (f, g)
    }

    fn opts(tol: f64) -> DescentOptions {
        DescentOptions {
            max_iterations: 1000,
            gradient_tolerance: tol,
            line_search: BacktrackingParams::default(),
            divergence_bound: None,
        }
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let no_hessian: Option<fn(&[f64]) -> Option<DMatrix<f64>>> = None;
        let out = minimize_smooth(rosenbrock, no_hessian, vec![-1.2, 1.0], &opts(1e-10));
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn newton_solves_quadratic_in_one_step() {
        let q = |x: &[f64]| {
            let g = vec![4.0 * x[0] + x[1] - 1.0, x[0] + 2.0 * x[1]];
            (2.0 * x[0] * x[0] + x[0] * x[1] + x[1] * x[1] - x[0], g)
        };
        let h = |_: &[f64]| Some(DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]));
        let out = minimize_smooth(q, Some(h), vec![3.0, -7.0], &opts(1e-13));
        assert!(out.converged);
        assert!(out.iterations <= 2);
        assert!((out.x[0] - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn divergence_is_flagged() {
        let no_hessian: Option<fn(&[f64]) -> Option<DMatrix<f64>>> = None;
        let mut o = opts(1e-10);
        o.divergence_bound = Some(100.0);
        let out = minimize_smooth(|x: &[f64]| (-x[0], vec![-1.0]), no_hessian, vec![0.0], &o);
        assert!(out.diverged && !out.converged);
    }
}
