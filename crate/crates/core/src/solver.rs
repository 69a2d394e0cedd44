//! Minimal-norm interpolation `min { ‖f‖ : [f, x_i] = y_i }` through the
//! smooth convex dual
//!
//! ```text
//! φ(c) = ½ ‖Σ c_i x_i*‖_*² − Σ c_i y_i
//! ```
//!
//! whose gradient at `c` is the residual vector `[f(c), x_i] − y_i` with
//! `f(c) = J⁻¹(Σ c_i x_i*)`. Any radial regulariser shares the minimiser.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::optimize::{minimize_smooth, BacktrackingParams, DescentOptions};
use crate::regulariser::{norm_monotonicity_probe, tangential_monotonicity_probe, Regulariser};
use crate::space::{DualVector, Space, Vector};

/// Data `(x_i, y_i)` for the constraints `[f, x_i] = y_i`.
#[derive(Debug, Clone)]
pub struct InterpolationProblem {
    space: Space,
    points: Vec<Vector>,
    targets: Vec<f64>,
    duals: Vec<DualVector>,
}

impl InterpolationProblem {
    pub fn new(points: Vec<Vector>, targets: Vec<f64>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidProblem("need at least one data point".into()));
        };
        let space = first.space().clone();
        if points.len() != targets.len() {
            return Err(Error::InvalidProblem(format!(
                "{} points but {} targets",
                points.len(),
                targets.len()
            )));
        }
        for (i, x) in points.iter().enumerate() {
            if x.space().config() != space.config() {
                return Err(Error::InvalidProblem(format!("point {i} lives in a different space")));
            }
            if x.is_zero() {
                return Err(Error::InvalidProblem(format!("point {i} is zero")));
            }
        }
        if let Some(i) = targets.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidProblem(format!("target {i} is not finite")));
        }
        // rebuild on one shared space handle
        let points: Vec<Vector> = points
            .into_iter()
            .map(|x| space.vector(x.into_coords()))
            .collect::<Result<_>>()?;
        let duals = points.iter().map(Vector::duality_map).collect();
        Ok(Self {
            space,
            points,
            targets,
            duals,
        })
    }

    pub fn from_coords(space: &Space, points: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let points = points
            .into_iter()
            .map(|c| space.vector(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, targets)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// `x_i*` for each data point.
    pub fn duals(&self) -> &[DualVector] {
        &self.duals
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points, new targets.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), targets)
    }

    /// `[f, x_i] − y_i`.
    pub fn residuals(&self, f: &Vector) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.targets)
            .map(|(x, y)| f.sip(x) - y)
            .collect()
    }

    /// `max_i |[f, x_i] − y_i|`.
    pub fn constraint_residual(&self, f: &Vector) -> f64 {
        max_abs(&self.residuals(f))
    }

    /// `X f - y` at the least-squares best fit of the linear system `X f = y`,
    /// where the rows of `X` are the data duals. Zero iff the data are
    /// consistent.
    pub fn best_fit_residuals(&self) -> Vec<f64> {
        self.best_fit().1
    }

    /// Euclidean least-norm `f` for `X f = y` and its residuals.
    fn best_fit(&self) -> (Vec<f64>, Vec<f64>) {
        let x = self.dual_matrix();
        let f = linalg::least_norm_solve(&x, &self.targets);
        let r = (0..self.len())
            .map(|i| {
                let row: f64 = x.row(i).iter().zip(&f).map(|(a, b)| a * b).sum();
                row - self.targets[i]
            })
            .collect();
        (f, r)
    }

    /// The `m × dim` matrix with rows `x_i*`; the constraints read `X f = y`.
    pub fn dual_matrix(&self) -> DMatrix<f64> {
        let rows: Vec<&[f64]> = self.duals.iter().map(DualVector::coords).collect();
        linalg::matrix_from_rows(&rows)
    }

    /// `1 + max(|y_i|, terms)`: the size of the quantities whose difference
    /// forms a residual, given a bound `terms` on `|[f, x_i]|`.
    fn residual_scale(&self, terms: f64) -> f64 {
        1.0 + max_abs(&self.targets).max(terms)
    }
}

/// The dual objective `φ` and its derivatives for a fixed problem.
#[derive(Debug, Clone, Copy)]
pub struct DualObjective<'a> {
    problem: &'a InterpolationProblem,
}

impl<'a> DualObjective<'a> {
    pub fn new(problem: &'a InterpolationProblem) -> Self {
        Self { problem }
    }

    /// `Σ c_i x_i*`.
    pub fn combination(&self, c: &[f64]) -> DualVector {
        DualVector::combination(&self.problem.space, c, &self.problem.duals)
    }

    /// `f(c) = J⁻¹(Σ c_i x_i*)`.
    pub fn primal(&self, c: &[f64]) -> Vector {
        self.combination(c).inverse_duality_map()
    }

    pub fn value(&self, c: &[f64]) -> f64 {
        let n = self.combination(c).dual_norm();
        let cy: f64 = c.iter().zip(&self.problem.targets).map(|(a, b)| a * b).sum();
        0.5 * n * n - cy
    }

    /// `∇φ(c)`, i.e. the constraint residuals of `f(c)`.
    pub fn gradient(&self, c: &[f64]) -> Vec<f64> {
        self.problem.residuals(&self.primal(c))
    }

    pub fn value_and_gradient(&self, c: &[f64]) -> (f64, Vec<f64>) {
        (self.value(c), self.gradient(c))
    }

    /// `∇²φ(c) = X H Xᵀ` with `H` the Hessian of `½‖·‖_*²`.
    ///
    /// Only available when `q ≥ 2`; for `q < 2` the Hessian blows up near
    /// dual elements with vanishing coordinates. `None` at `Σ c_i x_i* = 0`.
    pub fn hessian(&self, c: &[f64]) -> Option<DMatrix<f64>> {
        let space = &self.problem.space;
        if space.q() < 2.0 {
            return None;
        }
        let h = self.combination(c).half_sq_norm_hessian()?;
        let x = self.problem.dual_matrix();
        let hc = &x * h * x.transpose();
        hc.iter().all(|v| v.is_finite()).then_some(hc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianMode {
    /// Damped Newton steps whenever `q ≥ 2`, quasi-Newton otherwise.
    #[default]
    Auto,
    GradientOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Optimizer stopping threshold on the residual max-norm, in units of
    /// `1 + max(|y_i|, ‖x_i‖ ‖f‖)`.
    pub gradient_tolerance: f64,
    /// Largest accepted constraint residual, in the same units.
    pub feasibility_tolerance: f64,
    pub line_search: BacktrackingParams,
    pub hessian_mode: HessianMode,
    /// Coefficient norm beyond which the dual is treated as unbounded.
    pub divergence_bound: f64,
    /// Samples per probe when a custom regulariser is screened.
    pub probe_samples: usize,
    pub probe_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-13,
            feasibility_tolerance: 1e-10,
            line_search: BacktrackingParams::default(),
            hessian_mode: HessianMode::Auto,
            divergence_bound: 1e8,
            probe_samples: 2000,
            probe_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("gradient_tolerance", self.gradient_tolerance)?;
        positive("feasibility_tolerance", self.feasibility_tolerance)?;
        positive("divergence_bound", self.divergence_bound)?;
        let ls = &self.line_search;
        if !(ls.armijo > 0.0 && ls.armijo < 1.0) {
            return Err(Error::InvalidConfig("armijo constant must lie in (0, 1)".into()));
        }
        if !(ls.contraction > 0.0 && ls.contraction < 1.0) {
            return Err(Error::InvalidConfig("contraction must lie in (0, 1)".into()));
        }
        if self.max_iterations == 0 || ls.max_backtracks == 0 {
            return Err(Error::InvalidConfig("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub f: Vector,
    /// Representer coefficients: `J(f) = Σ c_i x_i*`.
    pub coefficients: Vec<f64>,
    pub constraint_residual: f64,
    pub peaking_gap: f64,
    pub dual_objective: f64,
    /// `Ω(f)`; `‖f‖` for the plain minimal-norm solve.
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimal-norm interpolant. Rank-deficient but consistent data yield the
/// Euclidean-smallest coefficient vector.
pub fn solve_min_norm(problem: &InterpolationProblem, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let x = problem.dual_matrix();

    // X f = y is linear in f, so consistency is a range test
    let (f_ls, ls_residuals) = problem.best_fit();
    let row_norm = x.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let ls_scale = problem.residual_scale(row_norm * linalg::euclidean_norm(&f_ls));
    let ls_residual = max_abs(&ls_residuals);
    if ls_residual > config.feasibility_tolerance * ls_scale {
        return Err(Error::Infeasible {
            residual: ls_residual,
            coefficient_norm: f64::INFINITY,
        });
    }

    let point_norm = problem.points.iter().map(Vector::norm).fold(0.0, f64::max);
    let start = warm_start(problem);
    // cancellation in Σ c_i x_i* limits the attainable residual to rounding
    // relative to ‖x_i‖ ‖f‖, not to |y_i|
    let start_scale = problem.residual_scale(point_norm * DualObjective::new(problem).primal(&start).norm());
    let dual = DualObjective::new(problem);
    let options = DescentOptions {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance * start_scale,
        line_search: config.line_search,
        divergence_bound: Some(config.divergence_bound),
    };
    let objective = |c: &[f64]| dual.value_and_gradient(c);
    let newton = config.hessian_mode == HessianMode::Auto && problem.space.q() >= 2.0;
    let outcome = if newton {
        minimize_smooth(objective, Some(|c: &[f64]| dual.hessian(c)), start, &options)
    } else {
        minimize_smooth(objective, None::<fn(&[f64]) -> Option<DMatrix<f64>>>, start, &options)
    };
    if outcome.diverged {
        return Err(Error::Infeasible {
            residual: max_abs(&outcome.gradient),
            coefficient_norm: linalg::euclidean_norm(&outcome.x),
        });
    }

    let mut c = outcome.x;
    let rows: Vec<&[f64]> = problem.duals.iter().map(DualVector::coords).collect();
    if linalg::rank(&rows) < problem.len() {
        let a = dual.combination(&c);
        c = linalg::least_norm_solve(&x.transpose(), a.coords());
    }
    let mut f = dual.primal(&c);
    if problem.space.p() > 2.0 {
        (f, c) = polish_primal(problem, f, c);
    }
    let constraint_residual = problem.constraint_residual(&f);
    let scale = problem.residual_scale(point_norm * f.norm());
    if constraint_residual > config.feasibility_tolerance * scale {
        return Err(Error::NoConvergence {
            iterations: outcome.iterations,
            gradient: constraint_residual,
            iterate: c,
        });
    }
    Ok(Solution {
        peaking_gap: peaking_gap(&f, &c, problem),
        dual_objective: dual.value(&c),
        objective_value: f.norm(),
        f,
        coefficients: c,
        constraint_residual,
        iterations: outcome.iterations,
        converged: true,
    })
}

/// Newton on the optimality system `J(f) = Σ c_i x_i*`, `[f, x_i] = y_i` in
/// `(f, c)`. For `p > 2`, `J⁻¹` has an infinite derivative where a
/// coordinate of `f` vanishes, so `f(c)` can miss the constraints by far
/// more than rounding in `c`; `J` itself is smooth.
fn polish_primal(problem: &InterpolationProblem, f: Vector, c: Vec<f64>) -> (Vector, Vec<f64>) {
    let x = problem.dual_matrix();
    let (m, n) = x.shape();
    let dual = DualObjective::new(problem);
    let system = |f: &Vector, c: &[f64]| -> Vec<f64> {
        let mut r = f.duality_map();
        r.axpy(-1.0, &dual.combination(c));
        let mut out = r.coords().to_vec();
        out.extend(problem.residuals(f));
        out
    };
    let (mut f, mut c) = (f, c);
    let mut residual = system(&f, &c);
    let mut merit = linalg::euclidean_norm(&residual);
    for _ in 0..50 {
        let Some(h) = f.half_sq_norm_hessian() else {
            break;
        };
        let k = DMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => h[(i, j)],
            (true, false) => -x[(j - n, i)],
            (false, true) => x[(i - n, j)],
            (false, false) => 0.0,
        });
        let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        let step = linalg::least_norm_solve(&k, &rhs);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let coords: Vec<f64> = f.coords().iter().zip(&step).map(|(a, d)| a + t * d).collect();
            let trial_c: Vec<f64> = c.iter().zip(&step[n..]).map(|(a, d)| a + t * d).collect();
            if let Ok(trial_f) = problem.space.vector(coords) {
                let r = system(&trial_f, &trial_c);
                let trial_merit = linalg::euclidean_norm(&r);
                if trial_merit < merit {
                    accepted = Some((trial_f, trial_c, r, trial_merit));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((nf, nc, r, nm)) = accepted else {
            break;
        };
        (f, c, residual, merit) = (nf, nc, r, nm);
    }
    (f, c)
}

/// Coefficients of the Hilbert-space (`p = 2`) solution, `G c = y` with
/// `G_ij = Σ_k w_k x_ik x_jk`.
fn warm_start(problem: &InterpolationProblem) -> Vec<f64> {
    let m = problem.len();
    let w = problem.space.weights();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (problem.points[i].coords(), problem.points[j].coords());
        a.iter().zip(b).zip(w).map(|((a, b), w)| w * a * b).sum()
    });
    linalg::least_norm_solve(&gram, &problem.targets)
}

/// Solves `min { Ω(f) : [f, x_i] = y_i }` for an admissible `Ω` through the
/// minimal-norm solution. Custom regularisers are screened with both
/// admissibility probes first.
pub fn solve_regularised(
    problem: &InterpolationProblem,
    reg: &Regulariser,
    config: &SolverConfig,
) -> Result<Solution> {
    if !reg.is_radial() {
        let space = problem.space();
        let (n, seed) = (config.probe_samples, config.probe_seed);
        let tangential = tangential_monotonicity_probe(reg, space, n, seed)?;
        let norm = norm_monotonicity_probe(reg, space, n, seed)?;
        if !(tangential.passed() && norm.passed()) {
            return Err(Error::NotAdmissible);
        }
    }
    let mut solution = solve_min_norm(problem, config)?;
    solution.objective_value = reg.evaluate(&solution.f)?;
    Ok(solution)
}

/// `‖Σ c_i x_i*‖_* ‖f₀‖ − (Σ c_i x_i*)(f₀)`, which vanishes exactly when the
/// combination peaks at `f₀`.
pub fn peaking_gap(f0: &Vector, c: &[f64], problem: &InterpolationProblem) -> f64 {
    let a = DualObjective::new(problem).combination(c);
    (a.dual_norm() * f0.norm() - a.apply(f0)).max(0.0)
}

/// `‖J(f) − Σ c_i x_i*‖_*` for a solution's `f` and coefficients.
pub fn verify_representer(solution: &Solution, problem: &InterpolationProblem) -> f64 {
    representer_deviation(&solution.f, &solution.coefficients, problem)
}

pub fn representer_deviation(f: &Vector, c: &[f64], problem: &InterpolationProblem) -> f64 {
    let mut d = f.duality_map();
    d.axpy(-1.0, &DualObjective::new(problem).combination(c));
    d.dual_norm()
}
