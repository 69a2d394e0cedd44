//! Brute-force solvers for `min { Ω(f) : [f, x_i] = y_i }` over the whole
//! space. They touch the geometry only through `sip`, `norm` and
//! `Regulariser::evaluate`, so they can referee the representer solver.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::regulariser::Regulariser;
use crate::solver::InterpolationProblem;
use crate::space::{Space, Vector};

pub const MAX_PENALTY_DIM: usize = 10;
pub const MAX_GRID_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    #[default]
    Penalty,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub method: OracleMethod,
    /// First penalty weight `μ_0`.
    pub initial_weight: f64,
    /// `μ_{k+1} = growth · μ_k`.
    pub growth: f64,
    pub rounds: usize,
    /// Further rounds allowed while a start is still infeasible.
    pub extra_rounds: usize,
    /// Newton iterations per penalty round.
    pub inner_iterations: usize,
    /// Number of starting points, at least 8.
    pub multistarts: usize,
    /// Largest accepted constraint residual of the returned point.
    pub feasibility_tolerance: f64,
    /// Half-width of the grid box; chosen from the data when absent.
    pub grid_bound: Option<f64>,
    /// Grid points per axis, at least 16.
    pub grid_resolution: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            method: OracleMethod::Penalty,
            initial_weight: 1.0,
            growth: 10.0,
            rounds: 12,
            extra_rounds: 8,
            inner_iterations: 60,
            multistarts: 8,
            feasibility_tolerance: 1e-6,
            grid_bound: None,
            grid_resolution: 129,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.initial_weight.is_finite() && self.initial_weight > 0.0) {
            return bad("initial penalty weight must be positive");
        }
        if !(self.growth.is_finite() && self.growth > 1.0) {
            return bad("penalty weights must increase (growth > 1)");
        }
        if self.rounds == 0 || self.inner_iterations == 0 {
            return bad("penalty rounds and inner iterations must be positive");
        }
        if self.multistarts < 8 {
            return bad("at least 8 starting points are required");
        }
        if !(self.feasibility_tolerance.is_finite() && self.feasibility_tolerance > 0.0) {
            return bad("feasibility tolerance must be positive");
        }
        if self.grid_resolution < 16 {
            return bad("grid resolution must be at least 16 per axis");
        }
        if self.grid_bound.is_some_and(|b| !(b.is_finite() && b > 0.0)) {
            return bad("grid bound must be positive");
        }
        Ok(())
    }
}

/// Solves the constrained problem directly with the configured method.
pub fn solve_constrained_direct(
    problem: &InterpolationProblem,
    reg: &Regulariser,
    config: &OracleConfig,
) -> Result<Vector> {
    match config.method {
        OracleMethod::Penalty => penalty_min(problem, reg, config),
        OracleMethod::Grid => grid_min(problem, reg, config),
    }
}

/// `A_ij = [e_j, x_i]`; the constraints are `A f = y` because `[·, x_i]` is linear.
fn constraint_matrix(problem: &InterpolationProblem) -> DMatrix<f64> {
    let space = problem.space();
    let basis: Vec<Vector> = (0..space.dim()).map(|j| space.basis(j)).collect();
    DMatrix::from_fn(problem.len(), space.dim(), |i, j| basis[j].sip(&problem.points()[i]))
}

/// Euclidean least-norm solution of `A f = y`.
fn euclidean_feasible_point(a: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    linalg::least_norm_solve(a, y)
}

/// Quadratic penalty continuation, `Ω(f) + μ_k Σ ([f, x_i] − y_i)²`, from
/// several starts; returns the feasible result with the smallest `Ω`.
pub fn penalty_min(
    problem: &InterpolationProblem,
    reg: &Regulariser,
    config: &OracleConfig,
) -> Result<Vector> {
    config.validate()?;
    let space = problem.space();
    if space.dim() > MAX_PENALTY_DIM {
        return Err(Error::InvalidConfig(format!(
            "penalty oracle limited to dim ≤ {MAX_PENALTY_DIM}, got {}",
            space.dim()
        )));
    }
    let a = constraint_matrix(problem);
    let y = problem.targets();
    let anchor = euclidean_feasible_point(&a, y);
    let spread = 1.0 + linalg::euclidean_norm(&anchor);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = vec![vec![0.0; space.dim()], anchor.clone()];
    while starts.len() < config.multistarts {
        let kick: Vec<f64> = anchor
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                v + spread * z
            })
            .collect();
        starts.push(kick);
    }

    let penalised = Penalised { problem, reg, a: &a };
    let mut best: Option<(f64, Vector)> = None;
    let mut best_residual = f64::INFINITY;
    for start in starts {
        let mut f = space.vector(start)?;
        let mut mu = config.initial_weight;
        for round in 0..config.rounds + config.extra_rounds {
            if round >= config.rounds && problem.constraint_residual(&f) <= config.feasibility_tolerance {
                break;
            }
            f = penalised.newton(f, mu, config.inner_iterations)?;
            mu *= config.growth;
        }
        let residual = problem.constraint_residual(&f);
        best_residual = best_residual.min(residual);
        if residual > config.feasibility_tolerance {
            continue;
        }
        let omega = reg.evaluate(&f)?;
        if best.as_ref().is_none_or(|(b, _)| omega < *b) {
            best = Some((omega, f));
        }
    }
    best.map(|(_, f)| f).ok_or(Error::OracleInfeasible {
        residual: best_residual,
    })
}

struct Penalised<'a> {
    problem: &'a InterpolationProblem,
    reg: &'a Regulariser,
    a: &'a DMatrix<f64>,
}

impl Penalised<'_> {
    fn value(&self, f: &Vector, mu: f64) -> Result<f64> {
        let r = self.problem.residuals(f);
        Ok(self.reg.evaluate(f)? + mu * r.iter().map(|v| v * v).sum::<f64>())
    }

    fn omega_at(&self, space: &Space, x: &[f64]) -> Result<f64> {
        self.reg.evaluate(&space.vector(x.to_vec())?)
    }

    /// Central-difference gradient and Hessian of `Ω`.
    fn omega_derivatives(&self, f: &Vector) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let space = f.space();
        let n = space.dim();
        let x = f.coords();
        let o0 = self.reg.evaluate(f)?;
        let hg: Vec<f64> = x.iter().map(|v| 6e-6 * (1.0 + v.abs())).collect();
        let hh: Vec<f64> = x.iter().map(|v| 1e-4 * (1.0 + v.abs())).collect();
        let shifted = |pairs: &[(usize, f64)]| {
            let mut z = x.to_vec();
            for &(j, d) in pairs {
                z[j] += d;
            }
            self.omega_at(space, &z)
        };
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for j in 0..n {
            g[j] = (shifted(&[(j, hg[j])])? - shifted(&[(j, -hg[j])])?) / (2.0 * hg[j]);
            let d = hh[j];
            h[(j, j)] = (shifted(&[(j, d)])? - 2.0 * o0 + shifted(&[(j, -d)])?) / (d * d);
            for k in 0..j {
                let e = hh[k];
                let v = (shifted(&[(j, d), (k, e)])? - shifted(&[(j, d), (k, -e)])?
                    - shifted(&[(j, -d), (k, e)])?
                    + shifted(&[(j, -d), (k, -e)])?)
                    / (4.0 * d * e);
                h[(j, k)] = v;
                h[(k, j)] = v;
            }
        }
        Ok((g, h))
    }

    /// Levenberg-damped Newton with Armijo backtracking at fixed `μ`.
    fn newton(&self, mut f: Vector, mu: f64, iterations: usize) -> Result<Vector> {
        let space = f.space().clone();
        let n = space.dim();
        let ata = self.a.transpose() * self.a * (2.0 * mu);
        let mut fx = self.value(&f, mu)?;
        for _ in 0..iterations {
            let r = DVector::from_vec(self.problem.residuals(&f));
            let (g_omega, h_omega) = self.omega_derivatives(&f)?;
            let g = g_omega + self.a.transpose() * r * (2.0 * mu);
            let h = h_omega + &ata;
            let Some(d) = damped_direction(&h, &g, n) else {
                break;
            };
            let slope = g.dot(&d);
            let mut alpha = 1.0;
            let mut moved = None;
            for _ in 0..50 {
                let trial: Vec<f64> = f.coords().iter().zip(d.iter()).map(|(x, d)| x + alpha * d).collect();
                let trial = space.vector(trial)?;
                let ft = self.value(&trial, mu)?;
                if ft <= fx + 1e-4 * alpha * slope || (ft < fx && alpha < 1e-3) {
                    moved = Some((trial, ft));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((next, f_next)) = moved else {
                break;
            };
            let step = alpha * max_abs(d.as_slice());
            f = next;
            fx = f_next;
            if step <= 1e-13 * (1.0 + max_abs(f.coords())) {
                break;
            }
        }
        Ok(f)
    }
}

fn damped_direction(h: &DMatrix<f64>, g: &DVector<f64>, n: usize) -> Option<DVector<f64>> {
    if g.iter().all(|v| *v == 0.0) {
        return None;
    }
    let scale = h.diagonal().amax().max(1e-12);
    let mut lambda = 0.0;
    for _ in 0..20 {
        let shifted = h + DMatrix::<f64>::identity(n, n) * lambda;
        if let Some(chol) = shifted.cholesky() {
            let d = -chol.solve(g);
            if d.iter().all(|v| v.is_finite()) && d.dot(g) < 0.0 {
                return Some(d);
            }
        }
        lambda = if lambda == 0.0 { 1e-10 * scale } else { lambda * 10.0 };
    }
    None
}

/// Exhaustive scan of a uniform grid in `[-B, B]^dim`. A grid point counts as
/// feasible when `|[g, x_i] − y_i| ≤ ½ h Σ_j |[e_j, x_i]|` for spacing `h`,
/// which every cell touching the constraint set satisfies at its nearest
/// corner. Returns the feasible point with the smallest `Ω`.
pub fn grid_min(
    problem: &InterpolationProblem,
    reg: &Regulariser,
    config: &OracleConfig,
) -> Result<Vector> {
    config.validate()?;
    let space = problem.space();
    let dim = space.dim();
    if dim > MAX_GRID_DIM {
        return Err(Error::InvalidConfig(format!(
            "grid oracle limited to dim ≤ {MAX_GRID_DIM}, got {dim}"
        )));
    }
    let a = constraint_matrix(problem);
    let y = problem.targets();
    let bound = config.grid_bound.unwrap_or_else(|| auto_bound(space, &a, y));
    let n = config.grid_resolution;
    let h = grid_spacing(bound, n);
    let slab: Vec<f64> = (0..problem.len())
        .map(|i| 0.5 * h * a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = n.pow(dim as u32);
    let mut x = vec![0.0; dim];
    for index in 0..total {
        let mut rest = index;
        for xj in x.iter_mut() {
            *xj = -bound + (rest % n) as f64 * h;
            rest /= n;
        }
        let inside = (0..problem.len()).all(|i| {
            let ax: f64 = a.row(i).iter().zip(&x).map(|(a, x)| a * x).sum();
            (ax - y[i]).abs() <= slab[i]
        });
        if !inside {
            continue;
        }
        let omega = reg.evaluate(&space.vector(x.clone())?)?;
        if best.as_ref().is_none_or(|(b, _)| omega < *b) {
            best = Some((omega, x.clone()));
        }
    }
    match best {
        Some((_, x)) => space.vector(x),
        None => Err(Error::RefineGrid),
    }
}

/// Spacing of an `n`-point grid on `[-bound, bound]`.
pub fn grid_spacing(bound: f64, n: usize) -> f64 {
    2.0 * bound / (n - 1) as f64
}

/// Half-width that contains every point no larger in norm than the
/// Euclidean least-norm feasible point.
pub fn auto_bound(space: &Space, a: &DMatrix<f64>, y: &[f64]) -> f64 {
    let f = euclidean_feasible_point(a, y);
    let r = space.vector(f).map(|v| v.norm()).unwrap_or(0.0);
    let w_min = space.weights().iter().fold(f64::INFINITY, |m, w| m.min(*w));
    let b = 1.25 * r * w_min.powf(-1.0 / space.p());
    if b > 0.0 {
        b
    } else {
        1.0
    }
}

/// Grid bound and spacing [`grid_min`] would use for `problem`.
pub fn grid_geometry(problem: &InterpolationProblem, config: &OracleConfig) -> (f64, f64) {
    let a = constraint_matrix(problem);
    let bound = config
        .grid_bound
        .unwrap_or_else(|| auto_bound(problem.space(), &a, problem.targets()));
    (bound, grid_spacing(bound, config.grid_resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regulariser::RegulariserSpec;

    fn single_point_p3() -> InterpolationProblem {
        let s = Space::new(2, 3.0).unwrap();
        InterpolationProblem::from_coords(&s, vec![vec![1.0, 1.0]], vec![1.0]).unwrap()
    }

    fn power(alpha: f64) -> Regulariser {
        Regulariser::power(alpha).unwrap()
    }

    #[test]
    fn single_point_p3_matches_closed_form() {
        let f = penalty_min(&single_point_p3(), &power(1.0), &OracleConfig::default()).unwrap();
        let expect = 2f64.powf(-2.0 / 3.0);
        for v in f.coords() {
            assert!((v - expect).abs() < 1e-6 * expect, "{v}");
        }
        assert!(single_point_p3().constraint_residual(&f) <= 1e-6);
    }

    #[test]
    fn hilbert_case_is_pseudoinverse() {
        let s = Space::new(3, 2.0).unwrap();
        let pts = vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0]];
        let y = vec![1.0, 0.5];
        let p = InterpolationProblem::from_coords(&s, pts.clone(), y.clone()).unwrap();
        let f = penalty_min(&p, &power(1.0), &OracleConfig::default()).unwrap();
        let rows: Vec<&[f64]> = pts.iter().map(|r| r.as_slice()).collect();
        let expect = linalg::least_norm_solve(&linalg::matrix_from_rows(&rows), &y);
        for (a, b) in f.coords().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_targets_give_origin() {
        let p = single_point_p3().with_targets(vec![0.0]).unwrap();
        let f = penalty_min(&p, &power(0.5), &OracleConfig::default()).unwrap();
        assert!(f.is_zero());
        let g = grid_min(&p, &power(1.0), &OracleConfig::default()).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn infeasible_data_is_reported() {
        let s = Space::new(2, 3.0).unwrap();
        let p = InterpolationProblem::from_coords(&s, vec![vec![1.0, 0.0], vec![2.0, 0.0]], vec![1.0, 1.0])
            .unwrap();
        assert!(matches!(
            penalty_min(&p, &power(1.0), &OracleConfig::default()),
            Err(Error::OracleInfeasible { .. })
        ));
    }

    #[test]
    fn grid_lands_within_a_cell() {
        let cfg = OracleConfig {
            grid_resolution: 401,
            ..OracleConfig::default()
        };
        let expect = 2f64.powf(-2.0 / 3.0);
        let p = single_point_p3();
        let (_, h) = grid_geometry(&p, &cfg);
        let g = grid_min(&p, &power(1.0), &cfg).unwrap();
        for v in g.coords() {
            assert!((v - expect).abs() <= h, "{v} vs {expect} (h = {h})");
        }

        let s = Space::new(2, 2.0).unwrap();
        let p = InterpolationProblem::from_coords(&s, vec![vec![1.0, 2.0]], vec![1.5]).unwrap();
        let (_, h) = grid_geometry(&p, &cfg);
        let g = grid_min(&p, &power(1.0), &cfg).unwrap();
        for (v, e) in g.coords().iter().zip([0.3, 0.6]) {
            assert!((v - e).abs() <= h, "{v} vs {e} (h = {h})");
        }
    }

    #[test]
    fn grid_reports_empty_slab() {
        let cfg = OracleConfig {
            grid_bound: Some(0.1),
            ..OracleConfig::default()
        };
        assert_eq!(grid_min(&single_point_p3(), &power(1.0), &cfg).unwrap_err(), Error::RefineGrid);
    }

    #[test]
    fn config_is_validated() {
        let p = single_point_p3();
        for cfg in [
            OracleConfig { multistarts: 4, ..Default::default() },
            OracleConfig { growth: 1.0, ..Default::default() },
            OracleConfig { grid_resolution: 8, ..Default::default() },
        ] {
            assert!(matches!(penalty_min(&p, &power(1.0), &cfg), Err(Error::InvalidConfig(_))));
        }
        let big = Space::new(4, 3.0).unwrap();
        let q = InterpolationProblem::from_coords(&big, vec![vec![1.0; 4]], vec![1.0]).unwrap();
        assert!(grid_min(&q, &power(1.0), &OracleConfig::default()).is_err());
    }

    #[test]
    fn finds_non_radial_minimiser() {
        // Ω = Σ|f_j| on the line f_1 + 2 f_2 = 2 is minimised at (0, 1)
        let s = Space::new(2, 2.0).unwrap();
        let p = InterpolationProblem::from_coords(&s, vec![vec![1.0, 2.0]], vec![2.0]).unwrap();
        let reg = Regulariser::from_spec(&RegulariserSpec::BuiltinCustom { name: "sum_abs".into() }).unwrap();
        let cfg = OracleConfig { grid_resolution: 201, ..Default::default() };
        let g = grid_min(&p, &reg, &cfg).unwrap();
        let (_, h) = grid_geometry(&p, &cfg);
        assert!(g.coords()[0].abs() <= h && (g.coords()[1] - 1.0).abs() <= h);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = Space::new(3, 4.0).unwrap();
        let p = InterpolationProblem::from_coords(&s, vec![vec![1.0, -0.5, 0.2], vec![0.3, 0.3, 1.0]], vec![0.4, -1.0])
            .unwrap();
        let cfg = OracleConfig::default();
        assert_eq!(
            penalty_min(&p, &power(1.0), &cfg).unwrap(),
            penalty_min(&p, &power(1.0), &cfg).unwrap()
        );
    }
}
