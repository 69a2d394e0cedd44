use nalgebra::DMatrix;

use super::{Space, Vector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::optimize::{self, BacktrackingParams, DescentOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JamesConfig {
    /// Bound on `|λ*|`, in units of `‖x‖ / ‖y‖`.
    pub lambda_tolerance: f64,
    /// Allowed relative drop of `min_λ ‖x + λy‖` below `‖x‖`.
    pub norm_tolerance: f64,
    /// Golden-section stops at bracket width `width_factor · (1 + ‖x‖/‖y‖)`.
    pub width_factor: f64,
    pub max_iterations: usize,
}

impl Default for JamesConfig {
    fn default() -> Self {
        Self {
            lambda_tolerance: 1e-6,
            norm_tolerance: 1e-8,
            width_factor: 1e-12,
            max_iterations: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JamesCheck {
    pub lambda_star: f64,
    pub min_norm: f64,
    pub is_orthogonal: bool,
}

/// Tests whether `x` is James-orthogonal to `y`, i.e. `‖x + λy‖ ≥ ‖x‖` for
/// every real `λ`, by minimising `λ ↦ ‖x + λy‖` directly. Uses only the
/// norm, never the semi-inner product.
pub fn james_orthogonality_check(y: &Vector, x: &Vector) -> Result<JamesCheck> {
    james_orthogonality_check_with(y, x, &JamesConfig::default())
}

pub fn james_orthogonality_check_with(
    y: &Vector,
    x: &Vector,
    config: &JamesConfig,
) -> Result<JamesCheck> {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::InvalidVector(
            "James orthogonality needs nonzero vectors".into(),
        ));
    }
    let scale = nx / ny;
    let mut along = |lambda: f64| {
        let mut v = x.clone();
        v.axpy(lambda, y);
        v.norm()
    };
    let (lo, hi) = optimize::bracket_minimum(&mut along, 0.0, scale, 200)?;
    let width = config.width_factor * (1.0 + scale);
    let (lambda_star, min_norm) =
        optimize::golden_section(&mut along, lo, hi, width, config.max_iterations)?;
    let is_orthogonal = lambda_star.abs() <= config.lambda_tolerance * scale
        && min_norm >= nx * (1.0 - config.norm_tolerance);
    Ok(JamesCheck {
        lambda_star,
        min_norm,
        is_orthogonal,
    })
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Nearest point of the subspace.
    pub x0: Vector,
    /// Residual `x - x0` (up to rounding), normal to the subspace.
    pub x_perp: Vector,
    /// Coordinates of `x0` in the given basis.
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

/// Splits `x` into its metric projection onto `span(basis)` and a residual
/// with `[u, x_perp] = 0` for every basis vector `u`.
pub fn orthogonal_decompose(x: &Vector, basis: &[Vector]) -> Result<Decomposition> {
    orthogonal_decompose_from(x, basis, None)
}

/// As [`orthogonal_decompose`], starting the minimisation from the given
/// span coefficients instead of the weighted least-squares projection.
pub fn orthogonal_decompose_from(
    x: &Vector,
    basis: &[Vector],
    start: Option<&[f64]>,
) -> Result<Decomposition> {
    let space = x.space().clone();
    if basis.is_empty() {
        return Ok(Decomposition {
            x0: space.zero(),
            x_perp: x.clone(),
            coefficients: vec![],
            iterations: 0,
        });
    }
    let rows: Vec<&[f64]> = basis.iter().map(|u| u.coords()).collect();
    let rank = linalg::rank(&rows);
    if rank < basis.len() {
        return Err(Error::RankDeficient {
            rank,
            expected: basis.len(),
        });
    }
    let k = basis.len();
    let alpha0 = match start {
        Some(s) if s.len() == k => s.to_vec(),
        Some(s) => {
            return Err(Error::InvalidConfig(format!(
                "start has {} coefficients, basis has {k}",
                s.len()
            )))
        }
        None => weighted_projection(&space, x, basis),
    };

    let (alpha, dual_residual, iterations) = if space.p() < 2.0 {
        let (alpha, r, iterations) = annihilator_route(x, basis, &alpha0)?;
        (alpha, Some(r), iterations)
    } else {
        let (alpha, iterations) = direct_route(x, basis, alpha0)?;
        (alpha, None, iterations)
    };
    let mut x0 = space.zero();
    for (a, u) in alpha.iter().zip(basis) {
        x0.axpy(*a, u);
    }
    let mut x_perp = x - &x0;
    // for p < 2 the sip is only Hölder at zero coordinates, so rounding in
    // x - x0 can spoil orthogonality that J⁻¹(a) keeps
    if let Some(r) = dual_residual {
        if annihilation_error(&r, basis) < annihilation_error(&x_perp, basis) {
            x_perp = r;
        }
    }
    Ok(Decomposition {
        x0,
        x_perp,
        coefficients: alpha,
        iterations,
    })
}

fn annihilation_error(r: &Vector, basis: &[Vector]) -> f64 {
    basis.iter().map(|u| u.sip(r).abs() / u.norm()).fold(0.0, f64::max)
}

fn check_stall(out: optimize::DescentOutcome, tolerance: f64) -> Result<(Vec<f64>, usize)> {
    // stalled within rounding of the tolerance still certifies the split
    let gradient = linalg::max_abs(&out.gradient);
    if out.converged || gradient <= 1e3 * tolerance {
        Ok((out.x, out.iterations))
    } else {
        Err(Error::NoConvergence {
            iterations: out.iterations,
            gradient,
            iterate: out.x,
        })
    }
}

/// Minimises `½‖x - Σ α_j u_j‖²` over `α`. Smooth with bounded curvature
/// for `p ≥ 2`.
fn direct_route(x: &Vector, basis: &[Vector], alpha0: Vec<f64>) -> Result<(Vec<f64>, usize)> {
    let residual = |alpha: &[f64]| {
        let mut r = x.clone();
        for (a, u) in alpha.iter().zip(basis) {
            r.axpy(-a, u);
        }
        r
    };
    // gradient is -[u_j, r]
    let objective = |alpha: &[f64]| {
        let r = residual(alpha);
        let n = r.norm();
        let g = basis.iter().map(|u| -u.sip(&r)).collect();
        (0.5 * n * n, g)
    };
    let u_max = basis.iter().map(Vector::norm).fold(0.0, f64::max);
    let options = DescentOptions {
        max_iterations: 2000,
        gradient_tolerance: 1e-13 * u_max * x.norm().max(f64::MIN_POSITIVE),
        line_search: BacktrackingParams::default(),
        divergence_bound: None,
    };
    let no_hessian: Option<fn(&[f64]) -> Option<DMatrix<f64>>> = None;
    let out = optimize::minimize_smooth(objective, no_hessian, alpha0, &options);
    check_stall(out, options.gradient_tolerance)
}

/// For `p < 2` the residual is found through its dual element instead:
/// `a = J(x_perp)` annihilates every `u_j` and minimises `½‖a‖_*² - a(x)`
/// over that annihilator, where the dual norm has bounded curvature.
fn annihilator_route(x: &Vector, basis: &[Vector], alpha0: &[f64]) -> Result<(Vec<f64>, Vector, usize)> {
    let space = x.space();
    let (dim, k) = (space.dim(), basis.len());
    let rows: Vec<&[f64]> = basis.iter().map(Vector::coords).collect();
    let u = linalg::matrix_from_rows(&rows);
    let fit = |target: &[f64]| linalg::least_norm_solve(&u.transpose(), target);
    if k == dim {
        return Ok((fit(x.coords()), space.zero(), 0));
    }

    // orthonormal basis of {a : a(u_j) = 0}, from the projector I - Q Qᵀ
    let q = u.transpose().qr().q();
    let projector = DMatrix::<f64>::identity(dim, dim) - &q * q.transpose();
    let eigen = projector.symmetric_eigen();
    let keep: Vec<usize> = (0..dim).filter(|&i| eigen.eigenvalues[i] > 0.5).collect();
    let null = DMatrix::from_fn(dim, keep.len(), |i, j| eigen.eigenvectors[(i, keep[j])]);

    let dual_of = |beta: &[f64]| {
        let a = &null * nalgebra::DVector::from_column_slice(beta);
        space.dual_vector(a.as_slice().to_vec())
    };
    let objective = |beta: &[f64]| {
        let Ok(a) = dual_of(beta) else {
            return (f64::INFINITY, vec![0.0; beta.len()]);
        };
        let n = a.dual_norm();
        let diff = &a.inverse_duality_map() - x;
        let g = null.transpose() * nalgebra::DVector::from_column_slice(diff.coords());
        (0.5 * n * n - a.apply(x), g.as_slice().to_vec())
    };
    let hessian = |beta: &[f64]| {
        let h = dual_of(beta).ok()?.half_sq_norm_hessian()?;
        Some(null.transpose() * h * &null)
    };

    let mut r0 = x.clone();
    for (a, u) in alpha0.iter().zip(basis) {
        r0.axpy(-a, u);
    }
    let beta0 = null.transpose() * nalgebra::DVector::from_column_slice(r0.duality_map().coords());
    let options = DescentOptions {
        max_iterations: 2000,
        gradient_tolerance: 1e-13 * linalg::max_abs(x.coords()).max(f64::MIN_POSITIVE),
        line_search: BacktrackingParams::default(),
        divergence_bound: None,
    };
    let out = optimize::minimize_smooth(objective, Some(hessian), beta0.as_slice().to_vec(), &options);
    let iterations = out.iterations;
    let (beta, _) = check_stall(out, options.gradient_tolerance)?;
    let r = dual_of(&beta)?.inverse_duality_map();
    Ok((fit((x - &r).coords()), r, iterations))
}

/// Projection coefficients for the weighted ℓ² structure with the same
/// weights; exact when p = 2.
fn weighted_projection(space: &Space, x: &Vector, basis: &[Vector]) -> Vec<f64> {
    let w = space.weights();
    let k = basis.len();
    let wdot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(w).map(|((a, b), w)| w * a * b).sum()
    };
    let gram = DMatrix::from_fn(k, k, |i, j| wdot(basis[i].coords(), basis[j].coords()));
    let rhs: Vec<f64> = basis.iter().map(|u| wdot(u.coords(), x.coords())).collect();
    linalg::least_norm_solve(&gram, &rhs)
}
