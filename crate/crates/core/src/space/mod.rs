//! Weighted finite-dimensional ℓᵖ spaces, `1 < p < ∞`, with their unique
//! norm-inducing semi-inner product.
//!
//! For weights `w` the norm is `‖x‖ = (Σ w_i |x_i|^p)^{1/p}` and the
//! semi-inner product is
//!
//! ```text
//! [x, y] = ‖y‖^{2-p} Σ w_i x_i |y_i|^{p-1} sgn(y_i)
//! ```
//!
//! which is linear in `x`, real-homogeneous in `y`, and satisfies
//! `[x, x] = ‖x‖²`. The duality map sends `x` to the functional
//! `z ↦ [z, x]`; dual functionals are stored in plain coordinates and act by
//! the unweighted pairing `Σ a_i z_i`, so the dual norm carries the weights
//! `w_i^{1-q}`.
//!
//! All arithmetic is scaled by the largest coordinate magnitude before taking
//! powers, so large and tiny vectors do not overflow or flush to zero.

pub mod axioms;
mod orthogonality;
mod smoothness;

pub use orthogonality::{
    james_orthogonality_check, james_orthogonality_check_with, orthogonal_decompose,
    orthogonal_decompose_from, Decomposition, JamesCheck, JamesConfig,
};
pub use smoothness::{
    duality_continuity_probe, modulus_of_smoothness_estimate, modulus_of_smoothness_estimate_seeded,
    ContinuityReport, CONTINUITY_LADDER,
};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plain description of a weighted ℓᵖ space, as read from problem files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub dim: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, PartialEq)]
struct SpaceInner {
    dim: usize,
    p: f64,
    q: f64,
    weights: Vec<f64>,
    unit_weights: bool,
}

/// A validated weighted ℓᵖ space. Cheap to clone; vectors hold a handle to it.
#[derive(Clone, PartialEq)]
pub struct Space {
    inner: Arc<SpaceInner>,
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Space")
            .field("dim", &self.inner.dim)
            .field("p", &self.inner.p)
            .field("weights", &self.inner.weights)
            .finish()
    }
}

impl Space {
    /// Unweighted ℓᵖ space of dimension `dim`.
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        Self::build(dim, p, None)
    }

    pub fn weighted(p: f64, weights: Vec<f64>) -> Result<Self> {
        Self::build(weights.len(), p, Some(weights))
    }

    pub fn from_config(config: &SpaceConfig) -> Result<Self> {
        Self::build(config.dim, config.p, config.weights.clone())
    }

    fn build(dim: usize, p: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidSpace(format!(
                "exponent p = {p} outside the open interval (1, inf)"
            )));
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != dim {
                    return Err(Error::InvalidSpace(format!(
                        "expected {dim} weights, got {}",
                        w.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::InvalidSpace(format!("weight {bad} is not strictly positive")));
                }
                w
            }
            None => vec![1.0; dim],
        };
        let unit_weights = weights.iter().all(|&v| v == 1.0);
        Ok(Self {
            inner: Arc::new(SpaceInner {
                dim,
                p,
                q: p / (p - 1.0),
                weights,
                unit_weights,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn p(&self) -> f64 {
        self.inner.p
    }

    /// Conjugate exponent, `1/p + 1/q = 1`.
    pub fn q(&self) -> f64 {
        self.inner.q
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    pub fn is_hilbert(&self) -> bool {
        self.inner.p == 2.0
    }

    pub fn config(&self) -> SpaceConfig {
        SpaceConfig {
            dim: self.inner.dim,
            p: self.inner.p,
            weights: if self.inner.unit_weights {
                None
            } else {
                Some(self.inner.weights.clone())
            },
        }
    }

    pub fn vector(&self, coords: Vec<f64>) -> Result<Vector> {
        Vector::new(self, coords)
    }

    pub fn dual_vector(&self, coords: Vec<f64>) -> Result<DualVector> {
        DualVector::new(self, coords)
    }

    pub fn zero(&self) -> Vector {
        Vector {
            coords: vec![0.0; self.dim()],
            space: self.clone(),
        }
    }

    pub fn dual_zero(&self) -> DualVector {
        DualVector {
            coords: vec![0.0; self.dim()],
            space: self.clone(),
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(&self, i: usize) -> Vector {
        let mut v = self.zero();
        v.coords[i] = 1.0;
        v
    }

    pub(crate) fn same(&self, other: &Space) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `(Σ c_i |x_i|^r)^{1/r}` computed with scaling by the largest entry.
fn weighted_power_norm(xs: &[f64], coef: impl Fn(usize) -> f64, r: f64) -> f64 {
    let m = max_abs(xs);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, v)| coef(i) * (v.abs() / m).powf(r))
        .sum();
    m * s.powf(1.0 / r)
}

/// Element of the primal space.
#[derive(Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
    space: Space,
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector{:?}", self.coords)
    }
}

impl Vector {
    pub fn new(space: &Space, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::InvalidVector(format!(
                "expected {} coordinates, got {}",
                space.dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidVector("non-finite coordinate".into()));
        }
        Ok(Self {
            coords,
            space: space.clone(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        let w = self.space.weights();
        weighted_power_norm(&self.coords, |i| w[i], self.space.p())
    }

    /// Semi-inner product `[self, y]`, linear in `self`.
    ///
    /// Returns 0 when `y = 0`, the continuous extension of the formula.
    pub fn sip(&self, y: &Vector) -> f64 {
        assert!(self.space.same(&y.space), "vectors live in different spaces");
        let m = max_abs(&y.coords);
        if m == 0.0 {
            return 0.0;
        }
        let p = self.space.p();
        let w = self.space.weights();
        let y_hat_norm = weighted_power_norm(&y.coords, |i| w[i], p) / m;
        let s: f64 = self
            .coords
            .iter()
            .zip(&y.coords)
            .zip(w)
            .map(|((x, y), w)| w * x * signed_pow(y / m, p - 1.0))
            .sum();
        m * y_hat_norm.powf(2.0 - p) * s
    }

    /// Hessian of `½‖f‖²`, the derivative of the duality map. Same
    /// conventions as [`DualVector::half_sq_norm_hessian`], infinite at
    /// vanishing coordinates when `p < 2`.
    pub fn half_sq_norm_hessian(&self) -> Option<DMatrix<f64>> {
        half_sq_norm_hessian(&self.coords, self.space.p(), self.space.weights())
    }

    /// The functional `z ↦ [z, self]`.
    pub fn duality_map(&self) -> DualVector {
        let m = max_abs(&self.coords);
        if m == 0.0 {
            return self.space.dual_zero();
        }
        let p = self.space.p();
        let w = self.space.weights();
        let scale = m * (self.norm() / m).powf(2.0 - p);
        let coords = self
            .coords
            .iter()
            .zip(w)
            .map(|(x, w)| scale * w * signed_pow(x / m, p - 1.0))
            .collect();
        DualVector {
            coords,
            space: self.space.clone(),
        }
    }

    /// `g - ([g, f] / [f, f]) f`, the component of `g` tangent to the sphere
    /// through `f`.
    pub fn tangent_component(g: &Vector, f: &Vector) -> Result<Vector> {
        if f.is_zero() {
            return Err(Error::TangentAtOrigin);
        }
        let ratio = g.sip(f) / f.sip(f);
        Ok(g - &(f * ratio))
    }

    pub fn dot_coords(&self, other: &Vector) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        assert!(self.space.same(&x.space), "vectors live in different spaces");
        for (a, b) in self.coords.iter_mut().zip(&x.coords) {
            *a += alpha * b;
        }
    }
}

/// Free-function form of [`Vector::tangent_component`].
pub fn tangent_component(g: &Vector, f: &Vector) -> Result<Vector> {
    Vector::tangent_component(g, f)
}

#[inline]
fn signed_pow(v: f64, e: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * v.abs().powf(e)
    }
}

/// Element of the dual space, acting on [`Vector`]s by `Σ a_i z_i`.
#[derive(Clone, PartialEq)]
pub struct DualVector {
    coords: Vec<f64>,
    space: Space,
}

impl fmt::Debug for DualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DualVector{:?}", self.coords)
    }
}

impl DualVector {
    pub fn new(space: &Space, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::InvalidVector(format!(
                "expected {} dual coordinates, got {}",
                space.dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidVector("non-finite dual coordinate".into()));
        }
        Ok(Self {
            coords,
            space: space.clone(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn apply(&self, z: &Vector) -> f64 {
        assert!(self.space.same(&z.space), "vectors live in different spaces");
        self.coords.iter().zip(&z.coords).map(|(a, b)| a * b).sum()
    }

    /// `(Σ w_i^{1-q} |a_i|^q)^{1/q}`.
    pub fn dual_norm(&self) -> f64 {
        let q = self.space.q();
        let w = self.space.weights();
        weighted_power_norm(&self.coords, |i| w[i].powf(1.0 - q), q)
    }

    /// The unique `y` with `duality_map(y) = self`.
    pub fn inverse_duality_map(&self) -> Vector {
        let m = max_abs(&self.coords);
        if m == 0.0 {
            return self.space.zero();
        }
        let q = self.space.q();
        let w = self.space.weights();
        let scale = m * (self.dual_norm() / m).powf(2.0 - q);
        let coords = self
            .coords
            .iter()
            .zip(w)
            .map(|(a, w)| scale * signed_pow(a / m / w, q - 1.0))
            .collect();
        Vector {
            coords,
            space: self.space.clone(),
        }
    }

    /// Hessian of `½‖a‖_*²` in dual coordinates. Degree-0 homogeneous, so it
    /// is evaluated at `a / max|a|`. `None` at `a = 0` or where a coordinate
    /// vanishes and `q < 2` makes the Hessian infinite.
    pub fn half_sq_norm_hessian(&self) -> Option<DMatrix<f64>> {
        let q = self.space.q();
        let v: Vec<f64> = self.space.weights().iter().map(|w| w.powf(1.0 - q)).collect();
        half_sq_norm_hessian(&self.coords, q, &v)
    }

    pub fn axpy(&mut self, alpha: f64, a: &DualVector) {
        assert!(self.space.same(&a.space), "vectors live in different spaces");
        for (x, y) in self.coords.iter_mut().zip(&a.coords) {
            *x += alpha * y;
        }
    }

    /// `Σ c_i a_i`.
    pub fn combination(space: &Space, coefficients: &[f64], duals: &[DualVector]) -> DualVector {
        let mut acc = space.dual_zero();
        for (c, a) in coefficients.iter().zip(duals) {
            acc.axpy(*c, a);
        }
        acc
    }
}

pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

pub fn sip(x: &Vector, y: &Vector) -> f64 {
    x.sip(y)
}

pub fn duality_map(x: &Vector) -> DualVector {
    x.duality_map()
}

pub fn inverse_duality_map(a: &DualVector) -> Vector {
    a.inverse_duality_map()
}

pub fn dual_norm(a: &DualVector) -> f64 {
    a.dual_norm()
}

macro_rules! impl_linear_ops {
    ($t:ident) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                assert!(self.space.same(&rhs.space), "vectors live in different spaces");
                $t {
                    coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
                    space: self.space.clone(),
                }
            }
        }

        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                assert!(self.space.same(&rhs.space), "vectors live in different spaces");
                $t {
                    coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
                    space: self.space.clone(),
                }
            }
        }

        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                $t {
                    coords: self.coords.iter().map(|a| a * rhs).collect(),
                    space: self.space.clone(),
                }
            }
        }

        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }
    };
}

impl_linear_ops!(Vector);
impl_linear_ops!(DualVector);

/// Hessian of `½ (Σ v_k |x_k|^r)^{2/r}`, evaluated at `x / max|x|`.
fn half_sq_norm_hessian(coords: &[f64], r: f64, v: &[f64]) -> Option<DMatrix<f64>> {
    let m = max_abs(coords);
    if m == 0.0 {
        return None;
    }
    let x_hat: Vec<f64> = coords.iter().map(|x| x / m).collect();
    let n_hat = x_hat
        .iter()
        .zip(v)
        .map(|(x, v)| v * x.abs().powf(r))
        .sum::<f64>()
        .powf(1.0 / r);
    let g: Vec<f64> = x_hat
        .iter()
        .zip(v)
        .map(|(x, v)| v * x.abs().powf(r - 1.0) * x.signum())
        .collect();
    let rank_one = (2.0 - r) * n_hat.powf(2.0 - 2.0 * r);
    let diag = (r - 1.0) * n_hat.powf(2.0 - r);
    let dim = coords.len();
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let d = if i == j {
            diag * v[i] * x_hat[i].abs().powf(r - 2.0)
        } else {
            0.0
        };
        d + rank_one * g[i] * g[j]
    });
    h.iter().all(|x| x.is_finite()).then_some(h)
}
