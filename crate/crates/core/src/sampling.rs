//! Seeded samplers used by the probes and property suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::space::{Space, Vector};

/// Direction uniform on the Euclidean sphere, rescaled to unit ℓᵖ norm.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, space: &Space) -> Vector {
    loop {
        let coords: Vec<f64> = (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let v = space.vector(coords).expect("gaussian samples are finite");
        let n = v.norm();
        if n > 1e-12 {
            return &v * (1.0 / n);
        }
    }
}

/// Unit vector whose coordinates all have magnitude within a factor 3 of
/// each other, i.e. well away from the coordinate hyperplanes.
pub fn dense_unit_direction<R: Rng + ?Sized>(rng: &mut R, space: &Space) -> Vector {
    let coords: Vec<f64> = (0..space.dim())
        .map(|_| {
            let m: f64 = rng.random_range(0.5..1.5);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    let v = space.vector(coords).expect("finite");
    let n = v.norm();
    &v * (1.0 / n)
}

/// Log-uniform sample from `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let t: f64 = rng.random_range(lo.ln()..=hi.ln());
    t.exp()
}
