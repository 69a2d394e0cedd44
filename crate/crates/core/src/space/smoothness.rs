use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Space, Vector};
use crate::sampling;

const DEFAULT_SEED: u64 = 0x5eed;

/// Lower bound on the modulus of smoothness
/// `ρ(δ) = sup { (‖x+y‖ + ‖x-y‖)/2 - 1 : ‖x‖ = 1, ‖y‖ = δ }`
/// from random pairs plus a local hill-climb around the best ones.
pub fn modulus_of_smoothness_estimate(space: &Space, delta: f64, n_samples: usize) -> f64 {
    modulus_of_smoothness_estimate_seeded(space, delta, n_samples, DEFAULT_SEED)
}

pub fn modulus_of_smoothness_estimate_seeded(
    space: &Space,
    delta: f64,
    n_samples: usize,
    seed: u64,
) -> f64 {
    assert!(delta > 0.0, "delta must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = |x: &Vector, y: &Vector| {
        let plus = (x + y).norm();
        let minus = (x - y).norm();
        (plus + minus) / 2.0 - 1.0
    };
    let unit = |v: Vector| {
        let n = v.norm();
        &v * (1.0 / n)
    };

    let mut pool: Vec<(f64, Vector, Vector)> = Vec::with_capacity(n_samples + space.dim().pow(2));
    // axis pairs are where ℓᵖ is least smooth for p < 2
    for i in 0..space.dim() {
        for j in 0..space.dim() {
            if i != j {
                let x = unit(space.basis(i));
                let y = &unit(space.basis(j)) * delta;
                pool.push((gap(&x, &y), x, y));
            }
        }
    }
    for _ in 0..n_samples {
        let x = sampling::unit_direction(&mut rng, space);
        let y = &sampling::unit_direction(&mut rng, space) * delta;
        pool.push((gap(&x, &y), x, y));
    }
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    pool.truncate(4);

    let mut best = pool.first().map_or(0.0, |c| c.0);
    for (mut value, mut x, mut y) in pool {
        let mut step = 0.3;
        while step > 1e-6 {
            let mut improved = false;
            for _ in 0..8 {
                let dx = sampling::unit_direction(&mut rng, space);
                let dy = sampling::unit_direction(&mut rng, space);
                let cx = unit(&x + &(&dx * step));
                let cy = &unit(&y + &(&dy * (step * delta))) * delta;
                let cv = gap(&cx, &cy);
                if cv > value {
                    (value, x, y) = (cv, cx, cy);
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(value);
    }
    best.clamp(0.0, delta)
}

/// Perturbation sizes `‖h‖` used by [`duality_continuity_probe`].
pub const CONTINUITY_LADDER: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub ladder: Vec<f64>,
    /// Largest `‖J(x+h) - J(x)‖_*` per rung over all samples.
    pub max_distance: Vec<f64>,
    /// Largest ratio `‖J(x+h) - J(x)‖_* / ‖h‖` observed anywhere.
    pub max_ratio: f64,
    /// Every sample's distances decreased strictly along the ladder.
    pub monotone: bool,
    pub samples: usize,
}

/// Samples unit vectors away from the coordinate hyperplanes, perturbs them
/// along a geometric ladder and records how far the duality map moves.
pub fn duality_continuity_probe(space: &Space, n_samples: usize, seed: u64) -> ContinuityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_distance = vec![0.0_f64; CONTINUITY_LADDER.len()];
    let mut max_ratio = 0.0_f64;
    let mut monotone = true;
    for _ in 0..n_samples {
        let x = sampling::dense_unit_direction(&mut rng, space);
        let dir = sampling::unit_direction(&mut rng, space);
        let jx = x.duality_map();
        let mut prev = f64::INFINITY;
        for (k, &size) in CONTINUITY_LADDER.iter().enumerate() {
            let h = &dir * (size * rng.random_range(0.9..1.1) / dir.norm());
            let d = (&(&x + &h).duality_map() - &jx).dual_norm();
            if !(d < prev) {
                monotone = false;
            }
            prev = d;
            max_distance[k] = max_distance[k].max(d);
            max_ratio = max_ratio.max(d / h.norm());
        }
    }
    ContinuityReport {
        ladder: CONTINUITY_LADDER.to_vec(),
        max_distance,
        max_ratio,
        monotone,
        samples: n_samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_is_between_zero_and_delta() {
        for p in [1.2, 2.0, 5.0] {
            let s = Space::new(3, p).unwrap();
            for delta in [1.0, 0.1, 1e-3] {
                let e = modulus_of_smoothness_estimate(&s, delta, 200);
                assert!((0.0..=delta).contains(&e), "p={p} delta={delta} e={e}");
            }
        }
    }

    #[test]
    fn estimate_vanishes_with_delta() {
        let s = Space::new(2, 3.0).unwrap();
        assert!(modulus_of_smoothness_estimate(&s, 1e-6, 100) < 1e-10);
    }

    #[test]
    fn hilbert_modulus_matches_closed_form() {
        // parallelogram law: sup is attained at x ⟂ y with value √(1+δ²) - 1
        let s = Space::new(3, 2.0).unwrap();
        for delta in [0.5_f64, 0.1] {
            let exact = (1.0 + delta * delta).sqrt() - 1.0;
            let e = modulus_of_smoothness_estimate(&s, delta, 2000);
            assert!(e <= exact * (1.0 + 1e-12));
            assert!(e >= exact * (1.0 - 1e-3), "delta={delta}: {e} vs {exact}");
        }
    }

    #[test]
    fn hilbert_duality_map_is_an_isometry_of_differences() {
        let s = Space::new(4, 2.0).unwrap();
        let r = duality_continuity_probe(&s, 20, 3);
        assert!((r.max_ratio - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.monotone);
    }

    #[test]
    fn zero_perturbation_has_zero_distance() {
        let s = Space::new(3, 1.5).unwrap();
        let x = s.vector(vec![0.4, -0.7, 0.2]).unwrap();
        let d = (&(&x + &s.zero()).duality_map() - &x.duality_map()).dual_norm();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn p_one_and_a_half_ladder_decreases() {
        let s = Space::new(5, 1.5).unwrap();
        let r = duality_continuity_probe(&s, 50, 11);
        assert!(r.monotone);
        // rung 1e-6
        assert!(r.max_distance[5] < 1e-3, "{r:?}");
    }
}
