//! Seeded random interpolation problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::sampling;
use crate::solver::InterpolationProblem;
use crate::space::Space;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    pub count: usize,
    pub max_dim: usize,
    pub max_points: usize,
    pub p_list: Vec<f64>,
    /// Draw weights log-uniformly from `[1/4, 4]` instead of all ones.
    pub weighted: bool,
    pub seed: u64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            count: 50,
            max_dim: 6,
            max_points: 3,
            p_list: vec![1.5, 2.0, 3.0, 4.0],
            weighted: true,
            seed: 2024,
        }
    }
}

/// Smallest accepted ratio of extreme singular values of the data matrix.
const MIN_CONDITIONING: f64 = 1e-2;

/// One problem with Gaussian points and targets; redrawn until the data
/// duals are comfortably independent.
pub fn random_problem<R: Rng>(
    rng: &mut R,
    dim: usize,
    m: usize,
    p: f64,
    weighted: bool,
) -> Result<InterpolationProblem> {
    let weights: Vec<f64> = (0..dim)
        .map(|_| if weighted { sampling::log_uniform(rng, 0.25, 4.0) } else { 1.0 })
        .collect();
    let space = Space::weighted(p, weights)?;
    loop {
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let targets: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let Ok(problem) = InterpolationProblem::from_coords(&space, points, targets) else {
            continue;
        };
        let sv = problem.dual_matrix().singular_values();
        if sv.min() >= MIN_CONDITIONING * sv.max() {
            return Ok(problem);
        }
    }
}

pub fn problem_suite(spec: &SuiteSpec) -> Result<Vec<InterpolationProblem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|k| {
            let dim = rng.random_range(1..=spec.max_dim);
            let m = rng.random_range(1..=spec.max_points.min(dim));
            let p = spec.p_list[k % spec.p_list.len()];
            random_problem(&mut rng, dim, m, p, spec.weighted)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_reproducible_and_in_range() {
        let spec = SuiteSpec::default();
        let a = problem_suite(&spec).unwrap();
        let b = problem_suite(&spec).unwrap();
        assert_eq!(a.len(), 50);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.space().dim() <= 6 && x.len() <= 3 && x.len() <= x.space().dim());
            assert_eq!(x.targets(), y.targets());
            assert_eq!(x.points(), y.points());
        }
        let ps: Vec<f64> = a.iter().take(4).map(|p| p.space().p()).collect();
        assert_eq!(ps, vec![1.5, 2.0, 3.0, 4.0]);
    }
}
