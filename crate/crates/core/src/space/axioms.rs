//! Randomised check of the semi-inner-product axioms and the duality-map
//! identities, split into independent `(p, dim)` cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Space, Vector};
use crate::error::{Error, Result};
use crate::sampling;

pub const AXIOMS: [&str; 7] = [
    "linearity",
    "homogeneity",
    "positivity",
    "cauchy_schwarz",
    "norm_consistency",
    "isometry",
    "riesz",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomSuiteConfig {
    pub p_list: Vec<f64>,
    pub dims: Vec<usize>,
    /// Total number of sampled triples, spread over all cases.
    pub samples: usize,
    pub seed: u64,
    /// Relative tolerance on every axiom.
    pub tolerance: f64,
}

impl Default for AxiomSuiteConfig {
    fn default() -> Self {
        Self {
            p_list: vec![1.2, 1.5, 2.0, 3.0, 4.0, 7.0],
            dims: vec![1, 2, 3, 5, 10],
            samples: 10_000,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

impl AxiomSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        if self.p_list.is_empty() || self.dims.is_empty() {
            return Err(Error::InvalidConfig("need at least one p and one dim".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        for &p in &self.p_list {
            Space::new(1, p)?;
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidConfig("dims must be positive".into()));
        }
        Ok(())
    }

    /// The `(p, dim)` cases with their sample counts and seeds.
    pub fn cases(&self) -> Vec<AxiomCase> {
        let total = self.p_list.len() * self.dims.len();
        let mut out = Vec::with_capacity(total);
        for (i, &p) in self.p_list.iter().enumerate() {
            for (j, &dim) in self.dims.iter().enumerate() {
                let k = i * self.dims.len() + j;
                let samples = self.samples / total + usize::from(k < self.samples % total);
                out.push(AxiomCase {
                    p,
                    dim,
                    samples,
                    seed: self.seed.wrapping_add(k as u64),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxiomCase {
    pub p: f64,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
}

/// The sample that produced an axiom's largest violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub p: f64,
    pub weights: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub scalars: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomResult {
    pub axiom: String,
    pub max_violation: f64,
    pub worst: Option<Triple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub tolerance: f64,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.max_violation <= self.tolerance)
    }

    fn empty(tolerance: f64) -> Self {
        Self {
            samples: 0,
            tolerance,
            results: AXIOMS
                .iter()
                .map(|a| AxiomResult {
                    axiom: a.to_string(),
                    max_violation: 0.0,
                    worst: None,
                })
                .collect(),
        }
    }

    /// Combines case reports; ties keep the earlier case, so the result does
    /// not depend on how cases were scheduled.
    pub fn merge(tolerance: f64, parts: impl IntoIterator<Item = AxiomReport>) -> Self {
        let mut acc = Self::empty(tolerance);
        for part in parts {
            acc.samples += part.samples;
            for (a, b) in acc.results.iter_mut().zip(part.results) {
                if b.max_violation > a.max_violation {
                    *a = b;
                }
            }
        }
        acc
    }
}

pub fn run_axiom_suite(config: &AxiomSuiteConfig) -> Result<AxiomReport> {
    config.validate()?;
    let parts = config
        .cases()
        .iter()
        .map(|c| run_axiom_case(c, config.tolerance))
        .collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport::merge(config.tolerance, parts))
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn sample_vector<R: Rng>(rng: &mut R, space: &Space) -> Vector {
    let r = sampling::log_uniform(rng, 1e-2, 1e2);
    &sampling::unit_direction(rng, space) * r
}

pub fn run_axiom_case(case: &AxiomCase, tolerance: f64) -> Result<AxiomReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    let weights: Vec<f64> = (0..case.dim).map(|_| sampling::log_uniform(&mut rng, 0.25, 4.0)).collect();
    let space = Space::weighted(case.p, weights.clone())?;
    let mut report = AxiomReport::empty(tolerance);
    report.samples = case.samples;

    for _ in 0..case.samples {
        let (x, y, z) = (
            sample_vector(&mut rng, &space),
            sample_vector(&mut rng, &space),
            sample_vector(&mut rng, &space),
        );
        let (a, b) = (normal(&mut rng), normal(&mut rng));
        let lambda = normal(&mut rng) * sampling::log_uniform(&mut rng, 1e-2, 1e2);
        let (nx, ny, nz) = (x.norm(), y.norm(), z.norm());

        let combo = &(&x * a) + &(&y * b);
        let lin = (combo.sip(&z) - a * x.sip(&z) - b * y.sip(&z)).abs()
            / ((a.abs() * nx + b.abs() * ny) * nz);
        let hom = (x.sip(&(&y * lambda)) - lambda * x.sip(&y)).abs() / (lambda.abs() * nx * ny);
        let xx = x.sip(&x);
        let pos = if xx > 0.0 { 0.0 } else { 1.0 };
        let cs = ((x.sip(&y).abs() - nx * ny) / (nx * ny)).max(0.0);
        let consistency = (xx - nx * nx).abs() / (nx * nx);
        let xs = x.duality_map();
        let iso = (xs.dual_norm() - nx).abs() / nx;
        let riesz = (xs.apply(&y) - y.sip(&x)).abs() / (nx * ny);

        for (k, v) in [lin, hom, pos, cs, consistency, iso, riesz].into_iter().enumerate() {
            let slot = &mut report.results[k];
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if v > slot.max_violation {
                slot.max_violation = v;
                slot.worst = Some(Triple {
                    p: case.p,
                    weights: weights.clone(),
                    x: x.coords().to_vec(),
                    y: y.coords().to_vec(),
                    z: z.coords().to_vec(),
                    scalars: if k == 1 { [lambda, 0.0] } else { [a, b] },
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = AxiomSuiteConfig {
            samples: 600,
            ..Default::default()
        };
        let r = run_axiom_suite(&cfg).unwrap();
        assert_eq!(r.samples, 600);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn cases_split_samples_exactly() {
        let cfg = AxiomSuiteConfig {
            samples: 31,
            ..Default::default()
        };
        let cases = cfg.cases();
        assert_eq!(cases.len(), 30);
        assert_eq!(cases.iter().map(|c| c.samples).sum::<usize>(), 31);
    }

    #[test]
    fn merge_is_order_independent_for_distinct_maxima() {
        let cfg = AxiomSuiteConfig {
            samples: 120,
            ..Default::default()
        };
        let parts: Vec<_> = cfg.cases().iter().map(|c| run_axiom_case(c, 1e-9).unwrap()).collect();
        let forward = AxiomReport::merge(1e-9, parts.clone());
        let backward = AxiomReport::merge(1e-9, parts.into_iter().rev());
        for (a, b) in forward.results.iter().zip(&backward.results) {
            assert_eq!(a.max_violation, b.max_violation);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_p = AxiomSuiteConfig {
            p_list: vec![1.0],
            ..Default::default()
        };
        assert!(run_axiom_suite(&bad_p).is_err());
        let no_samples = AxiomSuiteConfig {
            samples: 0,
            ..Default::default()
        };
        assert!(run_axiom_suite(&no_samples).is_err());
    }
}
