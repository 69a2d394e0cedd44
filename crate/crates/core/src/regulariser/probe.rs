//! Sampling probes for the two equivalent admissibility criteria:
//! `Ω(f) ≤ Ω(f + f_T)` whenever `[f_T, f] = 0`, and `Ω(f̂) ≤ Ω(f)` whenever
//! `‖f̂‖ < ‖f‖`.
//!
//! A pass is sampled evidence only. A counterexample is a certificate: its
//! witness is re-evaluated and must violate the inequality by more than a
//! tenth of the probe tolerance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Regulariser;
use crate::error::Result;
use crate::sampling;
use crate::space::{tangent_component, Space, Vector};

/// Tangent lengths tried per sample, as multiples of `‖f‖`, each with both signs.
pub const TANGENT_LADDER: [f64; 6] = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];

const MAGNITUDE_RANGE: (f64, f64) = (1e-2, 1e2);
const NORM_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// Relative slack: a violation must exceed `tolerance · (1 + |Ω|)`.
    pub tolerance: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Tangential {
        f: Vec<f64>,
        f_t: Vec<f64>,
        omega_f: f64,
        omega_f_plus_t: f64,
    },
    Norm {
        f_hat: Vec<f64>,
        f: Vec<f64>,
        omega_f_hat: f64,
        omega_f: f64,
    },
}

impl Witness {
    /// How far the witness violates its inequality (positive means violated).
    pub fn margin(&self) -> f64 {
        match self {
            Self::Tangential {
                omega_f,
                omega_f_plus_t,
                ..
            } => omega_f - omega_f_plus_t,
            Self::Norm {
                omega_f_hat,
                omega_f,
                ..
            } => omega_f_hat - omega_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub samples_run: usize,
    pub seed: u64,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn slack(tol: f64, omega: f64) -> f64 {
    tol * (1.0 + omega.abs())
}

/// Samples `f` and tangents `f_T` (via [`tangent_component`]) over
/// [`TANGENT_LADDER`] and checks `Ω(f) ≤ Ω(f + f_T)`. The witness with the
/// largest violation is reported.
pub fn tangential_monotonicity_probe(
    reg: &Regulariser,
    space: &Space,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    tangential_probe_with(reg, space, n_samples, seed, &ProbeConfig::default())
}

pub fn tangential_probe_with(
    reg: &Regulariser,
    space: &Space,
    n_samples: usize,
    seed: u64,
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, Vector, Vector)> = None;
    let mut done = 0;
    while done < n_samples {
        let magnitude = sampling::log_uniform(&mut rng, MAGNITUDE_RANGE.0, MAGNITUDE_RANGE.1);
        let f = &sampling::unit_direction(&mut rng, space) * magnitude;
        let g = sampling::unit_direction(&mut rng, space);
        let t = tangent_component(&g, &f)?;
        let t_norm = t.norm();
        if t_norm <= 1e-8 {
            // g nearly parallel to f; dim 1 always lands here
            if space.dim() == 1 {
                done += 1;
            }
            continue;
        }
        done += 1;
        let omega_f = reg.evaluate(&f)?;
        for scale in TANGENT_LADDER {
            for sign in [1.0, -1.0] {
                let f_t = &t * (sign * scale * magnitude / t_norm);
                let omega_moved = reg.evaluate(&(&f + &f_t))?;
                let margin = omega_f - omega_moved;
                if margin > slack(config.tolerance, omega_f)
                    && worst.as_ref().is_none_or(|w| margin > w.0)
                {
                    worst = Some((margin, f.clone(), f_t));
                }
            }
        }
    }

    let witness = match worst {
        Some((_, f, f_t)) => {
            let omega_f = reg.evaluate(&f)?;
            let omega_f_plus_t = reg.evaluate(&(&f + &f_t))?;
            let tangent_ok = f_t.sip(&f).abs() <= 1e-10 * f_t.norm() * f.norm();
            let w = Witness::Tangential {
                f: f.into_coords(),
                f_t: f_t.into_coords(),
                omega_f,
                omega_f_plus_t,
            };
            (tangent_ok && w.margin() > slack(config.tolerance / 10.0, omega_f)).then_some(w)
        }
        None => None,
    };
    Ok(report("tangential", witness, n_samples, seed))
}

/// Samples pairs with `‖f̂‖ < ‖f‖` and checks `Ω(f̂) ≤ Ω(f)`.
pub fn norm_monotonicity_probe(
    reg: &Regulariser,
    space: &Space,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    norm_probe_with(reg, space, n_samples, seed, &ProbeConfig::default())
}

pub fn norm_probe_with(
    reg: &Regulariser,
    space: &Space,
    n_samples: usize,
    seed: u64,
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, Vector, Vector)> = None;
    let mut done = 0;
    while done < n_samples {
        let a = &sampling::unit_direction(&mut rng, space)
            * sampling::log_uniform(&mut rng, MAGNITUDE_RANGE.0, MAGNITUDE_RANGE.1);
        let b = &sampling::unit_direction(&mut rng, space)
            * sampling::log_uniform(&mut rng, MAGNITUDE_RANGE.0, MAGNITUDE_RANGE.1);
        let (f_hat, f) = if a.norm() < b.norm() { (a, b) } else { (b, a) };
        if f.norm() - f_hat.norm() < NORM_MARGIN {
            continue;
        }
        done += 1;
        let omega_hat = reg.evaluate(&f_hat)?;
        let omega = reg.evaluate(&f)?;
        let margin = omega_hat - omega;
        if margin > slack(config.tolerance, omega) && worst.as_ref().is_none_or(|w| margin > w.0) {
            worst = Some((margin, f_hat, f));
        }
    }

    let witness = match worst {
        Some((_, f_hat, f)) => {
            let omega_f_hat = reg.evaluate(&f_hat)?;
            let omega_f = reg.evaluate(&f)?;
            let ordered = f.norm() - f_hat.norm() >= NORM_MARGIN;
            let w = Witness::Norm {
                f_hat: f_hat.into_coords(),
                f: f.into_coords(),
                omega_f_hat,
                omega_f,
            };
            (ordered && w.margin() > slack(config.tolerance / 10.0, omega_f)).then_some(w)
        }
        None => None,
    };
    Ok(report("norm", witness, n_samples, seed))
}

fn report(probe: &str, witness: Option<Witness>, samples_run: usize, seed: u64) -> ProbeReport {
    ProbeReport {
        probe: probe.to_string(),
        verdict: if witness.is_some() {
            Verdict::Counterexample
        } else {
            Verdict::Pass
        },
        witness,
        samples_run,
        seed,
    }
}
