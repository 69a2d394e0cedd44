use crate::error::{Error, Result};

use super::RegulariserSpec;

/// Grid resolution for the monotonicity check at construction.
const MONOTONE_GRID: usize = 4096;

/// Non-decreasing profile `h` with `Ω(f) = h([f, f])`.
///
/// Profiles are evaluated as functions of the radius `s = ‖f‖ = √t`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `h(t) = t^alpha`.
    Power { alpha: f64 },
    Piecewise(Piecewise),
}

impl RadialProfile {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidRegulariser(format!(
                "power exponent must be positive, got {alpha}"
            )));
        }
        Ok(Self::Power { alpha })
    }

    /// `h(t)` for `t = [f, f] ≥ 0`.
    pub fn h(&self, t: f64) -> f64 {
        self.at_radius(t.max(0.0).sqrt())
    }

    /// `h(s²)`.
    pub fn at_radius(&self, s: f64) -> f64 {
        match self {
            Self::Power { alpha } => s.powf(2.0 * alpha),
            Self::Piecewise(p) => p.at_radius(s),
        }
    }

    /// Radii where the profile may jump.
    pub fn jump_radii(&self) -> &[f64] {
        match self {
            Self::Power { .. } => &[],
            Self::Piecewise(p) => &p.knots,
        }
    }

    pub fn spec(&self) -> RegulariserSpec {
        match self {
            Self::Power { alpha } => RegulariserSpec::Power { alpha: *alpha },
            Self::Piecewise(p) => RegulariserSpec::Piecewise {
                knots: p.knots.clone(),
                values: p.values.clone(),
                at_jump: p.at_jump.clone(),
                slopes: if p.slopes.iter().all(|&v| v == 0.0) {
                    None
                } else {
                    Some(p.slopes.clone())
                },
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Power { alpha } => format!("power({alpha})"),
            Self::Piecewise(p) => format!("piecewise({} jumps)", p.knots.len()),
        }
    }
}

/// Piecewise-affine profile in the radius with jumps at `knots`.
///
/// With `r_0 = 0` and knots `r_1 < … < r_K`, segment `k` covers
/// `r_k < s < r_{k+1}` where `h = values[k] + slopes[k] · (s - r_k)`.
/// On the circle `s = r_k` the value is `at_jump[k-1]`, which must lie between
/// the left and right limits.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    at_jump: Vec<f64>,
}

impl Piecewise {
    pub fn new(
        knots: Vec<f64>,
        values: Vec<f64>,
        at_jump: Vec<f64>,
        slopes: Option<Vec<f64>>,
    ) -> Result<Self> {
        let k = knots.len();
        let bad = |msg: String| Err(Error::InvalidRegulariser(msg));
        if values.len() != k + 1 {
            return bad(format!("{k} knots need {} values, got {}", k + 1, values.len()));
        }
        if at_jump.len() != k {
            return bad(format!("{k} knots need {k} at_jump values, got {}", at_jump.len()));
        }
        let slopes = slopes.unwrap_or_else(|| vec![0.0; k + 1]);
        if slopes.len() != k + 1 {
            return bad(format!("{k} knots need {} slopes, got {}", k + 1, slopes.len()));
        }
        let all = knots.iter().chain(&values).chain(&at_jump).chain(&slopes);
        if all.clone().any(|v| !v.is_finite()) {
            return bad("non-finite profile parameter".into());
        }
        if knots.first().is_some_and(|&r| r <= 0.0) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return bad("knots must be positive and strictly increasing".into());
        }
        if slopes.iter().any(|&s| s < 0.0) {
            return bad("slopes must be non-negative".into());
        }
        if values[0] < 0.0 {
            return bad("profile must be non-negative".into());
        }
        let profile = Self {
            knots,
            values,
            slopes,
            at_jump,
        };
        for j in 0..k {
            let (left, right) = profile.limits_at(j);
            if right < left {
                return bad(format!(
                    "profile decreases across radius {}: {left} -> {right}",
                    profile.knots[j]
                ));
            }
            let v = profile.at_jump[j];
            if v < left || v > right {
                return bad(format!(
                    "at_jump value {v} at radius {} outside [{left}, {right}]",
                    profile.knots[j]
                ));
            }
        }
        profile.check_monotone_on_grid()?;
        Ok(profile)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn at_jump(&self) -> &[f64] {
        &self.at_jump
    }

    fn segment_start(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.knots[k - 1]
        }
    }

    /// Left and right limits of the profile at knot `j`.
    pub fn limits_at(&self, j: usize) -> (f64, f64) {
        let r = self.knots[j];
        let left = self.values[j] + self.slopes[j] * (r - self.segment_start(j));
        (left, self.values[j + 1])
    }

    pub fn at_radius(&self, s: f64) -> f64 {
        let k = self.knots.partition_point(|&r| r < s);
        if k < self.knots.len() && self.knots[k] == s {
            return self.at_jump[k];
        }
        self.values[k] + self.slopes[k] * (s - self.segment_start(k))
    }

    fn check_monotone_on_grid(&self) -> Result<()> {
        let top = self.knots.last().copied().unwrap_or(1.0) * 2.0;
        let mut prev = self.at_radius(0.0);
        for i in 1..=MONOTONE_GRID {
            let s = top * i as f64 / MONOTONE_GRID as f64;
            let v = self.at_radius(s);
            if v < prev {
                return Err(Error::InvalidRegulariser(format!(
                    "profile decreases near radius {s}"
                )));
            }
            prev = v;
        }
        Ok(())
    }
}
