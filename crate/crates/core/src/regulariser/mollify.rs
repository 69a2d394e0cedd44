//! Radial mollification `Ω̃(f) = ∫ ρ(t) Ω((‖f‖ - t) f/‖f‖) dt` with a bump
//! `ρ` supported in `[-width, 0]`.

use std::sync::Arc;

use super::{RadialProfile, Regulariser};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::space::{Space, Vector};

/// Smooth unit-mass bump `c (1 - (2t/width + 1)²)³` on `[-width, 0]`,
/// integrated with a fixed Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct Mollifier {
    width: f64,
    scale: f64,
    rule: GaussLegendre,
}

impl Mollifier {
    pub fn new(width: f64, n_quad: usize) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mollifier width must be positive, got {width}"
            )));
        }
        if n_quad < 8 {
            return Err(Error::InvalidConfig(format!(
                "mollifier needs at least 8 quadrature nodes, got {n_quad}"
            )));
        }
        // ∫_{-1}^{1} (1-u²)³ du = 32/35 and dt = width/2 du
        let m = Self {
            width,
            scale: 35.0 / (16.0 * width),
            rule: GaussLegendre::new(n_quad),
        };
        let mass = m.rule.integrate(-width, 0.0, |t| m.kernel(t));
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "mollifier mass {mass} differs from 1"
            )));
        }
        Ok(m)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn kernel(&self, t: f64) -> f64 {
        if !(-self.width..=0.0).contains(&t) {
            return 0.0;
        }
        let u = 2.0 * t / self.width + 1.0;
        self.scale * (1.0 - u * u).powi(3)
    }

    /// `max ρ`, which bounds the Lipschitz constant of a mollified unit step.
    pub fn kernel_max(&self) -> f64 {
        self.scale
    }

    /// First moment `∫ t ρ(t) dt`.
    pub fn mean(&self) -> f64 {
        self.rule.integrate(-self.width, 0.0, |t| t * self.kernel(t))
    }

    /// Mollified profile at radius `s`. The integration interval is split
    /// where `s - t` crosses a jump radius, so each piece is integrated
    /// exactly for polynomial segments and the result is continuous in `s`.
    pub fn profile_at(&self, profile: &RadialProfile, s: f64) -> f64 {
        let mut cuts = vec![-self.width];
        cuts.extend(
            profile
                .jump_radii()
                .iter()
                .map(|r| s - r)
                .filter(|t| *t > -self.width && *t < 0.0),
        );
        cuts.push(0.0);
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|w| {
                self.rule
                    .integrate(w[0], w[1], |t| self.kernel(t) * profile.at_radius(s - t))
            })
            .sum()
    }

    fn along_ray(&self, reg: &Regulariser, f: &Vector) -> Result<f64> {
        let n = f.norm();
        if n == 0.0 {
            return Err(Error::MollifyAtOrigin);
        }
        let dir = f * (1.0 / n);
        let mut acc = 0.0;
        let half = 0.5 * self.width;
        for (x, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let t = -half + half * x;
            acc += w * half * self.kernel(t) * reg.evaluate(&(&dir * (n - t)))?;
        }
        Ok(acc)
    }
}

/// Radially mollified copy of `reg` on `space`, returned as a custom
/// regulariser that rejects vectors from any other space.
///
/// Radial inputs stay rotation-blind and are defined at the origin; for
/// custom inputs the origin is rejected.
pub fn mollify_radial(
    reg: &Regulariser,
    space: &Space,
    width: f64,
    n_quad: usize,
) -> Result<Regulariser> {
    let mollifier = Arc::new(Mollifier::new(width, n_quad)?);
    let label = format!("mollified[{}; width={width}]", reg.label());
    let home = space.config();
    let check = move |f: &Vector| {
        if f.space().config() == home {
            Ok(())
        } else {
            Err(Error::InvalidVector("vector from a different space".into()))
        }
    };
    Ok(match reg {
        Regulariser::Radial(profile) => {
            let profile = profile.clone();
            Regulariser::custom(label, move |f: &Vector| {
                check(f)?;
                Ok(mollifier.profile_at(&profile, f.norm()))
            })
        }
        Regulariser::Custom(_) => {
            let inner = reg.clone();
            Regulariser::custom(label, move |f: &Vector| {
                check(f)?;
                mollifier.along_ray(&inner, f)
            })
        }
    })
}
