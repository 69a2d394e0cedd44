//! Regularisers `Ω: B → [0, ∞)`.
//!
//! Radial regularisers are `Ω(f) = h([f, f])` for a non-decreasing profile
//! `h`, possibly with finitely many jump radii; these are exactly the
//! regularisers that always admit an interpolant whose dual element lies in
//! the span of the data duals. Custom regularisers are arbitrary functions
//! and exist mainly so the admissibility probes have something to reject.

mod mollify;
mod probe;
mod profile;

pub use mollify::{mollify_radial, Mollifier};
pub use probe::{
    norm_monotonicity_probe, tangential_monotonicity_probe, ProbeConfig, ProbeReport, Verdict,
    Witness, TANGENT_LADDER,
};
pub use profile::{Piecewise, RadialProfile};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Vector;

/// Serializable description of a regulariser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegulariserSpec {
    /// `h(t) = t^alpha`, i.e. `Ω(f) = ‖f‖^{2 alpha}`.
    Power { alpha: f64 },
    /// Piecewise-affine in the radius `‖f‖` with jumps at `knots`; see
    /// [`Piecewise`].
    Piecewise {
        knots: Vec<f64>,
        values: Vec<f64>,
        at_jump: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slopes: Option<Vec<f64>>,
    },
    /// One of the named non-radial regularisers, see [`BUILTIN_CUSTOM`].
    BuiltinCustom { name: String },
}

/// Names accepted by [`RegulariserSpec::BuiltinCustom`].
pub const BUILTIN_CUSTOM: &[&str] = &["abs_first_coord", "sum_abs"];

type CustomFn = dyn Fn(&Vector) -> Result<f64> + Send + Sync;

#[derive(Clone)]
pub struct Custom {
    label: String,
    func: Arc<CustomFn>,
}

impl Custom {
    pub fn new<F>(label: impl Into<String>, func: F) -> Self
    where
        F: Fn(&Vector) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            func: Arc::new(func),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Custom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub enum Regulariser {
    Radial(RadialProfile),
    Custom(Custom),
}

impl Regulariser {
    pub fn power(alpha: f64) -> Result<Self> {
        Ok(Self::Radial(RadialProfile::power(alpha)?))
    }

    pub fn custom<F>(label: impl Into<String>, func: F) -> Self
    where
        F: Fn(&Vector) -> Result<f64> + Send + Sync + 'static,
    {
        Self::Custom(Custom::new(label, func))
    }

    pub fn from_spec(spec: &RegulariserSpec) -> Result<Self> {
        match spec {
            RegulariserSpec::Power { alpha } => Self::power(*alpha),
            RegulariserSpec::Piecewise {
                knots,
                values,
                at_jump,
                slopes,
            } => Ok(Self::Radial(RadialProfile::Piecewise(Piecewise::new(
                knots.clone(),
                values.clone(),
                at_jump.clone(),
                slopes.clone(),
            )?))),
            RegulariserSpec::BuiltinCustom { name } => builtin(name),
        }
    }

    /// The description this regulariser was built from, when it has one.
    pub fn spec(&self) -> Option<RegulariserSpec> {
        match self {
            Self::Radial(profile) => Some(profile.spec()),
            Self::Custom(c) if BUILTIN_CUSTOM.contains(&c.label.as_str()) => {
                Some(RegulariserSpec::BuiltinCustom {
                    name: c.label.clone(),
                })
            }
            Self::Custom(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Radial(profile) => profile.label(),
            Self::Custom(c) => c.label.clone(),
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Self::Radial(_))
    }

    /// `Ω(f)`; radial variants depend on `f` only through `‖f‖`.
    pub fn evaluate(&self, f: &Vector) -> Result<f64> {
        match self {
            Self::Radial(profile) => Ok(profile.at_radius(f.norm())),
            Self::Custom(c) => {
                let value = (c.func)(f)?;
                if value.is_finite() && value >= 0.0 {
                    Ok(value)
                } else {
                    Err(Error::InvalidRegulariserOutput {
                        label: c.label.clone(),
                        value,
                    })
                }
            }
        }
    }
}

/// Free-function form of [`Regulariser::evaluate`].
pub fn evaluate(reg: &Regulariser, f: &Vector) -> Result<f64> {
    reg.evaluate(f)
}

fn builtin(name: &str) -> Result<Regulariser> {
    match name {
        "abs_first_coord" => Ok(Regulariser::custom(name, |f: &Vector| Ok(f.coords()[0].abs()))),
        "sum_abs" => Ok(Regulariser::custom(name, |f: &Vector| {
            Ok(f.coords().iter().map(|v| v.abs()).sum())
        })),
        other => Err(Error::InvalidRegulariser(format!(
            "unknown builtin regulariser {other:?} (known: {})",
            BUILTIN_CUSTOM.join(", ")
        ))),
    }
}
