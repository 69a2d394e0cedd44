//! On-disk formats and argument parsing helpers.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sip_interp::regulariser::BUILTIN_CUSTOM;
use sip_interp::{InterpolationProblem, Regulariser, RegulariserSpec, Space, SpaceConfig, Vector};

pub const FORMAT: u32 = 1;

fn format_v1() -> u32 {
    FORMAT
}

/// Parses JSON, reporting failures as `origin:line:column: path: message`.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let (line, column) = (inner.line(), inner.column());
        let msg = inner.to_string();
        let msg = msg
            .strip_suffix(&format!(" at line {line} column {column}"))
            .unwrap_or(&msg)
            .to_string();
        if path.is_empty() || path == "." {
            anyhow!("{origin}:{line}:{column}: {msg}")
        } else {
            anyhow!("{origin}:{line}:{column}: field `{path}`: {msg}")
        }
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_json(&text, &path.display().to_string())
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
pub fn print_text(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    print_text(&serde_json::to_string_pretty(value)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default = "format_v1")]
    pub format: u32,
    pub space: SpaceConfig,
    pub data: Vec<DataPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regulariser: Option<RegulariserSpec>,
}

fn check_format(format: u32) -> Result<()> {
    if format != FORMAT {
        bail!("field `format`: unsupported version {format}, expected {FORMAT}");
    }
    Ok(())
}

fn build_space(config: &SpaceConfig) -> Result<Space> {
    Space::from_config(config).map_err(|e| anyhow!("field `space`: {e}"))
}

fn build_vector(space: &Space, coords: Vec<f64>, field: &str) -> Result<Vector> {
    if coords.len() != space.dim() {
        bail!("field `{field}`: expected {} coordinates, got {}", space.dim(), coords.len());
    }
    space.vector(coords).map_err(|e| anyhow!("field `{field}`: {e}"))
}

impl ProblemFile {
    pub fn regulariser_spec(&self) -> RegulariserSpec {
        self.regulariser
            .clone()
            .unwrap_or(RegulariserSpec::Power { alpha: 1.0 })
    }

    pub fn build(&self) -> Result<(InterpolationProblem, Regulariser)> {
        check_format(self.format)?;
        let space = build_space(&self.space)?;
        if self.data.is_empty() {
            bail!("field `data`: need at least one data point");
        }
        let mut points = Vec::with_capacity(self.data.len());
        for (i, d) in self.data.iter().enumerate() {
            let x = build_vector(&space, d.x.clone(), &format!("data[{i}].x"))?;
            if x.is_zero() {
                bail!("field `data[{i}].x`: data point must be nonzero");
            }
            points.push(x);
        }
        let targets = self.data.iter().map(|d| d.y).collect();
        let problem = InterpolationProblem::new(points, targets).map_err(|e| anyhow!("field `data`: {e}"))?;
        let reg = Regulariser::from_spec(&self.regulariser_spec())
            .map_err(|e| anyhow!("field `regulariser`: {e}"))?;
        Ok((problem, reg))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Counterexample,
}

impl CheckVerdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Direct constrained solve recorded next to the representer solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheck {
    pub f: Vec<f64>,
    pub constraint_residual: f64,
    /// `‖f_oracle - f‖ / (1 + ‖f‖)`.
    pub distance: f64,
    pub tolerance: f64,
    pub verdict: CheckVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub format: u32,
    pub version: String,
    pub seed: u64,
    pub space: SpaceConfig,
    pub regulariser: RegulariserSpec,
    pub f: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub constraint_residual: f64,
    pub peaking_gap: f64,
    pub representer_deviation: f64,
    pub dual_objective: f64,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
}

impl ReportFile {
    pub fn validate(&self) -> Result<()> {
        check_format(self.format)?;
        let space = build_space(&self.space)?;
        Regulariser::from_spec(&self.regulariser).map_err(|e| anyhow!("field `regulariser`: {e}"))?;
        build_vector(&space, self.f.clone(), "f")?;
        let mut scalars = vec![
            ("constraint_residual", self.constraint_residual),
            ("peaking_gap", self.peaking_gap),
            ("representer_deviation", self.representer_deviation),
            ("dual_objective", self.dual_objective),
            ("objective_value", self.objective_value),
        ];
        if let Some(t) = self.wall_time {
            scalars.push(("wall_time", t));
        }
        if let Some(o) = &self.oracle {
            build_vector(&space, o.f.clone(), "oracle.f")?;
            scalars.push(("oracle.constraint_residual", o.constraint_residual));
            scalars.push(("oracle.distance", o.distance));
            scalars.push(("oracle.tolerance", o.tolerance));
        }
        for (name, v) in scalars {
            if !v.is_finite() {
                bail!("field `{name}`: value {v} is not finite");
            }
        }
        if let Some(i) = self.coefficients.iter().position(|c| !c.is_finite()) {
            bail!("field `coefficients[{i}]`: value is not finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeFile {
    #[serde(default = "format_v1")]
    pub format: u32,
    pub space: SpaceConfig,
    pub x: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl DecomposeFile {
    pub fn build(&self) -> Result<(Vector, Vec<Vector>)> {
        check_format(self.format)?;
        let space = build_space(&self.space)?;
        let x = build_vector(&space, self.x.clone(), "x")?;
        let basis = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, u)| build_vector(&space, u.clone(), &format!("basis[{i}]")))
            .collect::<Result<_>>()?;
        Ok((x, basis))
    }
}

/// Regulariser argument: inline JSON, a JSON file, `power:ALPHA`, or a
/// builtin custom name.
pub fn parse_regulariser_arg(arg: &str) -> Result<RegulariserSpec> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return parse_json(arg, "<inline>");
    }
    if let Some(alpha) = arg.strip_prefix("power:") {
        let alpha = alpha
            .parse()
            .with_context(|| format!("bad exponent in `{arg}`"))?;
        return Ok(RegulariserSpec::Power { alpha });
    }
    if BUILTIN_CUSTOM.contains(&arg) {
        return Ok(RegulariserSpec::BuiltinCustom { name: arg.to_string() });
    }
    let path = Path::new(arg);
    if path.is_file() {
        return read_json(path);
    }
    bail!(
        "cannot interpret regulariser `{arg}`: expected JSON, a file, power:ALPHA or one of {}",
        BUILTIN_CUSTOM.join(", ")
    )
}

/// Space argument: inline JSON `{"dim":..,"p":..}` or `DIM,P`.
pub fn parse_space_arg(arg: &str) -> Result<Space> {
    let arg = arg.trim();
    let config: SpaceConfig = if arg.starts_with('{') {
        parse_json(arg, "<inline>")?
    } else {
        let (dim, p) = arg
            .split_once(',')
            .ok_or_else(|| anyhow!("space `{arg}`: expected DIM,P or JSON"))?;
        SpaceConfig {
            dim: dim.trim().parse().with_context(|| format!("bad dimension in `{arg}`"))?,
            p: p.trim().parse().with_context(|| format!("bad exponent in `{arg}`"))?,
            weights: None,
        }
    };
    build_space(&config)
}
