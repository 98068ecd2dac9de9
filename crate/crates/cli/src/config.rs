use std::fmt;
use std::path::Path;
use std::sync::Arc;

use dispersive_lab::exponents::{parse_rational, EquationParams, FlowOrder, Rational};
use dispersive_lab::solver::{Nonlinearity, NonlinearityForm, PacketSpec};
use dispersive_lab::spectral::{GridAxis, TorusGrid};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Malformed or inconsistent configuration; maps to exit code 3.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(ConfigError(msg.into()).into())
}

/// Read a TOML or JSON config (by extension), apply a seed override and
/// return the raw value. The seed must be present in the file either way.
pub fn load_value(path: &Path, seed: Option<u64>) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?,
        _ => {
            let t: toml::Table = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            serde_json::to_value(t)?
        }
    };
    let Some(obj) = value.as_object_mut() else {
        return config_error("top level must be a table");
    };
    if !obj.contains_key("seed") {
        return config_error("missing field `seed`");
    }
    if let Some(s) = seed {
        obj.insert("seed".into(), s.into());
    }
    Ok(value)
}

pub fn parse_typed<T: DeserializeOwned>(value: serde_json::Value) -> anyhow::Result<T> {
    serde_json::from_value(value).map_err(|e| ConfigError(e.to_string()).into())
}

/// An exact rational given as an integer or a string such as `"1/2"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalInput {
    Int(i64),
    Text(String),
}

impl RationalInput {
    pub fn value(&self, field: &str) -> anyhow::Result<Rational> {
        match self {
            RationalInput::Int(n) => Ok(Rational::from_integer(*n as i128)),
            RationalInput::Text(s) => parse_rational(s).map_err(|e| ConfigError(format!("field `{field}`: {e}")).into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Nls,
    Nlw,
}

impl EquationKind {
    pub fn flow(self) -> FlowOrder {
        match self {
            EquationKind::Nls => FlowOrder::Schrodinger,
            EquationKind::Nlw => FlowOrder::Wave,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn power_preserving() -> NonlinearityForm {
    NonlinearityForm::PowerPreserving
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    pub kind: EquationKind,
    pub n: u32,
    pub k: u32,
    pub s: RationalInput,
    pub p: RationalInput,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "power_preserving")]
    pub form: NonlinearityForm,
}

impl EquationConfig {
    pub fn params(&self) -> anyhow::Result<EquationParams> {
        let s = self.s.value("equation.s")?;
        let p = self.p.value("equation.p")?;
        EquationParams::new(self.n, self.k, self.kind.flow(), s, p)
            .map_err(|e| ConfigError(format!("equation: {e}")).into())
    }

    pub fn nonlinearity(&self) -> anyhow::Result<Nonlinearity> {
        let p = dispersive_lab::exponents::rational_to_f64(&self.p.value("equation.p")?);
        Nonlinearity::new(p, self.lambda, self.form).map_err(|e| ConfigError(format!("equation: {e}")).into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Cube side length, with `points` per axis.
    pub extent: Option<f64>,
    pub points: Option<usize>,
    /// Per-axis extents and point counts instead of a cube.
    pub axes: Option<Vec<GridAxis>>,
}

impl GridConfig {
    /// Grid of dimension `dim` whose last `y_dims` axes are the y block.
    pub fn build(&self, dim: usize, y_dims: usize) -> anyhow::Result<Arc<TorusGrid>> {
        let axes = match (&self.axes, self.extent, self.points) {
            (Some(axes), None, None) => axes.clone(),
            (None, Some(extent), Some(points)) => vec![GridAxis { extent, points }; dim],
            (None, None, _) => return config_error("grid: missing field `extent`"),
            (None, _, None) => return config_error("grid: missing field `points`"),
            _ => return config_error("grid: give either `axes` or `extent` and `points`"),
        };
        if axes.len() != dim {
            return config_error(format!("grid.axes: expected {dim} axes, got {}", axes.len()));
        }
        if y_dims == 0 || y_dims >= dim {
            return config_error(format!("grid: y block of size {y_dims} does not fit {dim} axes"));
        }
        TorusGrid::new(axes, y_dims)
            .map(Arc::new)
            .map_err(|e| ConfigError(format!("grid: {e}")).into())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketConfig {
    pub count: usize,
    pub width: f64,
    pub max_wavenumber: f64,
    pub center_spread: f64,
    pub amplitude: f64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        let d = PacketSpec::default();
        PacketConfig {
            count: d.count,
            width: d.width,
            max_wavenumber: d.max_wavenumber,
            center_spread: d.center_spread,
            amplitude: d.amplitude,
        }
    }
}

impl From<PacketConfig> for PacketSpec {
    fn from(c: PacketConfig) -> Self {
        PacketSpec {
            count: c.count,
            width: c.width,
            max_wavenumber: c.max_wavenumber,
            center_spread: c.center_spread,
            amplitude: c.amplitude,
        }
    }
}

/// Initial data: random packets (default) or a constant value `[re, im]`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub packets: Option<PacketConfig>,
    pub constant: Option<[f64; 2]>,
}

pub fn default_anchor(anchor: &Option<String>, fallback: &str) -> String {
    anchor.clone().unwrap_or_else(|| fallback.to_string())
}
