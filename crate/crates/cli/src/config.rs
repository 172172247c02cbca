//! Run configuration: the TOML grammar, its validation, and the initial state it describes.

use std::path::{Path, PathBuf};

use alpha_patch::io::load_curve;
use alpha_patch::{
    reparametrize_uniform, shapes, ClosedCurve, Patch, PatchConfig, RegularizationSpec, Scheme, SimState, StepControl, Vec2,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    /// A key with a bad value; `key` is the dotted path, e.g. `patch[0].shape.radius`.
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), message: message.into() }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub scheme: Scheme,
    /// Nodes per patch.
    pub n: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Redistribute every initial curve to constant speed before placing it.
    #[serde(default)]
    pub reparametrize: bool,
    #[serde(default)]
    pub regularization: RegularizationSpec,
    #[serde(default)]
    pub control: StepControl,
    #[serde(rename = "patch")]
    pub patches: Vec<PatchSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    #[serde(default)]
    pub center: [f64; 2],
    /// Radians, counterclockwise.
    #[serde(default)]
    pub rotation: f64,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default = "one")]
    pub theta_in: f64,
    #[serde(default)]
    pub theta_out: f64,
    /// Replaces `Θ_α/2π` in front of the velocity integral.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    pub shape: ShapeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Counterclockwise,
    Clockwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Circle {
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `r(γ) = radius + Σ a_k cos kγ`, with `coefficients[0] = a_1`.
    FourierPerturbedCircle {
        #[serde(default = "one")]
        radius: f64,
        coefficients: Vec<f64>,
    },
    /// Snapshot file with header `gamma,x1,x2`; must hold exactly `n` rows.
    CsvFile {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// Parse and validate a config. Relative CSV paths are left as written.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        ConfigError::invalid(if key == "." { "(top level)".to_string() } else { key }, e.inner().message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read a config file; relative CSV paths are taken relative to the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in &mut cfg.patches {
        if let ShapeSpec::CsvFile { path } = &mut p.shape {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
    Ok(cfg)
}

/// The config with every default spelled out.
pub fn render_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config values are always representable in TOML")
}

fn finite(key: String, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be finite, got {x}")))
    }
}

fn positive(key: String, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ConfigError::invalid("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if self.scheme == Scheme::QgWithLambda && self.alpha != 1.0 {
            return Err(ConfigError::invalid("scheme", format!("qg_with_lambda requires alpha = 1, got alpha = {}", self.alpha)));
        }
        if self.n < 8 || self.n % 2 != 0 {
            return Err(ConfigError::invalid("n", format!("must be even and >= 8, got {}", self.n)));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(ConfigError::invalid("output_dir", "must not be empty"));
        }
        if self.patches.is_empty() {
            return Err(ConfigError::invalid("patch", "at least one [[patch]] table is required"));
        }
        for (name, value) in [("epsilon", self.regularization.epsilon), ("delta", self.regularization.delta)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::invalid(format!("regularization.{name}"), format!("must be finite and >= 0, got {value}")));
            }
        }
        self.control.validate().map_err(|m| ConfigError::invalid("control", m))?;
        for (i, p) in self.patches.iter().enumerate() {
            p.validate(i, self.alpha)?;
        }
        Ok(())
    }

    /// Build the patches at `t = 0`.
    pub fn initial_state(&self) -> Result<SimState, ConfigError> {
        let mut patches = Vec::with_capacity(self.patches.len());
        for (i, p) in self.patches.iter().enumerate() {
            let mut curve = p.shape.curve(self.n).map_err(|m| ConfigError::invalid(format!("patch[{i}].shape"), m))?;
            if self.reparametrize {
                curve = reparametrize_uniform(&curve).map_err(|e| ConfigError::invalid(format!("patch[{i}].shape"), e.to_string()))?;
            }
            let curve = shapes::place(&curve, Vec2::new(p.center[0], p.center[1]), p.rotation, p.orientation == Orientation::Clockwise);
            patches.push(Patch { curve, cfg: p.patch_config(self.alpha).map_err(|e| ConfigError::invalid(format!("patch[{i}]"), e))? });
        }
        SimState::new(patches, self.scheme, self.regularization).map_err(|e| ConfigError::invalid("patch", e.to_string()))
    }
}

impl PatchSpec {
    fn validate(&self, i: usize, alpha: f64) -> Result<(), ConfigError> {
        let key = |name: &str| format!("patch[{i}].{name}");
        finite(key("center"), self.center[0])?;
        finite(key("center"), self.center[1])?;
        finite(key("rotation"), self.rotation)?;
        finite(key("theta_in"), self.theta_in)?;
        finite(key("theta_out"), self.theta_out)?;
        if let Some(p) = self.prefactor {
            finite(key("prefactor"), p)?;
        }
        self.patch_config(alpha).map_err(|m| ConfigError::invalid(format!("patch[{i}]"), m))?;
        match &self.shape {
            ShapeSpec::Circle { radius } => positive(key("shape.radius"), *radius),
            ShapeSpec::Ellipse { a, b } => {
                positive(key("shape.a"), *a)?;
                positive(key("shape.b"), *b)
            }
            ShapeSpec::FourierPerturbedCircle { radius, coefficients } => {
                positive(key("shape.radius"), *radius)?;
                for (k, c) in coefficients.iter().enumerate() {
                    finite(key(&format!("shape.coefficients[{k}]")), *c)?;
                }
                Ok(())
            }
            ShapeSpec::CsvFile { path } => {
                if path.as_os_str().is_empty() {
                    Err(ConfigError::invalid(key("shape.path"), "must not be empty"))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn patch_config(&self, alpha: f64) -> Result<PatchConfig, String> {
        let cfg = PatchConfig::new(alpha, self.theta_in, self.theta_out).map_err(|e| e.to_string())?;
        Ok(match self.prefactor {
            Some(p) => cfg.with_prefactor(p),
            None => cfg,
        })
    }
}

impl ShapeSpec {
    pub fn curve(&self, n: usize) -> Result<ClosedCurve, String> {
        match self {
            ShapeSpec::Circle { radius } => Ok(shapes::circle(n, *radius)),
            ShapeSpec::Ellipse { a, b } => Ok(shapes::ellipse(n, *a, *b)),
            ShapeSpec::FourierPerturbedCircle { radius, coefficients } => {
                shapes::fourier_perturbed_circle(n, *radius, coefficients).map_err(|e| e.to_string())
            }
            ShapeSpec::CsvFile { path } => {
                let curve = load_curve(path).map_err(|e| e.to_string())?;
                if curve.len() != n {
                    return Err(format!("{} has {} nodes but n = {n}", path.display(), curve.len()));
                }
                Ok(curve)
            }
        }
    }
}
