//! Run configuration: JSON on disk, overridable field by field.

use std::fs;
use std::path::{Path, PathBuf};

use adiacheck_core::conditions::Thresholds;
use adiacheck_core::propagate::PropagatorOptions;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    Amin {
        epsilon: f64,
        #[serde(rename = "V", alias = "v")]
        v: f64,
        omega0: f64,
    },
    LandauZener {
        /// Sweep rate of the diagonal, centred at `T/2`.
        v: f64,
        delta: f64,
    },
    Constant {
        /// Rows of entries, each a number or a `[re, im]` pair.
        matrix: Vec<Vec<MatrixEntry>>,
    },
    CustomCsv {
        path: PathBuf,
    },
    DualOf {
        scenario: Box<ScenarioConfig>,
    },
    RandomSmooth {
        dim: usize,
        seed: u64,
        coupling: f64,
    },
}

impl ScenarioConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioConfig::Amin { .. } => "amin",
            ScenarioConfig::LandauZener { .. } => "landau_zener",
            ScenarioConfig::Constant { .. } => "constant",
            ScenarioConfig::CustomCsv { .. } => "custom_csv",
            ScenarioConfig::DualOf { .. } => "dual_of",
            ScenarioConfig::RandomSmooth { .. } => "random_smooth",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl MatrixEntry {
    pub fn parts(self) -> (f64, f64) {
        match self {
            MatrixEntry::Real(re) => (re, 0.0),
            MatrixEntry::Complex([re, im]) => (re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    /// Step size; `None` picks `0.05 / max‖H‖`.
    pub dt: Option<f64>,
    pub refinement: bool,
    pub unitarity_tol: f64,
    pub record_every: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        let d = PropagatorOptions::default();
        Self {
            dt: d.dt,
            refinement: d.refinement,
            unitarity_tol: d.unitarity_tol,
            record_every: d.record_every,
        }
    }
}

impl PropagatorConfig {
    pub fn options(&self) -> PropagatorOptions {
        PropagatorOptions {
            dt: self.dt,
            refinement: self.refinement,
            unitarity_tol: self.unitarity_tol,
            record_every: self.record_every,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsConfig {
    pub eta_trad: f64,
    pub eta_suff: f64,
    pub eta_fid: f64,
    pub resonance_tol: f64,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            eta_trad: t.eta_trad,
            eta_suff: t.eta_suff,
            eta_fid: t.eta_fid,
            resonance_tol: t.resonance_tol,
        }
    }
}

impl From<ThresholdsConfig> for Thresholds {
    fn from(t: ThresholdsConfig) -> Self {
        Thresholds {
            eta_trad: t.eta_trad,
            eta_suff: t.eta_suff,
            eta_fid: t.eta_fid,
            resonance_tol: t.resonance_tol,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsConfig {
    pub csv_dir: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path to a numeric field, e.g. `horizon` or `scenario.omega0`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub horizon: f64,
    #[serde(default)]
    pub initial_level: usize,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not need the Hamiltonian; the level range is checked
    /// once the dimension is known.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::Config(format!(
                "horizon must be positive and finite, got {}",
                self.horizon
            )));
        }
        if let Some(dt) = self.propagator.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if let Some(sweep) = &self.sweep {
            let mut probe = serde_json::to_value(self).expect("config serializes");
            numeric_field(&mut probe, &sweep.parameter)?;
        }
        Ok(())
    }

    /// Copy of the config with the sweep parameter set to `value`.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self, CliError> {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("sweep");
        }
        let field = numeric_field(&mut v, path)?;
        // integer fields (seeds, dimensions, levels) keep integer type
        *field = if (field.is_u64() || field.is_i64()) && value.fract() == 0.0 && value >= 0.0 {
            Value::from(value as u64)
        } else {
            Value::from(value)
        };
        RunConfig::from_value(v)
    }
}

fn numeric_field<'a>(root: &'a mut Value, path: &str) -> Result<&'a mut Value, CliError> {
    let pointer = format!("/{}", path.replace('.', "/"));
    match root.pointer_mut(&pointer) {
        Some(v) if v.is_number() || v.is_null() => Ok(v),
        Some(_) => Err(CliError::Config(format!(
            "sweep parameter `{path}` is not a numeric field"
        ))),
        None => Err(CliError::Config(format!(
            "sweep parameter `{path}` does not name a config field"
        ))),
    }
}

pub fn read_config_value(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed JSON in {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "scenario": {"kind": "amin", "epsilon": 1.0, "V": 0.01, "omega0": 1.0},
            "horizon": 10.0
        })
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_value(base()).unwrap();
        assert_eq!(cfg.initial_level, 0);
        assert_eq!(cfg.thresholds, ThresholdsConfig::default());
        assert!(!cfg.propagator.refinement);
        assert_eq!(cfg.propagator.record_every, 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = base();
        v["horizn"] = json!(3.0);
        assert!(RunConfig::from_value(v).is_err());
    }

    #[test]
    fn nonpositive_horizon_is_rejected() {
        let mut v = base();
        v["horizon"] = json!(0.0);
        assert!(RunConfig::from_value(v).is_err());
    }

    #[test]
    fn sweep_parameter_must_resolve() {
        let mut v = base();
        v["sweep"] = json!({"parameter": "scenario.omega0", "values": [0.3, 1.0]});
        let cfg = RunConfig::from_value(v.clone()).unwrap();
        let swept = cfg.with_parameter("scenario.omega0", 0.3).unwrap();
        assert_eq!(
            swept.scenario,
            ScenarioConfig::Amin { epsilon: 1.0, v: 0.01, omega0: 0.3 }
        );
        assert!(swept.sweep.is_none());
        v["sweep"]["parameter"] = json!("scenario.kind");
        assert!(RunConfig::from_value(v.clone()).is_err());
        v["sweep"]["parameter"] = json!("scenario.missing");
        assert!(RunConfig::from_value(v).is_err());
    }

    #[test]
    fn complex_matrix_entries() {
        let v = json!({
            "scenario": {"kind": "constant", "matrix": [[1.0, [0.0, 0.5]], [[0.0, -0.5], -1.0]]},
            "horizon": 1.0
        });
        let cfg = RunConfig::from_value(v).unwrap();
        let ScenarioConfig::Constant { matrix } = cfg.scenario else {
            panic!("wrong kind")
        };
        assert_eq!(matrix[0][1].parts(), (0.0, 0.5));
        assert_eq!(matrix[1][1].parts(), (-1.0, 0.0));
    }
}
