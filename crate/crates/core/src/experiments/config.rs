//! JSON run configuration: `{system, params, simulation, experiment}`.
//!
//! Every section is optional; missing fields take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integration::SimulationConfig;
use crate::systems::{CrankParams, FtvParams, PlanarRobotParams, SystemKind, SystemParams};

/// Where the inverse-dynamics benchmark takes `T` and `Ṫ` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSource {
    Analytic,
    Assembled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    /// Overrides the per-system initial condition of `simulate`.
    pub initial: Option<InitialCondition>,
    /// Constant actuation inputs for `simulate`.
    pub inputs: Vec<f64>,
    /// Initial input-shaft speed of the variator (rpm).
    pub omega_a0_rpm: f64,
    /// Tilt `θₜ = A sin(ω t)`: amplitude (rad) and angular frequency (rad/s).
    pub tilt_amplitude: f64,
    pub tilt_frequency: f64,
    /// Disturbance superimposed on the sampled tilt.
    pub noise_amplitude: f64,
    pub noise_frequency: f64,
    /// Tilt sampling period (s).
    pub sample_period: f64,
    /// Timing repetitions.
    pub reps: usize,
    /// Inverse-dynamics trajectory duration and sampling step (s).
    pub trajectory_t_end: f64,
    pub trajectory_step: f64,
    pub timing_source: ModelSource,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            initial: None,
            inputs: Vec::new(),
            omega_a0_rpm: 2000.0,
            tilt_amplitude: 1.22,
            tilt_frequency: 3.0,
            noise_amplitude: 12.2e-3,
            noise_frequency: 3e3,
            sample_period: 1e-4,
            reps: 100,
            trajectory_t_end: 10.0,
            trajectory_step: 1e-3,
            timing_source: ModelSource::Analytic,
        }
    }
}

impl ExperimentSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sample_period", self.sample_period),
            ("trajectory_t_end", self.trajectory_t_end),
            ("trajectory_step", self.trajectory_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("omega_a0_rpm", self.omega_a0_rpm),
            ("tilt_amplitude", self.tilt_amplitude),
            ("tilt_frequency", self.tilt_frequency),
            ("noise_amplitude", self.noise_amplitude),
            ("noise_frequency", self.noise_frequency),
        ] {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite")));
            }
        }
        if self.reps < 100 {
            return Err(Error::Parameter(format!(
                "timing needs at least 100 repetitions, got {}",
                self.reps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<SystemKind>,
    params: Option<serde_json::Value>,
    simulation: Option<SimulationConfig>,
    experiment: Option<ExperimentSettings>,
}

/// A fully resolved configuration for one system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: SystemKind,
    pub params: SystemParams,
    pub simulation: SimulationConfig,
    pub experiment: ExperimentSettings,
}

fn format_error(e: serde_json::Error) -> Error {
    Error::Format(format!("config: {e}"))
}

impl RunConfig {
    pub fn defaults(system: SystemKind) -> Self {
        RunConfig {
            system,
            params: SystemParams::default_for(system),
            simulation: SimulationConfig::default(),
            experiment: ExperimentSettings::default(),
        }
    }

    /// Parses a JSON document for `system`. A `system` field in the
    /// document, if present, must agree.
    pub fn from_json(text: &str, system: SystemKind) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(format_error)?;
        if let Some(s) = raw.system {
            if s != system {
                return Err(Error::Parameter(format!(
                    "config is for system '{s}' but '{system}' was requested"
                )));
            }
        }
        let params = match raw.params {
            None => SystemParams::default_for(system),
            Some(v) => match system {
                SystemKind::Crank => SystemParams::Crank(
                    serde_json::from_value::<CrankParams>(v).map_err(format_error)?,
                ),
                SystemKind::Ftv => {
                    SystemParams::Ftv(serde_json::from_value::<FtvParams>(v).map_err(format_error)?)
                }
                SystemKind::Robot => SystemParams::Robot(
                    serde_json::from_value::<PlanarRobotParams>(v).map_err(format_error)?,
                ),
            },
        };
        let cfg = RunConfig {
            system,
            params,
            simulation: raw.simulation.unwrap_or_default(),
            experiment: raw.experiment.unwrap_or_default(),
        };
        cfg.simulation.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when no file is given.
    pub fn load(path: Option<&Path>, system: SystemKind) -> Result<Self> {
        match path {
            None => Ok(RunConfig::defaults(system)),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                RunConfig::from_json(&text, system)
            }
        }
    }

    /// The configuration as a JSON document that [`RunConfig::from_json`] accepts.
    pub fn to_json(&self) -> String {
        let params = match &self.params {
            SystemParams::Crank(p) => serde_json::to_value(p),
            SystemParams::Ftv(p) => serde_json::to_value(p),
            SystemParams::Robot(p) => serde_json::to_value(p),
        }
        .expect("parameter structs serialize");
        let doc = serde_json::json!({
            "system": self.system,
            "params": params,
            "simulation": self.simulation,
            "experiment": self.experiment,
        });
        serde_json::to_string_pretty(&doc).expect("config serializes")
    }
}
