//! Variator simulations with and without a high-frequency disturbance on the
//! measured tilt angle.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integration::{
    make_sampled_noisy_signal, simulate, DerivativeMode, Drive, Formulation, SimulationConfig,
};
use crate::model::{ExogenousSignal, State, Trajectory};
use crate::systems::{ftv_model, FtvAnalytic, FtvParams, SystemParams};

use super::config::{ExperimentSettings, RunConfig};
use super::io::{write_csv, write_records, write_svg, Panel, Series, Table};
use super::metrics::{compare_channels, metrics_records, MetricsRow, METRICS_HEADER};

pub const CHANNELS: [&str; 4] = ["omega_a", "omega_b", "omega_c", "omega_d"];

/// Run labels in execution order.
pub const RUNS: [&str; 4] = ["el_clean", "fact_clean", "el_noisy", "fact_noisy"];

/// Comparison labels (`candidate_vs_reference`).
pub const EL_CLEAN_VS_REFERENCE: &str = "el_clean_vs_fact_clean";
pub const FACT_NOISY_VS_REFERENCE: &str = "fact_noisy_vs_fact_clean";
pub const EL_NOISY_VS_REFERENCE: &str = "el_noisy_vs_fact_clean";
pub const EL_NOISY_VS_FACT_NOISY: &str = "el_noisy_vs_fact_noisy";

#[derive(Debug, Clone)]
pub struct NoiseOutcome {
    pub runs: Vec<(String, Trajectory)>,
    pub metrics: Vec<MetricsRow>,
    pub files: Vec<PathBuf>,
}

impl NoiseOutcome {
    pub fn run(&self, label: &str) -> Option<&Trajectory> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, t)| t)
    }
}

pub fn tilt_signal(e: &ExperimentSettings) -> ExogenousSignal {
    let (a, w) = (e.tilt_amplitude, e.tilt_frequency);
    ExogenousSignal::analytic(move |t| a * (w * t).sin(), move |t| a * w * (w * t).cos())
}

pub fn disturbance_signal(e: &ExperimentSettings) -> ExogenousSignal {
    let (a, w) = (e.noise_amplitude, e.noise_frequency);
    ExogenousSignal::analytic(move |t| a * (w * t).sin(), move |t| a * w * (w * t).cos())
}

fn ftv_params(cfg: &RunConfig) -> Result<&FtvParams> {
    match &cfg.params {
        SystemParams::Ftv(p) => Ok(p),
        other => Err(Error::Parameter(format!(
            "the noise experiment runs on the variator, not '{}'",
            other.kind()
        ))),
    }
}

/// Four runs: {Euler-Lagrange, factorized} × {noiseless, noisy}.
///
/// Noiseless runs use the analytic tilt and its exact derivative. Noisy runs
/// see the sampled, disturbed tilt and its backward difference. Deviations
/// are measured against the noiseless factorized run.
pub fn run_noise_experiment(cfg: &RunConfig, out: Option<&Path>) -> Result<NoiseOutcome> {
    let p = ftv_params(cfg)?;
    let e = &cfg.experiment;
    e.validate()?;
    p.check_tilt_range(e.tilt_amplitude.abs() + e.noise_amplitude.abs())?;
    let model = ftv_model(p)?;
    let oracle = std::sync::Arc::new(FtvAnalytic::new(p.clone())?);

    let omega0 = e.omega_a0_rpm * std::f64::consts::PI / 30.0;
    let initial = State::from_slices(&[0.0], &[omega0], 0.0)?;
    let clean = tilt_signal(e);
    let noisy = make_sampled_noisy_signal(
        &clean,
        &disturbance_signal(e),
        e.sample_period,
        0.0,
        cfg.simulation.t_end,
    )?;

    let mut runs = Vec::with_capacity(4);
    for label in RUNS {
        let (formulation, signal, mode) = match label {
            "el_clean" => (Formulation::EulerLagrange, &clean, DerivativeMode::Analytic),
            "fact_clean" => (Formulation::Factorized, &clean, DerivativeMode::Analytic),
            "el_noisy" => (Formulation::EulerLagrange, &noisy, DerivativeMode::SampledBackwardDifference),
            _ => (Formulation::Factorized, &noisy, DerivativeMode::SampledBackwardDifference),
        };
        let sim = SimulationConfig {
            formulation,
            derivative_mode: mode,
            ..cfg.simulation.clone()
        };
        let drive = Drive::new(signal.clone()).with_oracle(oracle.clone());
        let traj = simulate(&model, &sim, &initial, &drive).map_err(|err| err.in_run(label))?;
        runs.push((label.to_string(), traj));
    }

    let get = |l: &str| &runs.iter().find(|(k, _)| k == l).expect("run exists").1;
    let mut metrics = Vec::new();
    for (name, cand, reference) in [
        (EL_CLEAN_VS_REFERENCE, "el_clean", "fact_clean"),
        (FACT_NOISY_VS_REFERENCE, "fact_noisy", "fact_clean"),
        (EL_NOISY_VS_REFERENCE, "el_noisy", "fact_clean"),
        (EL_NOISY_VS_FACT_NOISY, "el_noisy", "fact_noisy"),
    ] {
        metrics.extend(compare_channels(name, get(reference), get(cand), &CHANNELS)?);
    }

    let mut outcome = NoiseOutcome {
        runs,
        metrics,
        files: Vec::new(),
    };
    if let Some(dir) = out {
        outcome.files = write_outputs(dir, &outcome)?;
    }
    Ok(outcome)
}

fn write_outputs(dir: &Path, o: &NoiseOutcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let t = o.runs[0].1.t.clone();
    for ch in CHANNELS {
        let mut header = vec!["t".to_string()];
        let mut columns = vec![t.clone()];
        for (label, traj) in &o.runs {
            header.push(label.clone());
            columns.push(traj.channel(ch).expect("variator channel").to_vec());
        }
        let path = dir.join(format!("{ch}.csv"));
        write_csv(&path, &Table::new(header, columns)?)?;
        files.push(path);
    }
    let path = dir.join("metrics.csv");
    write_records(&path, &METRICS_HEADER, &metrics_records(&o.metrics))?;
    files.push(path);

    for (file, title, labels) in [
        ("fig3a_noiseless.svg", "Noiseless tilt: angular velocities", ["el_clean", "fact_clean"]),
        ("fig3b_noisy.svg", "Disturbed tilt: angular velocities", ["el_noisy", "fact_noisy"]),
    ] {
        let panels: Vec<Panel> = CHANNELS
            .iter()
            .map(|ch| Panel {
                y_label: format!("{ch} (rad/s)"),
                series: labels
                    .iter()
                    .map(|l| {
                        let traj = o.run(l).expect("run exists");
                        Series::new(*l, traj.t.clone(), traj.channel(ch).expect("channel").to_vec())
                            .decimated(2500)
                    })
                    .collect(),
            })
            .collect();
        let path = dir.join(file);
        write_svg(&path, title, "t (s)", &panels)?;
        files.push(path);
    }
    Ok(files)
}
