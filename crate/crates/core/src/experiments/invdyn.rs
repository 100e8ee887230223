//! Inverse dynamics of the planar robot along a reference motion, with
//! execution-time comparison of the two formulations.

use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{inverse_dynamics_el, inverse_dynamics_factorized};
use crate::error::{Error, Result};
use crate::factorization::el_matrices_from_t;
use crate::model::FactorizedModel;
use crate::systems::{planar_robot_model, PlanarRobotAnalytic, SystemParams};

use super::config::{ModelSource, RunConfig};
use super::io::{write_csv, write_records, write_svg, Panel, Series, Table};
use super::metrics::{metrics_records, ComparisonMetrics, MetricsRow, METRICS_HEADER};

/// Joint motion out to a setpoint and back, each leg a quintic blend
/// `s(τ) = 10τ³ − 15τ⁴ + 6τ⁵` with zero boundary velocity and acceleration.
#[derive(Debug, Clone, PartialEq)]
pub struct StandInTrajectory {
    pub t_end: f64,
    pub start: [f64; 2],
    pub target: [f64; 2],
}

impl Default for StandInTrajectory {
    fn default() -> Self {
        StandInTrajectory {
            t_end: 10.0,
            start: [0.0, 0.0],
            target: [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_3],
        }
    }
}

/// `(s, s', s'')` of the quintic blend.
fn blend(tau: f64) -> (f64, f64, f64) {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    (
        t3 * (10.0 - 15.0 * tau + 6.0 * t2),
        30.0 * t2 * (1.0 - 2.0 * tau + t2),
        60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2),
    )
}

impl StandInTrajectory {
    pub fn with_duration(t_end: f64) -> Self {
        StandInTrajectory {
            t_end,
            ..Default::default()
        }
    }

    /// `(x, ẋ, ẍ)` at time `t ∈ [0, t_end]`.
    pub fn sample(&self, t: f64) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        if !(t >= 0.0 && t <= self.t_end) {
            return Err(Error::Range {
                t,
                start: 0.0,
                end: self.t_end,
            });
        }
        let half = 0.5 * self.t_end;
        let (from, to, tau) = if t <= half {
            (self.start, self.target, t / half)
        } else {
            (self.target, self.start, (t - half) / half)
        };
        let (s, ds, dds) = blend(tau);
        let delta = [to[0] - from[0], to[1] - from[1]];
        Ok((
            DVector::from_fn(2, |i, _| from[i] + delta[i] * s),
            DVector::from_fn(2, |i, _| delta[i] * ds / half),
            DVector::from_fn(2, |i, _| delta[i] * dds / (half * half)),
        ))
    }
}

pub fn stand_in_trajectory(t: f64) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    StandInTrajectory::default().sample(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub el_seconds: Vec<f64>,
    pub fact_seconds: Vec<f64>,
    pub el_mean: f64,
    pub fact_mean: f64,
    /// `100·(mean_EL − mean_fact)/mean_EL`.
    pub reduction_pct: f64,
}

impl TimingReport {
    pub fn from_samples(el_seconds: Vec<f64>, fact_seconds: Vec<f64>) -> Result<Self> {
        if el_seconds.is_empty() || el_seconds.len() != fact_seconds.len() {
            return Err(Error::Parameter("timing samples missing or unpaired".into()));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (el_mean, fact_mean) = (mean(&el_seconds), mean(&fact_seconds));
        Ok(TimingReport {
            reduction_pct: 100.0 * (el_mean - fact_mean) / el_mean,
            el_seconds,
            fact_seconds,
            el_mean,
            fact_mean,
        })
    }
}

#[derive(Debug, Clone)]
pub struct InvDynOutcome {
    pub t: Vec<f64>,
    /// `τ` per joint, one vector per sample.
    pub tau_el: Vec<DVector<f64>>,
    pub tau_fact: Vec<DVector<f64>>,
    pub metrics: Vec<MetricsRow>,
    pub timing: TimingReport,
    pub files: Vec<PathBuf>,
}

struct Sample {
    x: DVector<f64>,
    xdot: DVector<f64>,
    xddot: DVector<f64>,
}

/// `τ = M ẍ + N ẋ` with `M = TᵀT`, `N = TᵀṪ` built at every sample.
fn el_pass(model: &dyn FactorizedModel, samples: &[Sample]) -> Result<Vec<DVector<f64>>> {
    samples
        .iter()
        .map(|s| {
            let (t, tdot) = model.t_and_tdot(&s.x, &s.xdot, 0.0, 0.0)?;
            let mn = el_matrices_from_t(&t, &tdot)?;
            inverse_dynamics_el(&mn.m, &mn.n, &s.xdot, &s.xddot)
        })
        .collect()
}

/// `τ = Tᵀ(T ẍ + Ṫ ẋ)`.
fn fact_pass(model: &dyn FactorizedModel, samples: &[Sample]) -> Result<Vec<DVector<f64>>> {
    samples
        .iter()
        .map(|s| {
            let (t, tdot): (DMatrix<f64>, DMatrix<f64>) = model.t_and_tdot(&s.x, &s.xdot, 0.0, 0.0)?;
            inverse_dynamics_factorized(&t, &tdot, &s.xdot, &s.xddot)
        })
        .collect()
}

fn timed<F>(reps: usize, mut pass: F) -> Result<(Vec<f64>, Vec<DVector<f64>>)>
where
    F: FnMut() -> Result<Vec<DVector<f64>>>,
{
    let mut last = black_box(pass()?);
    let mut secs = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        last = black_box(pass()?);
        secs.push(start.elapsed().as_secs_f64());
    }
    Ok((secs, last))
}

/// Evaluates the joint torques along the stand-in trajectory with both
/// formulations, `reps` timed passes each after one discarded warm-up pass.
pub fn run_invdyn_benchmark(cfg: &RunConfig, out: Option<&Path>) -> Result<InvDynOutcome> {
    let p = match &cfg.params {
        SystemParams::Robot(p) => p,
        other => {
            return Err(Error::Parameter(format!(
                "the inverse-dynamics benchmark runs on the planar robot, not '{}'",
                other.kind()
            )))
        }
    };
    let e = &cfg.experiment;
    e.validate()?;
    let model: Box<dyn FactorizedModel> = match e.timing_source {
        ModelSource::Analytic => Box::new(PlanarRobotAnalytic::new(p.clone())?),
        ModelSource::Assembled => Box::new(planar_robot_model(p)?),
    };
    let traj = StandInTrajectory::with_duration(e.trajectory_t_end);
    let count = (e.trajectory_t_end / e.trajectory_step - 1e-9).ceil() as usize;
    let t: Vec<f64> = (0..=count)
        .map(|k| (k as f64 * e.trajectory_step).min(e.trajectory_t_end))
        .collect();
    let samples = t
        .iter()
        .map(|&tk| {
            traj.sample(tk)
                .map(|(x, xdot, xddot)| Sample { x, xdot, xddot })
        })
        .collect::<Result<Vec<_>>>()?;

    let (el_secs, tau_el) = timed(e.reps, || el_pass(model.as_ref(), &samples))?;
    let (fact_secs, tau_fact) = timed(e.reps, || fact_pass(model.as_ref(), &samples))?;
    let timing = TimingReport::from_samples(el_secs, fact_secs)?;

    let mut metrics = Vec::new();
    for j in 0..2 {
        let r: Vec<f64> = tau_el.iter().map(|v| v[j]).collect();
        let c: Vec<f64> = tau_fact.iter().map(|v| v[j]).collect();
        metrics.push(MetricsRow {
            comparison: "fact_vs_el".into(),
            channel: format!("tau{}", j + 1),
            metrics: ComparisonMetrics::compute(&r, &c)?,
        });
    }

    let mut outcome = InvDynOutcome {
        t,
        tau_el,
        tau_fact,
        metrics,
        timing,
        files: Vec::new(),
    };
    if let Some(dir) = out {
        outcome.files = write_outputs(dir, &outcome)?;
    }
    Ok(outcome)
}

fn write_outputs(dir: &Path, o: &InvDynOutcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let col = |v: &[DVector<f64>], j: usize| v.iter().map(|x| x[j]).collect::<Vec<_>>();
    let torques = Table::new(
        ["t", "tau1_el", "tau2_el", "tau1_fact", "tau2_fact"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        vec![
            o.t.clone(),
            col(&o.tau_el, 0),
            col(&o.tau_el, 1),
            col(&o.tau_fact, 0),
            col(&o.tau_fact, 1),
        ],
    )?;
    let path = dir.join("torques.csv");
    write_csv(&path, &torques)?;
    files.push(path);

    let reps: Vec<f64> = (1..=o.timing.el_seconds.len()).map(|k| k as f64).collect();
    let timing = Table::new(
        vec!["rep".into(), "el_s".into(), "fact_s".into()],
        vec![reps.clone(), o.timing.el_seconds.clone(), o.timing.fact_seconds.clone()],
    )?;
    let path = dir.join("timing.csv");
    write_csv(&path, &timing)?;
    files.push(path);

    let path = dir.join("metrics.csv");
    let mut rows = metrics_records(&o.metrics);
    for (name, v) in [
        ("el_mean_s", o.timing.el_mean),
        ("fact_mean_s", o.timing.fact_mean),
        ("reduction_pct", o.timing.reduction_pct),
    ] {
        rows.push(vec!["timing".into(), name.into(), super::io::format_value(v), super::io::format_value(v)]);
    }
    write_records(&path, &METRICS_HEADER, &rows)?;
    files.push(path);

    let flat = |label: &str, v: f64| Series::new(label, vec![1.0, reps.len() as f64], vec![v, v]);
    let path = dir.join("fig6_timing.svg");
    write_svg(
        &path,
        "Inverse dynamics: execution time per pass",
        "execution",
        &[Panel {
            y_label: "time (s)".into(),
            series: vec![
                Series::points("Euler-Lagrange", reps.clone(), o.timing.el_seconds.clone()),
                Series::points("factorized", reps.clone(), o.timing.fact_seconds.clone()),
                flat("Euler-Lagrange mean", o.timing.el_mean),
                flat("factorized mean", o.timing.fact_mean),
            ],
        }],
    )?;
    files.push(path);
    Ok(files)
}
