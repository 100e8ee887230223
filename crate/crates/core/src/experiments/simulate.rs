//! One simulation of a case study written as a CSV trajectory.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integration::{simulate, Drive, Formulation, SimulationConfig};
use crate::model::{ExogenousSignal, State, Trajectory};
use crate::systems::{CaseStudy, SystemKind, SystemParams};

use super::config::RunConfig;
use super::io::{write_csv, Table};
use super::noise::tilt_signal;

/// Initial condition used when the configuration does not give one.
pub fn default_initial(cfg: &RunConfig) -> Result<State> {
    if let Some(ic) = &cfg.experiment.initial {
        return State::from_slices(&ic.x, &ic.xdot, 0.0);
    }
    match cfg.system {
        SystemKind::Crank => State::from_slices(&[0.0], &[10.0], 0.0),
        SystemKind::Ftv => State::from_slices(
            &[0.0],
            &[cfg.experiment.omega_a0_rpm * std::f64::consts::PI / 30.0],
            0.0,
        ),
        SystemKind::Robot => State::from_slices(&[0.4, -0.7], &[1.5, -2.0], 0.0),
    }
}

pub fn run_simulation(cfg: &RunConfig, formulation: Formulation) -> Result<Trajectory> {
    let cs = CaseStudy::new(cfg.params.clone())?;
    let signal = match &cfg.params {
        SystemParams::Ftv(p) => {
            p.check_tilt_range(cfg.experiment.tilt_amplitude)?;
            tilt_signal(&cfg.experiment)
        }
        _ => ExogenousSignal::constant(0.0),
    };
    let inputs = cfg.experiment.inputs.clone();
    let drive = Drive::new(signal)
        .with_actuation(move |_| inputs.clone())
        .with_oracle(cs.oracle.clone());
    let sim = SimulationConfig {
        formulation,
        ..cfg.simulation.clone()
    };
    let initial = default_initial(cfg)?;
    simulate(cs.assembled.as_ref(), &sim, &initial, &drive)
        .map_err(|e| e.in_run(format!("{} {}", cfg.system, formulation.label())))
}

/// Columns `t`, `x0…`, `xdot0…`, then every trajectory channel.
pub fn trajectory_table(tr: &Trajectory) -> Result<Table> {
    let n = tr
        .states
        .first()
        .map(|s| s.n())
        .ok_or_else(|| Error::Parameter("empty trajectory".into()))?;
    let mut header = vec!["t".to_string()];
    let mut columns = vec![tr.t.clone()];
    for i in 0..n {
        header.push(format!("x{i}"));
        columns.push(tr.coordinate(i));
    }
    for i in 0..n {
        header.push(format!("xdot{i}"));
        columns.push(tr.velocity(i));
    }
    for (name, values) in &tr.channels {
        header.push(name.clone());
        columns.push(values.clone());
    }
    Table::new(header, columns)
}

pub fn write_trajectory(dir: &Path, cfg: &RunConfig, formulation: Formulation, tr: &Trajectory) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}_{}.csv", cfg.system, formulation.label()));
    write_csv(&path, &trajectory_table(tr)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::io::read_csv;

    #[test]
    fn each_system_simulates_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        for kind in SystemKind::ALL {
            let mut cfg = RunConfig::defaults(kind);
            cfg.simulation.t_end = 0.01;
            cfg.simulation.h = 1e-3;
            for f in [Formulation::EulerLagrange, Formulation::Factorized] {
                let tr = run_simulation(&cfg, f).unwrap();
                let path = write_trajectory(dir.path(), &cfg, f, &tr).unwrap();
                let back = read_csv(&path).unwrap();
                assert_eq!(back, trajectory_table(&tr).unwrap());
                assert_eq!(back.rows(), 11);
            }
        }
    }

    #[test]
    fn configured_initial_condition() {
        let mut cfg = RunConfig::defaults(SystemKind::Crank);
        cfg.experiment.initial = Some(crate::experiments::InitialCondition { x: vec![1.0], xdot: vec![0.0] });
        assert_eq!(default_initial(&cfg).unwrap().x[0], 1.0);
        cfg.experiment.initial = Some(crate::experiments::InitialCondition { x: vec![1.0, 2.0], xdot: vec![0.0] });
        assert!(default_initial(&cfg).is_err());
    }
}
