//! Experiment harnesses: variator noise robustness, robot inverse-dynamics
//! timing, single simulations and the verification suite.

pub mod config;
pub mod invdyn;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod simulate;
pub mod verify;

pub use config::{ExperimentSettings, InitialCondition, ModelSource, RunConfig};
pub use invdyn::{run_invdyn_benchmark, stand_in_trajectory, InvDynOutcome, StandInTrajectory, TimingReport};
pub use metrics::{ComparisonMetrics, MetricsRow};
pub use noise::{run_noise_experiment, NoiseOutcome};
pub use verify::{verify, CheckResult};
pub use simulate::{run_simulation, write_trajectory};
