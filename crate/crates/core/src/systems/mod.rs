//! The three case studies: crank–connecting rod, full toroidal variator and
//! planar two-link robot.
//!
//! Each system ships an assembled model (built from its position map by the
//! generic procedure) and a hand-coded analytic model used as an oracle.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::ElOracle;
use crate::error::{Error, Result};
use crate::factorization::PositionMap;
use crate::model::FactorizedModel;

pub mod crank;
pub mod ftv;
pub mod robot;

pub use crank::{crank_model, CrankAnalytic, CrankParams};
pub use ftv::{ftv_model, FtvAnalytic, FtvParams};
pub use robot::{planar_robot_model, PlanarRobotAnalytic, PlanarRobotParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Crank,
    Ftv,
    Robot,
}

impl SystemKind {
    pub const ALL: [SystemKind; 3] = [SystemKind::Crank, SystemKind::Ftv, SystemKind::Robot];

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Crank => "crank",
            SystemKind::Ftv => "ftv",
            SystemKind::Robot => "robot",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crank" => Ok(SystemKind::Crank),
            "ftv" => Ok(SystemKind::Ftv),
            "robot" => Ok(SystemKind::Robot),
            other => Err(Error::Parameter(format!("unknown system '{other}'"))),
        }
    }
}

/// A point of the extended phase space `(x, ẋ, u, u̇)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub xdot: DVector<f64>,
    pub u: f64,
    pub udot: f64,
}

/// Parameter set of any case study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", content = "params", rename_all = "lowercase")]
pub enum SystemParams {
    Crank(CrankParams),
    Ftv(FtvParams),
    Robot(PlanarRobotParams),
}

impl SystemParams {
    pub fn default_for(kind: SystemKind) -> Self {
        match kind {
            SystemKind::Crank => SystemParams::Crank(CrankParams::default()),
            SystemKind::Ftv => SystemParams::Ftv(FtvParams::default()),
            SystemKind::Robot => SystemParams::Robot(PlanarRobotParams::default()),
        }
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            SystemParams::Crank(_) => SystemKind::Crank,
            SystemParams::Ftv(_) => SystemKind::Ftv,
            SystemParams::Robot(_) => SystemKind::Robot,
        }
    }
}

type PositionFn = Arc<dyn Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync>;

fn position_fn<P: PositionMap + Clone + 'static>(pm: &P) -> PositionFn {
    let pm = pm.clone();
    Arc::new(move |x: &DVector<f64>, u: f64| DVector::from_vec(pm.eval(x.as_slice(), u)))
}

/// Assembled and analytic models of one system, ready for cross-checks.
#[derive(Clone)]
pub struct CaseStudy {
    pub kind: SystemKind,
    positions: PositionFn,
    pub assembled: Arc<dyn FactorizedModel>,
    pub analytic: Arc<dyn FactorizedModel>,
    pub oracle: Arc<dyn ElOracle>,
    params: SystemParams,
}

impl fmt::Debug for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CaseStudy")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .finish()
    }
}

impl CaseStudy {
    pub fn new(params: SystemParams) -> Result<Self> {
        let kind = params.kind();
        let (positions, assembled, analytic, oracle): (
            PositionFn,
            Arc<dyn FactorizedModel>,
            Arc<dyn FactorizedModel>,
            Arc<dyn ElOracle>,
        ) = match &params {
            SystemParams::Crank(p) => {
                let m = crank_model(p)?;
                let a = Arc::new(CrankAnalytic::new(p.clone())?);
                (position_fn(m.positions()), Arc::new(m), a.clone(), a)
            }
            SystemParams::Ftv(p) => {
                let m = ftv_model(p)?;
                let a = Arc::new(FtvAnalytic::new(p.clone())?);
                (position_fn(m.positions()), Arc::new(m), a.clone(), a)
            }
            SystemParams::Robot(p) => {
                let m = planar_robot_model(p)?;
                let a = Arc::new(PlanarRobotAnalytic::new(p.clone())?);
                (position_fn(m.positions()), Arc::new(m), a.clone(), a)
            }
        };
        Ok(CaseStudy {
            kind,
            positions,
            assembled,
            analytic,
            oracle,
            params,
        })
    }

    pub fn with_defaults(kind: SystemKind) -> Result<Self> {
        CaseStudy::new(SystemParams::default_for(kind))
    }

    /// The stacked position vector `P₀(x, u)`.
    pub fn positions(&self, x: &DVector<f64>, u: f64) -> DVector<f64> {
        (self.positions)(x, u)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// A random admissible point of the extended phase space.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        use std::f64::consts::PI;
        match &self.params {
            SystemParams::Crank(_) => PhasePoint {
                x: DVector::from_element(1, rng.gen_range(-PI..PI)),
                xdot: DVector::from_element(1, rng.gen_range(-20.0..20.0)),
                u: 0.0,
                udot: 0.0,
            },
            SystemParams::Ftv(p) => {
                let limit = p.max_admissible_tilt().min(1.3);
                PhasePoint {
                    x: DVector::from_element(1, rng.gen_range(-10.0..10.0)),
                    xdot: DVector::from_element(1, rng.gen_range(-250.0..250.0)),
                    u: rng.gen_range(-limit..limit),
                    udot: rng.gen_range(-5.0..5.0),
                }
            }
            SystemParams::Robot(_) => PhasePoint {
                x: DVector::from_fn(2, |_, _| rng.gen_range(-PI..PI)),
                xdot: DVector::from_fn(2, |_, _| rng.gen_range(-3.0..3.0)),
                u: 0.0,
                udot: 0.0,
            },
        }
    }
}

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub(crate) fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::Parameter(format!("{name} must be non-negative, got {v}")));
    }
    Ok(())
}
