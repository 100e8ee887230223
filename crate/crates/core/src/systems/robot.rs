//! Planar two-link robot with revolute joints.
//!
//! Coordinates `x = (θ₁, θ₂)` (absolute first-joint angle, relative second
//! joint angle), inputs `[τ₁, τ₂]` (joint torques).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::require_positive;
use crate::dual::Real;
use crate::dynamics::ElOracle;
use crate::error::{Error, Result};
use crate::factorization::{assemble_model, AssembledModel, ForceLaw, PositionMap};
use crate::model::{EulerLagrangeMatrices, FactorizedModel, InertiaDiagonal, State};

/// Lengths in m, masses in kg, inertias in kg·m². `r₁`, `r₂` locate the
/// centres of mass along each link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanarRobotParams {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    pub r1: f64,
    pub r2: f64,
    pub m1: f64,
    pub m2: f64,
    #[serde(rename = "Iz1")]
    pub iz1: f64,
    #[serde(rename = "Iz2")]
    pub iz2: f64,
}

impl Default for PlanarRobotParams {
    fn default() -> Self {
        PlanarRobotParams {
            l1: 1.0,
            l2: 1.0,
            r1: 0.5,
            r2: 0.5,
            m1: 1.0,
            m2: 1.0,
            iz1: 0.1,
            iz2: 0.1,
        }
    }
}

impl PlanarRobotParams {
    /// `(α, β, δ)` of `M = [[α + 2β c₂, δ + β c₂], [δ + β c₂, δ]]`.
    pub fn alpha_beta_delta(&self) -> (f64, f64, f64) {
        let alpha = self.iz1
            + self.m1 * self.r1 * self.r1
            + self.m2 * self.l1 * self.l1
            + self.iz2
            + self.m2 * self.r2 * self.r2;
        let beta = self.m2 * self.l1 * self.r2;
        let delta = self.iz2 + self.m2 * self.r2 * self.r2;
        (alpha, beta, delta)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("L1", self.l1),
            ("L2", self.l2),
            ("r1", self.r1),
            ("r2", self.r2),
            ("m1", self.m1),
            ("m2", self.m2),
            ("Iz1", self.iz1),
            ("Iz2", self.iz2),
        ] {
            require_positive(name, v)?;
        }
        // det M = αδ − δ² − β² cos²θ₂, smallest at cos²θ₂ = 1
        let (a, b, d) = self.alpha_beta_delta();
        let det = a * d - d * d - b * b;
        if !(det > 0.0 && a - 2.0 * b > 0.0 && d > 0.0) {
            return Err(Error::Parameter(format!(
                "inertia matrix not positive definite for all θ₂ (αδ − δ² − β² = {det})"
            )));
        }
        Ok(())
    }

    fn inertia(&self) -> Result<InertiaDiagonal> {
        InertiaDiagonal::new(vec![
            self.m1 * self.r1 * self.r1 + self.iz1,
            self.m2,
            self.m2,
            self.iz2,
        ])
    }
}

const CHANNELS: [&str; 4] = ["theta1_dot", "link2_vx", "link2_vy", "link2_omega"];

fn channel_names() -> Vec<String> {
    CHANNELS.iter().map(|s| s.to_string()).collect()
}

/// `P₁ = θ₁`, `P₂ = (L₁c₁ + r₂c₁₂, L₁s₁ + r₂s₁₂, θ₁ + θ₂)`.
#[derive(Debug, Clone)]
pub struct RobotPositions {
    params: PlanarRobotParams,
}

impl PositionMap for RobotPositions {
    fn n(&self) -> usize {
        2
    }

    fn layout(&self) -> Vec<usize> {
        vec![1, 3]
    }

    fn mass_positions<S: Real>(&self, x: &[S], _u: S) -> Vec<Vec<S>> {
        let p = &self.params;
        let (t1, t12) = (x[0], x[0] + x[1]);
        vec![
            vec![t1],
            vec![
                t1.cos() * p.l1 + t12.cos() * p.r2,
                t1.sin() * p.l1 + t12.sin() * p.r2,
                t12,
            ],
        ]
    }

    fn channel_names(&self) -> Vec<String> {
        channel_names()
    }
}

/// Joint torques applied directly.
#[derive(Debug, Clone, Copy)]
pub struct JointTorques;

impl ForceLaw for JointTorques {
    fn force(&self, state: &State, _u: f64, inputs: &[f64]) -> DVector<f64> {
        DVector::from_fn(state.n(), |i, _| inputs.get(i).copied().unwrap_or(0.0))
    }
}

pub type PlanarRobotModel = AssembledModel<RobotPositions, JointTorques>;

pub fn planar_robot_model(p: &PlanarRobotParams) -> Result<PlanarRobotModel> {
    p.validate()?;
    assemble_model(RobotPositions { params: p.clone() }, p.inertia()?, JointTorques)
}

/// Hand-coded `T`, its partials, and the closed-form `M`, `N`.
#[derive(Debug, Clone)]
pub struct PlanarRobotAnalytic {
    params: PlanarRobotParams,
    inertia: InertiaDiagonal,
}

impl PlanarRobotAnalytic {
    pub fn new(p: PlanarRobotParams) -> Result<Self> {
        p.validate()?;
        Ok(PlanarRobotAnalytic {
            inertia: p.inertia()?,
            params: p,
        })
    }

    pub fn mass(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (a, b, d) = self.params.alpha_beta_delta();
        let c2 = x[1].cos();
        DMatrix::from_row_slice(2, 2, &[a + 2.0 * b * c2, d + b * c2, d + b * c2, d])
    }

    pub fn coupling(&self, x: &DVector<f64>, xdot: &DVector<f64>) -> DMatrix<f64> {
        let (_, b, _) = self.params.alpha_beta_delta();
        let bs = b * x[1].sin();
        DMatrix::from_row_slice(
            2,
            2,
            &[-bs * xdot[1], -bs * (xdot[0] + xdot[1]), bs * xdot[0], 0.0],
        )
    }

    fn partials(&self, x: &DVector<f64>) -> [DMatrix<f64>; 2] {
        let p = &self.params;
        let sm = p.m2.sqrt();
        let (s1, c1) = x[0].sin_cos();
        let (s12, c12) = (x[0] + x[1]).sin_cos();
        let d1 = DMatrix::from_row_slice(
            4,
            2,
            &[
                0.0,
                0.0,
                -sm * (p.l1 * c1 + p.r2 * c12),
                -sm * p.r2 * c12,
                -sm * (p.l1 * s1 + p.r2 * s12),
                -sm * p.r2 * s12,
                0.0,
                0.0,
            ],
        );
        let d2 = DMatrix::from_row_slice(
            4,
            2,
            &[
                0.0,
                0.0,
                -sm * p.r2 * c12,
                -sm * p.r2 * c12,
                -sm * p.r2 * s12,
                -sm * p.r2 * s12,
                0.0,
                0.0,
            ],
        );
        [d1, d2]
    }
}

impl FactorizedModel for PlanarRobotAnalytic {
    fn n(&self) -> usize {
        2
    }

    fn r_total(&self) -> usize {
        4
    }

    fn inertia(&self) -> &InertiaDiagonal {
        &self.inertia
    }

    fn eval_t(&self, x: &DVector<f64>, _u: f64) -> Result<DMatrix<f64>> {
        let p = &self.params;
        let s = self.inertia.sqrt_entries();
        let (s1, c1) = x[0].sin_cos();
        let (s12, c12) = (x[0] + x[1]).sin_cos();
        Ok(DMatrix::from_row_slice(
            4,
            2,
            &[
                s[0],
                0.0,
                -s[1] * (p.l1 * s1 + p.r2 * s12),
                -s[1] * p.r2 * s12,
                s[2] * (p.l1 * c1 + p.r2 * c12),
                s[2] * p.r2 * c12,
                s[3],
                s[3],
            ],
        ))
    }

    fn dt_dx(&self, x: &DVector<f64>, _u: f64) -> Result<Vec<DMatrix<f64>>> {
        Ok(self.partials(x).to_vec())
    }

    fn dt_du(&self, _x: &DVector<f64>, _u: f64) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(4, 2))
    }

    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64> {
        JointTorques.force(state, u, inputs)
    }

    fn t_and_tdot(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        u: f64,
        _udot: f64,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let [d1, d2] = self.partials(x);
        Ok((self.eval_t(x, u)?, d1 * xdot[0] + d2 * xdot[1]))
    }

    fn channel_names(&self) -> Vec<String> {
        channel_names()
    }
}

impl ElOracle for PlanarRobotAnalytic {
    fn el_matrices(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        _u: f64,
        _udot: f64,
    ) -> Result<EulerLagrangeMatrices> {
        Ok(EulerLagrangeMatrices {
            m: self.mass(x),
            n: self.coupling(x, xdot),
        })
    }
}
