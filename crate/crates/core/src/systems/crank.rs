//! Crank–connecting rod: a rotor of inertia `J_m` driving a piston of mass
//! `m_p` through a rod of length `L`, crank radius `R` and offset `d`.
//!
//! Coordinate `x = θ` (crank angle), inputs `[τ_m, F]` (motor torque,
//! piston force).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{require_nonnegative, require_positive};
use crate::dual::Real;
use crate::dynamics::ElOracle;
use crate::error::{Error, Result};
use crate::factorization::{assemble_model, AssembledModel, ForceLaw, PositionMap};
use crate::model::{EulerLagrangeMatrices, FactorizedModel, InertiaDiagonal, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrankParams {
    /// Crank radius (m).
    #[serde(rename = "R")]
    pub r: f64,
    /// Connecting rod length (m).
    #[serde(rename = "L")]
    pub l: f64,
    /// Piston axis offset (m).
    pub d: f64,
    /// Rotor inertia (kg·m²).
    pub j_m: f64,
    /// Piston mass (kg).
    pub m_p: f64,
    /// Motor viscous friction (N·m·s/rad).
    pub d_m: f64,
    /// Piston viscous friction (N·s/m).
    pub b_p: f64,
}

impl Default for CrankParams {
    fn default() -> Self {
        CrankParams {
            r: 0.05,
            l: 0.15,
            d: 0.01,
            j_m: 0.01,
            m_p: 1.0,
            d_m: 0.0,
            b_p: 0.0,
        }
    }
}

impl CrankParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("R", self.r)?;
        require_positive("L", self.l)?;
        require_positive("j_m", self.j_m)?;
        require_positive("m_p", self.m_p)?;
        require_nonnegative("d_m", self.d_m)?;
        require_nonnegative("b_p", self.b_p)?;
        if !self.d.is_finite() || self.l <= self.r + self.d.abs() {
            return Err(Error::Parameter(format!(
                "crank geometry locks: need L > R + |d| (L = {}, R = {}, d = {})",
                self.l, self.r, self.d
            )));
        }
        Ok(())
    }

    /// `H(θ) = ∂x_p/∂θ`, the piston velocity per unit crank rate.
    pub fn h(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let g = self.d - self.r * s;
        let root = (self.l * self.l - g * g).sqrt();
        -self.r * s + self.r * c * g / root
    }

    /// `dH/dθ`.
    pub fn h_prime(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let r = self.r;
        let g = self.d - r * s;
        let root = (self.l * self.l - g * g).sqrt();
        -r * c + r * (-s * g - r * c * c) / root - r * r * c * c * g * g / root.powi(3)
    }

    fn inertia(&self) -> Result<InertiaDiagonal> {
        InertiaDiagonal::new(vec![self.j_m, self.m_p])
    }
}

/// `P₁ = θ`, `P₂ = R cosθ + √(L² − (R sinθ − d)²)`.
#[derive(Debug, Clone)]
pub struct CrankPositions {
    params: CrankParams,
}

impl PositionMap for CrankPositions {
    fn n(&self) -> usize {
        1
    }

    fn layout(&self) -> Vec<usize> {
        vec![1, 1]
    }

    fn mass_positions<S: Real>(&self, x: &[S], _u: S) -> Vec<Vec<S>> {
        let p = &self.params;
        let theta = x[0];
        let g = theta.sin() * p.r - p.d;
        let piston = theta.cos() * p.r + (S::constant(p.l * p.l) - g * g).sqrt();
        vec![vec![theta], vec![piston]]
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["theta_dot".into(), "piston_velocity".into()]
    }
}

/// `τ = −d_m θ̇ − H² b_p θ̇ + τ_m + H F`.
#[derive(Debug, Clone)]
pub struct CrankForce {
    params: CrankParams,
}

impl ForceLaw for CrankForce {
    fn force(&self, state: &State, _u: f64, inputs: &[f64]) -> DVector<f64> {
        let p = &self.params;
        let theta = state.x[0];
        let omega = state.xdot[0];
        let h = p.h(theta);
        let tau_m = inputs.first().copied().unwrap_or(0.0);
        let f = inputs.get(1).copied().unwrap_or(0.0);
        DVector::from_element(1, -p.d_m * omega - h * h * p.b_p * omega + tau_m + h * f)
    }
}

pub type CrankModel = AssembledModel<CrankPositions, CrankForce>;

pub fn crank_model(p: &CrankParams) -> Result<CrankModel> {
    p.validate()?;
    assemble_model(
        CrankPositions { params: p.clone() },
        p.inertia()?,
        CrankForce { params: p.clone() },
    )
}

/// Hand-coded `T = (√J_m, √m_p H)ᵀ` and the matching `M`, `N`.
#[derive(Debug, Clone)]
pub struct CrankAnalytic {
    params: CrankParams,
    inertia: InertiaDiagonal,
    force: CrankForce,
}

impl CrankAnalytic {
    pub fn new(p: CrankParams) -> Result<Self> {
        p.validate()?;
        Ok(CrankAnalytic {
            inertia: p.inertia()?,
            force: CrankForce { params: p.clone() },
            params: p,
        })
    }

    pub fn mass(&self, theta: f64) -> f64 {
        let h = self.params.h(theta);
        self.params.j_m + self.params.m_p * h * h
    }

    pub fn coupling(&self, theta: f64, omega: f64) -> f64 {
        let p = &self.params;
        p.m_p * p.h(theta) * p.h_prime(theta) * omega
    }
}

fn column(a: f64, b: f64) -> DMatrix<f64> {
    DMatrix::from_column_slice(2, 1, &[a, b])
}

impl FactorizedModel for CrankAnalytic {
    fn n(&self) -> usize {
        1
    }

    fn r_total(&self) -> usize {
        2
    }

    fn inertia(&self) -> &InertiaDiagonal {
        &self.inertia
    }

    fn eval_t(&self, x: &DVector<f64>, _u: f64) -> Result<DMatrix<f64>> {
        let p = &self.params;
        Ok(column(p.j_m.sqrt(), p.m_p.sqrt() * p.h(x[0])))
    }

    fn dt_dx(&self, x: &DVector<f64>, _u: f64) -> Result<Vec<DMatrix<f64>>> {
        let p = &self.params;
        Ok(vec![column(0.0, p.m_p.sqrt() * p.h_prime(x[0]))])
    }

    fn dt_du(&self, _x: &DVector<f64>, _u: f64) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(2, 1))
    }

    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64> {
        self.force.force(state, u, inputs)
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["theta_dot".into(), "piston_velocity".into()]
    }
}

impl ElOracle for CrankAnalytic {
    fn el_matrices(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        _u: f64,
        _udot: f64,
    ) -> Result<EulerLagrangeMatrices> {
        Ok(EulerLagrangeMatrices {
            m: DMatrix::from_element(1, 1, self.mass(x[0])),
            n: DMatrix::from_element(1, 1, self.coupling(x[0], xdot[0])),
        })
    }
}
