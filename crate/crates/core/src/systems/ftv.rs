//! Full toroidal variator: four rotating inertias coupled by gear ratios
//! that depend on the roller tilt angle `θₜ`, the exogenous input.
//!
//! Coordinate `x = θ` (angle of the input shaft), input `[τ_a]`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{require_nonnegative, require_positive};
use crate::dual::Real;
use crate::dynamics::ElOracle;
use crate::error::{Error, Result};
use crate::factorization::{assemble_model, AssembledModel, ForceLaw, PositionMap};
use crate::model::{EulerLagrangeMatrices, FactorizedModel, InertiaDiagonal, State};

/// Inertias in kg·m², radii in m, viscous coefficients in N·m·s/rad.
///
/// The published table lists radii `r_a, r_b, r_c, r_d`; here `r_b` is the
/// fixed radius `r_b2` and `r_d` is `r_b1`, the radii the tilt-dependent
/// `r_b(θₜ)` and `r_d(θₜ)` are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FtvParams {
    pub j_a: f64,
    pub j_b: f64,
    pub j_c: f64,
    pub j_d: f64,
    pub r_a: f64,
    pub r_b1: f64,
    pub r_b2: f64,
    pub r_c: f64,
    pub b_a: f64,
    pub b_b: f64,
    pub b_c: f64,
    pub b_d: f64,
}

impl Default for FtvParams {
    fn default() -> Self {
        FtvParams {
            j_a: 0.026,
            j_b: 7.56e-4,
            j_c: 0.0018,
            j_d: 0.179,
            r_a: 17.2e-3,
            r_b1: 34.3e-3,
            r_b2: 51.5e-3,
            r_c: 27.5e-3,
            b_a: 0.0,
            b_b: 0.0,
            b_c: 0.0,
            b_d: 0.0,
        }
    }
}

impl FtvParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("j_a", self.j_a),
            ("j_b", self.j_b),
            ("j_c", self.j_c),
            ("j_d", self.j_d),
            ("r_a", self.r_a),
            ("r_b1", self.r_b1),
            ("r_b2", self.r_b2),
            ("r_c", self.r_c),
        ] {
            require_positive(name, v)?;
        }
        for (name, v) in [("b_a", self.b_a), ("b_b", self.b_b), ("b_c", self.b_c), ("b_d", self.b_d)] {
            require_nonnegative(name, v)?;
        }
        Ok(())
    }

    /// Largest `|θₜ|` for which `r_d(θₜ) > 0`.
    pub fn max_admissible_tilt(&self) -> f64 {
        if self.r_b1 > self.r_c {
            FRAC_PI_2
        } else {
            (self.r_b1 / self.r_c).asin()
        }
    }

    /// Checks `r_d(θₜ) > 0` for every `|θₜ| ≤ amplitude`.
    pub fn check_tilt_range(&self, amplitude: f64) -> Result<()> {
        let worst = amplitude.abs().min(FRAC_PI_2);
        let rd = self.r_b1 - self.r_c * worst.sin();
        if !(rd > 0.0) {
            return Err(Error::Parameter(format!(
                "tilt amplitude {amplitude} rad drives r_d to {rd} m; r_b1 − r_c·sin θₜ must stay positive"
            )));
        }
        Ok(())
    }

    pub fn r_b(&self, tilt: f64) -> f64 {
        self.r_b1 + self.r_c * tilt.sin()
    }

    pub fn r_d(&self, tilt: f64) -> f64 {
        self.r_b1 - self.r_c * tilt.sin()
    }

    /// `(1, R₁, R₂(θₜ), R₃(θₜ))`.
    pub fn ratios(&self, tilt: f64) -> [f64; 4] {
        let r1 = self.r_a / self.r_b2;
        let rb = self.r_b(tilt);
        [1.0, r1, r1 * rb / self.r_c, r1 * rb / self.r_d(tilt)]
    }

    /// `dR/dθₜ`.
    pub fn ratio_slopes(&self, tilt: f64) -> [f64; 4] {
        let r1 = self.r_a / self.r_b2;
        let c = tilt.cos();
        let rd = self.r_d(tilt);
        [0.0, 0.0, r1 * c, r1 * self.r_c * c * 2.0 * self.r_b1 / (rd * rd)]
    }

    fn inertia(&self) -> Result<InertiaDiagonal> {
        InertiaDiagonal::new(vec![self.j_a, self.j_b, self.j_c, self.j_d])
    }

    fn domain(&self, tilt: f64) -> Result<()> {
        let rd = self.r_d(tilt);
        if !(rd > 0.0) {
            return Err(Error::Domain(format!("r_d({tilt}) = {rd} m is not positive")));
        }
        Ok(())
    }
}

const CHANNELS: [&str; 4] = ["omega_a", "omega_b", "omega_c", "omega_d"];

fn channel_names() -> Vec<String> {
    CHANNELS.iter().map(|s| s.to_string()).collect()
}

/// `P₀ = R(θₜ) θ`. Outside the admissible tilt range the map is NaN, which
/// the assembly reports as a domain error.
#[derive(Debug, Clone)]
pub struct FtvPositions {
    params: FtvParams,
}

impl PositionMap for FtvPositions {
    fn n(&self) -> usize {
        1
    }

    fn layout(&self) -> Vec<usize> {
        vec![1, 1, 1, 1]
    }

    fn mass_positions<S: Real>(&self, x: &[S], u: S) -> Vec<Vec<S>> {
        let p = &self.params;
        let theta = x[0];
        let r1 = p.r_a / p.r_b2;
        let sin_t = u.sin();
        let rb = sin_t * p.r_c + p.r_b1;
        let rd = -(sin_t * p.r_c) + p.r_b1;
        if !(rd.real() > 0.0) {
            return vec![vec![theta * f64::NAN]; 4];
        }
        vec![
            vec![theta],
            vec![theta * r1],
            vec![theta * rb * (r1 / p.r_c)],
            vec![theta * rb * r1 / rd],
        ]
    }

    fn channel_names(&self) -> Vec<String> {
        channel_names()
    }
}

/// `τ = −(b_a + R₁²b_b + R₂²b_c + R₃²b_d) ω_a + τ_a`.
#[derive(Debug, Clone)]
pub struct FtvForce {
    params: FtvParams,
}

impl ForceLaw for FtvForce {
    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64> {
        let p = &self.params;
        let r = p.ratios(u);
        let damping = p.b_a + r[1] * r[1] * p.b_b + r[2] * r[2] * p.b_c + r[3] * r[3] * p.b_d;
        let tau_a = inputs.first().copied().unwrap_or(0.0);
        DVector::from_element(1, -damping * state.xdot[0] + tau_a)
    }
}

pub type FtvModel = AssembledModel<FtvPositions, FtvForce>;

pub fn ftv_model(p: &FtvParams) -> Result<FtvModel> {
    p.validate()?;
    assemble_model(
        FtvPositions { params: p.clone() },
        p.inertia()?,
        FtvForce { params: p.clone() },
    )
}

/// Hand-coded `T = √N₀ R(θₜ)`, `M = Σ Jᵢ Rᵢ²` and `N = Ṁ/2`.
#[derive(Debug, Clone)]
pub struct FtvAnalytic {
    params: FtvParams,
    inertia: InertiaDiagonal,
    force: FtvForce,
}

impl FtvAnalytic {
    pub fn new(p: FtvParams) -> Result<Self> {
        p.validate()?;
        Ok(FtvAnalytic {
            inertia: p.inertia()?,
            force: FtvForce { params: p.clone() },
            params: p,
        })
    }

    pub fn params(&self) -> &FtvParams {
        &self.params
    }

    pub fn mass(&self, tilt: f64) -> f64 {
        let p = &self.params;
        let r = p.ratios(tilt);
        p.j_a + p.j_b * r[1] * r[1] + p.j_c * r[2] * r[2] + p.j_d * r[3] * r[3]
    }

    /// `N = r_b r_c θ̇ₜ cosθₜ R₁² (J_c/r_c² + 2 r_b1 J_d / r_d³)`.
    pub fn coupling(&self, tilt: f64, tilt_rate: f64) -> f64 {
        let p = &self.params;
        let r1 = p.r_a / p.r_b2;
        let rd = p.r_d(tilt);
        p.r_b(tilt)
            * p.r_c
            * tilt_rate
            * tilt.cos()
            * r1
            * r1
            * (p.j_c / (p.r_c * p.r_c) + 2.0 * p.r_b1 * p.j_d / (rd * rd * rd))
    }

    fn scaled(&self, v: [f64; 4]) -> DMatrix<f64> {
        let s = self.inertia.sqrt_entries();
        DMatrix::from_fn(4, 1, |k, _| s[k] * v[k])
    }
}

impl FactorizedModel for FtvAnalytic {
    fn n(&self) -> usize {
        1
    }

    fn r_total(&self) -> usize {
        4
    }

    fn inertia(&self) -> &InertiaDiagonal {
        &self.inertia
    }

    fn eval_t(&self, _x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>> {
        self.params.domain(u)?;
        Ok(self.scaled(self.params.ratios(u)))
    }

    fn dt_dx(&self, _x: &DVector<f64>, u: f64) -> Result<Vec<DMatrix<f64>>> {
        self.params.domain(u)?;
        Ok(vec![DMatrix::zeros(4, 1)])
    }

    fn dt_du(&self, _x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>> {
        self.params.domain(u)?;
        Ok(self.scaled(self.params.ratio_slopes(u)))
    }

    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64> {
        self.force.force(state, u, inputs)
    }

    fn channel_names(&self) -> Vec<String> {
        channel_names()
    }
}

impl ElOracle for FtvAnalytic {
    fn el_matrices(
        &self,
        _x: &DVector<f64>,
        _xdot: &DVector<f64>,
        u: f64,
        udot: f64,
    ) -> Result<EulerLagrangeMatrices> {
        self.params.domain(u)?;
        Ok(EulerLagrangeMatrices {
            m: DMatrix::from_element(1, 1, self.mass(u)),
            n: DMatrix::from_element(1, 1, self.coupling(u, udot)),
        })
    }
}
