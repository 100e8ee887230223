//! Factorized dynamics of nonlinear mechanical systems.
//!
//! A mechanism with generalized coordinates `x` and quadratic kinetic energy
//! `½ ẋᵀ M(x) ẋ` is described by a rectangular factorization matrix `T` with
//! `M = TᵀT` and `N = TᵀṪ`. The equations of motion then read
//!
//! ```text
//! Tᵀ d/dt (T ẋ) = τ          (factorized form)
//! M ẍ + N ẋ    = τ          (Euler-Lagrange form)
//! ```
//!
//! `T` is built automatically from per-mass position maps `P₀(x, u)` and the
//! diagonal of inertial coefficients `N₀` as `T = √N₀ · ∂P₀/∂x`, with the
//! derivatives obtained through nested forward-mode dual numbers.
//!
//! The factorized form is simulated in integral causality on the augmented
//! state `(x, w)`, `w = T ẋ`:
//!
//! ```text
//! ẋ = T⁺ w,     ẇ = (T⁺)ᵀ τ + P Ṫ ẋ,     P = I − T T⁺
//! ```
//!
//! Crate layout:
//! - [`model`]: shared domain types (states, exogenous signals, the
//!   [`FactorizedModel`](model::FactorizedModel) trait).
//! - [`dual`]: forward-mode dual numbers.
//! - [`factorization`]: the modeling procedure from position maps to `T`, `Ṫ`, `M`, `N`.
//! - [`linalg`]: pseudo-inverse, kernel projection, SPD solve.
//! - [`dynamics`]: forward and inverse dynamics in both formulations.
//! - [`integration`]: RK4 / RK45 stepping and trajectory generation.
//! - [`systems`]: crank–connecting rod, full toroidal variator, planar 2-DoF robot.
//! - [`experiments`]: noise-robustness and inverse-dynamics timing harnesses, CSV/SVG output.

pub mod dual;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod factorization;
pub mod integration;
pub mod linalg;
pub mod model;
pub mod systems;

pub use error::{Error, Result};
pub use model::{
    EulerLagrangeMatrices, ExogenousSignal, FactorizedModel, InertiaDiagonal, State, Trajectory,
};
