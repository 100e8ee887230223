//! Forward and inverse dynamics in the Euler-Lagrange and factorized forms.
//!
//! The factorized form is integrated on the augmented state `(x, w)` with
//! `w = T ẋ`. Velocities are recovered with the pseudo-inverse and the
//! integrated quantity evolves as `ẇ = (T⁺)ᵀτ + P Ṫ ẋ`, `P = I − T T⁺`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::factorization::el_matrices_from_t;
use crate::linalg::{kernel_projection, pseudo_inverse, spd_solve};
use crate::model::{EulerLagrangeMatrices, FactorizedModel, State};

/// Closed-form `M(x, u)` and `N(x, ẋ, u, u̇)` supplied by a case study.
pub trait ElOracle: Send + Sync {
    fn el_matrices(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        u: f64,
        udot: f64,
    ) -> Result<EulerLagrangeMatrices>;
}

/// Where the Euler-Lagrange path takes `M` and `N` from.
#[derive(Clone, Copy)]
pub enum ElSource<'a> {
    /// `M = TᵀT`, `N = TᵀṪ` from the model.
    Assembled,
    Analytic(&'a dyn ElOracle),
}

impl std::fmt::Debug for ElSource<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElSource::Assembled => f.write_str("Assembled"),
            ElSource::Analytic(_) => f.write_str("Analytic"),
        }
    }
}

pub fn el_matrices(
    model: &dyn FactorizedModel,
    source: ElSource<'_>,
    x: &DVector<f64>,
    xdot: &DVector<f64>,
    u: f64,
    udot: f64,
) -> Result<EulerLagrangeMatrices> {
    match source {
        ElSource::Assembled => {
            let (t, tdot) = model.t_and_tdot(x, xdot, u, udot)?;
            el_matrices_from_t(&t, &tdot)
        }
        ElSource::Analytic(oracle) => oracle.el_matrices(x, xdot, u, udot),
    }
}

fn check_vec(what: &'static str, n: usize, v: &DVector<f64>) -> Result<()> {
    if v.len() != n {
        return Err(Error::dim(what, n, v.len()));
    }
    Ok(())
}

/// `(ẋ, ẍ)` with `ẍ = M⁻¹(τ − N ẋ)`.
pub fn rhs_euler_lagrange(
    model: &dyn FactorizedModel,
    state: &State,
    u: f64,
    udot: f64,
    tau: &DVector<f64>,
    source: ElSource<'_>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    state.check_dim(model.n())?;
    check_vec("generalized force", model.n(), tau)?;
    let el = el_matrices(model, source, &state.x, &state.xdot, u, udot)?;
    let rhs = tau - &el.n * &state.xdot;
    let xddot = spd_solve(&el.m, &rhs).map_err(|e| match e {
        Error::NotSpd { .. } => Error::Rank {
            condition: f64::INFINITY,
        },
        other => other,
    })?;
    Ok((state.xdot.clone(), xddot))
}

/// Integrated state of the factorized form.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub x: DVector<f64>,
    /// `T ẋ`, length `r_total`.
    pub w: DVector<f64>,
}

impl AugmentedState {
    /// `w(0) = T(x(0), u(0)) ẋ(0)`.
    pub fn from_state(model: &dyn FactorizedModel, state: &State, u: f64) -> Result<Self> {
        state.check_dim(model.n())?;
        let t = model.eval_t(&state.x, u)?;
        Ok(AugmentedState {
            x: state.x.clone(),
            w: t * &state.xdot,
        })
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.x.len();
        DVector::from_fn(n + self.w.len(), |i, _| if i < n { self.x[i] } else { self.w[i - n] })
    }

    pub fn from_vector(y: &DVector<f64>, n: usize) -> Self {
        AugmentedState {
            x: y.rows(0, n).into_owned(),
            w: y.rows(n, y.len() - n).into_owned(),
        }
    }
}

/// `T`, `T⁺` and `ẋ = T⁺w` at an augmented state.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub t: DMatrix<f64>,
    pub t_plus: DMatrix<f64>,
    pub xdot: DVector<f64>,
}

pub fn recover_velocity(
    model: &dyn FactorizedModel,
    aug: &AugmentedState,
    u: f64,
) -> Result<Recovered> {
    check_vec("augmented coordinates", model.n(), &aug.x)?;
    check_vec("augmented momentum", model.r_total(), &aug.w)?;
    let t = model.eval_t(&aug.x, u)?;
    let t_plus = pseudo_inverse(&t)?;
    let xdot = &t_plus * &aug.w;
    Ok(Recovered { t, t_plus, xdot })
}

/// `(ẋ, ẇ)` given an already recovered velocity.
pub fn rhs_factorized_recovered(
    model: &dyn FactorizedModel,
    aug: &AugmentedState,
    rec: &Recovered,
    u: f64,
    udot: f64,
    tau: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_vec("generalized force", model.n(), tau)?;
    let (_, tdot) = model.t_and_tdot(&aug.x, &rec.xdot, u, udot)?;
    let p = kernel_projection(&rec.t, &rec.t_plus)?;
    let wdot = rec.t_plus.tr_mul(tau) + p * (tdot * &rec.xdot);
    Ok((rec.xdot.clone(), wdot))
}

/// `(ẋ, ẇ)` with `ẋ = T⁺w` and `ẇ = (T⁺)ᵀτ + P Ṫ ẋ`.
pub fn rhs_factorized(
    model: &dyn FactorizedModel,
    aug: &AugmentedState,
    u: f64,
    udot: f64,
    tau: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let rec = recover_velocity(model, aug, u)?;
    rhs_factorized_recovered(model, aug, &rec, u, udot, tau)
}

/// `τ = M ẍ + N ẋ`.
pub fn inverse_dynamics_el(
    m: &DMatrix<f64>,
    n: &DMatrix<f64>,
    xdot: &DVector<f64>,
    xddot: &DVector<f64>,
) -> Result<DVector<f64>> {
    let dim = m.nrows();
    if m.ncols() != dim || n.shape() != (dim, dim) {
        return Err(Error::dim("inverse dynamics: N size", dim, n.nrows()));
    }
    check_vec("inverse dynamics: velocity", dim, xdot)?;
    check_vec("inverse dynamics: acceleration", dim, xddot)?;
    Ok(m * xddot + n * xdot)
}

/// `τ = Tᵀ(T ẍ + Ṫ ẋ)`, without forming `M` or `N`.
pub fn inverse_dynamics_factorized(
    t: &DMatrix<f64>,
    tdot: &DMatrix<f64>,
    xdot: &DVector<f64>,
    xddot: &DVector<f64>,
) -> Result<DVector<f64>> {
    if t.shape() != tdot.shape() {
        return Err(Error::dim("inverse dynamics: Tdot rows", t.nrows(), tdot.nrows()));
    }
    check_vec("inverse dynamics: velocity", t.ncols(), xdot)?;
    check_vec("inverse dynamics: acceleration", t.ncols(), xddot)?;
    Ok(t.tr_mul(&(t * xddot + tdot * xdot)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{assemble_model, NoForce, PositionMap};
    use crate::dual::Real;
    use crate::model::InertiaDiagonal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two coupled rotors: P = (x₀, x₀ + x₁, 2·x₁·cos u).
    struct Rotors;

    impl PositionMap for Rotors {
        fn n(&self) -> usize {
            2
        }
        fn layout(&self) -> Vec<usize> {
            vec![1, 1, 1]
        }
        fn mass_positions<S: Real>(&self, x: &[S], u: S) -> Vec<Vec<S>> {
            vec![vec![x[0]], vec![x[0] + x[1]], vec![x[1] * u.cos() * 2.0]]
        }
    }

    fn rotors() -> impl FactorizedModel {
        assemble_model(Rotors, InertiaDiagonal::new(vec![1.0, 0.5, 2.0]).unwrap(), NoForce).unwrap()
    }

    #[test]
    fn force_balance_gives_zero_acceleration() {
        let model = rotors();
        let s = State::from_slices(&[0.1, 0.2], &[1.0, -2.0], 0.0).unwrap();
        let (t, tdot) = model.t_and_tdot(&s.x, &s.xdot, 0.4, 0.7).unwrap();
        let el = el_matrices_from_t(&t, &tdot).unwrap();
        let tau = &el.n * &s.xdot;
        let (_, xddot) = rhs_euler_lagrange(&model, &s, 0.4, 0.7, &tau, ElSource::Assembled).unwrap();
        assert!(xddot.amax() < 1e-12);
    }

    #[test]
    fn factorized_rest_stays_at_rest() {
        let model = rotors();
        let aug = AugmentedState {
            x: DVector::from_vec(vec![0.3, -0.2]),
            w: DVector::zeros(3),
        };
        let (xd, wd) = rhs_factorized(&model, &aug, 0.5, 1.0, &DVector::zeros(2)).unwrap();
        assert_eq!(xd.amax(), 0.0);
        assert_eq!(wd.amax(), 0.0);
    }

    #[test]
    fn constant_t_only_forces_drive_w() {
        let model = rotors();
        let s = State::from_slices(&[0.3, -0.2], &[1.5, 0.5], 0.0).unwrap();
        let aug = AugmentedState::from_state(&model, &s, 0.5).unwrap();
        let tau = DVector::from_vec(vec![0.7, -1.1]);
        // u̇ = 0 and T independent of x → Ṫ = 0
        let (xd, wd) = rhs_factorized(&model, &aug, 0.5, 0.0, &tau).unwrap();
        let t = model.eval_t(&s.x, 0.5).unwrap();
        let expected = pseudo_inverse(&t).unwrap().tr_mul(&tau);
        assert!((xd - &s.xdot).amax() < 1e-12);
        assert!((wd - expected).amax() < 1e-12);
    }

    #[test]
    fn factorized_matches_el_acceleration() {
        let model = rotors();
        let s = State::from_slices(&[0.3, -0.2], &[1.5, 0.5], 0.0).unwrap();
        let (u, ud) = (0.5, 2.0);
        let tau = DVector::from_vec(vec![0.7, -1.1]);
        let (_, xddot) = rhs_euler_lagrange(&model, &s, u, ud, &tau, ElSource::Assembled).unwrap();
        let aug = AugmentedState::from_state(&model, &s, u).unwrap();
        let (_, wdot) = rhs_factorized(&model, &aug, u, ud, &tau).unwrap();
        // d/dt(Tẋ) = Ṫẋ + Tẍ
        let (t, tdot) = model.t_and_tdot(&s.x, &s.xdot, u, ud).unwrap();
        let expected = &tdot * &s.xdot + &t * &xddot;
        assert!((wdot - expected).amax() < 1e-12);
    }

    #[test]
    fn inverse_dynamics_trivial_cases() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let n = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let z = DVector::zeros(2);
        assert_eq!(inverse_dynamics_el(&m, &n, &z, &z).unwrap(), z);
        let t = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]);
        assert_eq!(inverse_dynamics_factorized(&t, &DMatrix::zeros(3, 2), &z, &z).unwrap(), z);
        let a = DVector::from_vec(vec![1.0, -2.0]);
        let tau = inverse_dynamics_factorized(&t, &DMatrix::zeros(3, 2), &z, &a).unwrap();
        assert!((tau - t.tr_mul(&t) * &a).amax() < 1e-14);
    }

    #[test]
    fn inverse_dynamics_algebraic_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let r = rng.gen_range(2..7);
            let c = rng.gen_range(1..=r.min(4));
            let t = DMatrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
            let td = DMatrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
            let xd = DVector::from_fn(c, |_, _| rng.gen_range(-3.0..3.0));
            let xdd = DVector::from_fn(c, |_, _| rng.gen_range(-3.0..3.0));
            let fact = inverse_dynamics_factorized(&t, &td, &xd, &xdd).unwrap();
            let el = inverse_dynamics_el(&t.tr_mul(&t), &t.tr_mul(&td), &xd, &xdd).unwrap();
            assert!((&fact - &el).norm() <= 1e-12 * (1.0 + el.norm()));
        }
    }

    #[test]
    fn inverse_dynamics_dimension_errors() {
        let t = DMatrix::zeros(3, 2);
        let v2 = DVector::zeros(2);
        let v3 = DVector::zeros(3);
        assert!(inverse_dynamics_factorized(&t, &DMatrix::zeros(2, 2), &v2, &v2).is_err());
        assert!(inverse_dynamics_factorized(&t, &t, &v3, &v2).is_err());
        assert!(inverse_dynamics_el(&DMatrix::zeros(2, 2), &DMatrix::zeros(3, 3), &v2, &v2).is_err());
    }
}
