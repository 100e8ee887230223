//! Automatic construction of the factorization matrix.
//!
//! Given the stacked position vector `P₀(x, u)` of every degree of freedom of
//! every mass and the matching inertial coefficients `N₀`:
//!
//! ```text
//! H₀ = ∂P₀/∂x,    T = √N₀ · H₀,    M = TᵀT,    N = TᵀṪ
//! ```
//!
//! `H₀` comes from one forward-mode pass per coordinate; `∂T/∂xⱼ`, `∂T/∂u`
//! and `Ṫ` come from nested (second-order) passes.

use nalgebra::{DMatrix, DVector};

use crate::dual::{Dual, Real};
use crate::error::{Error, Result};
use crate::linalg::{factor_well_conditioned, symmetrize};
use crate::model::{EulerLagrangeMatrices, FactorizedModel, InertiaDiagonal, State};

type Hyper = Dual<Dual<f64>>;

/// Positions of every degree of freedom of every mass, as functions of the
/// coordinates `x` and the exogenous input `u`.
///
/// Implementations must be twice differentiable on their admissible domain.
pub trait PositionMap: Send + Sync {
    /// Number of generalized coordinates.
    fn n(&self) -> usize;

    /// Degrees of freedom `rⱼ` of each mass, in stacking order.
    fn layout(&self) -> Vec<usize>;

    /// Position vector `Pⱼ` of each mass.
    fn mass_positions<S: Real>(&self, x: &[S], u: S) -> Vec<Vec<S>>;

    fn r_total(&self) -> usize {
        self.layout().iter().sum()
    }

    /// `P₀ = [P₁; P₂; …; Pₘ]`.
    fn eval<S: Real>(&self, x: &[S], u: S) -> Vec<S> {
        self.mass_positions(x, u).into_iter().flatten().collect()
    }

    fn channel_names(&self) -> Vec<String> {
        (0..self.r_total()).map(|k| format!("v{k}")).collect()
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::dim(what, expected, found));
    }
    Ok(())
}

fn eval_checked<P: PositionMap, S: Real>(pm: &P, x: &[S], u: S) -> Result<Vec<S>> {
    let p = pm.eval(x, u);
    check_len("position map output", pm.r_total(), p.len())?;
    Ok(p)
}

fn domain_check(what: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "{what} is not finite; position map evaluated outside its admissible domain"
        )));
    }
    Ok(())
}

/// `H₀ = ∂P₀/∂x` by forward-mode differentiation, one tangent direction per
/// coordinate.
pub fn jacobian_h0<P: PositionMap>(pm: &P, x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>> {
    let n = pm.n();
    check_len("coordinates", n, x.len())?;
    let r = pm.r_total();
    let mut h0 = DMatrix::zeros(r, n);
    let mut xs: Vec<Dual<f64>> = x.iter().map(|&v| Dual::constant_of(v)).collect();
    for i in 0..n {
        xs[i].eps = 1.0;
        let p = eval_checked(pm, &xs, Dual::constant_of(u))?;
        for (k, pk) in p.iter().enumerate() {
            h0[(k, i)] = pk.eps;
        }
        xs[i].eps = 0.0;
    }
    domain_check("H0", &h0)?;
    Ok(h0)
}

/// `T = √N₀ · H₀` (row `k` of `H₀` scaled by `√n0ₖ`).
pub fn build_t(n0: &InertiaDiagonal, h0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_len("inertia diagonal vs H0 rows", h0.nrows(), n0.len())?;
    let mut t = h0.clone();
    for (k, s) in n0.sqrt_entries().iter().enumerate() {
        t.row_mut(k).scale_mut(*s);
    }
    Ok(t)
}

/// `Ṫ = Σᵢ (∂T/∂xᵢ) ẋᵢ + (∂T/∂u) u̇`.
pub fn tdot_from_partials(
    dt_dx: &[DMatrix<f64>],
    dt_du: &DMatrix<f64>,
    xdot: &DVector<f64>,
    udot: f64,
) -> Result<DMatrix<f64>> {
    check_len("velocity vs dT/dx count", dt_dx.len(), xdot.len())?;
    let mut tdot = dt_du * udot;
    for (d, v) in dt_dx.iter().zip(xdot.iter()) {
        check_len("dT/dx rows", tdot.nrows(), d.nrows())?;
        check_len("dT/dx columns", tdot.ncols(), d.ncols())?;
        tdot += d * *v;
    }
    Ok(tdot)
}

/// Time derivative of `T` along the state velocity and the exogenous rate.
pub fn time_derivative_t(
    fm: &dyn FactorizedModel,
    state: &State,
    u: f64,
    udot: f64,
) -> Result<DMatrix<f64>> {
    state.check_dim(fm.n())?;
    tdot_from_partials(&fm.dt_dx(&state.x, u)?, &fm.dt_du(&state.x, u)?, &state.xdot, udot)
}

/// `M = TᵀT` (symmetrized) and `N = TᵀṪ`. Fails with [`Error::Rank`] when `M`
/// is numerically singular.
pub fn el_matrices_from_t(t: &DMatrix<f64>, tdot: &DMatrix<f64>) -> Result<EulerLagrangeMatrices> {
    if t.shape() != tdot.shape() {
        return Err(Error::dim("T vs Tdot rows", t.nrows(), tdot.nrows()));
    }
    let m = symmetrize(&t.tr_mul(t));
    factor_well_conditioned(&m)?;
    let n = t.tr_mul(tdot);
    Ok(EulerLagrangeMatrices { m, n })
}

/// Generalized-force law `τ(state, u, inputs)`.
pub trait ForceLaw: Send + Sync {
    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64>;
}

impl<F> ForceLaw for F
where
    F: Fn(&State, f64, &[f64]) -> DVector<f64> + Send + Sync,
{
    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64> {
        self(state, u, inputs)
    }
}

/// Zero generalized force.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForce;

impl ForceLaw for NoForce {
    fn force(&self, state: &State, _u: f64, _inputs: &[f64]) -> DVector<f64> {
        DVector::zeros(state.n())
    }
}

/// A [`FactorizedModel`] built from a position map and inertial coefficients.
#[derive(Debug, Clone)]
pub struct AssembledModel<P, F> {
    positions: P,
    inertia: InertiaDiagonal,
    force: F,
}

/// Assembles the factorized model of a mechanism from its position map,
/// inertial coefficients and force law.
pub fn assemble_model<P: PositionMap, F: ForceLaw>(
    pm: P,
    n0: InertiaDiagonal,
    force: F,
) -> Result<AssembledModel<P, F>> {
    if pm.n() == 0 {
        return Err(Error::dim("coordinates", 1, 0));
    }
    check_len("inertia diagonal vs position map", pm.r_total(), n0.len())?;
    if pm.r_total() < pm.n() {
        return Err(Error::dim("position map rows (need r_total >= n)", pm.n(), pm.r_total()));
    }
    Ok(AssembledModel {
        positions: pm,
        inertia: n0,
        force,
    })
}

impl<P: PositionMap, F: ForceLaw> AssembledModel<P, F> {
    pub fn positions(&self) -> &P {
        &self.positions
    }

    pub fn h0(&self, x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>> {
        jacobian_h0(&self.positions, x, u)
    }

    /// Second-order pass with inner tangent `e_i` and outer tangent given by
    /// `outer_x`, `outer_u`. Returns `(∂P₀/∂xᵢ, ∂²P₀/∂xᵢ∂outer)`.
    fn nested_column(
        &self,
        x: &DVector<f64>,
        u: f64,
        i: usize,
        outer_x: &[f64],
        outer_u: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let xs: Vec<Hyper> = x
            .iter()
            .enumerate()
            .map(|(m, &v)| {
                let inner = Dual::new(v, if m == i { 1.0 } else { 0.0 });
                Dual::new(inner, Dual::constant_of(outer_x[m]))
            })
            .collect();
        let us: Hyper = Dual::new(Dual::constant_of(u), Dual::constant_of(outer_u));
        let p = eval_checked(&self.positions, &xs, us)?;
        Ok((
            p.iter().map(|v| v.re.eps).collect(),
            p.iter().map(|v| v.eps.eps).collect(),
        ))
    }

    fn scaled_matrix(&self, columns: Vec<Vec<f64>>) -> DMatrix<f64> {
        let s = self.inertia.sqrt_entries();
        DMatrix::from_fn(s.len(), columns.len(), |k, i| s[k] * columns[i][k])
    }
}

impl<P: PositionMap, F: ForceLaw> FactorizedModel for AssembledModel<P, F> {
    fn n(&self) -> usize {
        self.positions.n()
    }

    fn r_total(&self) -> usize {
        self.inertia.len()
    }

    fn inertia(&self) -> &InertiaDiagonal {
        &self.inertia
    }

    fn eval_t(&self, x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>> {
        build_t(&self.inertia, &jacobian_h0(&self.positions, x, u)?)
    }

    fn dt_dx(&self, x: &DVector<f64>, u: f64) -> Result<Vec<DMatrix<f64>>> {
        let n = self.n();
        check_len("coordinates", n, x.len())?;
        // hessian[i][j] = ∂²P₀/∂xᵢ∂xⱼ, symmetric in (i, j)
        let mut hessian = vec![vec![Vec::new(); n]; n];
        let mut dir = vec![0.0; n];
        for j in 0..n {
            dir[j] = 1.0;
            for i in 0..=j {
                let (_, second) = self.nested_column(x, u, i, &dir, 0.0)?;
                hessian[i][j] = second.clone();
                hessian[j][i] = second;
            }
            dir[j] = 0.0;
        }
        let out: Vec<DMatrix<f64>> = (0..n)
            .map(|j| self.scaled_matrix((0..n).map(|i| hessian[i][j].clone()).collect()))
            .collect();
        for d in &out {
            domain_check("dT/dx", d)?;
        }
        Ok(out)
    }

    fn dt_du(&self, x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>> {
        let n = self.n();
        check_len("coordinates", n, x.len())?;
        let zero = vec![0.0; n];
        let cols = (0..n)
            .map(|i| self.nested_column(x, u, i, &zero, 1.0).map(|c| c.1))
            .collect::<Result<Vec<_>>>()?;
        let d = self.scaled_matrix(cols);
        domain_check("dT/du", &d)?;
        Ok(d)
    }

    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64> {
        self.force.force(state, u, inputs)
    }

    fn t_and_tdot(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        u: f64,
        udot: f64,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n = self.n();
        check_len("coordinates", n, x.len())?;
        check_len("velocities", n, xdot.len())?;
        let mut h = Vec::with_capacity(n);
        let mut hdot = Vec::with_capacity(n);
        for i in 0..n {
            let (first, second) = self.nested_column(x, u, i, xdot.as_slice(), udot)?;
            h.push(first);
            hdot.push(second);
        }
        let t = self.scaled_matrix(h);
        let tdot = self.scaled_matrix(hdot);
        domain_check("T", &t)?;
        domain_check("Tdot", &tdot)?;
        Ok((t, tdot))
    }

    fn channel_names(&self) -> Vec<String> {
        self.positions.channel_names()
    }
}
