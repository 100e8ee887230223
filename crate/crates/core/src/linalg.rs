//! Small dense linear algebra: SPD factorization, Moore-Penrose
//! pseudo-inverse of full-column-rank matrices and the orthogonal projector
//! onto `Ker(Tᵀ)`.
//!
//! The pseudo-inverse is formed from the normal equations,
//! `T⁺ = (TᵀT)⁻¹Tᵀ`, solved through a Cholesky factorization of `TᵀT`
//! rather than an explicit inverse. The systems handled here have at most a
//! handful of columns and are physically scaled.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Absolute tolerance for projector / pseudo-inverse identities.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Condition-number estimate above which a matrix is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::dim("cholesky: square matrix columns", n, m.ncols()));
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut pivot = m[(j, j)];
            for k in 0..j {
                pivot -= l[(j, k)] * l[(j, k)];
            }
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotSpd { pivot: j, value: pivot });
            }
            let d = pivot.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn factor_l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn solve(&self, b: &DenseVector) -> Result<DenseVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::dim("cholesky solve: right-hand side", n, b.len()));
        }
        let mut y = b.clone();
        self.solve_in_place(y.as_mut_slice());
        Ok(y)
    }

    /// Solves `M X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim();
        if b.nrows() != n {
            return Err(Error::dim("cholesky solve: right-hand side rows", n, b.nrows()));
        }
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        Ok(x)
    }

    fn solve_in_place(&self, y: &mut [f64]) {
        let n = self.dim();
        let l = &self.l;
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
    }

    /// 1-norm condition number `‖M‖₁‖M⁻¹‖₁` of the factored matrix, with the
    /// inverse formed column by column (cheap for the sizes used here).
    pub fn condition_estimate(&self, m: &DenseMatrix) -> f64 {
        let n = self.dim();
        let mut inv_norm = 0.0_f64;
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.solve_in_place(&mut e);
            inv_norm = inv_norm.max(e.iter().map(|v| v.abs()).sum());
        }
        one_norm(m) * inv_norm
    }
}

pub fn one_norm(m: &DenseMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factors a symmetric positive definite matrix, rejecting numerically
/// singular ones with [`Error::Rank`].
pub fn factor_well_conditioned(m: &DenseMatrix) -> Result<Cholesky> {
    let chol = Cholesky::factor(m).map_err(|e| match e {
        Error::NotSpd { .. } => Error::Rank {
            condition: f64::INFINITY,
        },
        other => other,
    })?;
    let condition = chol.condition_estimate(m);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Rank { condition });
    }
    Ok(chol)
}

/// Solves `M y = b` for symmetric positive definite `M`.
pub fn spd_solve(m: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    if m.nrows() != b.len() {
        return Err(Error::dim("spd_solve: right-hand side", m.nrows(), b.len()));
    }
    Cholesky::factor(m)?.solve(b)
}

/// Moore-Penrose pseudo-inverse `T⁺ = (TᵀT)⁻¹Tᵀ` of a full-column-rank `T`.
pub fn pseudo_inverse(t: &DenseMatrix) -> Result<DenseMatrix> {
    let (r, n) = t.shape();
    if r < n {
        return Err(Error::dim("pseudo_inverse: rows (need rows >= columns)", n, r));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pseudo_inverse input"));
    }
    let g = symmetrize(&t.tr_mul(t));
    let chol = factor_well_conditioned(&g)?;
    chol.solve_matrix(&t.transpose())
}

/// Orthogonal projector `P = I − T T⁺` onto `Ker(Tᵀ)`.
pub fn kernel_projection(t: &DenseMatrix, t_plus: &DenseMatrix) -> Result<DenseMatrix> {
    let (r, n) = t.shape();
    if t_plus.shape() != (n, r) {
        return Err(Error::dim(
            "kernel_projection: pseudo-inverse rows",
            n,
            t_plus.nrows(),
        ));
    }
    Ok(DenseMatrix::identity(r, r) - t * t_plus)
}

/// `(A + Aᵀ)/2`.
pub fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    (a + a.transpose()) * 0.5
}

/// Largest absolute entry.
pub fn max_abs(a: &DenseMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
