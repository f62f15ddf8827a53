//! Spectral condition number estimates.

use super::lu::SparseLu;
use super::reorder::{largest_eigenpair, EigenConfig, EigenMethod};
use super::sparse::SparseMatrix;
use crate::{Error, Result};

/// Dimension up to which the condition number is computed from a dense SVD.
pub const DENSE_LIMIT: usize = 1500;

/// How a condition number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionMethod {
    DenseSvd,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub condition: f64,
    pub method: ConditionMethod,
}

/// `sigma_max / sigma_min` from the full singular value decomposition.
pub fn condition_dense(m: &SparseMatrix) -> Result<ConditionReport> {
    let sv = m.to_dense().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > smax * f64::EPSILON) {
        return Err(Error::SingularMatrix(0));
    }
    Ok(ConditionReport { sigma_max: smax, sigma_min: smin, condition: smax / smin, method: ConditionMethod::DenseSvd })
}

/// Lanczos on `M^T M` for `sigma_max` and on `(M^T M)^{-1}` (through a sparse LU) for `sigma_min`.
pub fn condition_lanczos(m: &SparseMatrix) -> Result<ConditionReport> {
    let n = m.nrows();
    let cfg = EigenConfig { method: EigenMethod::Lanczos, tol: 1e-6, max_iter: 3000 };
    let top = largest_eigenpair(
        &|x, y| {
            let t = m.matvec_transpose(&m.matvec(x));
            y.copy_from_slice(&t);
        },
        n,
        &cfg,
    )?;
    let lu = SparseLu::factor(m, 0.1)?;
    let inv = largest_eigenpair(
        &|x, y| {
            // (M^T M)^{-1} x = M^{-1} M^{-T} x
            let t = lu.solve(&lu.solve_transpose(x));
            y.copy_from_slice(&t);
        },
        n,
        &cfg,
    )?;
    let smax = top.value.sqrt();
    let smin = 1.0 / inv.value.sqrt();
    Ok(ConditionReport { sigma_max: smax, sigma_min: smin, condition: smax / smin, method: ConditionMethod::Lanczos })
}

/// 2-norm condition number, dense for small matrices and iterative otherwise.
pub fn condition_report(m: &SparseMatrix) -> Result<ConditionReport> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if m.nrows() <= DENSE_LIMIT {
        condition_dense(m)
    } else {
        condition_lanczos(m)
    }
}
