//! Left Jacobi scaling.

use super::sparse::SparseMatrix;
use crate::{Error, Result};

/// Record of a left diagonal scaling `D^{-1} J`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiScaling {
    pub diagonal: Vec<f64>,
}

impl JacobiScaling {
    /// `D^{-1} r`.
    pub fn scale_rhs(&self, r: &[f64]) -> Vec<f64> {
        r.iter().zip(&self.diagonal).map(|(a, d)| a / d).collect()
    }
}

/// Divides every row of `j` by its diagonal entry.
///
/// Left scaling leaves the solution unchanged, so only right-hand sides need
/// to be transformed with [`JacobiScaling::scale_rhs`].
pub fn jacobi_scale(j: &SparseMatrix) -> Result<(SparseMatrix, JacobiScaling)> {
    if !j.is_square() {
        return Err(Error::DimensionMismatch { expected: j.nrows(), found: j.ncols() });
    }
    let diagonal = j.diagonal();
    if let Some(i) = diagonal.iter().position(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::ZeroDiagonal(i));
    }
    let mut scaled = j.clone();
    scaled.scale_rows(&diagonal);
    Ok((scaled, JacobiScaling { diagonal }))
}
