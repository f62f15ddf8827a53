//! Zero fill-in incomplete LU.

use super::sparse::SparseMatrix;
use crate::{Error, Result};

/// `L U ~ S` restricted to the pattern of `S`; `L` has a unit diagonal.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    factors: SparseMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    /// Factors `s`. With `shift = Some(delta)`, a vanishing pivot is replaced by `delta`
    /// instead of failing.
    pub fn factor(s: &SparseMatrix, shift: Option<f64>) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::DimensionMismatch { expected: s.nrows(), found: s.ncols() });
        }
        let n = s.nrows();
        // make sure every diagonal position exists in the pattern
        let missing: Vec<(usize, usize, f64)> = (0..n).filter(|&i| s.row(i).0.binary_search(&i).is_err()).map(|i| (i, i, 0.0)).collect();
        let mut f = if missing.is_empty() {
            s.clone()
        } else {
            s.add_scaled(&SparseMatrix::from_triplets(n, n, &missing), 1.0)?
        };
        let row_ptr = f.row_ptr().to_vec();
        let col_idx = f.col_idx().to_vec();
        let diag: Vec<usize> = (0..n).map(|i| row_ptr[i] + col_idx[row_ptr[i]..row_ptr[i + 1]].binary_search(&i).unwrap()).collect();
        let mut pos = vec![usize::MAX; n];
        let vals = f.values_mut();
        for i in 0..n {
            for p in row_ptr[i]..row_ptr[i + 1] {
                pos[col_idx[p]] = p;
            }
            for p in row_ptr[i]..diag[i] {
                let k = col_idx[p];
                let pivot = vals[diag[k]];
                vals[p] /= pivot;
                let lik = vals[p];
                for q in diag[k] + 1..row_ptr[k + 1] {
                    let j = col_idx[q];
                    if pos[j] != usize::MAX {
                        vals[pos[j]] -= lik * vals[q];
                    }
                }
            }
            let d = vals[diag[i]];
            if d == 0.0 || !d.is_finite() || d.abs() < 1e-300 {
                match shift {
                    Some(delta) => vals[diag[i]] = delta,
                    None => return Err(Error::IluBreakdown(i)),
                }
            }
            for p in row_ptr[i]..row_ptr[i + 1] {
                pos[col_idx[p]] = usize::MAX;
            }
        }
        Ok(Ilu0 { factors: f, diag })
    }

    /// `(L U)^{-1} r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let rp = self.factors.row_ptr();
        let ci = self.factors.col_idx();
        let v = self.factors.values();
        let mut x = r.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for p in rp[i]..self.diag[i] {
                s -= v[p] * x[ci[p]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in self.diag[i] + 1..rp[i + 1] {
                s -= v[p] * x[ci[p]];
            }
            x[i] = s / v[self.diag[i]];
        }
        x
    }

    /// Combined `L + U - I` factors on the pattern of the input.
    pub fn factors(&self) -> &SparseMatrix {
        &self.factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn lower_triangular_is_exact() {
        let d = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 1.0, 3.0, 0.0, -1.0, 2.0, 4.0]);
        let ilu = Ilu0::factor(&SparseMatrix::from_dense(&d), None).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = ilu.apply(&b);
        let xd = d.lu().solve(&DVector::from_row_slice(&b)).unwrap();
        assert!(x.iter().zip(xd.iter()).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn tridiagonal_is_exact() {
        let n = 12;
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 4.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 });
        let s = SparseMatrix::from_dense(&d);
        let ilu = Ilu0::factor(&s, None).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = ilu.apply(&b);
        let xd = d.lu().solve(&DVector::from_vec(b)).unwrap();
        assert!(x.iter().zip(xd.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn pattern_is_preserved() {
        let d = DMatrix::from_row_slice(4, 4, &[4.0, 1.0, 0.0, 1.0, 1.0, 4.0, 1.0, 0.0, 0.0, 1.0, 4.0, 1.0, 1.0, 0.0, 1.0, 4.0]);
        let s = SparseMatrix::from_dense(&d);
        let ilu = Ilu0::factor(&s, None).unwrap();
        assert_eq!(ilu.factors().col_idx(), s.col_idx());
        assert_eq!(ilu.factors().row_ptr(), s.row_ptr());
    }

    #[test]
    fn zero_pivot() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = SparseMatrix::from_dense(&d);
        let e = Ilu0::factor(&s, None).unwrap_err();
        assert!(e.to_string().contains("ILU(0) breakdown"));
        assert!(Ilu0::factor(&s, Some(1e-12)).is_ok());
    }
}
