//! Left-looking sparse LU with threshold partial pivoting (Gilbert-Peierls).
//!
//! Factors are stored column-wise. `L` is unit lower triangular with the unit
//! diagonal stored first in each column; `U` stores its diagonal last.

use super::sparse::SparseMatrix;
use crate::{Error, Result};

/// Compressed sparse column storage.
#[derive(Clone, Debug, Default)]
struct Csc {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl Csc {
    fn from_csr_transpose(a: &SparseMatrix) -> Csc {
        // the CSR arrays of A^T are the CSC arrays of A
        let t = a.transpose();
        Csc { n: a.ncols(), col_ptr: t.row_ptr().to_vec(), row_idx: t.col_idx().to_vec(), values: t.values().to_vec() }
    }
}

/// `P A = L U` for a square sparse matrix.
#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    l: Csc,
    u: Csc,
    /// `pinv[original row] = pivot position`.
    pinv: Vec<usize>,
}

/// Workspace for sparse triangular solves.
struct Reach {
    stack: Vec<usize>,
    pstack: Vec<usize>,
    mark: Vec<usize>,
    stamp: usize,
}

impl Reach {
    fn new(n: usize) -> Self {
        Reach { stack: Vec::with_capacity(n), pstack: vec![0; n], mark: vec![0; n], stamp: 0 }
    }

    /// Nodes reachable from `seeds` in the graph of `g` (column `j` of `g` lists the
    /// successors of node `map(j)`), written to `out` in topological order.
    fn reach(&mut self, g: &Csc, seeds: &[usize], map: &dyn Fn(usize) -> Option<usize>, skip_first: bool, out: &mut Vec<usize>) {
        self.stamp += 1;
        let stamp = self.stamp;
        out.clear();
        for &s in seeds {
            if self.mark[s] == stamp {
                continue;
            }
            self.stack.clear();
            self.stack.push(s);
            self.mark[s] = stamp;
            if let Some(c) = map(s) {
                self.pstack[s] = g.col_ptr[c] + skip_first as usize;
            }
            while let Some(&j) = self.stack.last() {
                let col = map(j);
                let mut done = true;
                if let Some(c) = col {
                    let end = if skip_first { g.col_ptr[c + 1] } else { g.col_ptr[c + 1].saturating_sub(1).max(g.col_ptr[c]) };
                    while self.pstack[j] < end {
                        let i = g.row_idx[self.pstack[j]];
                        self.pstack[j] += 1;
                        if self.mark[i] != stamp {
                            self.mark[i] = stamp;
                            if let Some(ci) = map(i) {
                                self.pstack[i] = g.col_ptr[ci] + skip_first as usize;
                            }
                            self.stack.push(i);
                            done = false;
                            break;
                        }
                    }
                }
                if done {
                    self.stack.pop();
                    out.push(j);
                }
            }
        }
        out.reverse();
    }
}

impl SparseLu {
    /// Factors `a`. A candidate on the diagonal is accepted when it is at least
    /// `tol` times the largest candidate in its column.
    pub fn factor(a: &SparseMatrix, tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let n = a.nrows();
        let ac = Csc::from_csr_transpose(a);
        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l = Csc { n, col_ptr: vec![0], ..Csc::default() };
        let mut u = Csc { n, col_ptr: vec![0], ..Csc::default() };
        let mut x = vec![0.0; n];
        let mut reach = Reach::new(n);
        let mut order = Vec::new();
        let mut seeds = Vec::new();
        for k in 0..n {
            // x = L \ A(:, k) over the reach of the column's pattern
            seeds.clear();
            seeds.extend_from_slice(&ac.row_idx[ac.col_ptr[k]..ac.col_ptr[k + 1]]);
            {
                let pv = &pinv;
                let map = |i: usize| if pv[i] == NONE { None } else { Some(pv[i]) };
                reach.reach(&l, &seeds, &map, true, &mut order);
            }
            for &i in &order {
                x[i] = 0.0;
            }
            for p in ac.col_ptr[k]..ac.col_ptr[k + 1] {
                x[ac.row_idx[p]] = ac.values[p];
            }
            for &j in &order {
                let c = pinv[j];
                if c == NONE {
                    continue;
                }
                let xj = x[j];
                for p in l.col_ptr[c] + 1..l.col_ptr[c + 1] {
                    x[l.row_idx[p]] -= l.values[p] * xj;
                }
            }
            // pivot selection
            let mut ipiv = NONE;
            let mut best = -1.0;
            for &i in &order {
                if pinv[i] == NONE {
                    if x[i].abs() > best {
                        best = x[i].abs();
                        ipiv = i;
                    }
                } else {
                    u.row_idx.push(pinv[i]);
                    u.values.push(x[i]);
                }
            }
            if ipiv == NONE || best <= 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix(k));
            }
            if pinv[k] == NONE && x[k].abs() >= best * tol {
                ipiv = k;
            }
            let pivot = x[ipiv];
            u.row_idx.push(k);
            u.values.push(pivot);
            u.col_ptr.push(u.row_idx.len());
            pinv[ipiv] = k;
            l.row_idx.push(ipiv);
            l.values.push(1.0);
            for &i in &order {
                if pinv[i] == NONE {
                    l.row_idx.push(i);
                    l.values.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
            l.col_ptr.push(l.row_idx.len());
        }
        for r in l.row_idx.iter_mut() {
            *r = pinv[*r];
        }
        Ok(SparseLu { n, l, u, pinv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros in `L + U` (unit diagonal of `L` included).
    pub fn nnz(&self) -> usize {
        self.l.values.len() + self.u.values.len()
    }

    /// Solves `A x = b` for a dense right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, &v) in b.iter().enumerate() {
            x[self.pinv[i]] = v;
        }
        for j in 0..self.n {
            let xj = x[j];
            for p in self.l.col_ptr[j] + 1..self.l.col_ptr[j + 1] {
                x[self.l.row_idx[p]] -= self.l.values[p] * xj;
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u.col_ptr[j + 1] - 1;
            x[j] /= self.u.values[last];
            let xj = x[j];
            for p in self.u.col_ptr[j]..last {
                x[self.u.row_idx[p]] -= self.u.values[p] * xj;
            }
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        // A^T = U^T L^T P
        let mut y = b.to_vec();
        for j in 0..self.n {
            let last = self.u.col_ptr[j + 1] - 1;
            let mut s = y[j];
            for p in self.u.col_ptr[j]..last {
                s -= self.u.values[p] * y[self.u.row_idx[p]];
            }
            y[j] = s / self.u.values[last];
        }
        for j in (0..self.n).rev() {
            let mut s = y[j];
            for p in self.l.col_ptr[j] + 1..self.l.col_ptr[j + 1] {
                s -= self.l.values[p] * y[self.l.row_idx[p]];
            }
            y[j] = s;
        }
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            x[i] = y[self.pinv[i]];
        }
        x
    }

    /// `A^{-1} B` with sparse columns, exploiting the sparsity of each right-hand side.
    pub fn solve_sparse(&self, b: &SparseMatrix) -> Result<SparseMatrix> {
        if b.nrows() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: b.nrows() });
        }
        let bc = Csc::from_csr_transpose(b);
        let n = self.n;
        let mut x = vec![0.0; n];
        let mut reach = Reach::new(n);
        let mut lorder = Vec::new();
        let mut uorder = Vec::new();
        let mut seeds = Vec::new();
        let mut triplets = Vec::new();
        let ident = |i: usize| Some(i);
        for k in 0..bc.n {
            seeds.clear();
            seeds.extend(bc.row_idx[bc.col_ptr[k]..bc.col_ptr[k + 1]].iter().map(|&i| self.pinv[i]));
            if seeds.is_empty() {
                continue;
            }
            reach.reach(&self.l, &seeds, &ident, true, &mut lorder);
            for p in bc.col_ptr[k]..bc.col_ptr[k + 1] {
                x[self.pinv[bc.row_idx[p]]] = bc.values[p];
            }
            for &j in &lorder {
                let xj = x[j];
                for p in self.l.col_ptr[j] + 1..self.l.col_ptr[j + 1] {
                    x[self.l.row_idx[p]] -= self.l.values[p] * xj;
                }
            }
            reach.reach(&self.u, &lorder, &ident, false, &mut uorder);
            for &j in &uorder {
                let last = self.u.col_ptr[j + 1] - 1;
                x[j] /= self.u.values[last];
                let xj = x[j];
                for p in self.u.col_ptr[j]..last {
                    x[self.u.row_idx[p]] -= self.u.values[p] * xj;
                }
            }
            for &j in &uorder {
                if x[j] != 0.0 {
                    triplets.push((j, k, x[j]));
                }
                x[j] = 0.0;
            }
        }
        Ok(SparseMatrix::from_triplets(n, bc.n, &triplets))
    }
}
