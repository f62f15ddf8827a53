//! Spectral reordering with the unweighted graph Laplacian.

use log::debug;

use super::sparse::{dot, norm2, Permutation, SparseMatrix};
use crate::{Error, Result};

/// Eigenvector components below this fraction of the largest one are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-6;

/// Algorithm for the extreme eigenpair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMethod {
    /// Restarted Lanczos with full reorthogonalisation.
    Lanczos,
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenConfig {
    pub method: EigenMethod,
    /// Relative residual `||L v - lambda v|| / lambda`.
    pub tol: f64,
    /// Budget in operator applications.
    pub max_iter: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { method: EigenMethod::Lanczos, tol: 1e-8, max_iter: 5000 }
    }
}

/// Converged extreme eigenpair.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Laplacian of the symmetrised pattern of `j` (diagonal entries ignored):
/// `L(i, i) = deg(i)`, `L(i, j) = -1` for adjacent `i != j`.
pub fn pattern_laplacian(j: &SparseMatrix) -> SparseMatrix {
    let n = j.nrows();
    let jt = j.transpose();
    let mut t = Vec::with_capacity(2 * j.nnz() + n);
    for i in 0..n {
        let (ca, _) = j.row(i);
        let (cb, _) = jt.row(i);
        let mut nbrs: Vec<usize> = ca.iter().chain(cb).copied().filter(|&c| c != i).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        t.push((i, i, nbrs.len() as f64));
        t.extend(nbrs.into_iter().map(|c| (i, c, -1.0)));
    }
    SparseMatrix::from_triplets(n, n, &t)
}

/// Deterministic start vector: ones plus a quasi-random perturbation.
pub fn start_vector(n: usize) -> Vec<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i as f64 + 1.0) * g).fract()).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

/// Largest eigenpair of a symmetric positive semidefinite operator.
pub fn largest_eigenpair(op: &dyn Fn(&[f64], &mut [f64]), n: usize, config: &EigenConfig) -> Result<EigenPair> {
    if n == 0 {
        return Ok(EigenPair { value: 0.0, vector: Vec::new(), residual: 0.0, iterations: 0 });
    }
    match config.method {
        EigenMethod::Power => power(op, n, config),
        EigenMethod::Lanczos => lanczos(op, n, config),
    }
}

fn power(op: &dyn Fn(&[f64], &mut [f64]), n: usize, config: &EigenConfig) -> Result<EigenPair> {
    let mut v = start_vector(n);
    let mut w = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=config.max_iter {
        op(&v, &mut w);
        let lambda = dot(&v, &w);
        residual = w.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(EigenPair { value: 0.0, vector: v, residual: 0.0, iterations: it });
        }
        if residual <= config.tol * lambda.abs() {
            return Ok(EigenPair { value: lambda, vector: v, residual, iterations: it });
        }
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / nw;
        }
    }
    Err(Error::EigenNotConverged { iterations: config.max_iter, residual })
}

fn lanczos(op: &dyn Fn(&[f64], &mut [f64]), n: usize, config: &EigenConfig) -> Result<EigenPair> {
    let m = n.min(120);
    let mut v0 = start_vector(n);
    let mut applied = 0;
    let mut residual = f64::INFINITY;
    let mut w = vec![0.0; n];
    loop {
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut ritz: Option<(f64, Vec<f64>)> = None;
        for j in 0..m {
            op(&basis[j], &mut w);
            applied += 1;
            let a = dot(&w, &basis[j]);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm2(&w);
            alpha.push(a);
            let last = j + 1 == m || applied >= config.max_iter;
            let invariant = b <= 1e-13 * a.abs().max(1.0);
            if j % 5 == 4 || last || invariant {
                let (theta, s) = top_ritz(&alpha, &beta);
                residual = b * s[j].abs();
                ritz = Some((theta, s));
                if invariant || residual <= config.tol * theta.abs() {
                    let (theta, s) = ritz.unwrap();
                    let vector = combine(&basis, &s, n);
                    // recompute the true residual
                    op(&vector, &mut w);
                    let res = w.iter().zip(&vector).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
                    debug!("lanczos converged after {applied} products, lambda {theta:.6e}, residual {res:.3e}");
                    return Ok(EigenPair { value: theta, vector, residual: res, iterations: applied });
                }
            }
            if last {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        if applied >= config.max_iter {
            return Err(Error::EigenNotConverged { iterations: applied, residual });
        }
        let (_, s) = ritz.expect("ritz pair computed at cycle end");
        v0 = combine(&basis, &s, n);
        let nv = norm2(&v0);
        v0.iter_mut().for_each(|x| *x /= nv);
    }
}

fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let t = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let imax = (0..k).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    (eig.eigenvalues[imax], eig.eigenvectors.column(imax).iter().copied().collect())
}

fn combine(basis: &[Vec<f64>], s: &[f64], n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for (b, c) in basis.iter().zip(s) {
        y.iter_mut().zip(b).for_each(|(a, x)| *a += c * x);
    }
    y
}

/// Stable argsort by decreasing value.
pub fn argsort_descending(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    idx
}

/// Result of the spectral reordering.
#[derive(Clone, Debug)]
pub struct Reordering {
    pub permutation: Permutation,
    /// Eigenvector components in the new order (non-increasing).
    pub sorted_values: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
}

/// Orders unknowns by the eigenvector of the largest Laplacian eigenvalue.
pub fn laplacian_reorder(j: &SparseMatrix, config: &EigenConfig) -> Result<Reordering> {
    if !j.is_square() {
        return Err(Error::DimensionMismatch { expected: j.nrows(), found: j.ncols() });
    }
    let lap = pattern_laplacian(j);
    let n = lap.nrows();
    let pair = largest_eigenpair(&|x, y| lap.matvec_into(x, y), n, config)?;
    // fix the sign so that the largest-magnitude component is positive
    let mut v = pair.vector;
    if let Some(big) = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    // components at the noise level keep the natural element order
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter_mut().filter(|x| x.abs() < TIE_TOLERANCE * vmax).for_each(|x| *x = 0.0);
    let order = argsort_descending(&v);
    let sorted_values = order.iter().map(|&i| v[i]).collect();
    Ok(Reordering {
        permutation: Permutation::new(order)?,
        sorted_values,
        eigenvalue: pair.value,
        iterations: pair.iterations,
    })
}
