//! Block LU with an explicit Schur complement.
//!
//! For `N = [[A, B], [C^T, D]]`:
//! `U = A^{-1} B`, `S = D - C^T U`, and `N w = d` is solved by
//! `A t = d1`, `S w2 = d2 - C^T t`, `w1 = t - U w2`.

use std::sync::OnceLock;

use log::{debug, warn};

use super::ilu::Ilu0;
use super::krylov::{bicgstab, bicgstab_steps, KrylovConfig};
use super::lu::SparseLu;
use super::partition::BlockPartition;
use super::sparse::SparseMatrix;
use crate::{Error, Result};

/// How `S^{-1}` is applied inside the block preconditioners.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerSchur {
    /// A few ILU(S)-preconditioned BiCGStab steps.
    Iterations(usize),
    /// One application of ILU(S).
    IluApply,
}

/// Prepared block factorization of a partitioned matrix.
#[derive(Clone, Debug)]
pub struct BlockFactorization {
    pub partition: BlockPartition,
    pub lu_a: SparseLu,
    /// `A^{-1} B`.
    pub ainv_b: SparseMatrix,
    pub schur: SparseMatrix,
    pub ilu: Option<Ilu0>,
    /// Sparse LU of `S`, formed on first use by [`BlockFactorization::solve_with_fallback`].
    direct: OnceLock<SparseLu>,
}

/// Statistics of one block solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlockSolveStats {
    pub iterations: f64,
    pub relative_residual: f64,
    /// The Schur system was solved with the sparse LU of `S`.
    pub direct: bool,
}

impl BlockFactorization {
    /// Factors `A`, forms `A^{-1} B` and `S`, and optionally `ILU(S)`.
    pub fn new(partition: BlockPartition, with_ilu: bool, ilu_shift: Option<f64>) -> Result<Self> {
        let lu_a = SparseLu::factor(&partition.a, 0.1)?;
        let ainv_b = lu_a.solve_sparse(&partition.b)?;
        let schur = partition.d.add_scaled(&partition.ct.mul(&ainv_b)?, -1.0)?;
        debug!(
            "schur complement {}x{} with {} nonzeros (density {:.3e})",
            schur.nrows(),
            schur.ncols(),
            schur.nnz(),
            schur.nnz() as f64 / (schur.nrows().max(1) as f64).powi(2)
        );
        let ilu = if with_ilu && schur.nrows() > 0 { Some(Ilu0::factor(&schur, ilu_shift)?) } else { None };
        Ok(BlockFactorization { partition, lu_a, ainv_b, schur, ilu, direct: OnceLock::new() })
    }

    pub fn split(&self) -> usize {
        self.partition.split
    }

    fn apply_ilu(&self, r: &[f64]) -> Vec<f64> {
        match &self.ilu {
            Some(ilu) => ilu.apply(r),
            None => r.to_vec(),
        }
    }

    /// Solves the whole system by block elimination, with BiCGStab on the Schur system.
    pub fn solve(&self, d: &[f64], config: &KrylovConfig) -> Result<(Vec<f64>, BlockSolveStats)> {
        self.solve_with_fallback(d, config, None)
    }

    /// Like [`Self::solve`]. When BiCGStab on `S` fails within `fallback_after` iterations,
    /// `S` is factored once and this and all later solves use the factors.
    pub fn solve_with_fallback(
        &self,
        d: &[f64],
        config: &KrylovConfig,
        fallback_after: Option<usize>,
    ) -> Result<(Vec<f64>, BlockSolveStats)> {
        let s = self.split();
        let (d1, d2) = d.split_at(s);
        let t = self.lu_a.solve(d1);
        let ct_t = self.partition.ct.matvec(&t);
        let rhs: Vec<f64> = d2.iter().zip(&ct_t).map(|(a, b)| a - b).collect();
        let (w2, stats) = match (self.direct.get(), fallback_after) {
            (Some(lu), Some(_)) => (lu.solve(&rhs), BlockSolveStats { direct: true, ..Default::default() }),
            (_, None) => {
                let res = bicgstab(&|x| self.schur.matvec(x), &|r| self.apply_ilu(r), &rhs, None, config)?;
                (res.x, BlockSolveStats { iterations: res.iterations, relative_residual: res.relative_residual, direct: false })
            }
            (None, Some(limit)) => {
                let capped = KrylovConfig { max_iter: config.max_iter.min(limit), ..*config };
                match bicgstab(&|x| self.schur.matvec(x), &|r| self.apply_ilu(r), &rhs, None, &capped) {
                    Ok(res) => (res.x, BlockSolveStats { iterations: res.iterations, relative_residual: res.relative_residual, direct: false }),
                    Err(e) if e.is_krylov_failure() => {
                        warn!("{e}; switching to a direct solve of the {}x{} Schur complement", rhs.len(), rhs.len());
                        let lu = match self.direct.get() {
                            Some(lu) => lu,
                            None => {
                                let lu = SparseLu::factor(&self.schur, 0.1)?;
                                self.direct.get_or_init(|| lu)
                            }
                        };
                        let spent = match e {
                            Error::KrylovNotConverged { iterations, .. } => iterations,
                            Error::KrylovStagnation { iteration, .. } | Error::KrylovBreakdown { iteration, .. } => iteration,
                            _ => 0,
                        };
                        (lu.solve(&rhs), BlockSolveStats { iterations: spent as f64, direct: true, ..Default::default() })
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let uw2 = self.ainv_b.matvec(&w2);
        let mut w: Vec<f64> = t.iter().zip(&uw2).map(|(a, b)| a - b).collect();
        w.extend_from_slice(&w2);
        Ok((w, stats))
    }

    /// Whether the sparse LU of `S` has been formed.
    pub fn has_direct_schur(&self) -> bool {
        self.direct.get().is_some()
    }

    fn schur_inverse(&self, r: &[f64], inner: InnerSchur) -> Vec<f64> {
        match inner {
            InnerSchur::IluApply => self.apply_ilu(r),
            InnerSchur::Iterations(k) => bicgstab_steps(&|x| self.schur.matvec(x), &|x| self.apply_ilu(x), r, k, 1e-12),
        }
    }

    /// `M1^{-1} r` with `M1 = [[A, 0], [C^T, S]]`.
    pub fn apply_m1(&self, r: &[f64], inner: InnerSchur) -> Vec<f64> {
        let s = self.split();
        let w1 = self.lu_a.solve(&r[..s]);
        let ct = self.partition.ct.matvec(&w1);
        let rhs: Vec<f64> = r[s..].iter().zip(&ct).map(|(a, b)| a - b).collect();
        let mut w = w1;
        w.extend(self.schur_inverse(&rhs, inner));
        w
    }

    /// `M2^{-1} r` with `M2 = [[A, B], [0, S]]`.
    pub fn apply_m2(&self, r: &[f64], inner: InnerSchur) -> Vec<f64> {
        let s = self.split();
        let w2 = self.schur_inverse(&r[s..], inner);
        let bw = self.partition.b.matvec(&w2);
        let rhs: Vec<f64> = r[..s].iter().zip(&bw).map(|(a, b)| a - b).collect();
        let mut w = self.lu_a.solve(&rhs);
        w.extend(w2);
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::partition::partition_at;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dd(rng: &mut ChaCha8Rng, n: usize, density: f64) -> DMatrix<f64> {
        let mut d = DMatrix::from_fn(n, n, |_, _| if rng.random::<f64>() < density { rng.random_range(-1.0..1.0) } else { 0.0 });
        for i in 0..n {
            let row: f64 = d.row(i).iter().map(|v: &f64| v.abs()).sum();
            d[(i, i)] = row + 1.0;
        }
        d
    }

    #[test]
    fn direct_fallback_takes_over() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_dd(&mut rng, 40, 0.2);
        let n = SparseMatrix::from_dense(&d);
        let f = BlockFactorization::new(partition_at(&n, 15).unwrap(), false, None).unwrap();
        let rhs: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let strict = KrylovConfig { tol: 1e-14, max_iter: 1, ..Default::default() };
        assert!(f.solve(&rhs, &strict).is_err());
        assert!(!f.has_direct_schur());
        let (w, stats) = f.solve_with_fallback(&rhs, &strict, Some(1)).unwrap();
        assert!(stats.direct && f.has_direct_schur());
        let exact = d.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        let err = (DVector::from_vec(w) - &exact).norm() / exact.norm();
        assert!(err < 1e-12, "{err}");
        // later solves reuse the factors without iterating
        let (_, again) = f.solve_with_fallback(&rhs, &KrylovConfig::default(), Some(1)).unwrap();
        assert!(again.direct && again.iterations == 0.0);
    }

    #[test]
    fn identity_system() {
        let n = SparseMatrix::identity(6);
        let f = BlockFactorization::new(partition_at(&n, 3).unwrap(), true, None).unwrap();
        let d = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let (w, stats) = f.solve(&d, &KrylovConfig::default()).unwrap();
        assert_eq!(w, d.to_vec());
        assert!(stats.iterations <= 0.5);
    }

    #[test]
    fn schur_complement_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = random_dd(&mut rng, 30, 0.2);
        let n = SparseMatrix::from_dense(&d);
        let f = BlockFactorization::new(partition_at(&n, 13).unwrap(), false, None).unwrap();
        let a = d.view((0, 0), (13, 13)).into_owned();
        let b = d.view((0, 13), (13, 17)).into_owned();
        let c = d.view((13, 0), (17, 13)).into_owned();
        let dd = d.view((13, 13), (17, 17)).into_owned();
        let u = a.lu().solve(&b).unwrap();
        let s = dd - c * &u;
        assert!((f.ainv_b.to_dense() - u).amax() < 1e-12);
        assert!((f.schur.to_dense() - &s).amax() < 1e-12 * s.amax());
    }

    #[test]
    fn random_systems_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        for _ in 0..5 {
            let d = random_dd(&mut rng, n, 0.25);
            let m = SparseMatrix::from_dense(&d);
            let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xd = d.clone().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            for ilu in [false, true] {
                let f = BlockFactorization::new(partition_at(&m, 9).unwrap(), ilu, None).unwrap();
                let (w, _) = f.solve(&rhs, &KrylovConfig { tol: 1e-13, ..Default::default() }).unwrap();
                assert!(w.iter().zip(xd.iter()).all(|(a, b)| (a - b).abs() < 1e-8 * xd.amax()));
            }
        }
    }

    #[test]
    fn m1_m2_match_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 12;
        let s = 5;
        // tridiagonal D and C^T = 0 keep S tridiagonal-like, so ILU(S) is exact
        let mut d = random_dd(&mut rng, n, 0.3);
        for i in s..n {
            for j in s..n {
                if i.abs_diff(j) > 1 {
                    d[(i, j)] = 0.0;
                }
            }
            for j in 0..s {
                d[(i, j)] = 0.0;
            }
        }
        let m = SparseMatrix::from_dense(&d);
        let f = BlockFactorization::new(partition_at(&m, s).unwrap(), true, None).unwrap();
        let a = d.view((0, 0), (s, s)).into_owned();
        let b = d.view((0, s), (s, n - s)).into_owned();
        let ct = d.view((s, 0), (n - s, s)).into_owned();
        let schur = f.schur.to_dense();
        let mut m1 = DMatrix::zeros(n, n);
        m1.view_mut((0, 0), (s, s)).copy_from(&a);
        m1.view_mut((s, 0), (n - s, s)).copy_from(&ct);
        m1.view_mut((s, s), (n - s, n - s)).copy_from(&schur);
        let mut m2 = DMatrix::zeros(n, n);
        m2.view_mut((0, 0), (s, s)).copy_from(&a);
        m2.view_mut((0, s), (s, n - s)).copy_from(&b);
        m2.view_mut((s, s), (n - s, n - s)).copy_from(&schur);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rv = DVector::from_vec(r.clone());
        for inner in [InnerSchur::IluApply, InnerSchur::Iterations(5)] {
            let y1 = f.apply_m1(&r, inner);
            let y2 = f.apply_m2(&r, inner);
            let e1 = m1.clone().lu().solve(&rv).unwrap();
            let e2 = m2.clone().lu().solve(&rv).unwrap();
            assert!(y1.iter().zip(e1.iter()).all(|(a, b)| (a - b).abs() < 1e-8));
            assert!(y2.iter().zip(e2.iter()).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }

    #[test]
    fn decoupled_blocks_make_m1_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10;
        let mut d = random_dd(&mut rng, n, 0.4);
        for i in 0..n {
            for j in 0..n {
                if (i < 5) != (j < 5) || (i >= 5 && j >= 5 && i.abs_diff(j) > 1) {
                    d[(i, j)] = 0.0;
                }
            }
        }
        let m = SparseMatrix::from_dense(&d);
        let f = BlockFactorization::new(partition_at(&m, 5).unwrap(), true, None).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for apply in [0, 1] {
            let pre = |r: &[f64]| if apply == 0 { f.apply_m1(r, InnerSchur::Iterations(5)) } else { f.apply_m2(r, InnerSchur::Iterations(5)) };
            let res = bicgstab(&|x| m.matvec(x), &pre, &rhs, None, &KrylovConfig::default()).unwrap();
            assert!(res.iterations <= 2.0);
        }
    }
}
