//! The selectable linear solvers for Newton systems.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::krylov::{bicgstab, KrylovConfig};
use super::partition::block_partition;
use super::reorder::{laplacian_reorder, EigenConfig, Reordering};
use super::scaling::{jacobi_scale, JacobiScaling};
use super::schur::{BlockFactorization, InnerSchur};
use super::sparse::SparseMatrix;
use crate::{Error, Result};

/// One of the five compared solution strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverMethod {
    /// BiCGStab on the scaled system without reordering or preconditioning.
    Unpermuted,
    /// BiCGStab on the reordered system with the block lower preconditioner.
    M1,
    /// BiCGStab on the reordered system with the block upper preconditioner.
    M2,
    /// Block LU, unpreconditioned BiCGStab on the Schur complement.
    BlockLu,
    /// Block LU, ILU(S)-preconditioned BiCGStab on the Schur complement.
    BlockLuIlu,
}

impl SolverMethod {
    pub const ALL: [SolverMethod; 5] =
        [SolverMethod::Unpermuted, SolverMethod::M1, SolverMethod::M2, SolverMethod::BlockLu, SolverMethod::BlockLuIlu];

    pub fn name(self) -> &'static str {
        match self {
            SolverMethod::Unpermuted => "unpermuted",
            SolverMethod::M1 => "m1",
            SolverMethod::M2 => "m2",
            SolverMethod::BlockLu => "blocklu",
            SolverMethod::BlockLuIlu => "blocklu-ilu",
        }
    }
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SolverMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver '{s}' (expected unpermuted|m1|m2|blocklu|blocklu-ilu)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub krylov: KrylovConfig,
    pub inner: InnerSchur,
    pub eigen: EigenConfig,
    pub ilu_shift: Option<f64>,
    /// Block LU methods: iterations after which a failing Schur solve switches
    /// to a sparse LU of `S`; `None` reports the failure instead.
    pub direct_fallback: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::BlockLuIlu,
            krylov: KrylovConfig::default(),
            inner: InnerSchur::Iterations(5),
            eigen: EigenConfig::default(),
            ilu_shift: None,
            direct_fallback: Some(1000),
        }
    }
}

/// Wall-clock seconds of the preparation phases.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PrepareTimings {
    pub scale: f64,
    pub reorder: f64,
    pub factor: f64,
}

/// Result of one linear solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinearStats {
    pub iterations: f64,
    pub relative_residual: f64,
    pub seconds: f64,
    /// The Schur system was solved directly.
    pub direct: bool,
}

enum Prepared {
    Plain,
    Blocked { reordering: Reordering, factorization: BlockFactorization, permuted: SparseMatrix },
}

/// A linear solver prepared for one matrix and reusable for many right-hand sides.
pub struct LinearSolver {
    pub config: SolverConfig,
    scaled: SparseMatrix,
    scaling: JacobiScaling,
    prepared: Prepared,
    pub timings: PrepareTimings,
}

impl LinearSolver {
    /// Scales, and for the block methods reorders, partitions and factors `j`.
    pub fn prepare(j: &SparseMatrix, config: SolverConfig) -> Result<Self> {
        let t0 = Instant::now();
        let (scaled, scaling) = jacobi_scale(j)?;
        let mut timings = PrepareTimings { scale: t0.elapsed().as_secs_f64(), ..Default::default() };
        let prepared = if config.method == SolverMethod::Unpermuted {
            Prepared::Plain
        } else {
            let t1 = Instant::now();
            let reordering = laplacian_reorder(&scaled, &config.eigen)?;
            let permuted = scaled.permute(&reordering.permutation);
            timings.reorder = t1.elapsed().as_secs_f64();
            let t2 = Instant::now();
            let partition = block_partition(&permuted, &reordering.sorted_values)?;
            let with_ilu = config.method != SolverMethod::BlockLu;
            let factorization = BlockFactorization::new(partition, with_ilu, config.ilu_shift)?;
            timings.factor = t2.elapsed().as_secs_f64();
            Prepared::Blocked { reordering, factorization, permuted }
        };
        Ok(LinearSolver { config, scaled, scaling, prepared, timings })
    }

    pub fn dim(&self) -> usize {
        self.scaled.nrows()
    }

    /// Jacobi-scaled matrix.
    pub fn scaled_matrix(&self) -> &SparseMatrix {
        &self.scaled
    }

    /// Reordering and block factorization (absent for the unpermuted method).
    pub fn blocks(&self) -> Option<(&Reordering, &BlockFactorization, &SparseMatrix)> {
        match &self.prepared {
            Prepared::Plain => None,
            Prepared::Blocked { reordering, factorization, permuted } => Some((reordering, factorization, permuted)),
        }
    }

    /// Solves `J x = rhs` with the configured Krylov tolerance.
    pub fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, LinearStats)> {
        self.solve_with(rhs, &self.config.krylov)
    }

    pub fn solve_with(&self, rhs: &[f64], krylov: &KrylovConfig) -> Result<(Vec<f64>, LinearStats)> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.len() });
        }
        let t0 = Instant::now();
        let d = self.scaling.scale_rhs(rhs);
        let mut direct = false;
        let (x, iterations, relative_residual) = match &self.prepared {
            Prepared::Plain => {
                let r = bicgstab(&|x| self.scaled.matvec(x), &|x| x.to_vec(), &d, None, krylov)?;
                (r.x, r.iterations, r.relative_residual)
            }
            Prepared::Blocked { reordering, factorization, permuted } => {
                let p = &reordering.permutation;
                let dp = p.apply(&d);
                let inner = self.config.inner;
                let (w, it, res) = match self.config.method {
                    SolverMethod::M1 | SolverMethod::M2 => {
                        let m1 = self.config.method == SolverMethod::M1;
                        let pre = |r: &[f64]| if m1 { factorization.apply_m1(r, inner) } else { factorization.apply_m2(r, inner) };
                        let r = bicgstab(&|x| permuted.matvec(x), &pre, &dp, None, krylov)?;
                        (r.x, r.iterations, r.relative_residual)
                    }
                    _ => {
                        let (w, s) = factorization.solve_with_fallback(&dp, krylov, self.config.direct_fallback)?;
                        direct = s.direct;
                        (w, s.iterations, s.relative_residual)
                    }
                };
                (p.apply_inverse(&w), it, res)
            }
        };
        Ok((x, LinearStats { iterations, relative_residual, seconds: t0.elapsed().as_secs_f64(), direct }))
    }
}
