//! Sparse linear algebra and the block solver stack.
//!
//! A Newton matrix `J` is scaled from the left by its diagonal, reordered by the
//! eigenvector of the largest eigenvalue of the Laplacian of its sparsity graph,
//! split into `[[A, B], [C^T, D]]` and solved through the Schur complement
//! `S = D - C^T A^{-1} B`.

pub mod condition;
pub mod ilu;
pub mod krylov;
pub mod lu;
pub mod partition;
pub mod reorder;
pub mod scaling;
pub mod schur;
pub mod sparse;
pub mod stack;

pub use condition::{condition_report, ConditionMethod, ConditionReport};
pub use ilu::Ilu0;
pub use krylov::{bicgstab, KrylovConfig, KrylovResult};
pub use lu::SparseLu;
pub use partition::{block_partition, choose_split, partition_at, BlockPartition};
pub use reorder::{laplacian_reorder, pattern_laplacian, EigenConfig, EigenMethod, Reordering};
pub use scaling::{jacobi_scale, JacobiScaling};
pub use schur::{BlockFactorization, InnerSchur};
pub use sparse::{Permutation, SparseMatrix};
pub use stack::{LinearSolver, LinearStats, PrepareTimings, SolverConfig, SolverMethod};
