//! Adaptive discontinuous Galerkin solver for convection-dominated nonlinear
//! diffusion-convection-reaction systems on triangulations.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: conforming triangulations, edge topology, newest-vertex bisection.
//! - [`basis`]: Jacobi polynomials, the orthogonal Dubiner basis, quadrature and
//!   the broken polynomial space [`basis::DgSpace`].
//! - [`assembly`]: SIPG diffusion + upwind convection + reaction forms, the
//!   block-sparse stiffness matrix and the nonlinear residual.
//! - [`estimator`]: residual-based error indicators, data oscillation and bulk marking.
//! - [`linsolve`]: Jacobi scaling, Laplacian spectral reordering, block LU with an
//!   explicit Schur complement, ILU(0), BiCGStab and block preconditioners.
//! - [`nonlinear`]: frozen-Jacobian (chord) and full Newton iterations.
//! - [`problems`]: the benchmark registry.
//! - [`driver`]: the SOLVE / ESTIMATE / MARK / REFINE loop, sweeps and reports.

pub mod assembly;
pub mod basis;
pub mod config;
pub mod driver;
mod error;
pub mod estimator;
pub mod linsolve;
pub mod mesh;
pub mod nonlinear;
pub mod output;
pub mod problems;

pub use error::{Error, Result};
