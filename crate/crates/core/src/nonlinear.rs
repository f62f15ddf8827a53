//! Newton-Raphson iteration `J w = -R(U)`, `U <- U + w`.

use std::time::Instant;

use log::{debug, info};

use crate::assembly::AssembledSystem;
use crate::basis::DgSpace;
use crate::linsolve::{KrylovConfig, LinearSolver, SolverConfig};
use crate::linsolve::sparse::norm2;
use crate::{Error, Result};

/// When the Jacobian is rebuilt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// `J = S + J_r(U^0)` for every step (chord iteration).
    Frozen,
    /// `J = S + J_r(U^i)` at every step.
    Full,
}

/// Starting vector of the iteration.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    Zero,
    /// One constant per component.
    Constant(Vec<f64>),
    /// Solution transferred from the previous mesh; falls back to the constant 1 when absent.
    PreviousLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonConfig {
    pub max_iter: usize,
    /// Relative to the initial residual norm.
    pub residual_tol: f64,
    /// Absolute bound on the correction norm.
    pub correction_tol: f64,
    pub jacobian_mode: JacobianMode,
    pub initial_guess: InitialGuess,
    /// Halve the step while the residual norm grows.
    pub damping: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iter: 50,
            residual_tol: 1e-8,
            correction_tol: 1e-10,
            jacobian_mode: JacobianMode::Frozen,
            initial_guess: InitialGuess::PreviousLevel,
            damping: false,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.residual_tol > 0.0) || !(self.correction_tol > 0.0) {
            return Err(Error::Config("newton: max_iter >= 1 and positive tolerances required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `||R(U^i)||_2` for `i = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// Krylov iterations of each linear solve.
    pub krylov_iterations: Vec<f64>,
    pub assemble_seconds: f64,
    pub reorder_seconds: f64,
    pub factor_seconds: f64,
    pub solve_seconds: f64,
    pub seconds: f64,
}

impl NewtonReport {
    pub fn average_krylov(&self) -> f64 {
        if self.krylov_iterations.is_empty() {
            0.0
        } else {
            self.krylov_iterations.iter().sum::<f64>() / self.krylov_iterations.len() as f64
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Coefficient vector of the starting guess. `previous` is a solution already
/// transferred onto `space`.
pub fn initial_vector(space: &DgSpace, guess: &InitialGuess, previous: Option<&[f64]>) -> Result<Vec<f64>> {
    let m = space.components();
    match guess {
        InitialGuess::Zero => Ok(vec![0.0; space.num_dofs()]),
        InitialGuess::Constant(c) => {
            if c.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: c.len() });
            }
            Ok(space.constant(c))
        }
        InitialGuess::PreviousLevel => match previous {
            Some(u) if u.len() == space.num_dofs() => Ok(u.to_vec()),
            Some(u) => Err(Error::DimensionMismatch { expected: space.num_dofs(), found: u.len() }),
            None => Ok(space.constant(&vec![1.0; m])),
        },
    }
}

/// Runs Newton from `u0`.
pub fn newton_solve(
    system: &AssembledSystem,
    solver: &SolverConfig,
    config: &NewtonConfig,
    u0: Vec<f64>,
) -> Result<(Vec<f64>, NewtonReport)> {
    newton_solve_observed(system, solver, config, u0, &mut |_, _| {})
}

/// As [`newton_solve`], calling `observe(i, U^i)` for every iterate.
pub fn newton_solve_observed(
    system: &AssembledSystem,
    solver: &SolverConfig,
    config: &NewtonConfig,
    u0: Vec<f64>,
    observe: &mut dyn FnMut(usize, &[f64]),
) -> Result<(Vec<f64>, NewtonReport)> {
    config.validate()?;
    let start = Instant::now();
    let mut report = NewtonReport::default();
    let mut u = u0;
    observe(0, &u);

    let t = Instant::now();
    let mut r = system.residual(&u)?;
    report.assemble_seconds += t.elapsed().as_secs_f64();
    let r0 = norm2(&r);
    report.residual_history.push(r0);
    if r0 == 0.0 {
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((u, report));
    }

    // A linear problem is solved in one step, so the inner tolerance must sit below the outer one.
    let krylov = if system.problem.is_linear() {
        KrylovConfig { tol: solver.krylov.tol.min(1e-3 * config.residual_tol), ..solver.krylov }
    } else {
        solver.krylov
    };

    let mut prepared: Option<LinearSolver> = None;
    for it in 1..=config.max_iter {
        if prepared.is_none() || config.jacobian_mode == JacobianMode::Full {
            let t = Instant::now();
            let j = system.jacobian(&u)?.to_csr();
            report.assemble_seconds += t.elapsed().as_secs_f64();
            let ls = LinearSolver::prepare(&j, *solver)?;
            report.reorder_seconds += ls.timings.scale + ls.timings.reorder;
            report.factor_seconds += ls.timings.factor;
            prepared = Some(ls);
        }
        let ls = prepared.as_ref().expect("prepared above");
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        // no need to solve below 1% of the Newton target
        let floor = 1e-2 * config.residual_tol * r0 / norm2(&rhs);
        let krylov = if system.problem.is_linear() { krylov } else { KrylovConfig { tol: krylov.tol.max(floor), ..krylov } };
        let (mut w, stats) = ls.solve_with(&rhs, &krylov)?;
        report.solve_seconds += stats.seconds;
        report.krylov_iterations.push(stats.iterations);

        let t = Instant::now();
        let mut trial: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        let mut r_new = system.residual(&trial)?;
        if config.damping {
            let mut lambda = 1.0;
            while norm2(&r_new) > norm2(&r) && lambda > 1.0 / 64.0 {
                lambda *= 0.5;
                w.iter_mut().for_each(|x| *x *= 0.5);
                trial = u.iter().zip(&w).map(|(a, b)| a + b).collect();
                r_new = system.residual(&trial)?;
            }
            if lambda < 1.0 {
                debug!("newton step {it} damped by {lambda}");
            }
        }
        report.assemble_seconds += t.elapsed().as_secs_f64();
        u = trial;
        r = r_new;
        let rn = norm2(&r);
        report.residual_history.push(rn);
        report.iterations = it;
        observe(it, &u);
        debug!("newton {it}: |R| = {rn:.3e}, |w| = {:.3e}, krylov {}", norm2(&w), stats.iterations);
        if !rn.is_finite() {
            break;
        }
        if rn <= config.residual_tol * r0 || norm2(&w) <= config.correction_tol {
            report.seconds = start.elapsed().as_secs_f64();
            info!("newton converged in {it} iterations, avg krylov {:.1}", report.average_krylov());
            return Ok((u, report));
        }
    }
    Err(Error::NewtonNotConverged {
        iterations: report.iterations,
        residual: report.final_residual(),
        history: report.residual_history,
    })
}
