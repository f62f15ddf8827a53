//! SOLVE - ESTIMATE - MARK - REFINE loop and parameter sweeps.

use std::fs::{self, File};
use std::io::BufWriter;
use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};

use crate::assembly::{assemble_stiffness, error_norms, AssembledSystem, ErrorNorms, ExactSolution, Penalty, ProblemSpec};
use crate::basis::DgSpace;
use crate::config::{RefinementMode, RunConfig};
use crate::estimator::{compute_data_error, compute_indicators, dorfler_mark, total_estimate, write_indicators_csv, ErrorIndicators};
use crate::linsolve::{condition_report, SolverMethod, SparseLu};
use crate::nonlinear::{initial_vector, newton_solve, InitialGuess, NewtonReport};
use crate::output::{write_report_csv, write_vtk, LevelRow};
use crate::problems::{ex_poisson_penalty, Benchmark, Overrides};
use crate::{Error, Result};

/// Why the loop stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    /// The estimator dropped below the tolerance.
    ToleranceReached,
    /// The dof or level budget ran out first.
    BudgetExhausted,
    /// A nonlinear or linear solve failed to converge on `level`.
    NotConverged { level: usize, message: String },
    /// The level observer asked to stop.
    Stopped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub rows: Vec<LevelRow>,
    pub status: RunStatus,
    pub seconds: f64,
}

impl SolveReport {
    /// Every solve converged.
    pub fn converged(&self) -> bool {
        !matches!(self.status, RunStatus::NotConverged { .. })
    }

    pub fn average_newton(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.newton_iterations as f64))
    }

    pub fn average_krylov(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.avg_krylov))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 { 0.0 } else { s / n as f64 }
}

/// Everything known about one solved level.
pub struct LevelView<'a> {
    pub level: usize,
    pub benchmark: &'a Benchmark,
    pub space: &'a DgSpace,
    pub solution: &'a [f64],
    pub indicators: &'a [ErrorIndicators],
    /// Elements marked for refinement (empty on the last level).
    pub marked: &'a [usize],
    pub newton: &'a NewtonReport,
    pub row: &'a LevelRow,
}

fn is_convergence_failure(e: &Error) -> bool {
    matches!(e, Error::NewtonNotConverged { .. }) || e.is_krylov_failure()
}

pub fn run_adaptive_loop(config: &RunConfig) -> Result<SolveReport> {
    run_adaptive_loop_with(config, &mut |_| ControlFlow::Continue(()))
}

/// Runs the loop, handing every solved level to `observe`, which may end the run early.
pub fn run_adaptive_loop_with(
    config: &RunConfig,
    observe: &mut dyn FnMut(&LevelView) -> ControlFlow<()>,
) -> Result<SolveReport> {
    let config = config.resolved()?;
    let start = Instant::now();
    let benchmark = config.benchmark()?;
    let problem = &benchmark.spec;
    let mode = config.refinement_mode()?;
    let solver = config.solver_config()?;
    let newton = config.newton_config()?;
    let degree = config.degree.expect("resolved");
    let tol = config.tol.expect("resolved");
    let max_dof = config.max_dof.expect("resolved");
    let m = problem.num_components();

    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.resolved.toml"), config.to_toml_string()?)?;
    }

    let mesh = benchmark.mesh(config.cells_x.expect("resolved"), config.cells_y.expect("resolved"))?;
    let mut space = DgSpace::new(mesh, degree, m)?;
    let mut previous: Option<Vec<f64>> = None;
    let mut rows: Vec<LevelRow> = Vec::new();
    let status;
    let mut level = 0;
    loop {
        let t_level = Instant::now();
        let t = Instant::now();
        let system = AssembledSystem::new(&space, problem);
        let assemble = t.elapsed().as_secs_f64();
        let guess = if config.warm_start && previous.is_some() { InitialGuess::PreviousLevel } else { newton.initial_guess.clone() };
        let u0 = initial_vector(&space, &guess, previous.as_deref())?;
        let (u, report) = match newton_solve(&system, &solver, &newton, u0) {
            Ok(r) => r,
            Err(e) if is_convergence_failure(&e) => {
                warn!("level {level}: {e}");
                status = RunStatus::NotConverged { level, message: e.to_string() };
                break;
            }
            Err(e) => return Err(e),
        };

        let t = Instant::now();
        let indicators = compute_indicators(&space, problem, &u)?;
        let eta = total_estimate(&indicators);
        let data_error = compute_data_error(&space, problem, &u)?.total();
        let estimate = t.elapsed().as_secs_f64();
        let errors = match problem.exact.as_ref() {
            Some(ex) => Some(exact_errors(&space, problem, &u, ex)?),
            None => None,
        };

        let dof = space.num_dofs();
        let stop = if eta < tol {
            Some(RunStatus::ToleranceReached)
        } else if level + 1 >= config.max_levels {
            Some(RunStatus::BudgetExhausted)
        } else {
            None
        };
        let marked = match (&stop, mode) {
            (Some(_), _) => Vec::new(),
            (None, RefinementMode::Uniform) => (0..space.num_elements()).collect(),
            (None, RefinementMode::Adaptive { theta }) => {
                let sq: Vec<Vec<f64>> = indicators.iter().map(|i| i.squared()).collect();
                let refs: Vec<&[f64]> = sq.iter().map(|v| v.as_slice()).collect();
                dorfler_mark(&refs, theta)?
            }
        };
        let row = LevelRow {
            level,
            elements: space.num_elements(),
            dof,
            eta,
            data_error,
            l2_error: errors.map(|e| e.l2),
            energy_error: errors.map(|e| e.energy),
            newton_iterations: report.iterations,
            avg_krylov: report.average_krylov(),
            marked: marked.len(),
            assemble_seconds: assemble + report.assemble_seconds,
            reorder_seconds: report.reorder_seconds,
            factor_seconds: report.factor_seconds,
            solve_seconds: report.solve_seconds,
            estimate_seconds: estimate,
            seconds: t_level.elapsed().as_secs_f64(),
        };
        info!(
            "level {level}: {} elements, {dof} dof, eta {eta:.3e}, newton {}, krylov {:.1}",
            row.elements, row.newton_iterations, row.avg_krylov
        );
        if let Some(dir) = &config.out {
            if config.vtk {
                let eta_cells: Vec<f64> =
                    (0..space.num_elements()).map(|k| indicators.iter().map(|i| i.element(k)).sum::<f64>().sqrt()).collect();
                let f = BufWriter::new(File::create(dir.join(format!("solution_level{level}.vtk")))?);
                write_vtk(&space, &u, &[("eta", &eta_cells)], f)?;
            }
            if config.indicators {
                let f = BufWriter::new(File::create(dir.join(format!("indicators_level{level}.csv")))?);
                write_indicators_csv(&indicators, f)?;
            }
        }
        let flow = observe(&LevelView {
            level,
            benchmark: &benchmark,
            space: &space,
            solution: &u,
            indicators: &indicators,
            marked: &marked,
            newton: &report,
            row: &row,
        });
        rows.push(row);
        if let Some(dir) = &config.out {
            write_report_csv(&rows, File::create(dir.join("report.csv"))?, config.timings)?;
        }
        if let Some(s) = stop {
            status = s;
            break;
        }
        if flow.is_break() {
            status = RunStatus::Stopped;
            break;
        }

        let refinement = space.mesh().refine(&marked);
        let next_dof = refinement.mesh.num_triangles() * space.block_size();
        if next_dof > max_dof {
            info!("next level would have {next_dof} dof, above the budget {max_dof}");
            status = RunStatus::BudgetExhausted;
            break;
        }
        let next = DgSpace::new(refinement.mesh, degree, m)?;
        previous = Some(next.transfer_from(&space, &u, &refinement.parent));
        space = next;
        level += 1;
    }
    if let Some(dir) = &config.out {
        write_report_csv(&rows, File::create(dir.join("report.csv"))?, config.timings)?;
    }
    Ok(SolveReport { rows, status, seconds: start.elapsed().as_secs_f64() })
}

/// Quadrature order for error norms against exact solutions; layers narrower
/// than the elements need more points than the assembly rule.
pub const ERROR_QUADRATURE: usize = 16;

/// Error norms on a copy of `space` with quadrature order [`ERROR_QUADRATURE`] or higher.
pub fn exact_errors(space: &DgSpace, problem: &ProblemSpec, u: &[f64], exact: &ExactSolution) -> Result<ErrorNorms> {
    let q = ERROR_QUADRATURE.max(2 * space.degree() + 2);
    let fine = DgSpace::with_quadrature(space.mesh().clone(), space.degree(), space.components(), q, q)?;
    Ok(error_norms(&fine, problem, u, Some(exact)))
}

/// One row of a method comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverRow {
    pub method: SolverMethod,
    pub avg_newton: f64,
    pub avg_krylov: f64,
    pub seconds: f64,
    pub status: RunStatus,
}

/// Runs the same configuration with each method.
pub fn compare_solvers(config: &RunConfig, methods: &[SolverMethod]) -> Result<Vec<SolverRow>> {
    methods
        .iter()
        .map(|&method| {
            let c = RunConfig { solver: method.name().into(), out: None, ..config.clone() };
            let r = run_adaptive_loop(&c)?;
            Ok(SolverRow {
                method,
                avg_newton: r.average_newton(),
                avg_krylov: r.average_krylov(),
                seconds: r.seconds,
                status: r.status,
            })
        })
        .collect()
}

/// Largest pointwise error over the element nodes (vertices and volume
/// quadrature points), each taken from the element's own polynomial.
pub fn max_nodal_error(space: &DgSpace, problem: &ProblemSpec, u: &[f64]) -> f64 {
    let exact = problem.exact.as_ref().expect("benchmark with exact solution");
    const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut worst = 0.0f64;
    for t in 0..space.num_elements() {
        let map = space.map(t);
        let nodes = CORNERS.iter().chain(&space.volume_rule().points);
        for xi in nodes {
            let x = map.map(*xi);
            for c in 0..space.components() {
                let v = space.eval_reference(u, t, c, *xi).value;
                worst = worst.max((v - exact(x, c).0).abs());
            }
        }
    }
    worst
}

/// Direct sparse solve of a linear benchmark on a fixed space.
pub fn solve_linear_direct(space: &DgSpace, problem: &ProblemSpec) -> Result<Vec<f64>> {
    let system = AssembledSystem::new(space, problem);
    let lu = SparseLu::factor(&system.stiffness.to_csr(), 1.0)?;
    Ok(lu.solve(&system.load))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyRow {
    pub sigma: f64,
    pub condition: Option<f64>,
    pub max_nodal_error: f64,
    pub l2_error: f64,
}

/// Poisson problem on an `n x n` mesh for each interior penalty `sigma`;
/// the stiffness condition number only when `condition` is set.
pub fn sweep_penalty(degree: usize, n: usize, sigmas: &[f64], condition: bool) -> Result<Vec<PenaltyRow>> {
    let base = ex_poisson_penalty();
    let mesh = base.mesh(n, n)?;
    let space = DgSpace::new(mesh, degree, 1)?;
    sigmas
        .iter()
        .map(|&sigma| {
            let problem = ProblemSpec { penalty: Some(Penalty::uniform(sigma)), ..base.spec.clone() };
            let condition = if condition {
                Some(condition_report(&assemble_stiffness(&space, &problem).to_csr())?.condition)
            } else {
                None
            };
            let u = solve_linear_direct(&space, &problem)?;
            let max_nodal_error = max_nodal_error(&space, &problem, &u);
            let exact = problem.exact.as_ref().expect("benchmark with exact solution");
            let l2_error = exact_errors(&space, &problem, &u, exact)?.l2;
            Ok(PenaltyRow { sigma, condition, max_nodal_error, l2_error })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshRow {
    pub n: usize,
    pub h: f64,
    pub dof: usize,
    pub condition: f64,
}

/// Condition number of the Poisson stiffness matrix on `n x n` meshes.
/// `sigma = None` uses `3k(k+1)`.
pub fn sweep_h(degree: usize, sigma: Option<f64>, ns: &[usize]) -> Result<Vec<MeshRow>> {
    let base = Benchmark::by_name("poisson", &Overrides { sigma, ..Default::default() })?;
    ns.iter()
        .map(|&n| {
            let space = DgSpace::new(base.mesh(n, n)?, degree, 1)?;
            let stiffness = assemble_stiffness(&space, &base.spec).to_csr();
            Ok(MeshRow { n, h: 1.0 / n as f64, dof: space.num_dofs(), condition: condition_report(&stiffness)?.condition })
        })
        .collect()
}

pub fn write_penalty_csv(rows: &[PenaltyRow], path: &Path) -> Result<()> {
    let mut wr = csv::Writer::from_path(path)?;
    wr.write_record(["sigma", "condition", "max_nodal_error", "l2_error"])?;
    for r in rows {
        let cond = r.condition.map(|c| format!("{c:.6e}")).unwrap_or_default();
        wr.write_record([r.sigma.to_string(), cond, format!("{:.6e}", r.max_nodal_error), format!("{:.6e}", r.l2_error)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_mesh_sweep_csv(rows: &[MeshRow], path: &Path) -> Result<()> {
    let mut wr = csv::Writer::from_path(path)?;
    wr.write_record(["n", "h", "dof", "condition"])?;
    for r in rows {
        wr.write_record([r.n.to_string(), format!("{:.6e}", r.h), r.dof.to_string(), format!("{:.6e}", r.condition)])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_uniform_smoke() {
        let c = RunConfig {
            mode: "uniform".into(),
            degree: Some(1),
            max_levels: 3,
            tol: Some(1e-12),
            ..RunConfig::for_benchmark("poisson")
        };
        let r = run_adaptive_loop(&c).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.status, RunStatus::BudgetExhausted);
        for w in r.rows.windows(2) {
            assert!(w[1].l2_error.unwrap() < w[0].l2_error.unwrap());
            assert!(w[1].level == w[0].level + 1);
        }
        for row in &r.rows {
            assert_eq!(row.dof, row.elements * 3);
            assert_eq!(row.newton_iterations, 1);
        }
    }

    #[test]
    fn artifacts_are_written() {
        let dir = std::env::temp_dir().join(format!("dgafem-driver-{}", std::process::id()));
        let c = RunConfig {
            mode: "adaptive".into(),
            degree: Some(1),
            max_levels: 2,
            out: Some(dir.clone()),
            ..RunConfig::for_benchmark("poisson")
        };
        let r = run_adaptive_loop(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        for f in ["report.csv", "config.resolved.toml", "solution_level1.vtk", "indicators_level0.csv"] {
            assert!(dir.join(f).exists(), "{f}");
        }
        let report = fs::read_to_string(dir.join("report.csv")).unwrap();
        assert_eq!(report.lines().count(), 3);
        let replay = RunConfig::load(&dir.join("config.resolved.toml")).unwrap();
        assert_eq!(replay.degree, Some(1));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn small_sweeps() {
        let rows = sweep_penalty(1, 4, &[6.0, 60.0], true).unwrap();
        assert!(rows[1].condition > rows[0].condition);
        assert!(rows.iter().all(|r| r.max_nodal_error < 0.2 && r.l2_error < r.max_nodal_error));
        assert!(sweep_penalty(1, 2, &[6.0], false).unwrap()[0].condition.is_none());
        let rows = sweep_h(1, None, &[2, 4]).unwrap();
        assert!(rows[1].condition > rows[0].condition);
        assert_eq!(rows[1].dof, 32 * 3);
    }
}
