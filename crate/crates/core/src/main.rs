use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dgafem::config::RunConfig;
use dgafem::driver::{run_adaptive_loop, sweep_h, sweep_penalty, write_mesh_sweep_csv, write_penalty_csv, RunStatus};

#[derive(Parser)]
#[command(name = "dgafem", version, about = "Adaptive DG solver for convection-dominated reaction systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive (or uniform) refinement loop on a benchmark.
    Solve {
        /// TOML file with run parameters; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// ex1|ex2|ex3|ex4|linear|poisson
        #[arg(long)]
        benchmark: Option<String>,
        #[arg(long)]
        degree: Option<usize>,
        /// uniform|adaptive
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// unpermuted|m1|m2|blocklu|blocklu-ilu
        #[arg(long)]
        solver: Option<String>,
        #[arg(long)]
        max_dof: Option<usize>,
        #[arg(long)]
        max_levels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave wall-clock columns out of report.csv.
        #[arg(long)]
        no_timings: bool,
    },
    /// Condition number and errors of the Poisson problem for several penalties.
    SweepPenalty {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 5.0, 10.0, 18.0, 50.0, 100.0, 200.0, 500.0, 1000.0])]
        sigma_list: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Cells per direction.
        #[arg(long, default_value_t = 8)]
        cells: usize,
        /// Skip the condition numbers.
        #[arg(long)]
        no_condition: bool,
        #[arg(long, default_value = "sweep-penalty")]
        out: PathBuf,
    },
    /// Condition number of the Poisson problem on successively finer meshes.
    SweepH {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8, 16])]
        cells_list: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value = "sweep-h")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> dgafem::Result<ExitCode> {
    match cli.command {
        Command::Solve { config, benchmark, degree, mode, theta, tol, solver, max_dof, max_levels, out, no_timings } => {
            let mut c = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            if let Some(v) = benchmark {
                c.benchmark = v;
            }
            if let Some(v) = mode {
                c.mode = v;
            }
            if let Some(v) = solver {
                c.solver = v;
            }
            c.degree = degree.or(c.degree);
            c.theta = theta.or(c.theta);
            c.tol = tol.or(c.tol);
            c.max_dof = max_dof.or(c.max_dof);
            c.max_levels = max_levels.unwrap_or(c.max_levels);
            c.out = out.or(c.out);
            c.timings &= !no_timings;
            let report = run_adaptive_loop(&c)?;
            for r in &report.rows {
                println!(
                    "level {:>2}  elements {:>7}  dof {:>8}  eta {:.3e}  newton {:>2}  krylov {:>7.1}",
                    r.level, r.elements, r.dof, r.eta, r.newton_iterations, r.avg_krylov
                );
            }
            Ok(match report.status {
                RunStatus::NotConverged { level, message } => {
                    eprintln!("no convergence on level {level}: {message}");
                    ExitCode::from(2)
                }
                s => {
                    println!("{s:?} after {:.2} s", report.seconds);
                    ExitCode::SUCCESS
                }
            })
        }
        Command::SweepPenalty { sigma_list, degree, cells, no_condition, out } => {
            std::fs::create_dir_all(&out)?;
            let rows = sweep_penalty(degree, cells, &sigma_list, !no_condition)?;
            for r in &rows {
                let cond = r.condition.map(|c| format!("{c:.3e}")).unwrap_or_else(|| "-".into());
                println!("sigma {:>8.2}  cond {cond:>9}  max nodal error {:.3e}", r.sigma, r.max_nodal_error);
            }
            write_penalty_csv(&rows, &out.join("penalty.csv"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepH { cells_list, degree, sigma, out } => {
            std::fs::create_dir_all(&out)?;
            let rows = sweep_h(degree, sigma, &cells_list)?;
            for r in &rows {
                println!("h {:.4}  dof {:>7}  cond {:.3e}", r.h, r.dof, r.condition);
            }
            write_mesh_sweep_csv(&rows, &out.join("mesh.csv"))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
