//! Adaptive solve of the tanh-layer example with its error history.
//!
//! `cargo run --release --example solve_adaptive -- [max_dof]`

use dgafem::config::RunConfig;
use dgafem::driver::run_adaptive_loop;

fn main() -> dgafem::Result<()> {
    let max_dof: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let config = RunConfig { degree: Some(2), max_dof: Some(max_dof), tol: Some(1e-6), ..RunConfig::for_benchmark("ex1") };
    let report = run_adaptive_loop(&config)?;
    println!("{:>5} {:>8} {:>10} {:>10} {:>10} {:>6}", "level", "dof", "eta", "L2", "energy", "newton");
    for r in &report.rows {
        println!(
            "{:>5} {:>8} {:>10.3e} {:>10.3e} {:>10.3e} {:>6}",
            r.level,
            r.dof,
            r.eta,
            r.l2_error.unwrap_or(f64::NAN),
            r.energy_error.unwrap_or(f64::NAN),
            r.newton_iterations
        );
    }
    println!("{:?} in {:.1} s", report.status, report.seconds);
    Ok(())
}
