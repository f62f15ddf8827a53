//! The five linear solver strategies on the same refinement sequence.
//!
//! `cargo run --release --example compare_solvers -- [uniform|adaptive] [max_dof]`

use dgafem::config::RunConfig;
use dgafem::driver::compare_solvers;
use dgafem::linsolve::SolverMethod;

fn main() -> dgafem::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode = args.next().unwrap_or_else(|| "uniform".into());
    let max_dof: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(15_000);
    let config = RunConfig {
        degree: Some(2),
        mode,
        max_dof: Some(max_dof),
        tol: Some(1e-12),
        max_levels: 60,
        ..RunConfig::for_benchmark("ex1")
    };
    println!("{:>12} {:>8} {:>10} {:>9}  status", "method", "newton", "krylov", "seconds");
    for r in compare_solvers(&config, &SolverMethod::ALL)? {
        println!("{:>12} {:>8.1} {:>10.1} {:>9.2}  {:?}", r.method.name(), r.avg_newton, r.avg_krylov, r.seconds, r.status);
    }
    Ok(())
}
