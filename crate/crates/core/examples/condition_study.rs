//! Condition numbers of J, of the Schur complement S and of the leading block A
//! on the first adaptive levels of the tanh-layer example.
//!
//! `cargo run --release --example condition_study -- [max_dof]`

use std::ops::ControlFlow;

use dgafem::assembly::AssembledSystem;
use dgafem::config::RunConfig;
use dgafem::driver::{run_adaptive_loop_with, sweep_h};
use dgafem::linsolve::{condition_report, LinearSolver, SolverConfig};

fn main() -> dgafem::Result<()> {
    let max_dof: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    println!("Poisson, k=2, uniform meshes:");
    for r in sweep_h(2, None, &[2, 4, 8, 16])? {
        println!("  h = {:.4}  dof {:>5}  cond {:.3e}", r.h, r.dof, r.condition);
    }
    println!("tanh layer, k=2, adaptive levels:");
    let config = RunConfig { degree: Some(2), max_dof: Some(max_dof), tol: Some(1e-12), max_levels: 60, ..RunConfig::for_benchmark("ex1") };
    let mut failure = None;
    run_adaptive_loop_with(&config, &mut |view| {
        let result = (|| -> dgafem::Result<()> {
            let j = AssembledSystem::new(view.space, &view.benchmark.spec).jacobian(view.solution)?.to_csr();
            let solver = LinearSolver::prepare(&j, SolverConfig::default())?;
            let (_, blocks, _) = solver.blocks().expect("block method");
            println!(
                "  dof {:>6}  cond J {:.3e}  cond S {:.3e}  cond A {:.2}  split {}",
                view.row.dof,
                condition_report(solver.scaled_matrix())?.condition,
                condition_report(&blocks.schur)?.condition,
                condition_report(&blocks.partition.a)?.condition,
                blocks.split()
            );
            Ok(())
        })();
        match result {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    failure.map_or(Ok(()), Err)
}
