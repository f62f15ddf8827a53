//! Nodal error and condition number of the Poisson problem against the penalty.
//!
//! `cargo run --release --example penalty_sweep -- [cells]`

use dgafem::driver::sweep_penalty;

fn main() -> dgafem::Result<()> {
    let cells: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let sigmas = [1.0, 2.0, 5.0, 10.0, 18.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    let rows = sweep_penalty(2, cells, &sigmas, cells <= 8)?;
    println!("{:>8} {:>11} {:>12} {:>11}", "sigma", "cond", "nodal error", "L2 error");
    for r in rows {
        let cond = r.condition.map_or("-".to_string(), |c| format!("{c:.3e}"));
        println!("{:>8.1} {cond:>11} {:>12.3e} {:>11.3e}", r.sigma, r.max_nodal_error, r.l2_error);
    }
    Ok(())
}
