//! Outflow profile of the Monod example at k = 2 and k = 4.
//!
//! `cargo run --release --example cross_section -- [target_dof] [out_dir]`
//!
//! Each run stops at the first level with at least `target_dof` unknowns. The
//! profile along `x = 0` is written to `out_dir/profile_k{2,4}.csv` when given.

use std::fs::File;
use std::ops::ControlFlow;
use std::path::PathBuf;

use dgafem::config::RunConfig;
use dgafem::driver::run_adaptive_loop_with;
use dgafem::output::{cross_section, write_profile_csv, CrossSection, ProfilePoint};

fn main() -> dgafem::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let out = args.next().map(PathBuf::from);
    let line = CrossSection { from: [1e-9, 0.0], to: [1e-9, 1.0], samples: 2001 };
    for degree in [2, 4] {
        let config = RunConfig { degree: Some(degree), max_levels: 60, tol: Some(1e-12), ..RunConfig::for_benchmark("ex2") };
        let mut profile: Vec<ProfilePoint> = Vec::new();
        let mut dof = 0;
        let report = run_adaptive_loop_with(&config, &mut |view| {
            if view.row.dof < target {
                return ControlFlow::Continue(());
            }
            profile = cross_section(view.space, view.solution, 0, &line);
            dof = view.row.dof;
            ControlFlow::Break(())
        })?;
        if profile.is_empty() {
            println!("k={degree}: stopped before {target} dof ({:?})", report.status);
            continue;
        }
        let max = profile.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
        let min = profile.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        println!("k={degree}: {dof} dof, max u {max:.4}, min u {min:.4}, {:.1} s", report.seconds);
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            write_profile_csv(&profile, File::create(dir.join(format!("profile_k{degree}.csv")))?)?;
        }
    }
    Ok(())
}
