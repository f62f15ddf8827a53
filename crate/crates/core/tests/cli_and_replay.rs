use std::path::PathBuf;
use std::process::Command;

use dgafem::assembly::AssembledSystem;
use dgafem::basis::DgSpace;
use dgafem::config::RunConfig;
use dgafem::driver::run_adaptive_loop;
use dgafem::problems::{Benchmark, Overrides};
use proptest::prelude::*;

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dgafem-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn resolved_config_replays_to_identical_report() {
    let dir = scratch_dir("replay");
    let first = dir.join("first");
    let config = RunConfig {
        max_dof: Some(2500),
        timings: false,
        vtk: false,
        indicators: false,
        out: Some(first.clone()),
        ..RunConfig::for_benchmark("ex1")
    };
    run_adaptive_loop(&config).unwrap();
    let mut replay = RunConfig::load(&first.join("config.resolved.toml")).unwrap();
    let second = dir.join("second");
    replay.out = Some(second.clone());
    run_adaptive_loop(&replay).unwrap();
    let a = std::fs::read(first.join("report.csv")).unwrap();
    let b = std::fs::read(second.join("report.csv")).unwrap();
    assert!(a.len() > 100);
    assert_eq!(a, b);
}

fn dgafem(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_dgafem")).args(args).output().unwrap();
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = scratch_dir("cli");
    let out = dir.join("run");
    let out = out.to_str().unwrap();
    assert_eq!(dgafem(&["solve", "--benchmark", "poisson", "--mode", "uniform", "--max-dof", "800", "--out", out]), 0);
    assert!(dir.join("run/report.csv").exists());
    assert_eq!(dgafem(&["solve", "--benchmark", "nope"]), 1);
    assert_eq!(dgafem(&["solve", "--benchmark", "ex1", "--theta", "1.5"]), 1);
    let cfg = dir.join("short.toml");
    std::fs::write(&cfg, "benchmark = \"ex1\"\nnewton_max_iter = 2\nvtk = false\n").unwrap();
    assert_eq!(dgafem(&["solve", "--config", cfg.to_str().unwrap(), "--max-dof", "500"]), 2);
    let sweep = dir.join("sweep");
    let sweep = sweep.to_str().unwrap();
    assert_eq!(dgafem(&["sweep-penalty", "--sigma-list", "6,60", "--cells", "2", "--out", sweep]), 0);
    assert_eq!(dgafem(&["sweep-h", "--cells-list", "2,4", "--degree", "1", "--out", sweep]), 0);
    assert!(dir.join("sweep/penalty.csv").exists() && dir.join("sweep/mesh.csv").exists());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn jacobian_matches_central_differences(
        name in prop::sample::select(vec!["ex1", "ex2", "ex4"]),
        degree in 1usize..3,
        coeffs in prop::collection::vec(-0.2f64..0.2, 200),
    ) {
        let b = Benchmark::by_name(name, &Overrides::default()).unwrap();
        let m = b.spec.num_components();
        let space = DgSpace::new(b.mesh(2, 2).unwrap(), degree, m).unwrap();
        let sys = AssembledSystem::new(&space, &b.spec);
        let mut u = space.constant(&vec![0.5; m]);
        for (x, c) in u.iter_mut().zip(coeffs.iter().cycle()) {
            *x += c;
        }
        let j = sys.jacobian(&u).unwrap();
        let h = 1e-6;
        for col in 0..space.num_dofs() {
            let (mut up, mut um) = (u.clone(), u.clone());
            up[col] += h;
            um[col] -= h;
            let (rp, rm) = (sys.residual(&up).unwrap(), sys.residual(&um).unwrap());
            for (row, (a, b)) in rp.iter().zip(&rm).enumerate() {
                let fd = (a - b) / (2.0 * h);
                prop_assert!((fd - j.get(row, col)).abs() <= 1e-5 * j.get(row, col).abs().max(1.0));
            }
        }
    }
}
