use dgafem::assembly::AssembledSystem;
use dgafem::basis::DgSpace;
use dgafem::linsolve::*;
use dgafem::problems::{Benchmark, Overrides};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sparse(rng: &mut ChaCha8Rng, n: usize, per_row: usize) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        let mut off = 0.0;
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            if j != i {
                let v = rng.random_range(-1.0..1.0);
                off += f64::abs(v);
                t.push((i, j, v));
            }
        }
        t.push((i, i, off + rng.random_range(0.1..2.0)));
    }
    SparseMatrix::from_triplets(n, n, &t)
}

fn rel_err(x: &[f64], y: &DVector<f64>) -> f64 {
    let d: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    d / y.norm()
}

fn ex1_jacobian(cells: usize) -> SparseMatrix {
    let b = Benchmark::by_name("ex1", &Overrides::default()).unwrap();
    let space = DgSpace::new(b.mesh(cells, cells).unwrap(), 2, 1).unwrap();
    let sys = AssembledSystem::new(&space, &b.spec);
    let u = space.constant(&[0.5]);
    sys.jacobian(&u).unwrap().to_csr()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn permutation_round_trip(seed in any::<u64>(), n in 5usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sparse(&mut rng, n, 4);
        let r = laplacian_reorder(&m, &EigenConfig::default()).unwrap();
        let p = &r.permutation;
        let pm = m.permute(p);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        // (P M P^T)(P x) = P (M x)
        let lhs = pm.matvec(&p.apply(&x));
        let rhs = p.apply(&m.matvec(&x));
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        prop_assert_eq!(p.apply_inverse(&p.apply(&x)), x);
        prop_assert!(r.sorted_values.windows(2).all(|w| w[0] >= w[1]));
        let mut seen = p.forward().to_vec();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn schur_complement_matches_dense(seed in any::<u64>(), n in 6usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sparse(&mut rng, n, 3);
        let split = rng.random_range(1..n);
        let f = BlockFactorization::new(partition_at(&m, split).unwrap(), true, None).unwrap();
        let d = m.to_dense();
        let a = d.view((0, 0), (split, split)).into_owned();
        let b = d.view((0, split), (split, n - split)).into_owned();
        let c = d.view((split, 0), (n - split, split)).into_owned();
        let dd = d.view((split, split), (n - split, n - split)).into_owned();
        let s = dd - c * a.lu().solve(&b).unwrap();
        let got = f.schur.to_dense();
        prop_assert!((got - &s).abs().max() <= 1e-10 * (1.0 + s.abs().max()));
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = KrylovConfig { tol: 1e-13, ..Default::default() };
        let (w, _) = f.solve(&rhs, &cfg).unwrap();
        let exact = d.lu().solve(&DVector::from_vec(rhs)).unwrap();
        prop_assert!(rel_err(&w, &exact) < 1e-9);
    }
}

#[test]
fn block_preconditioners_match_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = random_sparse(&mut rng, 12, 4);
    let f = BlockFactorization::new(partition_at(&m, 5).unwrap(), false, None).unwrap();
    let d = m.to_dense();
    let s = f.schur.to_dense();
    let mut m1 = DMatrix::zeros(12, 12);
    let mut m2 = DMatrix::zeros(12, 12);
    m1.view_mut((0, 0), (5, 5)).copy_from(&d.view((0, 0), (5, 5)));
    m1.view_mut((5, 0), (7, 5)).copy_from(&d.view((5, 0), (7, 5)));
    m1.view_mut((5, 5), (7, 7)).copy_from(&s);
    m2.view_mut((0, 0), (5, 5)).copy_from(&d.view((0, 0), (5, 5)));
    m2.view_mut((0, 5), (5, 7)).copy_from(&d.view((0, 5), (5, 7)));
    m2.view_mut((5, 5), (7, 7)).copy_from(&s);
    let r: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
    let rv = DVector::from_vec(r.clone());
    // without ILU, 12 inner steps solve the 7x7 Schur system to round-off
    let inner = InnerSchur::Iterations(12);
    assert!(rel_err(&f.apply_m1(&r, inner), &m1.lu().solve(&rv).unwrap()) < 1e-8);
    assert!(rel_err(&f.apply_m2(&r, inner), &m2.lu().solve(&rv).unwrap()) < 1e-8);
}

#[test]
fn pipeline_on_dg_jacobian() {
    let j = ex1_jacobian(4);
    let n = j.nrows();
    let rhs: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).sin()).collect();
    let exact = j.to_dense().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
    for method in SolverMethod::ALL {
        let config = SolverConfig { method, krylov: KrylovConfig { tol: 1e-13, ..Default::default() }, ..Default::default() };
        let s = LinearSolver::prepare(&j, config).unwrap();
        let (x, stats) = s.solve(&rhs).unwrap();
        assert!(rel_err(&x, &exact) < 1e-8, "{method}: {:e} after {}", rel_err(&x, &exact), stats.iterations);
    }
}
