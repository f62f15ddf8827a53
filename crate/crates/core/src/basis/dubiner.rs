//! Orthogonal Dubiner basis on the reference triangle.
//!
//! `phi_mn = c_mn * q_m(x) * P_n^{(2m+1,0)}(2 x2 - 1)` with
//! `q_m = (1 - x2)^m P_m(2 x1 / (1 - x2) - 1)`, scaled so that
//! `int_T phi_mn phi_ij = delta_mi delta_nj / 8`.
//!
//! `q_m` is a polynomial and is generated by a recurrence in `s = 2 x1 - 1 + x2`
//! and `t = 1 - x2`, so the collapsed vertex `x2 = 1` needs no special care.

use super::jacobi::jacobi_derivative;
use crate::{Error, Result};

/// Value, gradient and Hessian `[xx, xy, yy]` of a function at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl Jet {
    pub fn laplacian(&self) -> f64 {
        self.hess[0] + self.hess[2]
    }
}

/// Number of Dubiner functions of total degree at most `k`.
pub fn local_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// `(m, n)` pairs in graded lexicographic order: by total degree, then by `m`.
pub fn basis_indices(k: usize) -> Vec<(usize, usize)> {
    (0..=k).flat_map(|d| (0..=d).map(move |m| (m, d - m))).collect()
}

/// Local index of `(m, n)` in the graded ordering.
pub fn local_index(m: usize, n: usize, k: usize) -> Result<usize> {
    if m + n > k {
        return Err(Error::BasisIndex { m, n, degree: k });
    }
    let d = m + n;
    Ok(d * (d + 1) / 2 + m)
}

fn norm_const(m: usize, n: usize) -> f64 {
    (((2 * m + 1) * (m + n + 1)) as f64).sqrt() / 2.0
}

/// `q_0 .. q_mmax` with derivatives.
fn collapsed_legendre(mmax: usize, x: [f64; 2]) -> Vec<Jet> {
    let s = 2.0 * x[0] - 1.0 + x[1];
    let t = 1.0 - x[1];
    let mut q = Vec::with_capacity(mmax + 1);
    q.push(Jet { value: 1.0, ..Jet::default() });
    if mmax == 0 {
        return q;
    }
    q.push(Jet { value: s, grad: [2.0, 1.0], hess: [0.0; 3] });
    for m in 1..mmax {
        let a = &q[m];
        let b = &q[m - 1];
        // s * q_m
        let sa = Jet {
            value: s * a.value,
            grad: [2.0 * a.value + s * a.grad[0], a.value + s * a.grad[1]],
            hess: [
                4.0 * a.grad[0] + s * a.hess[0],
                2.0 * a.grad[1] + a.grad[0] + s * a.hess[1],
                2.0 * a.grad[1] + s * a.hess[2],
            ],
        };
        // t^2 * q_{m-1}
        let tb = Jet {
            value: t * t * b.value,
            grad: [t * t * b.grad[0], -2.0 * t * b.value + t * t * b.grad[1]],
            hess: [
                t * t * b.hess[0],
                -2.0 * t * b.grad[0] + t * t * b.hess[1],
                2.0 * b.value - 4.0 * t * b.grad[1] + t * t * b.hess[2],
            ],
        };
        let c1 = (2 * m + 1) as f64 / (m + 1) as f64;
        let c2 = m as f64 / (m + 1) as f64;
        q.push(Jet {
            value: c1 * sa.value - c2 * tb.value,
            grad: std::array::from_fn(|i| c1 * sa.grad[i] - c2 * tb.grad[i]),
            hess: std::array::from_fn(|i| c1 * sa.hess[i] - c2 * tb.hess[i]),
        });
    }
    q
}

fn combine(c: f64, q: &Jet, m: usize, n: usize, x2: f64) -> Jet {
    let z = 2.0 * x2 - 1.0;
    let a = (2 * m + 1) as u32;
    let p = jacobi_derivative(a, 0, n, z, 0);
    let dp = 2.0 * jacobi_derivative(a, 0, n, z, 1);
    let ddp = 4.0 * jacobi_derivative(a, 0, n, z, 2);
    Jet {
        value: c * q.value * p,
        grad: [c * q.grad[0] * p, c * (q.grad[1] * p + q.value * dp)],
        hess: [
            c * q.hess[0] * p,
            c * (q.hess[1] * p + q.grad[0] * dp),
            c * (q.hess[2] * p + 2.0 * q.grad[1] * dp + q.value * ddp),
        ],
    }
}

/// Evaluates `phi_mn` and its derivatives at a reference point.
pub fn dubiner(m: usize, n: usize, x: [f64; 2]) -> Jet {
    let q = collapsed_legendre(m, x);
    combine(norm_const(m, n), &q[m], m, n, x[1])
}

/// All basis functions of total degree at most `k`, in graded order.
pub fn dubiner_all(k: usize, x: [f64; 2]) -> Vec<Jet> {
    let q = collapsed_legendre(k, x);
    basis_indices(k)
        .into_iter()
        .map(|(m, n)| combine(norm_const(m, n), &q[m], m, n, x[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::quadrature::triangle_rule;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_interior(rng: &mut ChaCha8Rng) -> [f64; 2] {
        loop {
            let p = [rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)];
            if p[0] + p[1] < 0.99 {
                return p;
            }
        }
    }

    #[test]
    fn ordering_and_count() {
        for k in 0..7 {
            let idx = basis_indices(k);
            assert_eq!(idx.len(), local_dim(k));
            for (l, &(m, n)) in idx.iter().enumerate() {
                assert_eq!(local_index(m, n, k).unwrap(), l);
            }
        }
        assert_eq!(basis_indices(2), vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
        assert!(local_index(2, 2, 3).is_err());
    }

    #[test]
    fn lowest_mode_is_constant() {
        for p in [[0.0, 0.0], [0.3, 0.2], [0.0, 1.0], [1.0, 0.0]] {
            let j = dubiner(0, 0, p);
            assert!((j.value - 0.5).abs() < 1e-15);
            assert_eq!(j.grad, [0.0, 0.0]);
        }
    }

    #[test]
    fn orthogonality() {
        let k = 4;
        let rule = triangle_rule(2 * k + 2).unwrap();
        let idx = basis_indices(k);
        let vals: Vec<Vec<Jet>> = rule.points.iter().map(|&p| dubiner_all(k, p)).collect();
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                let ip: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| w * v[a].value * v[b].value).sum();
                let expect = if a == b { 0.125 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "{:?} {:?}: {ip}", idx[a], idx[b]);
            }
        }
    }

    #[test]
    fn paper_form_away_from_top_vertex() {
        // (1 - z2)^m P_m(z1) P_n^{(2m+1,0)}(z2), up to the normalisation constant
        let x: [f64; 2] = [0.2, 0.35];
        let z1 = 2.0 * x[0] / (1.0 - x[1]) - 1.0;
        let z2 = 2.0 * x[1] - 1.0;
        for (m, n) in basis_indices(5) {
            let raw = (1.0 - z2).powi(m as i32)
                * jacobi_derivative(0, 0, m, z1, 0)
                * jacobi_derivative(2 * m as u32 + 1, 0, n, z2, 0);
            let ours = dubiner(m, n, x).value / norm_const(m, n) * 2f64.powi(m as i32);
            assert!((raw - ours).abs() < 1e-12 * (1.0 + raw.abs()));
        }
    }

    #[test]
    fn finite_at_collapsed_vertex() {
        for (m, n) in basis_indices(6) {
            let j = dubiner(m, n, [0.0, 1.0]);
            assert!(j.value.is_finite() && j.grad.iter().all(|g| g.is_finite()));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for (m, n) in basis_indices(5) {
            for _ in 0..20 {
                let p = random_interior(&mut rng);
                let j = dubiner(m, n, p);
                for d in 0..2 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[d] += h;
                    pm[d] -= h;
                    let (jp, jm) = (dubiner(m, n, pp), dubiner(m, n, pm));
                    let fd = (jp.value - jm.value) / (2.0 * h);
                    assert!((fd - j.grad[d]).abs() <= 1e-6 * (1.0 + j.grad[d].abs()));
                    for g in 0..2 {
                        let fd2 = (jp.grad[g] - jm.grad[g]) / (2.0 * h);
                        let exact = j.hess[d + g];
                        assert!((fd2 - exact).abs() <= 1e-5 * (1.0 + exact.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=5 {
            let rule = triangle_rule(2 * k + 2).unwrap();
            let nloc = local_dim(k);
            let coef: Vec<f64> = (0..nloc).map(|_| rng.random_range(-1.0..1.0)).collect();
            let poly = |x: [f64; 2]| {
                let mut v = 0.0;
                let mut i = 0;
                for d in 0..=k {
                    for a in 0..=d {
                        v += coef[i] * x[0].powi(a as i32) * x[1].powi((d - a) as i32);
                        i += 1;
                    }
                }
                v
            };
            // L2 projection using orthogonality
            let mut c = DVector::<f64>::zeros(nloc);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let phi = dubiner_all(k, *p);
                for l in 0..nloc {
                    c[l] += 8.0 * w * poly(*p) * phi[l].value;
                }
            }
            for _ in 0..20 {
                let p = random_interior(&mut rng);
                let phi = dubiner_all(k, p);
                let v: f64 = (0..nloc).map(|l| c[l] * phi[l].value).sum();
                assert!((v - poly(p)).abs() < 1e-11);
            }
            let mass = DMatrix::from_fn(nloc, nloc, |a, b| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| {
                        let phi = dubiner_all(k, *p);
                        w * phi[a].value * phi[b].value
                    })
                    .sum::<f64>()
            });
            assert!((mass - DMatrix::identity(nloc, nloc) * 0.125).amax() < 1e-12);
        }
    }
}
