//! Right-preconditioned BiCGStab.

use super::sparse::{dot, norm2};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovConfig {
    /// Relative residual target `||r_i|| / ||r_0||`.
    pub tol: f64,
    pub max_iter: usize,
    /// Consecutive iterations with a negligible update `||dx|| <= eps ||x||` before giving up.
    pub stagnation: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig { tol: 1e-7, max_iter: 20_000, stagnation: 50 }
    }
}

/// Outcome of a Krylov solve.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovResult {
    pub x: Vec<f64>,
    /// Full steps, with a step that converges halfway counted as `0.5`.
    pub iterations: f64,
    pub relative_residual: f64,
}

/// Solves `A x = b` from `x0` (zero when `None`), using `M^{-1}` on the right.
pub fn bicgstab(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    config: &KrylovConfig,
) -> Result<KrylovResult> {
    let n = b.len();
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut r = if x0.is_some() {
        let ax = op(&x);
        b.iter().zip(&ax).map(|(a, c)| a - c).collect()
    } else {
        b.to_vec()
    };
    let r0_norm = norm2(&r);
    if r0_norm == 0.0 {
        return Ok(KrylovResult { x, iterations: 0.0, relative_residual: 0.0 });
    }
    let target = config.tol * r0_norm;
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut still = 0;
    for i in 1..=config.max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= f64::EPSILON * f64::EPSILON * r0_norm * r0_norm {
            return Err(Error::KrylovBreakdown { iteration: i, reason: "rho vanished" });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let p_hat = precond(&p);
        v = op(&p_hat);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return Err(Error::KrylovBreakdown { iteration: i, reason: "r_hat orthogonal to A p" });
        }
        alpha = rho / rv;
        let s: Vec<f64> = r.iter().zip(&v).map(|(a, b)| a - alpha * b).collect();
        let mut dx = 0.0;
        for k in 0..n {
            x[k] += alpha * p_hat[k];
            dx += (alpha * p_hat[k]).powi(2);
        }
        let s_norm = norm2(&s);
        if s_norm <= target {
            return Ok(KrylovResult { x, iterations: i as f64 - 0.5, relative_residual: s_norm / r0_norm });
        }
        let s_hat = precond(&s);
        let t = op(&s_hat);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::KrylovBreakdown { iteration: i, reason: "t vanished" });
        }
        omega = dot(&t, &s) / tt;
        for k in 0..n {
            x[k] += omega * s_hat[k];
            r[k] = s[k] - omega * t[k];
            dx += (omega * s_hat[k]).powi(2);
        }
        let r_norm = norm2(&r);
        if !r_norm.is_finite() {
            return Err(Error::KrylovBreakdown { iteration: i, reason: "non-finite residual" });
        }
        if r_norm <= target {
            return Ok(KrylovResult { x, iterations: i as f64, relative_residual: r_norm / r0_norm });
        }
        if omega == 0.0 {
            return Err(Error::KrylovBreakdown { iteration: i, reason: "omega vanished" });
        }
        if dx.sqrt() <= f64::EPSILON * norm2(&x) {
            still += 1;
            if still >= config.stagnation {
                return Err(Error::KrylovStagnation { iteration: i, residual: r_norm / r0_norm });
            }
        } else {
            still = 0;
        }
    }
    Err(Error::KrylovNotConverged { iterations: config.max_iter, residual: norm2(&r) / r0_norm })
}

/// BiCGStab for a fixed number of steps without failing on non-convergence.
pub fn bicgstab_steps(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    steps: usize,
    tol: f64,
) -> Vec<f64> {
    let cfg = KrylovConfig { tol, max_iter: steps, stagnation: usize::MAX };
    match bicgstab(op, precond, b, None, &cfg) {
        Ok(r) => r.x,
        Err(_) => {
            // fall back to the preconditioner alone if the short run broke down
            precond(b)
        }
    }
}
