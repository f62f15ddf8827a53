//! Quadrature on the reference triangle `{x1, x2 >= 0, x1 + x2 <= 1}` and on `[0, 1]`.

use super::jacobi::gauss_legendre;
use crate::{Error, Result};

const MAX_ORDER: usize = 60;

#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

#[derive(Clone, Debug)]
pub struct LineRule {
    /// Nodes in `[0, 1]`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

/// Collapsed (conical product) Gauss rule exact for total degree `order`.
///
/// A degree-p polynomial on the triangle becomes degree p in `z1` and p + 1 in
/// `z2` after the collapse, so `ceil((p + 2) / 2)` Gauss points per direction suffice.
pub fn triangle_rule(order: usize) -> Result<TriangleRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::QuadratureOrder(order));
    }
    let n = (order + 2).div_ceil(2);
    let (z, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (z2, w2) in z.iter().zip(&w) {
        for (z1, w1) in z.iter().zip(&w) {
            points.push([0.25 * (1.0 + z1) * (1.0 - z2), 0.5 * (1.0 + z2)]);
            weights.push(w1 * w2 * (1.0 - z2) / 8.0);
        }
    }
    Ok(TriangleRule { points, weights, order })
}

/// Gauss-Legendre rule on `[0, 1]` exact for degree `order`.
pub fn line_rule(order: usize) -> Result<LineRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::QuadratureOrder(order));
    }
    let n = (order + 1).div_ceil(2);
    let (z, w) = gauss_legendre(n);
    Ok(LineRule {
        points: z.iter().map(|z| 0.5 * (z + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
        order,
    })
}
