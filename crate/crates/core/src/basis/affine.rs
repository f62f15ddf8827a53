//! Affine maps from the reference triangle to physical triangles.

use crate::mesh::Point;
use crate::{Error, Result};
use nalgebra::{Matrix2, Vector2};

use super::dubiner::Jet;

/// `x = offset + B xi`, sending `(0,0), (1,0), (0,1)` to the three corners.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub linear: Matrix2<f64>,
    pub offset: Vector2<f64>,
    pub det: f64,
    inv: Matrix2<f64>,
}

impl AffineMap {
    /// Builds the map for corners given in counter-clockwise order.
    pub fn new(corners: [Point; 3]) -> Result<Self> {
        let [v0, v1, v2] = corners;
        let linear = Matrix2::new(v1[0] - v0[0], v2[0] - v0[0], v1[1] - v0[1], v2[1] - v0[1]);
        let det = linear.determinant();
        let scale = linear.amax().max(f64::MIN_POSITIVE);
        if !(det > 1e-14 * scale * scale) {
            return Err(Error::DegenerateTriangle(0));
        }
        let inv = linear.try_inverse().ok_or(Error::DegenerateTriangle(0))?;
        Ok(AffineMap { linear, offset: Vector2::new(v0[0], v0[1]), det, inv })
    }

    pub fn map(&self, xi: [f64; 2]) -> Point {
        let x = self.offset + self.linear * Vector2::new(xi[0], xi[1]);
        [x[0], x[1]]
    }

    pub fn inverse(&self, x: Point) -> [f64; 2] {
        let xi = self.inv * (Vector2::new(x[0], x[1]) - self.offset);
        [xi[0], xi[1]]
    }

    /// Physical area of the image triangle.
    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    /// `B^{-T} g`.
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let i = &self.inv;
        [i[(0, 0)] * g[0] + i[(1, 0)] * g[1], i[(0, 1)] * g[0] + i[(1, 1)] * g[1]]
    }

    /// Pushes a reference jet forward: gradient `B^{-T} g`, Hessian `B^{-T} H B^{-1}`.
    pub fn push_forward(&self, j: &Jet) -> Jet {
        let h = Matrix2::new(j.hess[0], j.hess[1], j.hess[1], j.hess[2]);
        let ph = self.inv.transpose() * h * self.inv;
        Jet { value: j.value, grad: self.gradient(j.grad), hess: [ph[(0, 0)], ph[(0, 1)], ph[(1, 1)]] }
    }
}
