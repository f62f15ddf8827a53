//! The broken polynomial space on a triangulation.

use super::affine::AffineMap;
use super::dubiner::{dubiner_all, local_dim, Jet};
use super::quadrature::{line_rule, triangle_rule, LineRule, TriangleRule};
use crate::mesh::{Mesh, Point};
use crate::{Error, Result};

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Reference coordinates of the point at parameter `s` along local edge `i`.
pub fn reference_edge_point(i: usize, s: f64) -> [f64; 2] {
    let a = REF_VERTICES[(i + 1) % 3];
    let b = REF_VERTICES[(i + 2) % 3];
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// Discontinuous piecewise polynomials of degree `k` for `m` components.
///
/// Global numbering is element-major, then component, then local basis index.
#[derive(Clone, Debug)]
pub struct DgSpace {
    mesh: Mesh,
    degree: usize,
    components: usize,
    nloc: usize,
    volume_rule: TriangleRule,
    edge_rule: LineRule,
    volume_table: Vec<Vec<Jet>>,
    edge_table: [[Vec<Vec<Jet>>; 2]; 3],
    maps: Vec<AffineMap>,
}

impl DgSpace {
    /// Space with the default quadrature order `2k + 2`.
    pub fn new(mesh: Mesh, degree: usize, components: usize) -> Result<Self> {
        Self::with_quadrature(mesh, degree, components, 2 * degree + 2, 2 * degree + 2)
    }

    pub fn with_quadrature(
        mesh: Mesh,
        degree: usize,
        components: usize,
        volume_order: usize,
        edge_order: usize,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        if components == 0 {
            return Err(Error::Config("at least one component is required".into()));
        }
        let volume_rule = triangle_rule(volume_order)?;
        let edge_rule = line_rule(edge_order)?;
        let volume_table = volume_rule.points.iter().map(|&p| dubiner_all(degree, p)).collect();
        let edge_table = std::array::from_fn(|i| {
            std::array::from_fn(|rev| {
                edge_rule
                    .points
                    .iter()
                    .map(|&s| {
                        let s = if rev == 1 { 1.0 - s } else { s };
                        dubiner_all(degree, reference_edge_point(i, s))
                    })
                    .collect()
            })
        });
        let maps = (0..mesh.num_triangles())
            .map(|t| AffineMap::new(mesh.corners(t)).map_err(|_| Error::DegenerateTriangle(t)))
            .collect::<Result<_>>()?;
        Ok(DgSpace {
            mesh,
            degree,
            components,
            nloc: local_dim(degree),
            volume_rule,
            edge_rule,
            volume_table,
            edge_table,
            maps,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn into_mesh(self) -> Mesh {
        self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Local dimension `(k+1)(k+2)/2`.
    pub fn nloc(&self) -> usize {
        self.nloc
    }

    /// Size of one element block, `m * nloc`.
    pub fn block_size(&self) -> usize {
        self.components * self.nloc
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_triangles()
    }

    /// Total number of unknowns over all components.
    pub fn num_dofs(&self) -> usize {
        self.num_elements() * self.block_size()
    }

    /// Unknowns per component, `Nel * nloc`.
    pub fn dofs_per_component(&self) -> usize {
        self.num_elements() * self.nloc
    }

    pub fn dof(&self, element: usize, component: usize, local: usize) -> usize {
        element * self.block_size() + component * self.nloc + local
    }

    pub fn volume_rule(&self) -> &TriangleRule {
        &self.volume_rule
    }

    pub fn edge_rule(&self) -> &LineRule {
        &self.edge_rule
    }

    pub fn map(&self, element: usize) -> &AffineMap {
        &self.maps[element]
    }

    /// Reference basis jets at volume quadrature point `q`.
    pub fn reference_volume(&self, q: usize) -> &[Jet] {
        &self.volume_table[q]
    }

    /// Reference basis jets at edge quadrature point `q` of local edge `local`,
    /// traversed backwards when `reversed`.
    pub fn reference_edge(&self, local: usize, reversed: bool, q: usize) -> &[Jet] {
        &self.edge_table[local][reversed as usize][q]
    }

    /// Physical basis jets of `element` at volume quadrature point `q`.
    pub fn volume_basis(&self, element: usize, q: usize) -> Vec<Jet> {
        let m = &self.maps[element];
        self.volume_table[q].iter().map(|j| m.push_forward(j)).collect()
    }

    /// Physical basis jets on an edge side.
    pub fn edge_basis(&self, element: usize, local: usize, reversed: bool, q: usize) -> Vec<Jet> {
        let m = &self.maps[element];
        self.reference_edge(local, reversed, q).iter().map(|j| m.push_forward(j)).collect()
    }

    /// Physical location of volume quadrature point `q` on `element`.
    pub fn volume_point(&self, element: usize, q: usize) -> Point {
        self.maps[element].map(self.volume_rule.points[q])
    }

    /// Physical quadrature weight (reference weight times `det B`).
    pub fn volume_weight(&self, element: usize, q: usize) -> f64 {
        self.volume_rule.weights[q] * self.maps[element].det
    }

    /// Diagonal entry of the element mass matrix.
    pub fn mass_diagonal(&self, element: usize) -> f64 {
        self.maps[element].det / 8.0
    }

    /// Combines local coefficients with basis jets.
    pub fn combine(&self, coeffs: &[f64], jets: &[Jet]) -> Jet {
        let mut out = Jet::default();
        for (c, j) in coeffs.iter().zip(jets) {
            out.value += c * j.value;
            for d in 0..2 {
                out.grad[d] += c * j.grad[d];
            }
            for d in 0..3 {
                out.hess[d] += c * j.hess[d];
            }
        }
        out
    }

    /// Coefficients of `component` on `element`.
    pub fn local_coeffs<'a>(&self, u: &'a [f64], element: usize, component: usize) -> &'a [f64] {
        let start = self.dof(element, component, 0);
        &u[start..start + self.nloc]
    }

    /// Evaluates the discrete field at reference point `xi` of `element`.
    pub fn eval_reference(&self, u: &[f64], element: usize, component: usize, xi: [f64; 2]) -> Jet {
        let jets: Vec<Jet> = dubiner_all(self.degree, xi).iter().map(|j| self.maps[element].push_forward(j)).collect();
        self.combine(self.local_coeffs(u, element, component), &jets)
    }

    /// Finds an element containing `x` (closed triangles, tolerance `1e-12`).
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 2])> {
        let tol = 1e-12;
        (0..self.num_elements()).find_map(|e| {
            let xi = self.maps[e].inverse(x);
            (xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol).then_some((e, xi))
        })
    }

    /// Evaluates the discrete field at a physical point.
    pub fn eval_at(&self, u: &[f64], component: usize, x: Point) -> Option<f64> {
        self.locate(x).map(|(e, xi)| self.eval_reference(u, e, component, xi).value)
    }

    /// Elementwise L2 projection of a vector-valued function.
    pub fn project(&self, f: &dyn Fn(Point) -> Vec<f64>) -> Vec<f64> {
        let mut u = vec![0.0; self.num_dofs()];
        for e in 0..self.num_elements() {
            let scale = 1.0 / self.mass_diagonal(e);
            for q in 0..self.volume_rule.points.len() {
                let w = self.volume_weight(e, q);
                let vals = f(self.volume_point(e, q));
                for c in 0..self.components {
                    for (l, j) in self.volume_table[q].iter().enumerate() {
                        u[self.dof(e, c, l)] += scale * w * vals[c] * j.value;
                    }
                }
            }
        }
        u
    }

    /// Constant function `values[c]` in each component.
    pub fn constant(&self, values: &[f64]) -> Vec<f64> {
        // phi_00 = 1/2
        let mut u = vec![0.0; self.num_dofs()];
        for e in 0..self.num_elements() {
            for c in 0..self.components {
                u[self.dof(e, c, 0)] = 2.0 * values[c];
            }
        }
        u
    }

    /// Exact L2 transfer of a coarse solution through a refinement parent map.
    ///
    /// Children are geometric subsets of their parents, so the coarse polynomial
    /// restricted to a child is reproduced exactly.
    pub fn transfer_from(&self, coarse: &DgSpace, u: &[f64], parent: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_dofs()];
        for e in 0..self.num_elements() {
            let p = parent[e];
            let scale = 1.0 / self.mass_diagonal(e);
            for q in 0..self.volume_rule.points.len() {
                let w = self.volume_weight(e, q);
                let xi = coarse.maps[p].inverse(self.volume_point(e, q));
                let phi = dubiner_all(coarse.degree, xi);
                for c in 0..self.components {
                    let v: f64 = coarse.local_coeffs(u, p, c).iter().zip(&phi).map(|(a, j)| a * j.value).sum();
                    for (l, j) in self.volume_table[q].iter().enumerate() {
                        out[self.dof(e, c, l)] += scale * w * v * j.value;
                    }
                }
            }
        }
        out
    }
}
