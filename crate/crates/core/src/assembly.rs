//! SIPG diffusion, upwind convection and reaction forms.
//!
//! For every component `i` the discrete problem reads: find `u_h` with
//! `a_h(u_h, v) + b_h(u_h, v) = l_h(v)` for all broken polynomials `v`, where
//! `a_h` collects volume diffusion/convection/linear reaction, the symmetric
//! interior penalty terms on interior and Dirichlet edges and the upwind
//! terms on inflow edges, `b_h` is the nonlinear reaction and `l_h` the load.
//! In coefficient form the residual is `R(U) = S U + h(U) - L`.

use std::io::Write;
use std::sync::Arc;

use crate::basis::{DgSpace, Jet};
use crate::estimator::compute_kappa;
use crate::linsolve::SparseMatrix;
use crate::mesh::{EdgeKind, Point};
use crate::{Error, Result};

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> Point + Send + Sync>;
/// Boundary data `g(x, segment, component)`.
pub type BoundaryData = Arc<dyn Fn(Point, usize, usize) -> f64 + Send + Sync>;
/// Exact solution `(u_i, grad u_i)` at `x` for component `i`.
pub type ExactSolution = Arc<dyn Fn(Point, usize) -> (f64, [f64; 2]) + Send + Sync>;

/// Coupled reaction term `r(u_1, ..., u_m)`.
pub trait Reaction: Send + Sync {
    /// Writes `r_i(u)` into `out`.
    fn eval(&self, u: &[f64], out: &mut [f64]);
    /// Writes `dr_i/du_j` into `out[i * m + j]`.
    fn jacobian(&self, u: &[f64], out: &mut [f64]);
    fn is_zero(&self) -> bool {
        false
    }
}

/// `r = 0`.
pub struct NoReaction;

impl Reaction for NoReaction {
    fn eval(&self, _u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn jacobian(&self, _u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// Scalar reaction given by a function and its derivative.
pub struct ScalarReaction<F, D> {
    pub r: F,
    pub dr: D,
}

impl<F, D> Reaction for ScalarReaction<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, u: &[f64], out: &mut [f64]) {
        out[0] = (self.r)(u[0]);
    }
    fn jacobian(&self, u: &[f64], out: &mut [f64]) {
        out[0] = (self.dr)(u[0]);
    }
}

/// Coefficients of one equation of the system.
#[derive(Clone)]
pub struct ComponentData {
    pub epsilon: f64,
    pub alpha: f64,
    pub velocity: VectorField,
    /// Analytic divergence of `velocity`.
    pub divergence: ScalarField,
    pub source: ScalarField,
}

/// Penalty parameters on interior and boundary edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penalty {
    pub interior: f64,
    pub boundary: f64,
}

impl Penalty {
    /// `3k(k+1)` inside, `6k(k+1)` on the boundary.
    pub fn for_degree(k: usize) -> Self {
        let s = (3 * k * (k + 1)) as f64;
        Penalty { interior: s, boundary: 2.0 * s }
    }

    /// Interior value `sigma`, boundary value `2 sigma`.
    pub fn uniform(sigma: f64) -> Self {
        Penalty { interior: sigma, boundary: 2.0 * sigma }
    }
}

/// Data of an `m`-component diffusion-convection-reaction system.
#[derive(Clone)]
pub struct ProblemSpec {
    pub components: Vec<ComponentData>,
    pub reaction: Arc<dyn Reaction>,
    pub dirichlet: BoundaryData,
    /// Prescribed diffusive flux `eps grad u . n`.
    pub neumann: BoundaryData,
    pub exact: Option<ExactSolution>,
    /// Overrides the degree-dependent default penalty.
    pub penalty: Option<Penalty>,
}

impl ProblemSpec {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn penalty(&self, degree: usize) -> Penalty {
        self.penalty.unwrap_or_else(|| Penalty::for_degree(degree))
    }

    pub fn is_linear(&self) -> bool {
        self.reaction.is_zero()
    }
}

/// Block CSR matrix over elements with dense `nb x nb` blocks (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparseMatrix {
    nb: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    blocks: Vec<f64>,
}

impl BlockSparseMatrix {
    /// Zero matrix on the element adjacency pattern of the space's mesh.
    pub fn with_mesh_pattern(space: &DgSpace) -> Self {
        let mesh = space.mesh();
        let n = mesh.num_triangles();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for t in 0..n {
            let mut cols: Vec<usize> = std::iter::once(t).chain(mesh.neighbors(t)).collect();
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend(cols);
            row_ptr.push(col_idx.len());
        }
        let nb = space.block_size();
        BlockSparseMatrix { nb, blocks: vec![0.0; col_idx.len() * nb * nb], row_ptr, col_idx }
    }

    /// Zero block-diagonal matrix.
    pub fn block_diagonal(nel: usize, nb: usize) -> Self {
        BlockSparseMatrix { nb, row_ptr: (0..=nel).collect(), col_idx: (0..nel).collect(), blocks: vec![0.0; nel * nb * nb] }
    }

    pub fn block_size(&self) -> usize {
        self.nb
    }

    pub fn num_block_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn num_blocks(&self) -> usize {
        self.col_idx.len()
    }

    pub fn dim(&self) -> usize {
        self.num_block_rows() * self.nb
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn has_block(&self, i: usize, j: usize) -> bool {
        self.slot(i, j).is_some()
    }

    /// Block `(i, j)`, row-major.
    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        let nb2 = self.nb * self.nb;
        self.slot(i, j).map(|s| &self.blocks[s * nb2..(s + 1) * nb2])
    }

    /// Mutable block `(i, j)`; panics if `(i, j)` is outside the pattern.
    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let nb2 = self.nb * self.nb;
        let s = self.slot(i, j).unwrap_or_else(|| panic!("block ({i}, {j}) not in pattern"));
        &mut self.blocks[s * nb2..(s + 1) * nb2]
    }

    /// Scalar entry.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let nb = self.nb;
        self.block(r / nb, c / nb).map_or(0.0, |b| b[(r % nb) * nb + c % nb])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let nb = self.nb;
        let mut y = vec![0.0; self.dim()];
        for i in 0..self.num_block_rows() {
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[s];
                let b = &self.blocks[s * nb * nb..(s + 1) * nb * nb];
                let xj = &x[j * nb..(j + 1) * nb];
                for r in 0..nb {
                    let row = &b[r * nb..(r + 1) * nb];
                    y[i * nb + r] += row.iter().zip(xj).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        y
    }

    /// `self + other`, where the pattern of `other` is contained in that of `self`.
    pub fn add(&self, other: &BlockSparseMatrix) -> Result<BlockSparseMatrix> {
        if other.nb != self.nb || other.num_block_rows() != self.num_block_rows() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let mut out = self.clone();
        let nb2 = self.nb * self.nb;
        for i in 0..other.num_block_rows() {
            for s in other.row_ptr[i]..other.row_ptr[i + 1] {
                let j = other.col_idx[s];
                let t = out.slot(i, j).ok_or(Error::DimensionMismatch { expected: i, found: j })?;
                for (a, b) in out.blocks[t * nb2..(t + 1) * nb2].iter_mut().zip(&other.blocks[s * nb2..(s + 1) * nb2]) {
                    *a += b;
                }
            }
        }
        Ok(out)
    }

    /// Flat CSR view holding every block entry, zeros included.
    pub fn to_csr(&self) -> SparseMatrix {
        let nb = self.nb;
        let n = self.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(self.blocks.len());
        let mut values = Vec::with_capacity(self.blocks.len());
        row_ptr.push(0);
        for i in 0..self.num_block_rows() {
            for r in 0..nb {
                for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                    let j = self.col_idx[s];
                    let b = &self.blocks[s * nb * nb..(s + 1) * nb * nb];
                    for c in 0..nb {
                        col_idx.push(j * nb + c);
                        values.push(b[r * nb + c]);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        SparseMatrix::from_csr(n, n, row_ptr, col_idx, values)
    }

    pub fn write_matrix_market<W: Write>(&self, w: W) -> Result<()> {
        self.to_csr().write_matrix_market(w)
    }
}

/// Traces of the basis on both sides of an edge at one quadrature point.
struct EdgePoint {
    x: Point,
    /// Physical weight (reference weight times edge length).
    w: f64,
    normal: Point,
    left: Vec<Jet>,
    right: Option<Vec<Jet>>,
}

fn edge_points(space: &DgSpace, e: usize) -> Vec<EdgePoint> {
    let mesh = space.mesh();
    let edge = &mesh.edges()[e];
    let len = mesh.edge_length(e);
    let normal = mesh.edge_normal(e);
    let rule = space.edge_rule();
    (0..rule.points.len())
        .map(|q| EdgePoint {
            x: mesh.edge_point(e, rule.points[q]),
            w: rule.weights[q] * len,
            normal,
            left: space.edge_basis(edge.left.triangle, edge.left.local as usize, false, q),
            right: edge.right.map(|r| space.edge_basis(r.triangle, r.local as usize, true, q)),
        })
        .collect()
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Stiffness matrix of `a_h`.
pub fn assemble_stiffness(space: &DgSpace, problem: &ProblemSpec) -> BlockSparseMatrix {
    let mesh = space.mesh();
    let nloc = space.nloc();
    let nb = space.block_size();
    let pen = problem.penalty(space.degree());
    let mut s = BlockSparseMatrix::with_mesh_pattern(space);

    for e in 0..space.num_elements() {
        let blk = s.block_mut(e, e);
        for q in 0..space.volume_rule().points.len() {
            let phi = space.volume_basis(e, q);
            let x = space.volume_point(e, q);
            let w = space.volume_weight(e, q);
            for (c, data) in problem.components.iter().enumerate() {
                let b = (data.velocity)(x);
                let off = c * nloc;
                for (i, v) in phi.iter().enumerate() {
                    for (j, u) in phi.iter().enumerate() {
                        let val = data.epsilon * dot(u.grad, v.grad) + (dot(b, u.grad) + data.alpha * u.value) * v.value;
                        blk[(off + i) * nb + off + j] += w * val;
                    }
                }
            }
        }
    }

    for (ei, edge) in mesh.edges().iter().enumerate() {
        let h = mesh.edge_length(ei);
        let pts = edge_points(space, ei);
        let l = edge.left.triangle;
        match (edge.kind, edge.right) {
            (EdgeKind::Interior, Some(right)) => {
                let r = right.triangle;
                let sigma = pen.interior;
                let mut local = [
                    vec![0.0; nb * nb], // (L, L)
                    vec![0.0; nb * nb], // (L, R)
                    vec![0.0; nb * nb], // (R, L)
                    vec![0.0; nb * nb], // (R, R)
                ];
                for p in &pts {
                    let sides = [&p.left, p.right.as_ref().expect("interior edge has two sides")];
                    let sign = [1.0, -1.0];
                    for (c, data) in problem.components.iter().enumerate() {
                        let eps = data.epsilon;
                        let bn = dot((data.velocity)(p.x), p.normal);
                        let off = c * nloc;
                        for tq in 0..2 {
                            for tp in 0..2 {
                                let blk = &mut local[tq * 2 + tp];
                                for (i, v) in sides[tq].iter().enumerate() {
                                    let dvn = dot(v.grad, p.normal);
                                    for (j, u) in sides[tp].iter().enumerate() {
                                        let dun = dot(u.grad, p.normal);
                                        let ju = sign[tp] * u.value;
                                        let jv = sign[tq] * v.value;
                                        let mut val = -0.5 * eps * dvn * ju - 0.5 * eps * dun * jv + sigma * eps / h * ju * jv;
                                        // upwind: the inflow side receives b.n (u_out - u_in) v_in
                                        if bn < 0.0 && tq == 0 {
                                            val += bn * u.value * if tp == 1 { 1.0 } else { -1.0 } * v.value;
                                        } else if bn > 0.0 && tq == 1 {
                                            val += -bn * u.value * if tp == 0 { 1.0 } else { -1.0 } * v.value;
                                        }
                                        blk[(off + i) * nb + off + j] += p.w * val;
                                    }
                                }
                            }
                        }
                    }
                }
                let ids = [(l, l), (l, r), (r, l), (r, r)];
                for (k, &(a, b)) in ids.iter().enumerate() {
                    for (x, y) in s.block_mut(a, b).iter_mut().zip(&local[k]) {
                        *x += y;
                    }
                }
            }
            (EdgeKind::Dirichlet(_), _) => {
                let sigma = pen.boundary;
                let blk = s.block_mut(l, l);
                for p in &pts {
                    for (c, data) in problem.components.iter().enumerate() {
                        let eps = data.epsilon;
                        let bn = dot((data.velocity)(p.x), p.normal);
                        let off = c * nloc;
                        for (i, v) in p.left.iter().enumerate() {
                            let dvn = dot(v.grad, p.normal);
                            for (j, u) in p.left.iter().enumerate() {
                                let dun = dot(u.grad, p.normal);
                                let mut val = -eps * dvn * u.value - eps * dun * v.value + sigma * eps / h * u.value * v.value;
                                if bn < 0.0 {
                                    val -= bn * u.value * v.value;
                                }
                                blk[(off + i) * nb + off + j] += p.w * val;
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    s
}

/// Load vector of `l_h`.
pub fn assemble_load(space: &DgSpace, problem: &ProblemSpec) -> Vec<f64> {
    let mesh = space.mesh();
    let pen = problem.penalty(space.degree());
    let mut load = vec![0.0; space.num_dofs()];
    for e in 0..space.num_elements() {
        for q in 0..space.volume_rule().points.len() {
            let x = space.volume_point(e, q);
            let w = space.volume_weight(e, q);
            let phi = space.reference_volume(q);
            for (c, data) in problem.components.iter().enumerate() {
                let f = (data.source)(x);
                if f == 0.0 {
                    continue;
                }
                let base = space.dof(e, c, 0);
                for (i, v) in phi.iter().enumerate() {
                    load[base + i] += w * f * v.value;
                }
            }
        }
    }
    for (ei, edge) in mesh.edges().iter().enumerate() {
        let h = mesh.edge_length(ei);
        let l = edge.left.triangle;
        match edge.kind {
            EdgeKind::Dirichlet(seg) => {
                for p in edge_points(space, ei) {
                    for (c, data) in problem.components.iter().enumerate() {
                        let g = (problem.dirichlet)(p.x, seg, c);
                        let bn = dot((data.velocity)(p.x), p.normal);
                        let eps = data.epsilon;
                        let base = space.dof(l, c, 0);
                        for (i, v) in p.left.iter().enumerate() {
                            let mut val = g * (pen.boundary * eps / h * v.value - eps * dot(v.grad, p.normal));
                            if bn < 0.0 {
                                val -= bn * g * v.value;
                            }
                            load[base + i] += p.w * val;
                        }
                    }
                }
            }
            EdgeKind::Neumann(seg) => {
                for p in edge_points(space, ei) {
                    for c in 0..problem.num_components() {
                        let g = (problem.neumann)(p.x, seg, c);
                        let base = space.dof(l, c, 0);
                        for (i, v) in p.left.iter().enumerate() {
                            load[base + i] += p.w * g * v.value;
                        }
                    }
                }
            }
            EdgeKind::Interior => {}
        }
    }
    load
}

/// Values of all components of `u_h` at volume quadrature point `q` of element `e`.
fn point_values(space: &DgSpace, u: &[f64], e: usize, q: usize, out: &mut [f64]) {
    let phi = space.reference_volume(q);
    for (c, o) in out.iter_mut().enumerate() {
        *o = space.local_coeffs(u, e, c).iter().zip(phi).map(|(a, j)| a * j.value).sum();
    }
}

/// Nonlinear vector `h(U)` and its block-diagonal Jacobian.
pub fn assemble_nonlinear(space: &DgSpace, problem: &ProblemSpec, u: &[f64]) -> Result<(Vec<f64>, BlockSparseMatrix)> {
    if u.len() != space.num_dofs() {
        return Err(Error::DimensionMismatch { expected: space.num_dofs(), found: u.len() });
    }
    let m = problem.num_components();
    let nloc = space.nloc();
    let nb = space.block_size();
    let mut h = vec![0.0; space.num_dofs()];
    let mut jac = BlockSparseMatrix::block_diagonal(space.num_elements(), nb);
    if problem.is_linear() {
        return Ok((h, jac));
    }
    let mut uq = vec![0.0; m];
    let mut r = vec![0.0; m];
    let mut dr = vec![0.0; m * m];
    for e in 0..space.num_elements() {
        let blk = jac.block_mut(e, e);
        for q in 0..space.volume_rule().points.len() {
            point_values(space, u, e, q, &mut uq);
            problem.reaction.eval(&uq, &mut r);
            problem.reaction.jacobian(&uq, &mut dr);
            let w = space.volume_weight(e, q);
            let phi = space.reference_volume(q);
            for ci in 0..m {
                let base = space.dof(e, ci, 0);
                for (a, v) in phi.iter().enumerate() {
                    h[base + a] += w * r[ci] * v.value;
                }
                for cj in 0..m {
                    let d = dr[ci * m + cj];
                    if d == 0.0 {
                        continue;
                    }
                    for (a, v) in phi.iter().enumerate() {
                        let row = (ci * nloc + a) * nb + cj * nloc;
                        for (b, w2) in phi.iter().enumerate() {
                            blk[row + b] += w * d * v.value * w2.value;
                        }
                    }
                }
            }
        }
    }
    Ok((h, jac))
}

/// `S`, `L` and the data needed to evaluate `h(U)`.
pub struct AssembledSystem<'a> {
    pub space: &'a DgSpace,
    pub problem: &'a ProblemSpec,
    pub stiffness: BlockSparseMatrix,
    pub load: Vec<f64>,
}

impl<'a> AssembledSystem<'a> {
    pub fn new(space: &'a DgSpace, problem: &'a ProblemSpec) -> Self {
        AssembledSystem { space, problem, stiffness: assemble_stiffness(space, problem), load: assemble_load(space, problem) }
    }

    pub fn dim(&self) -> usize {
        self.load.len()
    }

    /// `R(U) = S U + h(U) - L`.
    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        let mut r = self.stiffness.matvec(u);
        if !self.problem.is_linear() {
            let (h, _) = assemble_nonlinear(self.space, self.problem, u)?;
            for (a, b) in r.iter_mut().zip(h) {
                *a += b;
            }
        }
        for (a, b) in r.iter_mut().zip(&self.load) {
            *a -= b;
        }
        Ok(r)
    }

    /// `J = S + h'(U)`.
    pub fn jacobian(&self, u: &[f64]) -> Result<BlockSparseMatrix> {
        if self.problem.is_linear() {
            return Ok(self.stiffness.clone());
        }
        let (_, jr) = assemble_nonlinear(self.space, self.problem, u)?;
        self.stiffness.add(&jr)
    }
}

/// Error norms of a discrete solution against a reference function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub energy: f64,
}

/// `|||v|||` with `v = u_h - u` (or `v = u_h` without a reference), summed over components:
/// `sum_K (eps ||grad v||^2 + kappa ||v||^2) + sum_{interior, Dirichlet} eps sigma / h ||[v]||^2`.
pub fn error_norms(space: &DgSpace, problem: &ProblemSpec, u: &[f64], reference: Option<&ExactSolution>) -> ErrorNorms {
    let mesh = space.mesh();
    let kap: Vec<f64> = compute_kappa(space, problem).iter().map(|k| k.kappa).collect();
    let pen = problem.penalty(space.degree());
    let mut l2 = 0.0;
    let mut energy = 0.0;
    let exact = |x: Point, c: usize| reference.map_or((0.0, [0.0, 0.0]), |f| f(x, c));
    for e in 0..space.num_elements() {
        for q in 0..space.volume_rule().points.len() {
            let phi = space.volume_basis(e, q);
            let x = space.volume_point(e, q);
            let w = space.volume_weight(e, q);
            for (c, d) in problem.components.iter().enumerate() {
                let uh = space.combine(space.local_coeffs(u, e, c), &phi);
                let (ue, ge) = exact(x, c);
                let dv = uh.value - ue;
                let dg = [uh.grad[0] - ge[0], uh.grad[1] - ge[1]];
                l2 += w * dv * dv;
                energy += w * (d.epsilon * dot(dg, dg) + kap[c] * dv * dv);
            }
        }
    }
    for (ei, edge) in mesh.edges().iter().enumerate() {
        let sigma = match edge.kind {
            EdgeKind::Interior => pen.interior,
            EdgeKind::Dirichlet(_) => pen.boundary,
            EdgeKind::Neumann(_) => continue,
        };
        let h = mesh.edge_length(ei);
        for p in edge_points(space, ei) {
            for (c, d) in problem.components.iter().enumerate() {
                let ul = space.combine(space.local_coeffs(u, edge.left.triangle, c), &p.left).value;
                let jump = match (&p.right, edge.right) {
                    (Some(rj), Some(r)) => ul - space.combine(space.local_coeffs(u, r.triangle, c), rj).value,
                    _ => ul - exact(p.x, c).0,
                };
                energy += p.w * d.epsilon * sigma / h * jump * jump;
            }
        }
    }
    ErrorNorms { l2: l2.sqrt(), energy: energy.sqrt() }
}

/// Energy norm of a discrete function.
pub fn energy_norm(space: &DgSpace, problem: &ProblemSpec, v: &[f64]) -> f64 {
    error_norms(space, problem, v, None).energy
}
