//! Residual-based a posteriori error indicators, data oscillation and bulk marking.

use std::io::Write;

use crate::assembly::ProblemSpec;
use crate::basis::{DgSpace, Jet};
use crate::mesh::{EdgeKind, Point};
use crate::{Error, Result};

/// Coercivity data of one component: `alpha - div b / 2 >= kappa` and
/// `|alpha - div b| <= kappa_star * kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kappa {
    pub kappa: f64,
    /// Only defined when `kappa > 0`.
    pub kappa_star: Option<f64>,
}

/// Computes `kappa` and `kappa*` for every component from quadrature point samples.
pub fn compute_kappa(space: &DgSpace, problem: &ProblemSpec) -> Vec<Kappa> {
    problem
        .components
        .iter()
        .map(|d| {
            let mut inf = f64::INFINITY;
            let mut sup: f64 = 0.0;
            for e in 0..space.num_elements() {
                for q in 0..space.volume_rule().points.len() {
                    let div = (d.divergence)(space.volume_point(e, q));
                    inf = inf.min(d.alpha - 0.5 * div);
                    sup = sup.max((d.alpha - div).abs());
                }
            }
            let kappa = inf.max(0.0);
            Kappa { kappa, kappa_star: (kappa > 0.0).then(|| sup / kappa) }
        })
        .collect()
}

/// `min(h eps^{-1/2}, kappa^{-1/2})`, or `h eps^{-1/2}` when `kappa = 0`.
pub fn rho(h: f64, eps: f64, kappa: f64) -> f64 {
    let a = h / eps.sqrt();
    if kappa > 0.0 {
        a.min(1.0 / kappa.sqrt())
    } else {
        a
    }
}

/// Squared local indicators of one component.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorIndicators {
    pub residual: Vec<f64>,
    pub interior: Vec<f64>,
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
    pub kappa: f64,
    pub kappa_star: Option<f64>,
}

impl ErrorIndicators {
    fn zeros(n: usize, k: Kappa) -> Self {
        ErrorIndicators {
            residual: vec![0.0; n],
            interior: vec![0.0; n],
            dirichlet: vec![0.0; n],
            neumann: vec![0.0; n],
            kappa: k.kappa,
            kappa_star: k.kappa_star,
        }
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    /// `eta_K^2`.
    pub fn element(&self, k: usize) -> f64 {
        self.residual[k] + self.interior[k] + self.dirichlet[k] + self.neumann[k]
    }

    pub fn squared(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.element(k)).collect()
    }

    /// `eta = (sum_K eta_K^2)^{1/2}`.
    pub fn total(&self) -> f64 {
        (0..self.len()).map(|k| self.element(k)).sum::<f64>().sqrt()
    }
}

/// Global estimator over all components.
pub fn total_estimate(indicators: &[ErrorIndicators]) -> f64 {
    indicators.iter().map(|i| i.total().powi(2)).sum::<f64>().sqrt()
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn field(space: &DgSpace, u: &[f64], e: usize, c: usize, phi: &[Jet]) -> Jet {
    space.combine(space.local_coeffs(u, e, c), phi)
}

/// Local indicators of every component for the discrete solution `u`.
pub fn compute_indicators(space: &DgSpace, problem: &ProblemSpec, u: &[f64]) -> Result<Vec<ErrorIndicators>> {
    if u.len() != space.num_dofs() {
        return Err(Error::DimensionMismatch { expected: space.num_dofs(), found: u.len() });
    }
    let mesh = space.mesh();
    let m = problem.num_components();
    let nel = space.num_elements();
    let kap = compute_kappa(space, problem);
    let pen = problem.penalty(space.degree());
    let mut out: Vec<ErrorIndicators> = kap.iter().map(|&k| ErrorIndicators::zeros(nel, k)).collect();

    let mut values = vec![0.0; m];
    let mut r = vec![0.0; m];
    for e in 0..nel {
        let hk = mesh.diameter(e);
        let mut acc = vec![0.0; m];
        for q in 0..space.volume_rule().points.len() {
            let phi = space.volume_basis(e, q);
            let x = space.volume_point(e, q);
            let w = space.volume_weight(e, q);
            let jets: Vec<Jet> = (0..m).map(|c| field(space, u, e, c, &phi)).collect();
            for (v, j) in values.iter_mut().zip(&jets) {
                *v = j.value;
            }
            problem.reaction.eval(&values, &mut r);
            for (c, d) in problem.components.iter().enumerate() {
                let j = &jets[c];
                let res = (d.source)(x) - d.alpha * j.value + d.epsilon * j.laplacian() - dot((d.velocity)(x), j.grad) - r[c];
                acc[c] += w * res * res;
            }
        }
        for (c, d) in problem.components.iter().enumerate() {
            out[c].residual[e] = rho(hk, d.epsilon, kap[c].kappa).powi(2) * acc[c];
        }
    }

    let rule = space.edge_rule();
    for (ei, edge) in mesh.edges().iter().enumerate() {
        let he = mesh.edge_length(ei);
        let n = mesh.edge_normal(ei);
        let l = edge.left;
        for (c, d) in problem.components.iter().enumerate() {
            let eps = d.epsilon;
            let kappa = kap[c].kappa;
            let rho_e = rho(he, eps, kappa);
            let mut flux = 0.0;
            let mut jump = 0.0;
            for q in 0..rule.points.len() {
                let w = rule.weights[q] * he;
                let x = mesh.edge_point(ei, rule.points[q]);
                let ul = field(space, u, l.triangle, c, &space.edge_basis(l.triangle, l.local as usize, false, q));
                match (edge.kind, edge.right) {
                    (EdgeKind::Interior, Some(r)) => {
                        let ur = field(space, u, r.triangle, c, &space.edge_basis(r.triangle, r.local as usize, true, q));
                        let fj = eps * (dot(ul.grad, n) - dot(ur.grad, n));
                        let vj = ul.value - ur.value;
                        flux += w * fj * fj;
                        jump += w * vj * vj;
                    }
                    (EdgeKind::Dirichlet(seg), _) => {
                        let v = (problem.dirichlet)(x, seg, c) - ul.value;
                        jump += w * v * v;
                    }
                    (EdgeKind::Neumann(seg), _) => {
                        let v = (problem.neumann)(x, seg, c) - eps * dot(ul.grad, n);
                        flux += w * v * v;
                    }
                    _ => {}
                }
            }
            match (edge.kind, edge.right) {
                (EdgeKind::Interior, Some(r)) => {
                    let share = 0.5 * (flux * rho_e / eps.sqrt() + (eps * pen.interior / he + kappa * he + he / eps) * jump);
                    out[c].interior[l.triangle] += share;
                    out[c].interior[r.triangle] += share;
                }
                (EdgeKind::Dirichlet(_), _) => {
                    out[c].dirichlet[l.triangle] += (eps * pen.boundary / he + kappa * he + he / eps) * jump;
                }
                (EdgeKind::Neumann(_), _) => {
                    out[c].neumann[l.triangle] += flux * rho_e / eps.sqrt();
                }
                _ => {}
            }
        }
    }
    Ok(out)
}

/// `Theta^2 = Theta^2(f) + Theta^2(u^D) + Theta^2(u^N)`, summed over components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DataError {
    pub source: f64,
    pub dirichlet: f64,
    pub neumann: f64,
}

impl DataError {
    /// `Theta`.
    pub fn total(&self) -> f64 {
        (self.source + self.dirichlet + self.neumann).sqrt()
    }
}

/// Elementwise L2 projection of `g` onto polynomials of the space's degree,
/// evaluated at every volume quadrature point of `e`.
fn projected(space: &DgSpace, e: usize, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let nq = space.volume_rule().points.len();
    let samples: Vec<f64> = (0..nq).map(|q| g(space.volume_point(e, q))).collect();
    let inv_mass = 1.0 / space.mass_diagonal(e);
    let coeffs: Vec<f64> = (0..space.nloc())
        .map(|l| {
            inv_mass * (0..nq).map(|q| space.volume_weight(e, q) * samples[q] * space.reference_volume(q)[l].value).sum::<f64>()
        })
        .collect();
    (0..nq)
        .map(|q| space.reference_volume(q).iter().zip(&coeffs).map(|(j, c)| j.value * c).sum())
        .collect()
}

/// Data approximation error. `f_h` and `b_h` are elementwise L2 projections onto
/// degree-`k` polynomials; `alpha` is constant per component and therefore exact.
pub fn compute_data_error(space: &DgSpace, problem: &ProblemSpec, u: &[f64]) -> Result<DataError> {
    if u.len() != space.num_dofs() {
        return Err(Error::DimensionMismatch { expected: space.num_dofs(), found: u.len() });
    }
    let mesh = space.mesh();
    let kap = compute_kappa(space, problem);
    let pen = problem.penalty(space.degree());
    let mut out = DataError::default();
    let nq = space.volume_rule().points.len();
    for e in 0..space.num_elements() {
        let hk = mesh.diameter(e);
        for (c, d) in problem.components.iter().enumerate() {
            let fh = projected(space, e, &|x| (d.source)(x));
            let bh0 = projected(space, e, &|x| (d.velocity)(x)[0]);
            let bh1 = projected(space, e, &|x| (d.velocity)(x)[1]);
            let mut acc = 0.0;
            for q in 0..nq {
                let x = space.volume_point(e, q);
                let w = space.volume_weight(e, q);
                let phi = space.volume_basis(e, q);
                let uh = field(space, u, e, c, &phi);
                let b = (d.velocity)(x);
                let df = (d.source)(x) - fh[q];
                let db = (b[0] - bh0[q]) * uh.grad[0] + (b[1] - bh1[q]) * uh.grad[1];
                acc += w * (df * df + db * db);
            }
            out.source += rho(hk, d.epsilon, kap[c].kappa).powi(2) * acc;
        }
    }
    let rule = space.edge_rule();
    for (ei, edge) in mesh.edges().iter().enumerate() {
        let (seg, dirichlet) = match edge.kind {
            EdgeKind::Dirichlet(s) => (s, true),
            EdgeKind::Neumann(s) => (s, false),
            EdgeKind::Interior => continue,
        };
        let he = mesh.edge_length(ei);
        for (c, d) in problem.components.iter().enumerate() {
            let g = |x: Point| if dirichlet { (problem.dirichlet)(x, seg, c) } else { (problem.neumann)(x, seg, c) };
            let samples: Vec<f64> = rule.points.iter().map(|&s| g(mesh.edge_point(ei, s))).collect();
            let mean: f64 = samples.iter().zip(&rule.weights).map(|(g, w)| g * w).sum();
            let dev: f64 = samples.iter().zip(&rule.weights).map(|(g, w)| w * he * (g - mean).powi(2)).sum();
            let eps = d.epsilon;
            let kappa = kap[c].kappa;
            if dirichlet {
                out.dirichlet += (eps * pen.boundary / he + kappa * he + he / eps) * dev;
            } else {
                out.neumann += rho(he, eps, kappa) / eps.sqrt() * dev;
            }
        }
    }
    Ok(out)
}

/// Greedy bulk marking on squared indicators.
///
/// Per component, elements are taken in order of decreasing `eta_K^2` (ties by
/// increasing id) until `theta` of the total is reached. The result is the sorted
/// union over components.
pub fn dorfler_mark(squared: &[&[f64]], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    let mut marked = std::collections::BTreeSet::new();
    for eta in squared {
        let prefix = dorfler_prefix(eta, theta);
        marked.extend(prefix);
    }
    Ok(marked.into_iter().collect())
}

/// The minimal greedy prefix for one component, in marking order.
pub fn dorfler_prefix(eta: &[f64], theta: f64) -> Vec<usize> {
    let total: f64 = eta.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    let target = theta * total;
    let mut sum = 0.0;
    let mut out = Vec::new();
    for k in order {
        out.push(k);
        sum += eta[k];
        if sum >= target {
            break;
        }
    }
    out
}

/// Writes one row per element and component.
pub fn write_indicators_csv<W: Write>(indicators: &[ErrorIndicators], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["element", "component", "eta_residual", "eta_interior", "eta_dirichlet", "eta_neumann", "eta"])?;
    for (c, ind) in indicators.iter().enumerate() {
        for k in 0..ind.len() {
            wr.write_record([
                k.to_string(),
                c.to_string(),
                format!("{:.10e}", ind.residual[k]),
                format!("{:.10e}", ind.interior[k]),
                format!("{:.10e}", ind.dirichlet[k]),
                format!("{:.10e}", ind.neumann[k]),
                format!("{:.10e}", ind.element(k).sqrt()),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}
