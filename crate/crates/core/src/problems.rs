//! Benchmark problems.
//!
//! | name      | system                                                        |
//! |-----------|---------------------------------------------------------------|
//! | `ex1`     | `u - eps Lap u + b.grad u + u^2 = f`, interior tanh layer      |
//! | `ex2`     | Monod reaction `-u/(1+u)`, rotating field, boundary layers     |
//! | `ex3`     | two-component Arrhenius reaction in a channel                  |
//! | `ex4`     | two components coupled by `50 u1^2 u2^2`                        |
//! | `linear`  | linear layer problem with an arctan solution                   |
//! | `poisson` | `-Lap u = f`, `u = sin(pi x) sin(pi y)`                         |

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{ComponentData, ExactSolution, NoReaction, ProblemSpec, Reaction, ScalarReaction};
use crate::mesh::{EdgeKind, Mesh, Point};
use crate::{Error, Result};

/// Boundary segment ids of a rectangle.
pub const BOTTOM: usize = 0;
pub const RIGHT: usize = 1;
pub const TOP: usize = 2;
pub const LEFT: usize = 3;

/// Names accepted by [`Benchmark::by_name`].
pub const NAMES: [&str; 6] = ["ex1", "ex2", "ex3", "ex4", "linear", "poisson"];

/// Which sides of the rectangle carry Neumann data (the rest is Dirichlet).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NeumannSides {
    pub bottom: bool,
    pub right: bool,
    pub top: bool,
    pub left: bool,
}

impl NeumannSides {
    pub const NONE: NeumannSides = NeumannSides { bottom: false, right: false, top: false, left: false };

    fn is_neumann(&self, side: usize) -> bool {
        [self.bottom, self.right, self.top, self.left][side]
    }
}

/// Run parameters a benchmark suggests.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkDefaults {
    pub degree: usize,
    pub theta: f64,
    pub tol: f64,
    pub max_dof: usize,
    /// Cells per direction of the initial mesh.
    pub cells: [usize; 2],
    /// Constant starting value of each component on the coarsest mesh.
    pub initial_guess: Vec<f64>,
}

/// Parameter overrides applied when a benchmark is built.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
}

/// A named problem on a rectangle with its boundary classification.
#[derive(Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub spec: ProblemSpec,
    /// `[[x0, x1], [y0, y1]]`.
    pub domain: [[f64; 2]; 2],
    pub neumann_sides: NeumannSides,
    pub defaults: BenchmarkDefaults,
    /// Location of a sharp layer as `(distance function, half width)`, if any.
    pub layer: Option<(Arc<dyn Fn(Point) -> f64 + Send + Sync>, f64)>,
}

impl fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Benchmark").field("name", &self.name).field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl Benchmark {
    pub fn by_name(name: &str, overrides: &Overrides) -> Result<Benchmark> {
        let mut b = match name {
            "ex1" => ex_polynomial(overrides.epsilon.unwrap_or(1e-6)),
            "ex2" => ex_monod(overrides.epsilon.unwrap_or(1e-6)),
            "ex3" => ex_arrhenius(overrides.epsilon.unwrap_or(1e-6)),
            "ex4" => ex_coupled_polynomial(overrides.epsilon.unwrap_or(1e-10), overrides.alpha.unwrap_or(0.1)),
            "linear" => ex_linear_layer(overrides.epsilon.unwrap_or(1e-6)),
            "poisson" => ex_poisson_penalty(),
            _ => return Err(Error::Config(format!("unknown benchmark '{name}' (expected one of {})", NAMES.join("|")))),
        };
        if let Some(a) = overrides.alpha {
            b.spec.components.iter_mut().for_each(|c| c.alpha = a);
        }
        if let Some(s) = overrides.sigma {
            b.spec.penalty = Some(crate::assembly::Penalty::uniform(s));
        }
        Ok(b)
    }

    /// Side index of a boundary point, or `None` for interior points.
    pub fn side(&self, x: Point) -> Option<usize> {
        let [[x0, x1], [y0, y1]] = self.domain;
        let tol = 1e-10 * (x1 - x0).max(y1 - y0);
        if (x[1] - y0).abs() < tol {
            Some(BOTTOM)
        } else if (x[0] - x1).abs() < tol {
            Some(RIGHT)
        } else if (x[1] - y1).abs() < tol {
            Some(TOP)
        } else if (x[0] - x0).abs() < tol {
            Some(LEFT)
        } else {
            None
        }
    }

    /// Edge kind of a boundary edge with midpoint `x`.
    pub fn classify(&self, x: Point) -> Option<EdgeKind> {
        let side = self.side(x)?;
        Some(if self.neumann_sides.is_neumann(side) { EdgeKind::Neumann(side) } else { EdgeKind::Dirichlet(side) })
    }

    /// Structured mesh with `nx * ny` cells.
    pub fn mesh(&self, nx: usize, ny: usize) -> Result<Mesh> {
        let [xr, yr] = self.domain;
        Mesh::rectangle(nx, ny, xr, yr, &|x| self.classify(x))
    }

    /// Initial mesh from the defaults.
    pub fn initial_mesh(&self) -> Result<Mesh> {
        self.mesh(self.defaults.cells[0], self.defaults.cells[1])
    }

    pub fn exact(&self) -> Option<&ExactSolution> {
        self.spec.exact.as_ref()
    }

    /// Largest strong residual `alpha u - eps Lap u + b.grad u + r(u) - f` of
    /// the exact solution over `samples` random points, split into points
    /// outside and inside the layer band. The Laplacian is a central
    /// difference of the exact gradient.
    pub fn exact_residual(&self, samples: usize, seed: u64) -> Option<(f64, f64)> {
        let exact = self.spec.exact.as_ref()?;
        let m = self.spec.num_components();
        let [[x0, x1], [y0, y1]] = self.domain;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut away, mut inside) = (0.0f64, 0.0f64);
        let h = 1e-7;
        let mut u = vec![0.0; m];
        let mut r = vec![0.0; m];
        for _ in 0..samples {
            let x = [rng.random_range(x0..x1), rng.random_range(y0..y1)];
            for (i, ui) in u.iter_mut().enumerate() {
                *ui = exact(x, i).0;
            }
            self.spec.reaction.eval(&u, &mut r);
            for (i, c) in self.spec.components.iter().enumerate() {
                let (val, grad) = exact(x, i);
                let lap = (exact([x[0] + h, x[1]], i).1[0] - exact([x[0] - h, x[1]], i).1[0]
                    + exact([x[0], x[1] + h], i).1[1]
                    - exact([x[0], x[1] - h], i).1[1])
                    / (2.0 * h);
                let b = (c.velocity)(x);
                let res = (c.alpha * val - c.epsilon * lap + b[0] * grad[0] + b[1] * grad[1] + r[i] - (c.source)(x)).abs();
                let in_layer = self.layer.as_ref().is_some_and(|(d, w)| d(x).abs() <= *w);
                if in_layer {
                    inside = inside.max(res);
                } else {
                    away = away.max(res);
                }
            }
        }
        Some((away, inside))
    }
}

fn constant_velocity(b: Point) -> (crate::assembly::VectorField, crate::assembly::ScalarField) {
    (Arc::new(move |_| b), Arc::new(|_| 0.0))
}

/// `u^2` with derivative `2u`.
fn square_reaction() -> Arc<dyn Reaction> {
    Arc::new(ScalarReaction { r: |u: f64| u * u, dr: |u: f64| 2.0 * u })
}

/// Example with `r(u) = u^2` and the exact solution
/// `u = (1 - tanh((2x - y - 1/4) / sqrt(5 eps))) / 2`.
pub fn ex_polynomial(eps: f64) -> Benchmark {
    let d = (5.0 * eps).sqrt();
    let b = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
    let exact: ExactSolution = Arc::new(move |x: Point, _| {
        let t = ((2.0 * x[0] - x[1] - 0.25) / d).tanh();
        let du = -0.5 * (1.0 - t * t) / d;
        (0.5 * (1.0 - t), [2.0 * du, -du])
    });
    // b is parallel to the layer, so b.grad u = 0 and -eps Lap u = -t (1 - t^2).
    let source = Arc::new(move |x: Point| {
        let t = ((2.0 * x[0] - x[1] - 0.25) / d).tanh();
        let u = 0.5 * (1.0 - t);
        u + u * u - t * (1.0 - t * t)
    });
    let (velocity, divergence) = constant_velocity(b);
    let ex = exact.clone();
    let band = 10.0 * d * eps.ln().abs();
    Benchmark {
        name: "ex1",
        spec: ProblemSpec {
            components: vec![ComponentData { epsilon: eps, alpha: 1.0, velocity, divergence, source }],
            reaction: square_reaction(),
            dirichlet: Arc::new(move |x, _, _| ex(x, 0).0),
            neumann: Arc::new(|_, _, _| 0.0),
            exact: Some(exact),
            penalty: None,
        },
        domain: [[0.0, 1.0], [0.0, 1.0]],
        neumann_sides: NeumannSides::NONE,
        defaults: BenchmarkDefaults {
            degree: 2,
            theta: 0.5,
            tol: 1e-3,
            max_dof: 80_000,
            cells: [2, 2],
            initial_guess: vec![1.0],
        },
        layer: Some((Arc::new(|x: Point| 2.0 * x[0] - x[1] - 0.25), band)),
    }
}

/// Monod rate `-u/(1+u)`, continued linearly below `u = -1/2` so that the
/// pole at `u = -1` is never reached.
pub fn monod(u: f64) -> f64 {
    if u >= -0.5 {
        -u / (1.0 + u)
    } else {
        1.0 - 4.0 * (u + 0.5)
    }
}

pub fn monod_derivative(u: f64) -> f64 {
    if u >= -0.5 {
        -1.0 / ((1.0 + u) * (1.0 + u))
    } else {
        -4.0
    }
}

/// Monod reaction in the rotating field `b = (-y, x)`.
pub fn ex_monod(eps: f64) -> Benchmark {
    let dirichlet = Arc::new(|x: Point, side: usize, _| {
        if side == BOTTOM && (1.0 / 3.0..=2.0 / 3.0).contains(&x[0]) {
            1.0
        } else {
            0.0
        }
    });
    Benchmark {
        name: "ex2",
        spec: ProblemSpec {
            components: vec![ComponentData {
                epsilon: eps,
                alpha: 1.0,
                velocity: Arc::new(|x: Point| [-x[1], x[0]]),
                divergence: Arc::new(|_| 0.0),
                source: Arc::new(|_| 0.0),
            }],
            reaction: Arc::new(ScalarReaction { r: monod, dr: monod_derivative }),
            dirichlet,
            neumann: Arc::new(|_, _, _| 0.0),
            exact: None,
            penalty: None,
        },
        domain: [[0.0, 1.0], [0.0, 1.0]],
        neumann_sides: NeumannSides { left: true, ..NeumannSides::NONE },
        defaults: BenchmarkDefaults {
            degree: 2,
            theta: 0.5,
            tol: 1e-3,
            max_dof: 80_000,
            cells: [4, 4],
            initial_guess: vec![1.0],
        },
        layer: None,
    }
}

/// `r_1 = -100 k0 u_2 exp(-E/(R u_1))`, `r_2 = k0 u_2 exp(-E/(R u_1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrhenius {
    pub k0: f64,
    pub activation: f64,
    pub heat: f64,
}

impl Arrhenius {
    /// `exp(-E/(R u))`, zero for `u <= 0`.
    pub fn rate(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let z = -self.activation / u;
        if z < -745.0 { 0.0 } else { z.exp() }
    }

    /// `d/du exp(-E/(R u)) = E/(R u^2) exp(-E/(R u))`, evaluated in log space.
    pub fn rate_derivative(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let z = -self.activation / u + self.activation.ln() - 2.0 * u.ln();
        if z < -745.0 { 0.0 } else { z.exp() }
    }
}

impl Reaction for Arrhenius {
    fn eval(&self, u: &[f64], out: &mut [f64]) {
        let w = self.k0 * u[1] * self.rate(u[0]);
        out[0] = -self.heat * w;
        out[1] = w;
    }

    fn jacobian(&self, u: &[f64], out: &mut [f64]) {
        let d0 = self.k0 * u[1] * self.rate_derivative(u[0]);
        let d1 = self.k0 * self.rate(u[0]);
        out[0] = -self.heat * d0;
        out[1] = -self.heat * d1;
        out[2] = d0;
        out[3] = d1;
    }
}

/// Temperature and reactant concentration in the channel `b = (1 - y^2, 0)`.
///
/// The boundary data follow the usual channel setup: inflow at `x = 0`
/// (`u_1 = 500`, `u_2 = 1`), a heated wall at `y = 1` (`u_1 = 600`, `u_2 = 1`),
/// symmetry at `y = 0` and an outflow at `x = 1`, the last two with zero flux.
pub fn ex_arrhenius(eps: f64) -> Benchmark {
    let (t_in, t_wall) = (500.0, 600.0);
    let component = |eps| ComponentData {
        epsilon: eps,
        alpha: 0.0,
        velocity: Arc::new(|x: Point| [1.0 - x[1] * x[1], 0.0]),
        divergence: Arc::new(|_| 0.0),
        source: Arc::new(|_| 0.0),
    };
    Benchmark {
        name: "ex3",
        spec: ProblemSpec {
            components: vec![component(eps), component(eps)],
            reaction: Arc::new(Arrhenius { k0: 3e8, activation: 1e4, heat: 100.0 }),
            dirichlet: Arc::new(move |_, side, c| match (c, side) {
                (0, TOP) => t_wall,
                (0, _) => t_in,
                _ => 1.0,
            }),
            neumann: Arc::new(|_, _, _| 0.0),
            exact: None,
            penalty: None,
        },
        domain: [[0.0, 1.0], [0.0, 1.0]],
        neumann_sides: NeumannSides { bottom: true, right: true, ..NeumannSides::NONE },
        defaults: BenchmarkDefaults {
            degree: 2,
            theta: 0.5,
            tol: 1e-2,
            max_dof: 20_000,
            cells: [2, 2],
            initial_guess: vec![t_in, 1.0],
        },
        layer: None,
    }
}

/// `r_1 = r_2 = c u_1^2 u_2^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledQuartic {
    pub c: f64,
}

impl Reaction for CoupledQuartic {
    fn eval(&self, u: &[f64], out: &mut [f64]) {
        let v = self.c * u[0] * u[0] * u[1] * u[1];
        out[0] = v;
        out[1] = v;
    }

    fn jacobian(&self, u: &[f64], out: &mut [f64]) {
        let d0 = 2.0 * self.c * u[0] * u[1] * u[1];
        let d1 = 2.0 * self.c * u[0] * u[0] * u[1];
        out.copy_from_slice(&[d0, d1, d0, d1]);
    }
}

/// Piecewise linear hat of height 1 on `[a, a + 1/4]`.
fn hat(x: f64, a: f64) -> f64 {
    let m = a + 0.125;
    if x >= a && x <= m {
        8.0 * (x - a)
    } else if x > m && x <= a + 0.25 {
        -8.0 * (x - a - 0.25)
    } else {
        0.0
    }
}

/// Inflow data of the coupled example at the top boundary.
pub fn ex4_inflow(x: f64, component: usize) -> f64 {
    match component {
        0 => {
            if x > 0.375 {
                hat(x, 0.375)
            } else {
                0.0
            }
        }
        _ => hat(x, 0.125) + hat(x, 0.625),
    }
}

/// Two components transported downwards through `(0,1) x (0,2)`.
pub fn ex_coupled_polynomial(eps: f64, alpha: f64) -> Benchmark {
    let component = |eps| {
        let (velocity, divergence) = constant_velocity([0.0, -1.0]);
        ComponentData { epsilon: eps, alpha, velocity, divergence, source: Arc::new(|_| 0.0) }
    };
    Benchmark {
        name: "ex4",
        spec: ProblemSpec {
            components: vec![component(eps), component(eps)],
            reaction: Arc::new(CoupledQuartic { c: 50.0 }),
            dirichlet: Arc::new(|x, _, c| ex4_inflow(x[0], c)),
            neumann: Arc::new(|_, _, _| 0.0),
            exact: None,
            penalty: None,
        },
        domain: [[0.0, 1.0], [0.0, 2.0]],
        neumann_sides: NeumannSides { bottom: true, right: true, left: true, top: false },
        defaults: BenchmarkDefaults {
            degree: 2,
            theta: 0.5,
            tol: 1e-3,
            max_dof: 40_000,
            cells: [2, 4],
            initial_guess: vec![0.0, 0.0],
        },
        layer: None,
    }
}

/// Linear problem `-eps Lap u + (2,3).grad u + u = f` with
/// `u = (pi/2) atan((-x/2 + y - 1/4) / sqrt(eps))`.
pub fn ex_linear_layer(eps: f64) -> Benchmark {
    let se = eps.sqrt();
    let exact: ExactSolution = Arc::new(move |x: Point, _| {
        let s = (-0.5 * x[0] + x[1] - 0.25) / se;
        let du = 0.5 * PI / (1.0 + s * s) / se;
        (0.5 * PI * s.atan(), [-0.5 * du, du])
    });
    let source = Arc::new(move |x: Point| {
        let s = (-0.5 * x[0] + x[1] - 0.25) / se;
        let q = 1.0 + s * s;
        0.5 * PI * s.atan() + 1.25 * PI * s / (q * q) + PI / (se * q)
    });
    let (velocity, divergence) = constant_velocity([2.0, 3.0]);
    let ex = exact.clone();
    Benchmark {
        name: "linear",
        spec: ProblemSpec {
            components: vec![ComponentData { epsilon: eps, alpha: 1.0, velocity, divergence, source }],
            reaction: Arc::new(NoReaction),
            dirichlet: Arc::new(move |x, _, _| ex(x, 0).0),
            neumann: Arc::new(|_, _, _| 0.0),
            exact: Some(exact),
            penalty: None,
        },
        domain: [[0.0, 1.0], [0.0, 1.0]],
        neumann_sides: NeumannSides::NONE,
        defaults: BenchmarkDefaults {
            degree: 2,
            theta: 0.5,
            tol: 1e-2,
            max_dof: 80_000,
            cells: [2, 2],
            initial_guess: vec![1.0],
        },
        layer: Some((Arc::new(|x: Point| -0.5 * x[0] + x[1] - 0.25), 10.0 * se * eps.ln().abs())),
    }
}

/// `-Lap u = 2 pi^2 sin(pi x) sin(pi y)` with homogeneous Dirichlet data.
pub fn ex_poisson_penalty() -> Benchmark {
    let exact: ExactSolution = Arc::new(|x: Point, _| {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        (sx * sy, [PI * cx * sy, PI * sx * cy])
    });
    let (velocity, divergence) = constant_velocity([0.0, 0.0]);
    Benchmark {
        name: "poisson",
        spec: ProblemSpec {
            components: vec![ComponentData {
                epsilon: 1.0,
                alpha: 0.0,
                velocity,
                divergence,
                source: Arc::new(|x: Point| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()),
            }],
            reaction: Arc::new(NoReaction),
            dirichlet: Arc::new(|_, _, _| 0.0),
            neumann: Arc::new(|_, _, _| 0.0),
            exact: Some(exact),
            penalty: None,
        },
        domain: [[0.0, 1.0], [0.0, 1.0]],
        neumann_sides: NeumannSides::NONE,
        defaults: BenchmarkDefaults {
            degree: 2,
            theta: 0.5,
            tol: 1e-4,
            max_dof: 100_000,
            cells: [4, 4],
            initial_guess: vec![1.0],
        },
        layer: None,
    }
}
