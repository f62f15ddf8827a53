//! Conforming triangulations with explicit edge topology and newest-vertex bisection.
//!
//! Triangles are stored counterclockwise. Local edge `i` of a triangle is the edge
//! opposite its local vertex `i`, and the refinement edge is the local edge
//! opposite the newest vertex. Every edge knows the (triangle, local edge) pairs
//! on both sides, so jump and average terms can be assembled edge by edge.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Interior,
    Dirichlet(usize),
    Neumann(usize),
}

impl EdgeKind {
    pub fn is_boundary(self) -> bool {
        !matches!(self, EdgeKind::Interior)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    /// Local index (0..3) of the newest vertex.
    pub newest: u8,
}

impl Triangle {
    /// Local index of the refinement edge (the one opposite the newest vertex).
    pub fn refinement_edge(&self) -> usize {
        self.newest as usize
    }

    /// Global endpoints of local edge `i`, in counterclockwise order.
    pub fn edge_vertices(&self, i: usize) -> [usize; 2] {
        [self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3]]
    }
}

/// A side of an edge: the triangle and the local edge index inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeSide {
    pub triangle: usize,
    pub local: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints in the counterclockwise order of the `left` triangle, so the
    /// outward normal of `left` points to the right of `vertices[0] -> vertices[1]`.
    pub vertices: [usize; 2],
    pub left: EdgeSide,
    pub right: Option<EdgeSide>,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    generation: usize,
}

/// Result of a refinement step: the new mesh and, for every new triangle, the
/// triangle of the previous mesh that contains it.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub mesh: Mesh,
    pub parent: Vec<usize>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Local vertex opposite the longest edge; ties go to the lowest global vertex index.
fn longest_edge_label(vertices: &[Point], tri: [usize; 3]) -> u8 {
    let lens: [f64; 3] =
        std::array::from_fn(|i| dist(vertices[tri[(i + 1) % 3]], vertices[tri[(i + 2) % 3]]));
    let longest = lens.iter().copied().fold(0.0, f64::max);
    (0..3)
        .filter(|&i| lens[i] >= longest * (1.0 - 1e-12))
        .min_by_key(|&i| tri[i])
        .expect("a triangle has a longest edge") as u8
}

impl Mesh {
    /// Builds the edge topology of a conforming triangulation.
    ///
    /// `classify` receives the midpoint of each boundary edge and must return a
    /// Dirichlet or Neumann kind for it.
    pub fn build(
        vertices: Vec<Point>,
        triangles: &[[usize; 3]],
        classify: &dyn Fn(Point) -> Option<EdgeKind>,
    ) -> Result<Mesh> {
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, &tri) in triangles.iter().enumerate() {
            for &v in &tri {
                if v >= vertices.len() {
                    return Err(Error::InvalidIndex { triangle: t, index: v });
                }
            }
            let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let area = signed_area(a, b, c);
            let scale = dist(a, b).max(dist(b, c)).max(dist(c, a));
            if area.abs() <= 1e-14 * scale * scale || !area.is_finite() {
                return Err(Error::DegenerateTriangle(t));
            }
            let ccw = if area > 0.0 { tri } else { [tri[0], tri[2], tri[1]] };
            let newest = longest_edge_label(&vertices, ccw);
            tris.push(Triangle { vertices: ccw, newest });
        }

        let (edges_raw, triangle_edges) = Self::edge_incidence(&tris)?;

        let boundary: Vec<usize> = edges_raw
            .iter()
            .enumerate()
            .filter(|(_, e)| e.1.is_none())
            .map(|(i, _)| i)
            .collect();
        Self::check_hanging_nodes(&vertices, &edges_raw, &boundary)?;

        let mut edges = Vec::with_capacity(edges_raw.len());
        for (verts, right, left) in edges_raw.into_iter().map(|(v, r, l)| (v, r, l)) {
            let kind = if right.is_some() {
                EdgeKind::Interior
            } else {
                let a = vertices[verts[0]];
                let b = vertices[verts[1]];
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                match classify(mid) {
                    Some(k) if k.is_boundary() => k,
                    _ => return Err(Error::UnclassifiedBoundary { x: mid[0], y: mid[1] }),
                }
            };
            edges.push(Edge { vertices: verts, left, right, kind });
        }

        Ok(Mesh { vertices, triangles: tris, edges, triangle_edges, generation: 0 })
    }

    /// Edge enumeration in first-encounter order: (ccw vertices of left side, right side, left side).
    #[allow(clippy::type_complexity)]
    fn edge_incidence(
        tris: &[Triangle],
    ) -> Result<(Vec<([usize; 2], Option<EdgeSide>, EdgeSide)>, Vec<[usize; 3]>)> {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(tris.len() * 2);
        let mut edges: Vec<([usize; 2], Option<EdgeSide>, EdgeSide)> = Vec::new();
        let mut triangle_edges = vec![[usize::MAX; 3]; tris.len()];
        for (t, tri) in tris.iter().enumerate() {
            for i in 0..3 {
                let [a, b] = tri.edge_vertices(i);
                let side = EdgeSide { triangle: t, local: i as u8 };
                match lookup.get(&key(a, b)) {
                    Some(&e) => {
                        if edges[e].1.is_some() {
                            return Err(Error::NonConforming(a.min(b), a.max(b)));
                        }
                        edges[e].1 = Some(side);
                        triangle_edges[t][i] = e;
                    }
                    None => {
                        lookup.insert(key(a, b), edges.len());
                        triangle_edges[t][i] = edges.len();
                        edges.push(([a, b], None, side));
                    }
                }
            }
        }
        Ok((edges, triangle_edges))
    }

    fn check_hanging_nodes(
        vertices: &[Point],
        edges: &[([usize; 2], Option<EdgeSide>, EdgeSide)],
        boundary: &[usize],
    ) -> Result<()> {
        let mut candidates: Vec<usize> =
            boundary.iter().flat_map(|&e| edges[e].0).collect();
        candidates.sort_unstable();
        candidates.dedup();
        for &e in boundary {
            let [a, b] = edges[e].0;
            let (pa, pb) = (vertices[a], vertices[b]);
            let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
            for &v in &candidates {
                if v == a || v == b {
                    continue;
                }
                let p = vertices[v];
                let t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                if t <= 1e-12 || t >= 1.0 - 1e-12 {
                    continue;
                }
                let cross = (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]);
                if cross.abs() <= 1e-12 * len2 {
                    return Err(Error::HangingNode { vertex: v, a, b });
                }
            }
        }
        Ok(())
    }

    /// Rebuilds topology for refined triangles whose boundary edge kinds are known.
    fn from_refined(
        vertices: Vec<Point>,
        triangles: Vec<Triangle>,
        boundary_kinds: &HashMap<(usize, usize), EdgeKind>,
        generation: usize,
    ) -> Mesh {
        let (edges_raw, triangle_edges) =
            Self::edge_incidence(&triangles).expect("bisection produced a non-conforming mesh");
        let edges = edges_raw
            .into_iter()
            .map(|(verts, right, left)| {
                let kind = if right.is_some() {
                    EdgeKind::Interior
                } else {
                    *boundary_kinds
                        .get(&key(verts[0], verts[1]))
                        .expect("bisection produced a hanging node")
                };
                Edge { vertices: verts, left, right, kind }
            })
            .collect();
        Mesh { vertices, triangles, edges, triangle_edges, generation }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.right.is_some()).count()
    }

    /// Refinement level counter, incremented by every call to [`Mesh::refine`].
    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Global edge indices of the three local edges of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let v = self.triangles[t].vertices;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    /// Element diameter h_K (longest edge).
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Unit normal of edge `e`, pointing out of its `left` triangle.
    pub fn edge_normal(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = dx.hypot(dy);
        [dy / len, -dx / len]
    }

    /// Point on edge `e` at parameter `s` in [0, 1] measured from `vertices[0]`.
    pub fn edge_point(&self, e: usize, s: f64) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Smallest interior angle (radians) over all triangles.
    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| {
                let p = self.corners(t);
                (0..3)
                    .map(|i| {
                        let o = p[i];
                        let u = [p[(i + 1) % 3][0] - o[0], p[(i + 1) % 3][1] - o[1]];
                        let w = [p[(i + 2) % 3][0] - o[0], p[(i + 2) % 3][1] - o[1]];
                        let cos = (u[0] * w[0] + u[1] * w[1]) / (u[0].hypot(u[1]) * w[0].hypot(w[1]));
                        cos.clamp(-1.0, 1.0).acos()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Triangles sharing an edge with `t`.
    pub fn neighbors(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.triangle_edges[t].iter().filter_map(move |&e| {
            let edge = &self.edges[e];
            match edge.right {
                Some(r) if edge.left.triangle == t => Some(r.triangle),
                Some(_) => Some(edge.left.triangle),
                None => None,
            }
        })
    }

    /// Verifies orientation, edge incidence and absence of hanging nodes.
    pub fn check_invariants(&self) -> Result<()> {
        for t in 0..self.num_triangles() {
            if self.area(t) <= 0.0 {
                return Err(Error::DegenerateTriangle(t));
            }
            if self.triangles[t].newest > 2 {
                return Err(Error::InvalidIndex { triangle: t, index: self.triangles[t].newest as usize });
            }
        }
        let (edges_raw, _) = Self::edge_incidence(&self.triangles)?;
        if edges_raw.len() != self.edges.len() {
            return Err(Error::Parse("edge table out of sync with triangles".into()));
        }
        let boundary: Vec<usize> =
            edges_raw.iter().enumerate().filter(|(_, e)| e.1.is_none()).map(|(i, _)| i).collect();
        Self::check_hanging_nodes(&self.vertices, &edges_raw, &boundary)?;
        for e in &self.edges {
            if e.right.is_some() == e.kind.is_boundary() {
                return Err(Error::Parse("edge kind inconsistent with adjacency".into()));
            }
        }
        Ok(())
    }

    /// Newest-vertex bisection of the marked triangles followed by conforming closure.
    ///
    /// Each marked triangle is bisected twice (four children). Unmarked triangles
    /// are bisected as often as needed to remove hanging nodes. Midpoints become
    /// the newest vertices of the children.
    pub fn refine(&self, marked: &[usize]) -> Refinement {
        let mut edge_marked = vec![false; self.edges.len()];
        let mut queue = Vec::new();
        for &t in marked {
            for &e in &self.triangle_edges[t] {
                if !edge_marked[e] {
                    edge_marked[e] = true;
                    queue.push(e);
                }
            }
        }
        // closure: every triangle touching a marked edge must have its refinement edge marked
        while let Some(e) = queue.pop() {
            let edge = &self.edges[e];
            for side in std::iter::once(edge.left).chain(edge.right) {
                let tri = &self.triangles[side.triangle];
                let re = self.triangle_edges[side.triangle][tri.refinement_edge()];
                if !edge_marked[re] {
                    edge_marked[re] = true;
                    queue.push(re);
                }
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut boundary_kinds: HashMap<(usize, usize), EdgeKind> = HashMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            let [a, b] = edge.vertices;
            if edge_marked[e] {
                let m = vertices.len();
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                midpoint.insert(key(a, b), m);
                if edge.kind.is_boundary() {
                    boundary_kinds.insert(key(a, m), edge.kind);
                    boundary_kinds.insert(key(m, b), edge.kind);
                }
            } else if edge.kind.is_boundary() {
                boundary_kinds.insert(key(a, b), edge.kind);
            }
        }

        let mut triangles = Vec::with_capacity(self.triangles.len() * 2);
        let mut parent = Vec::with_capacity(self.triangles.len() * 2);
        let mut stack: Vec<[usize; 3]> = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            let n = tri.newest as usize;
            if !edge_marked[self.triangle_edges[t][n]] {
                triangles.push(*tri);
                parent.push(t);
                continue;
            }
            // (newest, next, prev) in counterclockwise order
            stack.push([tri.vertices[n], tri.vertices[(n + 1) % 3], tri.vertices[(n + 2) % 3]]);
            while let Some([p, a, b]) = stack.pop() {
                match midpoint.get(&key(a, b)) {
                    Some(&m) => {
                        stack.push([m, b, p]);
                        stack.push([m, p, a]);
                    }
                    None => {
                        triangles.push(Triangle { vertices: [p, a, b], newest: 0 });
                        parent.push(t);
                    }
                }
            }
        }

        let mesh = Mesh::from_refined(vertices, triangles, &boundary_kinds, self.generation + 1);
        Refinement { mesh, parent }
    }

    /// Convenience wrapper around [`Mesh::refine`] that drops the parent map.
    pub fn bisect(&self, marked: &[usize]) -> Mesh {
        self.refine(marked).mesh
    }

    /// Uniform refinement: every triangle marked.
    pub fn refine_uniform(&self) -> Refinement {
        let all: Vec<usize> = (0..self.num_triangles()).collect();
        self.refine(&all)
    }

    /// Structured triangulation of `[x0,x1] x [y0,y1]` with `nx * ny` squares, each
    /// split along its `(i,j)-(i+1,j+1)` diagonal.
    pub fn rectangle(
        nx: usize,
        ny: usize,
        [x0, x1]: [f64; 2],
        [y0, y1]: [f64; 2],
        classify: &dyn Fn(Point) -> Option<EdgeKind>,
    ) -> Result<Mesh> {
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    x0 + (x1 - x0) * i as f64 / nx as f64,
                    y0 + (y1 - y0) * j as f64 / ny as f64,
                ]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut tris = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::build(vertices, &tris, classify)
    }

    /// For every triangle and local edge, flags the given edge parameters (measured
    /// along the triangle's counterclockwise edge direction) where `b . n < 0`, with
    /// `n` the outward normal of that triangle. `b . n = 0` is not inflow.
    pub fn inflow_classification(
        &self,
        velocity: &dyn Fn(Point) -> Point,
        params: &[f64],
    ) -> Vec<[Vec<bool>; 3]> {
        (0..self.num_triangles())
            .map(|t| {
                let tri = self.triangles[t];
                std::array::from_fn(|i| {
                    let [a, b] = tri.edge_vertices(i);
                    let (pa, pb) = (self.vertices[a], self.vertices[b]);
                    let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                    let len = dx.hypot(dy);
                    let n = [dy / len, -dx / len];
                    params
                        .iter()
                        .map(|&s| {
                            let bv = velocity([pa[0] + s * dx, pa[1] + s * dy]);
                            is_inflow(bv, n)
                        })
                        .collect()
                })
            })
            .collect()
    }
}

/// `b . n < 0`; characteristic points (`b . n = 0`) count as outflow.
pub fn is_inflow(b: Point, n: Point) -> bool {
    b[0] * n[0] + b[1] * n[1] < 0.0
}

/// Reads the plain-text node/element format: a vertex count followed by `x y`
/// lines, then a triangle count followed by `v0 v1 v2` lines. Blank lines and
/// lines starting with `#` are skipped.
pub fn read_mesh_text<R: BufRead>(reader: R) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let mut tokens = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| Error::Parse(format!("unexpected end of input, expected {what}")));
    let parse_usize = |s: String| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s}: {e}")));
    let parse_f64 = |s: String| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));

    let nv = parse_usize(next("vertex count")?)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = parse_f64(next("x")?)?;
        let y = parse_f64(next("y")?)?;
        vertices.push([x, y]);
    }
    let nt = parse_usize(next("triangle count")?)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let a = parse_usize(next("vertex index")?)?;
        let b = parse_usize(next("vertex index")?)?;
        let c = parse_usize(next("vertex index")?)?;
        triangles.push([a, b, c]);
    }
    Ok((vertices, triangles))
}

pub fn write_mesh_text<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "{}", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
    }
    writeln!(w, "{}", mesh.triangles.len())?;
    for t in &mesh.triangles {
        writeln!(w, "{} {} {}", t.vertices[0], t.vertices[1], t.vertices[2])?;
    }
    Ok(())
}
