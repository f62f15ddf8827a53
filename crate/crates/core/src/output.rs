//! Run artifacts: level report CSV, legacy VTK fields and 1D profiles.

use std::io::Write;

use crate::basis::DgSpace;
use crate::mesh::Point;
use crate::Result;

/// One row of the convergence report, one per refinement level.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    pub elements: usize,
    pub dof: usize,
    pub eta: f64,
    /// Data approximation term.
    pub data_error: f64,
    pub l2_error: Option<f64>,
    pub energy_error: Option<f64>,
    pub newton_iterations: usize,
    pub avg_krylov: f64,
    pub marked: usize,
    pub assemble_seconds: f64,
    pub reorder_seconds: f64,
    pub factor_seconds: f64,
    pub solve_seconds: f64,
    pub estimate_seconds: f64,
    pub seconds: f64,
}

const HEADER: [&str; 10] =
    ["level", "elements", "dof", "eta", "data_error", "l2_error", "energy_error", "newton", "avg_krylov", "marked"];
const TIME_HEADER: [&str; 6] = ["assemble_s", "reorder_s", "factor_s", "solve_s", "estimate_s", "total_s"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

/// Writes the report; wall-clock columns only when `timings` is set.
pub fn write_report_csv<W: Write>(rows: &[LevelRow], w: W, timings: bool) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = HEADER.to_vec();
    if timings {
        header.extend(TIME_HEADER);
    }
    wr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.level.to_string(),
            r.elements.to_string(),
            r.dof.to_string(),
            format!("{:.10e}", r.eta),
            format!("{:.10e}", r.data_error),
            opt(r.l2_error),
            opt(r.energy_error),
            r.newton_iterations.to_string(),
            format!("{:.2}", r.avg_krylov),
            r.marked.to_string(),
        ];
        if timings {
            for t in [r.assemble_seconds, r.reorder_seconds, r.factor_seconds, r.solve_seconds, r.estimate_seconds, r.seconds] {
                rec.push(format!("{t:.4}"));
            }
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Legacy ASCII VTK unstructured grid. Every triangle gets its own three points
/// so the discontinuous field is shown as is; `cell_data` adds per-element scalars.
pub fn write_vtk<W: Write>(space: &DgSpace, u: &[f64], cell_data: &[(&str, &[f64])], mut w: W) -> Result<()> {
    let mesh = space.mesh();
    let nel = mesh.num_triangles();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "dg solution, degree {}", space.degree())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", 3 * nel)?;
    for t in 0..nel {
        for p in mesh.corners(t) {
            writeln!(w, "{:.12e} {:.12e} 0", p[0], p[1])?;
        }
    }
    writeln!(w, "CELLS {} {}", nel, 4 * nel)?;
    for t in 0..nel {
        writeln!(w, "3 {} {} {}", 3 * t, 3 * t + 1, 3 * t + 2)?;
    }
    writeln!(w, "CELL_TYPES {nel}")?;
    for _ in 0..nel {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", 3 * nel)?;
    const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    for c in 0..space.components() {
        writeln!(w, "SCALARS u{c} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for t in 0..nel {
            for xi in CORNERS {
                writeln!(w, "{:.12e}", space.eval_reference(u, t, c, xi).value)?;
            }
        }
    }
    if !cell_data.is_empty() {
        writeln!(w, "CELL_DATA {nel}")?;
        for (name, values) in cell_data {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values.iter() {
                writeln!(w, "{v:.12e}")?;
            }
        }
    }
    Ok(())
}

/// Straight sampling line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossSection {
    pub from: Point,
    pub to: Point,
    pub samples: usize,
}

/// Sample of a profile: arc-length parameter in `[0, 1]`, point and value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub s: f64,
    pub x: Point,
    pub value: f64,
}

/// Values of component `c` along a line; points outside the mesh are skipped.
pub fn cross_section(space: &DgSpace, u: &[f64], c: usize, line: &CrossSection) -> Vec<ProfilePoint> {
    let n = line.samples.max(2);
    (0..n)
        .filter_map(|i| {
            let s = i as f64 / (n - 1) as f64;
            let x = [line.from[0] + s * (line.to[0] - line.from[0]), line.from[1] + s * (line.to[1] - line.from[1])];
            space.eval_at(u, c, x).map(|value| ProfilePoint { s, x, value })
        })
        .collect()
}

pub fn write_profile_csv<W: Write>(profile: &[ProfilePoint], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["s", "x", "y", "value"])?;
    for p in profile {
        wr.write_record([format!("{:.8}", p.s), format!("{:.10e}", p.x[0]), format!("{:.10e}", p.x[1]), format!("{:.10e}", p.value)])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{EdgeKind, Mesh};

    fn space() -> DgSpace {
        let mesh = Mesh::rectangle(2, 2, [0.0, 1.0], [0.0, 1.0], &|_| Some(EdgeKind::Dirichlet(0))).unwrap();
        DgSpace::new(mesh, 2, 1).unwrap()
    }

    #[test]
    fn empty_report_has_header_only() {
        let mut buf = Vec::new();
        write_report_csv(&[], &mut buf, false).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1);
        assert!(s.starts_with("level,elements,dof,eta"));
        assert!(!s.contains("total_s"));
    }

    #[test]
    fn timing_columns_are_optional() {
        let row = LevelRow { level: 0, elements: 8, dof: 48, seconds: 1.5, ..Default::default() };
        let mut a = Vec::new();
        write_report_csv(std::slice::from_ref(&row), &mut a, true).unwrap();
        let mut b = Vec::new();
        write_report_csv(&[row], &mut b, false).unwrap();
        let a = String::from_utf8(a).unwrap();
        assert!(a.lines().nth(1).unwrap().ends_with("1.5000"));
        assert_eq!(String::from_utf8(b).unwrap().lines().nth(1).unwrap().split(',').count(), HEADER.len());
    }

    #[test]
    fn constant_profile() {
        let s = space();
        let u = s.constant(&[0.7]);
        let p = cross_section(&s, &u, 0, &CrossSection { from: [0.0, 0.1], to: [1.0, 0.9], samples: 33 });
        assert_eq!(p.len(), 33);
        assert!(p.iter().all(|q| (q.value - 0.7).abs() < 1e-13));
    }

    #[test]
    fn vtk_layout() {
        let s = space();
        let u = s.project(&|x| vec![x[0] + 2.0 * x[1]]);
        let eta = vec![1.0; s.num_elements()];
        let mut buf = Vec::new();
        write_vtk(&s, &u, &[("eta", &eta)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 24 double"));
        assert!(text.contains("CELLS 8 32"));
        assert!(text.contains("CELL_DATA 8"));
        // point values reproduce the linear field
        let lines: Vec<&str> = text.lines().collect();
        let pts = lines.iter().position(|l| l.starts_with("POINTS")).unwrap();
        let vals = lines.iter().position(|l| l.starts_with("SCALARS u0")).unwrap() + 2;
        for i in 0..24 {
            let xy: Vec<f64> = lines[pts + 1 + i].split_whitespace().map(|v| v.parse().unwrap()).collect();
            let v: f64 = lines[vals + i].parse().unwrap();
            assert!((v - xy[0] - 2.0 * xy[1]).abs() < 1e-10);
        }
    }
}
