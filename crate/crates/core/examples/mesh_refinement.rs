//! Newest vertex bisection towards a point, with mesh quality per step.
//!
//! `cargo run --release --example mesh_refinement -- [steps]`

use dgafem::mesh::{write_mesh_text, EdgeKind, Mesh};

fn main() -> dgafem::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let target = [0.3, 0.7];
    let mut mesh = Mesh::rectangle(2, 2, [0.0, 1.0], [0.0, 1.0], &|_| Some(EdgeKind::Dirichlet(0)))?;
    for step in 0..steps {
        let marked: Vec<usize> = (0..mesh.num_triangles())
            .filter(|&t| {
                let c = mesh.centroid(t);
                ((c[0] - target[0]).powi(2) + (c[1] - target[1]).powi(2)).sqrt() < 2.0 * mesh.diameter(t)
            })
            .collect();
        mesh = mesh.refine(&marked).mesh;
        mesh.check_invariants()?;
        println!(
            "step {step:>2}: marked {:>3}, triangles {:>5}, min angle {:.2} deg, area {:.15}",
            marked.len(),
            mesh.num_triangles(),
            mesh.min_angle().to_degrees(),
            mesh.total_area()
        );
    }
    if let Some(path) = std::env::args().nth(2) {
        write_mesh_text(&mesh, std::fs::File::create(path)?)?;
    }
    Ok(())
}
