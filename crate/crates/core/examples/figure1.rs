//! Builds both graphs for the three-dimensional reference OU model and lists
//! the matrix entry that certifies each edge.

use mcar_graphs::builder::{local_orthogonality_graph, orthogonality_graph, DEFAULT_TOL};
use mcar_graphs::graph::to_dot;
use mcar_graphs::model::reference_ou_spec;

fn main() -> mcar_graphs::Result<()> {
    let spec = reference_ou_spec();
    for (name, report) in [
        ("orthogonality graph", orthogonality_graph(&spec, DEFAULT_TOL)?),
        ("local orthogonality graph", local_orthogonality_graph(&spec, DEFAULT_TOL)?),
    ] {
        println!("{name}:\n{}", report.graph);
        for ((a, b), w) in &report.directed_witness {
            println!("  {a} -> {b}  {w:?}");
        }
        for ((a, b), w) in &report.undirected_witness {
            println!("  {a} -- {b}  {w:?}");
        }
    }
    println!("\n{}", to_dot(&orthogonality_graph(&spec, DEFAULT_TOL)?.graph));
    Ok(())
}
