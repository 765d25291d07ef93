//! Graph of the VAR(1) obtained by sampling an OU process at spacing `h`,
//! compared with the continuous-time graph.

use mcar_graphs::builder::{check_nesting, orthogonality_graph, sampled_graph, DEFAULT_TOL};
use mcar_graphs::kernels::Matrix;
use mcar_graphs::model::McarSpec;

fn main() -> mcar_graphs::Result<()> {
    // A chain 1 -> 2 -> 3 with independent noise.
    let drift = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.8, -1.0, 0.0, 0.0, 0.8, -1.0]);
    let spec = McarSpec::ornstein_uhlenbeck(drift, Matrix::identity(3, 3))?;
    let og = orthogonality_graph(&spec, DEFAULT_TOL)?;
    println!("continuous time:\n{}", og.graph);
    for h in [0.1, 0.5, 1.0, 2.0] {
        let s = sampled_graph(&spec, h, DEFAULT_TOL)?;
        println!("h = {h}, nested {}:\n{}", check_nesting(&s.graph, &og.graph)?, s.graph);
    }
    Ok(())
}
