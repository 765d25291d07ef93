//! m-separation and the statements it implies, in both graph semantics.

use mcar_graphs::builder::{local_orthogonality_graph, orthogonality_graph, DEFAULT_TOL};
use mcar_graphs::graph::{implied_statements, m_separated, markov_readout, vset, GraphKind, SeparationQuery};
use mcar_graphs::model::reference_ou_spec;

fn main() -> mcar_graphs::Result<()> {
    let spec = reference_ou_spec();
    let og = orthogonality_graph(&spec, DEFAULT_TOL)?.graph;
    let local = local_orthogonality_graph(&spec, DEFAULT_TOL)?.graph;

    let queries = [
        SeparationQuery::from_slices(&[2], &[1], &[])?,
        SeparationQuery::from_slices(&[2, 3], &[1], &[])?,
        SeparationQuery::from_slices(&[1], &[2], &[3])?,
    ];
    for q in &queries {
        for (kind, g) in [(GraphKind::Og, &og), (GraphKind::LocalOg, &local)] {
            println!("{kind:?}: A={:?} B={:?} C={:?} separated={}", q.a, q.b, q.c, m_separated(g, q)?);
            print!("{}", implied_statements(g, q, kind)?);
        }
    }

    // Read off everything the graph says about coordinate 1.
    let (granger, contemp) = markov_readout(&og, &vset(&[1]), GraphKind::Og)?;
    println!("\nreadout for Y1:\n{granger}\n{contemp}");
    Ok(())
}
