//! Loads a model from a TOML file, or writes the reference model when no
//! path is given, and prints its graph as an edge list.

use mcar_graphs::builder::{orthogonality_graph, DEFAULT_TOL};
use mcar_graphs::graph::{parse_edge_list, to_edge_list};
use mcar_graphs::model::{reference_ou_spec, McarSpec};

fn main() -> mcar_graphs::Result<()> {
    let spec = match std::env::args().nth(1) {
        Some(path) => McarSpec::from_path(path)?,
        None => {
            let spec = reference_ou_spec();
            println!("{}", spec.to_toml_string());
            spec
        }
    };
    println!("stability margin {:.4}", spec.validate()?);
    let text = to_edge_list(&orthogonality_graph(&spec, DEFAULT_TOL)?.graph);
    print!("{text}");
    assert_eq!(parse_edge_list(&text, None)?.edge_count(), text.lines().count() - 1);
    Ok(())
}
