//! Edge-list and DOT serialisation.
//!
//! The edge list has one edge per line, `D a b` for `a -> b` and `U a b` for
//! the dashed edge `a -- b`, with a `# n=<count>` header so that isolated
//! vertices survive a round trip.

use std::fmt::Write as _;

use super::MixedGraph;
use crate::error::{Error, Result};

pub fn to_edge_list(g: &MixedGraph) -> String {
    let mut out = format!("# n={}\n", g.n());
    for (a, b) in g.directed_edges() {
        let _ = writeln!(out, "D {a} {b}");
    }
    for (a, b) in g.undirected_edges() {
        let _ = writeln!(out, "U {a} {b}");
    }
    out
}

/// DOT with solid `a -> b` and dashed `a -- b` edges.
pub fn to_dot(g: &MixedGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in 1..=g.n() {
        let _ = writeln!(out, "  {v};");
    }
    for (a, b) in g.directed_edges() {
        let _ = writeln!(out, "  {a} -> {b};");
    }
    for (a, b) in g.undirected_edges() {
        let _ = writeln!(out, "  {a} -- {b} [style=dashed];");
    }
    out.push_str("}\n");
    out
}

/// Parses an edge list. The vertex count comes from `n`, else from a
/// `# n=` header, else from the largest label mentioned.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<MixedGraph> {
    let mut header = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix("n=") {
                let count = count
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: bad vertex count: {e}", lineno + 1)))?;
                header = Some(count);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("line {}: expected `D a b` or `U a b`, got `{line}`", lineno + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        let directed = match fields[0] {
            "D" => true,
            "U" => false,
            _ => return Err(bad()),
        };
        let a: usize = fields[1].parse().map_err(|_| bad())?;
        let b: usize = fields[2].parse().map_err(|_| bad())?;
        edges.push((directed, a, b));
    }
    let inferred = edges.iter().map(|&(_, a, b)| a.max(b)).max().unwrap_or(0);
    let mut g = MixedGraph::new(n.or(header).unwrap_or(inferred));
    for (directed, a, b) in edges {
        if directed {
            g.add_directed(a, b)?;
        } else {
            g.add_undirected(a, b)?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_isolated_vertices() {
        let g = MixedGraph::from_edges(5, &[(1, 2), (3, 2)], &[(4, 1)]).unwrap();
        let text = to_edge_list(&g);
        assert_eq!(text, "# n=5\nD 1 2\nD 3 2\nU 1 4\n");
        assert_eq!(parse_edge_list(&text, None).unwrap(), g);
    }

    #[test]
    fn parse_without_header_and_with_override() {
        let g = parse_edge_list("D 1 3\n\n# a comment\nU 2 1\n", None).unwrap();
        assert_eq!(g.n(), 3);
        assert!(g.has_directed(1, 3) && g.has_undirected(1, 2));
        assert_eq!(parse_edge_list("D 1 3\n", Some(6)).unwrap().n(), 6);
        assert_eq!(parse_edge_list("", None).unwrap(), MixedGraph::new(0));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_edge_list("X 1 2\n", None), Err(Error::Parse(_))));
        assert!(matches!(parse_edge_list("D 1\n", None), Err(Error::Parse(_))));
        assert!(matches!(parse_edge_list("D 1 x\n", None), Err(Error::Parse(_))));
        assert!(parse_edge_list("D 2 2\n", None).is_err());
        assert!(matches!(parse_edge_list("# n=2\nD 1 3\n", None), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn dot_output() {
        let g = MixedGraph::from_edges(2, &[(1, 2)], &[(1, 2)]).unwrap();
        assert_eq!(to_dot(&g), "digraph G {\n  1;\n  2;\n  1 -> 2;\n  1 -- 2 [style=dashed];\n}\n");
    }
}
