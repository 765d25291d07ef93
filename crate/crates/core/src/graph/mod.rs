//! Mixed graphs with directed edges `a -> b` and dashed undirected edges
//! `a -- b`, vertex-set algebra and separation queries.

mod format;
mod markov;
mod separation;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub use format::{parse_edge_list, to_dot, to_edge_list};
pub use markov::{
    fmt_set, implied_statements, markov_readout, GraphKind, ImpliedStatementSet, Relation, Statement,
};
pub use separation::{
    m_separated, m_separated_oracle, pointing_paths_blocked, pointing_paths_blocked_oracle,
    PointingMode,
};

/// Set of 1-based vertex labels.
pub type VertexSet = BTreeSet<usize>;

/// Builds a [`VertexSet`] from a slice.
pub fn vset(vs: &[usize]) -> VertexSet {
    vs.iter().copied().collect()
}

/// Mark an edge leaves at one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndpointMark {
    ArrowHead,
    SolidTail,
    DashedTail,
}

impl EndpointMark {
    /// Arrowheads and dashed tails both count towards a collider.
    pub fn is_collider_mark(self) -> bool {
        matches!(self, EndpointMark::ArrowHead | EndpointMark::DashedTail)
    }
}

/// Mixed graph on vertices `1..=n`. A pair can carry up to three edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MixedGraph {
    n: usize,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

impl MixedGraph {
    pub fn new(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    /// Builds a graph from edge lists; undirected pairs may come in any order.
    pub fn from_edges(n: usize, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(a, b) in directed {
            g.add_directed(a, b)?;
        }
        for &(a, b) in undirected {
            g.add_undirected(a, b)?;
        }
        Ok(g)
    }

    /// Complete graph: every ordered pair directed and every pair dashed.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for a in 1..=n {
            for b in 1..=n {
                if a != b {
                    g.directed.insert((a, b));
                    if a < b {
                        g.undirected.insert((a, b));
                    }
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(Error::QueryInvalid(format!("self-loop at vertex {a}")));
        }
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n {
            return Err(Error::OutOfRange { vertex: v, n: self.n });
        }
        Ok(())
    }

    pub(crate) fn check_set(&self, s: &VertexSet) -> Result<()> {
        s.iter().try_for_each(|&v| self.check_vertex(v))
    }

    pub fn add_directed(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.directed.insert((a, b));
        Ok(())
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.undirected.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.directed.contains(&(a, b))
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected.contains(&(a.min(b), a.max(b)))
    }

    /// Directed edges `(a, b)` meaning `a -> b`, sorted.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    /// Undirected edges as canonical `(min, max)` pairs, sorted.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.undirected.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    /// True if every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &MixedGraph) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::VertexMismatch { left: self.n, right: other.n });
        }
        Ok(self.directed.is_subset(&other.directed) && self.undirected.is_subset(&other.undirected))
    }

    /// Every edge incident to `v` as (neighbour, mark at v, mark at neighbour).
    pub(crate) fn incident(&self, v: usize) -> Vec<(usize, EndpointMark, EndpointMark)> {
        use EndpointMark::*;
        let mut out = Vec::new();
        for &(a, b) in &self.directed {
            if a == v {
                out.push((b, SolidTail, ArrowHead));
            }
            if b == v {
                out.push((a, ArrowHead, SolidTail));
            }
        }
        for &(a, b) in &self.undirected {
            if a == v {
                out.push((b, DashedTail, DashedTail));
            }
            if b == v {
                out.push((a, DashedTail, DashedTail));
            }
        }
        out
    }

    pub fn parents(&self, s: &VertexSet) -> Result<VertexSet> {
        self.vertex_sets(s, VertexRelation::Parents)
    }

    pub fn children(&self, s: &VertexSet) -> Result<VertexSet> {
        self.vertex_sets(s, VertexRelation::Children)
    }

    pub fn neighbours(&self, s: &VertexSet) -> Result<VertexSet> {
        self.vertex_sets(s, VertexRelation::Neighbours)
    }

    pub fn ancestors(&self, s: &VertexSet) -> Result<VertexSet> {
        self.vertex_sets(s, VertexRelation::Ancestors)
    }

    pub fn district(&self, s: &VertexSet) -> Result<VertexSet> {
        self.vertex_sets(s, VertexRelation::District)
    }

    /// Union over `s` of the requested relation. Ancestors and district
    /// contain `s` itself.
    pub fn vertex_sets(&self, s: &VertexSet, rel: VertexRelation) -> Result<VertexSet> {
        self.check_set(s)?;
        let out = match rel {
            VertexRelation::Parents => self
                .directed
                .iter()
                .filter(|(_, b)| s.contains(b))
                .map(|&(a, _)| a)
                .collect(),
            VertexRelation::Children => self
                .directed
                .iter()
                .filter(|(a, _)| s.contains(a))
                .map(|&(_, b)| b)
                .collect(),
            VertexRelation::Neighbours => {
                let mut out = VertexSet::new();
                for &(a, b) in &self.undirected {
                    if s.contains(&a) {
                        out.insert(b);
                    }
                    if s.contains(&b) {
                        out.insert(a);
                    }
                }
                out
            }
            VertexRelation::Ancestors => self.closure(s, |g, v| {
                g.directed.iter().filter(|e| e.1 == v).map(|e| e.0).collect()
            }),
            VertexRelation::District => self.closure(s, |g, v| {
                g.undirected
                    .iter()
                    .filter_map(|&(a, b)| match (a == v, b == v) {
                        (true, _) => Some(b),
                        (_, true) => Some(a),
                        _ => None,
                    })
                    .collect()
            }),
        };
        Ok(out)
    }

    fn closure(&self, s: &VertexSet, step: impl Fn(&Self, usize) -> Vec<usize>) -> VertexSet {
        let mut seen = s.clone();
        let mut stack: Vec<usize> = s.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for w in step(self, v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// All vertices `1..=n`.
    pub fn vertices(&self) -> VertexSet {
        (1..=self.n).collect()
    }
}

impl fmt::Display for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_edge_list(self))
    }
}

/// Vertex relations understood by [`MixedGraph::vertex_sets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRelation {
    Parents,
    Neighbours,
    Children,
    Ancestors,
    District,
}

/// Separation query `A | B given C` over disjoint sets with `A`, `B` nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: VertexSet,
    pub b: VertexSet,
    pub c: VertexSet,
}

impl SeparationQuery {
    pub fn new(a: VertexSet, b: VertexSet, c: VertexSet) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::QueryInvalid("A and B must be nonempty".into()));
        }
        if !a.is_disjoint(&b) || !a.is_disjoint(&c) || !b.is_disjoint(&c) {
            return Err(Error::QueryInvalid("A, B and C must be pairwise disjoint".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn from_slices(a: &[usize], b: &[usize], c: &[usize]) -> Result<Self> {
        Self::new(vset(a), vset(b), vset(c))
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b.clone(), b: self.a.clone(), c: self.c.clone() }
    }

    pub(crate) fn check(&self, g: &MixedGraph) -> Result<()> {
        g.check_set(&self.a)?;
        g.check_set(&self.b)?;
        g.check_set(&self.c)
    }

    pub fn union_abc(&self) -> VertexSet {
        self.a.iter().chain(&self.b).chain(&self.c).copied().collect()
    }
}
