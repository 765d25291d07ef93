//! m-separation on mixed graphs where a vertex between two dashed edges is a
//! collider. Walks may revisit vertices and edges.

use std::collections::VecDeque;

use super::{EndpointMark, MixedGraph, SeparationQuery, VertexSet};
use crate::error::{Error, Result};

/// Which endpoints of a walk must carry an arrowhead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointingMode {
    /// Arrowhead at the `B` endpoint; conditioning on `B ∪ C`.
    BPointing,
    /// Arrowheads at both endpoints; conditioning on `A ∪ B ∪ C`.
    BiPointing,
}

/// Parameters of one walk search.
struct Walks<'a> {
    sources: &'a VertexSet,
    targets: &'a VertexSet,
    cond: VertexSet,
    arrow_start: bool,
    arrow_end: bool,
}

impl Walks<'_> {
    fn accepts(&self, v: usize, mark: EndpointMark) -> bool {
        self.targets.contains(&v) && (!self.arrow_end || mark == EndpointMark::ArrowHead)
    }

    fn passes(&self, c: usize, incoming: EndpointMark, outgoing: EndpointMark) -> bool {
        let collider = incoming.is_collider_mark() && outgoing.is_collider_mark();
        collider == self.cond.contains(&c)
    }
}

fn mark_index(m: EndpointMark) -> usize {
    match m {
        EndpointMark::ArrowHead => 0,
        EndpointMark::SolidTail => 1,
        EndpointMark::DashedTail => 2,
    }
}

/// Breadth-first search over (vertex, mark of the arriving edge) states.
fn connected(g: &MixedGraph, w: &Walks<'_>) -> bool {
    let n = g.n();
    let adj: Vec<_> = (0..=n).map(|v| if v == 0 { Vec::new() } else { g.incident(v) }).collect();
    let mut seen = vec![[false; 3]; n + 1];
    let mut queue = VecDeque::new();
    for &a in w.sources {
        for &(u, at_a, at_u) in &adj[a] {
            if w.arrow_start && at_a != EndpointMark::ArrowHead {
                continue;
            }
            if !seen[u][mark_index(at_u)] {
                seen[u][mark_index(at_u)] = true;
                queue.push_back((u, at_u));
            }
        }
    }
    while let Some((v, incoming)) = queue.pop_front() {
        if w.accepts(v, incoming) {
            return true;
        }
        for &(u, at_v, at_u) in &adj[v] {
            if w.passes(v, incoming, at_v) && !seen[u][mark_index(at_u)] {
                seen[u][mark_index(at_u)] = true;
                queue.push_back((u, at_u));
            }
        }
    }
    false
}

/// `A ⋈_m B | C`: every walk between `A` and `B` is m-blocked given `C`.
pub fn m_separated(g: &MixedGraph, q: &SeparationQuery) -> Result<bool> {
    q.check(g)?;
    let w = Walks { sources: &q.a, targets: &q.b, cond: q.c.clone(), arrow_start: false, arrow_end: false };
    Ok(!connected(g, &w))
}

fn pointing_walks<'a>(q: &'a SeparationQuery, mode: PointingMode) -> Walks<'a> {
    let mut cond: VertexSet = q.b.union(&q.c).copied().collect();
    if mode == PointingMode::BiPointing {
        cond.extend(&q.a);
    }
    Walks {
        sources: &q.a,
        targets: &q.b,
        cond,
        arrow_start: mode == PointingMode::BiPointing,
        arrow_end: true,
    }
}

/// True if every `B`-pointing (or bi-pointing) walk between `A` and `B` is
/// m-blocked given the enlarged conditioning set of the mode.
pub fn pointing_paths_blocked(g: &MixedGraph, q: &SeparationQuery, mode: PointingMode) -> Result<bool> {
    q.check(g)?;
    Ok(!connected(g, &pointing_walks(q, mode)))
}

/// One traversed edge: endpoints and the marks at each.
#[derive(Debug, Clone, Copy)]
struct Step {
    from: usize,
    to: usize,
    at_from: EndpointMark,
    at_to: EndpointMark,
}

/// Checks the m-connection definition on a complete walk.
fn walk_is_connecting(walk: &[Step], cond: &VertexSet) -> bool {
    walk.windows(2).all(|pair| {
        let (e1, e2) = (pair[0], pair[1]);
        debug_assert_eq!(e1.to, e2.from);
        let c = e1.to;
        let collider =
            matches!(e1.at_to, EndpointMark::ArrowHead | EndpointMark::DashedTail)
                && matches!(e2.at_from, EndpointMark::ArrowHead | EndpointMark::DashedTail);
        if collider {
            cond.contains(&c)
        } else {
            !cond.contains(&c)
        }
    })
}

/// Enumerates walks by depth-first search. A walk never repeats a
/// (vertex, arriving mark) state, since cutting the loop between two equal
/// states leaves an m-connecting walk with the same endpoints.
fn oracle_connected(g: &MixedGraph, w: &Walks<'_>) -> bool {
    let n = g.n();
    let max_len = 4 * n * (n + 1);
    let edges: Vec<Step> = g
        .directed_edges()
        .flat_map(|(a, b)| {
            [
                Step { from: a, to: b, at_from: EndpointMark::SolidTail, at_to: EndpointMark::ArrowHead },
                Step { from: b, to: a, at_from: EndpointMark::ArrowHead, at_to: EndpointMark::SolidTail },
            ]
        })
        .chain(g.undirected_edges().flat_map(|(a, b)| {
            [
                Step { from: a, to: b, at_from: EndpointMark::DashedTail, at_to: EndpointMark::DashedTail },
                Step { from: b, to: a, at_from: EndpointMark::DashedTail, at_to: EndpointMark::DashedTail },
            ]
        }))
        .collect();

    fn dfs(edges: &[Step], w: &Walks<'_>, walk: &mut Vec<Step>, max_len: usize) -> bool {
        let last = *walk.last().expect("walk is nonempty");
        if !walk_is_connecting(walk, &w.cond) {
            return false;
        }
        let end_ok = w.targets.contains(&last.to)
            && (!w.arrow_end || last.at_to == EndpointMark::ArrowHead);
        let start_ok = !w.arrow_start || walk[0].at_from == EndpointMark::ArrowHead;
        if end_ok && start_ok {
            return true;
        }
        if walk.len() >= max_len {
            return false;
        }
        for e in edges.iter().filter(|e| e.from == last.to) {
            let repeats = walk.iter().any(|s| s.to == e.to && s.at_to == e.at_to);
            if repeats {
                continue;
            }
            walk.push(*e);
            if dfs(edges, w, walk, max_len) {
                return true;
            }
            walk.pop();
        }
        false
    }

    for e in edges.iter().filter(|e| w.sources.contains(&e.from)) {
        let mut walk = vec![*e];
        if dfs(&edges, w, &mut walk, max_len) {
            return true;
        }
    }
    false
}

fn oracle_guard(g: &MixedGraph, q: &SeparationQuery) -> Result<()> {
    if g.n() > 8 {
        return Err(Error::TooLarge { n: g.n() });
    }
    q.check(g)
}

/// Brute-force walk enumeration, for cross-checking [`m_separated`] on
/// graphs with at most 8 vertices.
pub fn m_separated_oracle(g: &MixedGraph, q: &SeparationQuery) -> Result<bool> {
    oracle_guard(g, q)?;
    let w = Walks { sources: &q.a, targets: &q.b, cond: q.c.clone(), arrow_start: false, arrow_end: false };
    Ok(!oracle_connected(g, &w))
}

/// Brute-force counterpart of [`pointing_paths_blocked`].
pub fn pointing_paths_blocked_oracle(g: &MixedGraph, q: &SeparationQuery, mode: PointingMode) -> Result<bool> {
    oracle_guard(g, q)?;
    Ok(!oracle_connected(g, &pointing_walks(q, mode)))
}
