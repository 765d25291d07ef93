//! Statements implied by a (local) orthogonality graph through its Markov
//! properties.

use std::fmt;

use super::separation::{m_separated, pointing_paths_blocked, PointingMode};
use super::{MixedGraph, SeparationQuery, VertexSet};
use crate::error::{Error, Result};

/// Which graph a query refers to. Local graphs license fewer conclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Og,
    LocalOg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// `Y_from` does not Granger-cause `Y_to` given `Y_given`.
    GrangerNonCausal { from: VertexSet, to: VertexSet, given: VertexSet },
    /// `Y_a` and `Y_b` are contemporaneously uncorrelated given `Y_given`.
    ContempUncorrelated { a: VertexSet, b: VertexSet, given: VertexSet },
    /// The linear spaces of `Y_a` and `Y_b` are orthogonal given that of `Y_given`.
    CondOrthogonal { a: VertexSet, b: VertexSet, given: VertexSet },
}

/// A relation together with the rules that produced it. `local` marks the
/// infinitesimal (local) versions of the relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub relation: Relation,
    pub local: bool,
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ImpliedStatementSet {
    pub statements: Vec<Statement>,
    /// Set when the query matched none of the licensed rules.
    pub no_rule_applies: bool,
}

impl ImpliedStatementSet {
    fn add(&mut self, relation: Relation, local: bool, rule: &str) {
        if let Some(s) = self.statements.iter_mut().find(|s| s.relation == relation && s.local == local) {
            if !s.rules.iter().any(|r| r == rule) {
                s.rules.push(rule.to_string());
            }
            return;
        }
        self.statements.push(Statement { relation, local, rules: vec![rule.to_string()] });
    }

    pub fn contains(&self, relation: &Relation) -> bool {
        self.statements.iter().any(|s| &s.relation == relation)
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }
}

pub fn fmt_set(s: &VertexSet) -> String {
    let items: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

impl Relation {
    fn render(&self, local: bool) -> String {
        let sub = if local { "_0" } else { "" };
        match self {
            Relation::GrangerNonCausal { from, to, given } => {
                format!("Y{} -/->{sub} Y{} | Y{}", fmt_set(from), fmt_set(to), fmt_set(given))
            }
            Relation::ContempUncorrelated { a, b, given } => {
                format!("Y{} ~/~{sub} Y{} | Y{}", fmt_set(a), fmt_set(b), fmt_set(given))
            }
            Relation::CondOrthogonal { a, b, given } => {
                format!("L{} _|_ L{} | L{}", fmt_set(a), fmt_set(b), fmt_set(given))
            }
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  [{}]", self.relation.render(self.local), self.rules.join("; "))
    }
}

impl fmt::Display for ImpliedStatementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.no_rule_applies {
            return writeln!(f, "no rule applies");
        }
        if self.statements.is_empty() {
            return writeln!(f, "no statements implied");
        }
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

const RULE_AMP: &str = "global AMP Markov property";
const RULE_SEP_TRIPLE: &str = "m-separation implies non-causality and uncorrelation";
const RULE_B_POINTING: &str = "B-pointing walks blocked";
const RULE_BI_POINTING: &str = "bi-pointing walks blocked, no dashed edge";
const RULE_LOCAL_COMPLEMENT: &str = "local graph, C = V \\ (A u B)";
const RULE_LOCAL_PARENTS: &str = "local graph, pa(A) u pa(B) in A u B u C";
const RULE_BLOCK_RECURSIVE: &str = "block-recursive Markov property";

fn triple(out: &mut ImpliedStatementSet, q: &SeparationQuery, given: &VertexSet, local: bool, rule: &str) {
    out.add(
        Relation::GrangerNonCausal { from: q.a.clone(), to: q.b.clone(), given: given.clone() },
        local,
        rule,
    );
    out.add(
        Relation::GrangerNonCausal { from: q.b.clone(), to: q.a.clone(), given: given.clone() },
        local,
        rule,
    );
    out.add(
        Relation::ContempUncorrelated { a: q.a.clone(), b: q.b.clone(), given: given.clone() },
        local,
        rule,
    );
}

/// Collects every statement the Markov properties of `kind` license for `q`.
pub fn implied_statements(g: &MixedGraph, q: &SeparationQuery, kind: GraphKind) -> Result<ImpliedStatementSet> {
    q.check(g)?;
    let mut out = ImpliedStatementSet::default();
    let separated = m_separated(g, q)?;
    let abc = q.union_abc();
    match kind {
        GraphKind::Og => {
            if separated {
                out.add(
                    Relation::CondOrthogonal { a: q.a.clone(), b: q.b.clone(), given: q.c.clone() },
                    false,
                    RULE_AMP,
                );
                triple(&mut out, q, &abc, false, RULE_SEP_TRIPLE);
            }
            for (dir, from, to) in [(q.clone(), &q.a, &q.b), (q.swapped(), &q.b, &q.a)] {
                if pointing_paths_blocked(g, &dir, PointingMode::BPointing)? {
                    out.add(
                        Relation::GrangerNonCausal { from: from.clone(), to: to.clone(), given: abc.clone() },
                        false,
                        RULE_B_POINTING,
                    );
                }
            }
            let dashed_between = q.a.iter().any(|&a| q.b.iter().any(|&b| g.has_undirected(a, b)));
            if !dashed_between && pointing_paths_blocked(g, q, PointingMode::BiPointing)? {
                out.add(
                    Relation::ContempUncorrelated { a: q.a.clone(), b: q.b.clone(), given: abc.clone() },
                    false,
                    RULE_BI_POINTING,
                );
            }
        }
        GraphKind::LocalOg => {
            let all = g.vertices();
            let complement: VertexSet = all.difference(&q.a).filter(|v| !q.b.contains(v)).copied().collect();
            let mut parents = g.parents(&q.a)?;
            parents.extend(g.parents(&q.b)?);
            if separated && q.c == complement {
                triple(&mut out, q, &all, true, RULE_LOCAL_COMPLEMENT);
            }
            if separated && parents.is_subset(&abc) {
                triple(&mut out, q, &abc, true, RULE_LOCAL_PARENTS);
            }
            out.no_rule_applies = out.statements.is_empty();
        }
    }
    Ok(out)
}

/// Block-recursive read-out for a vertex set `A`: the vertices outside
/// `pa(A) ∪ A` do not cause `A`, and those outside `ne(A) ∪ A` are
/// uncorrelated with `A`, both given all of `V`.
pub fn markov_readout(g: &MixedGraph, a: &VertexSet, kind: GraphKind) -> Result<(Statement, Statement)> {
    if a.is_empty() {
        return Err(Error::QueryInvalid("A must be nonempty".into()));
    }
    let all = g.vertices();
    let pa = g.parents(a)?;
    let ne = g.neighbours(a)?;
    let outside = |s: &VertexSet| -> VertexSet {
        all.iter().filter(|v| !s.contains(v) && !a.contains(v)).copied().collect()
    };
    let local = kind == GraphKind::LocalOg;
    let causal = Statement {
        relation: Relation::GrangerNonCausal { from: outside(&pa), to: a.clone(), given: all.clone() },
        local,
        rules: vec![RULE_BLOCK_RECURSIVE.to_string()],
    };
    let uncorrelated = Statement {
        relation: Relation::ContempUncorrelated { a: outside(&ne), b: a.clone(), given: all.clone() },
        local,
        rules: vec![RULE_BLOCK_RECURSIVE.to_string()],
    };
    Ok((causal, uncorrelated))
}
