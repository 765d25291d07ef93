//! Seeded generators for random stable models, mixed graphs and queries.
//! Used by the test suites and the examples.

use rand::Rng;

use crate::graph::{MixedGraph, SeparationQuery, VertexSet};
use crate::kernels::{min_sym_eigenvalue, stability_margin, Matrix};
use crate::model::McarSpec;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Random symmetric positive definite matrix with sparse off-diagonal
/// correlations.
pub fn random_levy_covariance<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Matrix {
    loop {
        let d: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
        let mut s = Matrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone()));
        for i in 0..k {
            for j in (i + 1)..k {
                if rng.random_bool(0.4) {
                    let r: f64 = rng.random_range(-0.6..0.6);
                    let v = r * (d[i] * d[j]).sqrt();
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
        }
        if min_sym_eigenvalue(&s).is_ok_and(|m| m > 0.05) {
            return s;
        }
    }
}

/// Random strict, stable MCAR(p) spec. The autoregressive polynomial is a
/// sparse perturbation of `(z + c)^p I`; draws are rejected until the
/// stability margin is at most `-0.2`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, k: usize, p: usize) -> McarSpec {
    loop {
        let c: f64 = rng.random_range(1.0..2.0);
        let ar: Vec<Matrix> = (1..=p)
            .map(|j| {
                let base = binomial(p, j) * c.powi(j as i32);
                Matrix::from_fn(k, k, |r, s| {
                    if r == s {
                        base * rng.random_range(0.9..1.1)
                    } else if rng.random_bool(0.35) {
                        base * rng.random_range(-0.5..0.5)
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let spec = McarSpec::new(ar, random_levy_covariance(rng, k)).expect("shapes agree");
        if stability_margin(&spec.companion()).is_ok_and(|m| m <= -0.2) {
            return spec;
        }
    }
}

/// Random strict, stable Ornstein-Uhlenbeck spec.
pub fn random_ou_spec<R: Rng + ?Sized>(rng: &mut R, k: usize) -> McarSpec {
    random_spec(rng, k, 1)
}

/// Random mixed graph; directed and dashed edges appear independently with
/// a per-graph density drawn from `[0.1, 0.6)`.
pub fn random_mixed_graph<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MixedGraph {
    let density: f64 = rng.random_range(0.1..0.6);
    let mut g = MixedGraph::new(n);
    for a in 1..=n {
        for b in 1..=n {
            if a != b && rng.random_bool(density) {
                g.add_directed(a, b).expect("valid pair");
            }
            if a < b && rng.random_bool(density) {
                g.add_undirected(a, b).expect("valid pair");
            }
        }
    }
    g
}

/// Random valid separation query on `n >= 2` vertices.
pub fn random_query<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SeparationQuery {
    assert!(n >= 2, "a query needs two vertices");
    loop {
        let (mut a, mut b, mut c) = (VertexSet::new(), VertexSet::new(), VertexSet::new());
        for v in 1..=n {
            match rng.random_range(0..4) {
                0 => a.insert(v),
                1 => b.insert(v),
                2 => c.insert(v),
                _ => false,
            };
        }
        if let Ok(q) = SeparationQuery::new(a, b, c) {
            return q;
        }
    }
}
