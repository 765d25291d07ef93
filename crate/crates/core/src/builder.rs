//! Edge criteria: local orthogonality graph, orthogonality graph, the
//! Ornstein-Uhlenbeck shortcut and graphs of the discretely sampled process.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::kernels::{norm1, power_stack, Matrix};
use crate::model::{build_state_space, McarSpec, STRICT_EIG_FLOOR};

/// Default numerical-zero tolerance for the edge criteria.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The matrix entry that put an edge into a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    /// `[A_j]_{ba}`.
    Coefficient { j: usize, entry: f64 },
    /// `[Sigma_L]_{ab}`.
    LevyCovariance { entry: f64 },
    /// `[A^alpha]_{b, k(j-1)+a}` of the companion matrix.
    Power { alpha: usize, j: usize, entry: f64 },
    /// `[C A^alpha B Sigma_L B^T (A^T)^beta C^T]_{ab}`.
    CrossPower { alpha: usize, beta: usize, entry: f64 },
    /// `[C e^{Ah} E_j]_{ba}`.
    Transition { j: usize, entry: f64 },
    /// `[C Q(h) C^T]_{ab}`.
    NoiseCovariance { entry: f64 },
}

impl Witness {
    pub fn entry(&self) -> f64 {
        match *self {
            Witness::Coefficient { entry, .. }
            | Witness::LevyCovariance { entry }
            | Witness::Power { entry, .. }
            | Witness::CrossPower { entry, .. }
            | Witness::Transition { entry, .. }
            | Witness::NoiseCovariance { entry } => entry,
        }
    }
}

/// A graph with the first certifying entry for each edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCriterionReport {
    pub graph: MixedGraph,
    /// Keyed by `(a, b)` for `a -> b`.
    pub directed_witness: BTreeMap<(usize, usize), Witness>,
    /// Keyed by the canonical pair `(min, max)`.
    pub undirected_witness: BTreeMap<(usize, usize), Witness>,
    pub tolerance_used: f64,
}

impl EdgeCriterionReport {
    fn new(k: usize, tol: f64) -> Self {
        Self {
            graph: MixedGraph::new(k),
            directed_witness: BTreeMap::new(),
            undirected_witness: BTreeMap::new(),
            tolerance_used: tol,
        }
    }

    /// Records `a -> b` unless an earlier witness exists.
    fn directed(&mut self, a: usize, b: usize, w: Witness) {
        if !self.directed_witness.contains_key(&(a, b)) {
            self.graph.add_directed(a, b).expect("vertex in range, a != b");
            self.directed_witness.insert((a, b), w);
        }
    }

    fn undirected(&mut self, a: usize, b: usize, w: Witness) {
        let key = (a.min(b), a.max(b));
        if !self.undirected_witness.contains_key(&key) {
            self.graph.add_undirected(a, b).expect("vertex in range, a != b");
            self.undirected_witness.insert(key, w);
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::BadShape(format!("tolerance must be finite and non-negative, got {tol}")));
    }
    Ok(())
}

fn require_strict(spec: &McarSpec) -> Result<()> {
    let min_eig = spec.sigma_min_eigenvalue()?;
    if min_eig <= STRICT_EIG_FLOOR {
        return Err(Error::NotStrict { min_eig });
    }
    Ok(())
}

/// Local graph: `a -> b` iff some `[A_j]_{ba}` is nonzero, `a -- b` iff
/// `[Sigma_L]_{ab}` is nonzero.
pub fn local_orthogonality_graph(spec: &McarSpec, tol: f64) -> Result<EdgeCriterionReport> {
    check_tol(tol)?;
    let k = spec.k;
    let mut rep = EdgeCriterionReport::new(k, tol);
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            for (j, aj) in spec.ar_coeffs.iter().enumerate() {
                let entry = aj[(b, a)];
                if entry.abs() > tol {
                    rep.directed(a + 1, b + 1, Witness::Coefficient { j: j + 1, entry });
                    break;
                }
            }
            let entry = spec.sigma_l[(a, b)];
            if a < b && entry.abs() > tol {
                rep.undirected(a + 1, b + 1, Witness::LevyCovariance { entry });
            }
        }
    }
    Ok(rep)
}

/// Orthogonality graph from powers `1..=kp-1` (directed) and `0..=kp-1`
/// (undirected) of the companion matrix.
pub fn orthogonality_graph(spec: &McarSpec, tol: f64) -> Result<EdgeCriterionReport> {
    orthogonality_graph_with_max_power(spec, tol, spec.k * spec.p - 1)
}

/// [`orthogonality_graph`] with powers up to `max_power`. Beyond `kp - 1`
/// the graph does not change.
pub fn orthogonality_graph_with_max_power(spec: &McarSpec, tol: f64, max_power: usize) -> Result<EdgeCriterionReport> {
    check_tol(tol)?;
    spec.validate()?;
    require_strict(spec)?;
    power_criteria(spec, spec.companion(), tol, max_power)
}

fn power_criteria(spec: &McarSpec, a: Matrix, tol: f64, max_power: usize) -> Result<EdgeCriterionReport> {
    let (k, p) = (spec.k, spec.p);
    let powers = power_stack(&a, max_power)?;
    let norm = norm1(&a);
    let scale: Vec<f64> = (0..=max_power).map(|alpha| norm.powi(alpha as i32).max(1.0)).collect();
    let mut rep = EdgeCriterionReport::new(k, tol);

    for (alpha, m) in powers.iter().enumerate().skip(1) {
        for j in 1..=p {
            for a_ in 0..k {
                for b in 0..k {
                    let entry = m[(b, k * (j - 1) + a_)];
                    if a_ != b && entry.abs() > tol * scale[alpha] {
                        rep.directed(a_ + 1, b + 1, Witness::Power { alpha, j, entry });
                    }
                }
            }
        }
    }

    // C A^alpha B is the top-right k x k block of A^alpha.
    let blocks: Vec<Matrix> = powers.iter().map(|m| m.view((0, k * (p - 1)), (k, k)).into_owned()).collect();
    let sigma_scale = crate::kernels::max_abs(&spec.sigma_l).max(1.0);
    for (alpha, ga) in blocks.iter().enumerate() {
        let left = ga * &spec.sigma_l;
        for (beta, gb) in blocks.iter().enumerate() {
            let m = &left * gb.transpose();
            let threshold = tol * scale[alpha] * scale[beta] * sigma_scale;
            for a_ in 0..k {
                for b in (a_ + 1)..k {
                    let entry = m[(a_, b)];
                    if entry.abs() > threshold {
                        rep.undirected(a_ + 1, b + 1, Witness::CrossPower { alpha, beta, entry });
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Ornstein-Uhlenbeck shortcut: powers of the drift up to `k - 1`.
pub fn ou_orthogonality_graph(spec: &McarSpec, tol: f64) -> Result<EdgeCriterionReport> {
    if spec.p != 1 {
        return Err(Error::WrongOrder { p: spec.p });
    }
    check_tol(tol)?;
    spec.validate()?;
    require_strict(spec)?;
    power_criteria(spec, -&spec.ar_coeffs[0], tol, spec.k - 1)
}

/// Graph of the process sampled at spacing `h`: `a -> b` iff
/// `[e^{Ah}]_{ba}` is nonzero and `a -- b` iff `[Q(h)]_{ab}` is nonzero.
pub fn sampled_graph(spec: &McarSpec, h: f64, tol: f64) -> Result<EdgeCriterionReport> {
    if spec.p != 1 {
        return Err(Error::WrongOrder { p: spec.p });
    }
    sampled_graph_experimental(spec, h, tol)
}

/// [`sampled_graph`] for any order, reading directed edges from the
/// predictor coefficients `C e^{Ah} E_j` and undirected edges from
/// `C Q(h) C^T`. No nesting guarantee is known for `p > 1`.
pub fn sampled_graph_experimental(spec: &McarSpec, h: f64, tol: f64) -> Result<EdgeCriterionReport> {
    check_tol(tol)?;
    if !(h > 0.0) {
        return Err(Error::NegativeHorizon { h, expected: "positive" });
    }
    let ss = build_state_space(spec)?;
    let k = ss.k;
    let theta = ss.predictor_coefficients(h)?;
    let (_, q) = ss.sampled_var1(h)?;
    let q_obs = &ss.c * q * ss.c.transpose();
    let mut rep = EdgeCriterionReport::new(k, tol);
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            for (j, t) in theta.iter().enumerate() {
                let entry = t[(b, a)];
                if entry.abs() > tol {
                    rep.directed(a + 1, b + 1, Witness::Transition { j: j + 1, entry });
                    break;
                }
            }
            let entry = q_obs[(a, b)];
            if a < b && entry.abs() > tol {
                rep.undirected(a + 1, b + 1, Witness::NoiseCovariance { entry });
            }
        }
    }
    Ok(rep)
}

/// True iff every edge of `inner` is an edge of `outer`.
pub fn check_nesting(inner: &MixedGraph, outer: &MixedGraph) -> Result<bool> {
    inner.is_subgraph_of(outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_ou_spec;
    use crate::random_models::{random_ou_spec, random_spec};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn edges(g: &MixedGraph) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        (g.directed_edges().collect(), g.undirected_edges().collect())
    }

    /// Naive matrix power by repeated multiplication.
    fn naive_power(m: &Matrix, alpha: usize) -> Matrix {
        (0..alpha).fold(Matrix::identity(m.nrows(), m.ncols()), |acc, _| acc * m)
    }

    #[test]
    fn figure1_graphs() {
        let spec = reference_ou_spec();
        let og = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
        assert_eq!(
            edges(&og.graph),
            (vec![(1, 2), (1, 3), (2, 3), (3, 2)], vec![(1, 2), (1, 3), (2, 3)])
        );
        let local = local_orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
        assert_eq!(edges(&local.graph), (vec![(1, 3), (2, 3), (3, 2)], vec![(1, 3)]));
        assert!(check_nesting(&local.graph, &og.graph).unwrap());
        assert!(!check_nesting(&og.graph, &local.graph).unwrap());
        assert!(check_nesting(&og.graph, &og.graph).unwrap());
    }

    #[test]
    fn figure1_witnesses() {
        let og = orthogonality_graph(&reference_ou_spec(), DEFAULT_TOL).unwrap();
        assert_eq!(og.directed_witness[&(1, 2)], Witness::Power { alpha: 2, j: 1, entry: 1.0 });
        assert_eq!(og.undirected_witness[&(1, 2)], Witness::CrossPower { alpha: 0, beta: 1, entry: 0.5 });

        // Independent cross-check of the (0, 1) entry: Sigma_L A^T.
        let (a, s) = crate::model::reference_ou_parameters();
        assert_eq!((&s * a.transpose())[(0, 1)], 0.5);
        assert_eq!(naive_power(&a, 2)[(1, 0)], 1.0);
    }

    #[test]
    fn witnesses_exceed_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let spec = random_spec(&mut rng, 3, 2);
            let rep = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            for w in rep.directed_witness.values().chain(rep.undirected_witness.values()) {
                assert!(w.entry().abs() > rep.tolerance_used);
            }
            assert_eq!(rep.directed_witness.len() + rep.undirected_witness.len(), rep.graph.edge_count());
        }
    }

    #[test]
    fn diagonal_models_are_empty() {
        let d = |v: &[f64]| Matrix::from_diagonal(&DVector::from_row_slice(v));
        let spec = McarSpec::new(vec![d(&[3.0, 4.0, 5.0]), d(&[2.0, 3.0, 4.0])], d(&[1.0, 2.0, 0.5])).unwrap();
        assert_eq!(orthogonality_graph(&spec, DEFAULT_TOL).unwrap().graph.edge_count(), 0);
        assert_eq!(local_orthogonality_graph(&spec, DEFAULT_TOL).unwrap().graph.edge_count(), 0);

        let ou = McarSpec::ornstein_uhlenbeck(d(&[-1.0, -2.0]), d(&[1.0, 1.0])).unwrap();
        assert_eq!(ou_orthogonality_graph(&ou, DEFAULT_TOL).unwrap().graph.edge_count(), 0);
        let s = sampled_graph(&ou, 0.5, DEFAULT_TOL).unwrap();
        assert_eq!(s.graph.directed_edges().count(), 0);
    }

    #[test]
    fn local_graph_order_two_example() {
        let spec = McarSpec::new(
            vec![Matrix::zeros(2, 2), Matrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0])],
            Matrix::identity(2, 2),
        )
        .unwrap();
        let rep = local_orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
        assert_eq!(edges(&rep.graph), (vec![(1, 2)], vec![]));
        assert_eq!(rep.directed_witness[&(1, 2)], Witness::Coefficient { j: 2, entry: 1.0 });
    }

    #[test]
    fn strictness_and_order_errors() {
        let spec = McarSpec::new(vec![Matrix::identity(2, 2)], Matrix::from_element(2, 2, 1.0))
            .unwrap()
            .with_strict(false);
        assert!(matches!(orthogonality_graph(&spec, DEFAULT_TOL), Err(Error::NotStrict { .. })));
        let spec = McarSpec::new(vec![Matrix::identity(2, 2); 2], Matrix::identity(2, 2)).unwrap();
        assert!(matches!(ou_orthogonality_graph(&spec, DEFAULT_TOL), Err(Error::WrongOrder { p: 2 })));
        assert!(matches!(sampled_graph(&spec, 0.5, DEFAULT_TOL), Err(Error::WrongOrder { p: 2 })));
        assert!(sampled_graph_experimental(&spec, 0.5, DEFAULT_TOL).is_ok());
        let ou = reference_ou_spec();
        assert!(matches!(sampled_graph(&ou, 0.0, DEFAULT_TOL), Err(Error::NegativeHorizon { .. })));
        assert!(matches!(sampled_graph(&ou, -1.0, DEFAULT_TOL), Err(Error::NegativeHorizon { .. })));
    }

    #[test]
    fn ou_shortcut_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = rng.random_range(2..=4);
            let spec = random_ou_spec(&mut rng, k);
            let full = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            let ou = ou_orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            assert_eq!(full.graph, ou.graph);
        }
    }

    #[test]
    fn nesting_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let k = rng.random_range(2..=4);
            let p = rng.random_range(1..=3);
            let spec = random_spec(&mut rng, k, p);
            let og = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            let local = local_orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            assert!(check_nesting(&local.graph, &og.graph).unwrap());
            let extended = orthogonality_graph_with_max_power(&spec, DEFAULT_TOL, 2 * k * p).unwrap();
            assert_eq!(extended.graph, og.graph);
        }
    }

    #[test]
    fn sampled_nesting_on_random_ou() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = rng.random_range(2..=5);
            let spec = random_ou_spec(&mut rng, k);
            let og = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            for h in [0.1, 0.5, 1.0] {
                let s = sampled_graph(&spec, h, DEFAULT_TOL).unwrap();
                assert!(check_nesting(&s.graph, &og.graph).unwrap());
            }
        }
    }

    #[test]
    fn reference_sampled_graph_nests() {
        let spec = reference_ou_spec();
        let og = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
        let s = sampled_graph(&spec, 0.5, DEFAULT_TOL).unwrap();
        assert!(check_nesting(&s.graph, &og.graph).unwrap());
    }

    #[test]
    fn sampled_noise_picks_up_second_order_term() {
        // Sigma_L = I and [A]_{21} = 1: [Q(h)]_{12} = h^2 / 2 + O(h^3).
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, -1.0]);
        let spec = McarSpec::ornstein_uhlenbeck(a.clone(), Matrix::identity(2, 2)).unwrap();
        let h = 1e-3;
        let rep = sampled_graph(&spec, h, DEFAULT_TOL).unwrap();
        assert!(rep.graph.has_undirected(1, 2));
        let series = (&a + a.transpose()) * (h * h / 2.0) + Matrix::identity(2, 2) * h;
        let entry = rep.undirected_witness[&(1, 2)].entry();
        assert!((entry - series[(0, 1)]).abs() < 1e-8);
        assert!(rep.graph.has_directed(1, 2));
        assert!(!rep.graph.has_directed(2, 1));
    }

    #[test]
    fn undirected_edges_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let spec = random_spec(&mut rng, 4, 2);
            let ss = build_state_space(&spec).unwrap();
            let rep = orthogonality_graph(&spec, DEFAULT_TOL).unwrap();
            // Brute-force full k x k products on both triangles.
            let n = spec.k * spec.p;
            let b_sigma_bt = &ss.b * &spec.sigma_l * ss.b.transpose();
            for a in 1..=spec.k {
                for b in 1..=spec.k {
                    if a == b {
                        continue;
                    }
                    let mut found = false;
                    for alpha in 0..n {
                        for beta in 0..n {
                            let m = &ss.c * naive_power(&ss.a, alpha) * &b_sigma_bt
                                * naive_power(&ss.a.transpose(), beta) * ss.c.transpose();
                            let sc = norm1(&ss.a).powi(alpha as i32).max(1.0) * norm1(&ss.a).powi(beta as i32).max(1.0);
                            found |= m[(a - 1, b - 1)].abs() > DEFAULT_TOL * sc * crate::kernels::max_abs(&spec.sigma_l).max(1.0);
                        }
                    }
                    assert_eq!(found, rep.graph.has_undirected(a, b), "pair ({a},{b})");
                }
            }
        }
    }
}
