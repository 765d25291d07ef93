//! Numerical cross-checks: innovation correlations of simulated paths, least
//! squares VAR(1) fits, the spectral density bound and spectral mass.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Complex, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::VertexSet;
use crate::kernels::{expm, CMatrix, Matrix};
use crate::model::{StateSpace, STRICT_EIG_FLOOR};
use crate::simulate::SamplePath;

/// Eigenvalue floor used when inverting spectral blocks.
pub const EIG_FLOOR: f64 = 1e-13;

fn check_path(path: &SamplePath, ss: &StateSpace) -> Result<()> {
    if path.state_dim() != ss.dim() || path.obs_dim() != ss.k {
        return Err(Error::ShapeMismatch(format!(
            "path has {} states and {} observations, model has {} and {}",
            path.state_dim(),
            path.obs_dim(),
            ss.dim(),
            ss.k
        )));
    }
    Ok(())
}

/// Sample correlation of the one-step prediction errors
/// `Y(t+h) - C e^{Ah} X(t)`.
pub fn innovation_correlation(path: &SamplePath, ss: &StateSpace) -> Result<Matrix> {
    check_path(path, ss)?;
    let predictor = &ss.c * expm(&(&ss.a * path.h))?;
    let n = path.n_steps;
    let k = ss.k;
    let current = path.states.rows(0, n);
    let residuals = path.observations.rows(1, n) - current * predictor.transpose();
    let mean = residuals.row_mean();
    let centered = Matrix::from_fn(n, k, |t, j| residuals[(t, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    for j in 0..k {
        if cov[(j, j)] < 1e-14 {
            return Err(Error::DegenerateVariance { component: j + 1, variance: cov[(j, j)] });
        }
    }
    let mut corr = Matrix::from_fn(k, k, |i, j| cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt());
    for j in 0..k {
        corr[(j, j)] = 1.0;
    }
    Ok(corr)
}

/// Least-squares fit of `X(t+h) = T X(t) + eps` on the state path.
/// Returns `T` and the residual covariance.
pub fn estimate_var1(path: &SamplePath) -> Result<(Matrix, Matrix)> {
    let d = path.state_dim();
    let n = path.n_steps;
    if n < 10 * d * d {
        return Err(Error::InsufficientData { needed: 10 * d * d, got: n });
    }
    let x0 = path.states.rows(0, n).into_owned();
    let x1 = path.states.rows(1, n).into_owned();
    let svd = x0.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficient);
    }
    let coef = svd.solve(&x1, 0.0).map_err(|_| Error::RankDeficient)?;
    let residuals = x1 - &x0 * &coef;
    let noise = residuals.transpose() * &residuals / n as f64;
    Ok((coef.transpose(), crate::kernels::symmetrize(&noise)))
}

/// Outcome of the spectral bound check for one pair `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub a: VertexSet,
    pub b: VertexSet,
    pub lambda_max: f64,
    pub step: f64,
    pub grid_points: usize,
    /// Largest eigenvalue of `d_AB` over the grid and where it occurred.
    pub sup_eig: f64,
    pub argmax_lambda: f64,
    /// Largest eigenvalue of the `lambda -> infinity` limit matrix.
    pub limit_eig: f64,
    pub satisfied: bool,
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::graph::fmt_set;
        writeln!(f, "pair A={} B={}", fmt_set(&self.a), fmt_set(&self.b))?;
        writeln!(
            f,
            "grid lambda in [-{}, {}] step {} ({} points)",
            self.lambda_max, self.lambda_max, self.step, self.grid_points
        )?;
        writeln!(f, "sup_eig {:.12e} at lambda {}", self.sup_eig, self.argmax_lambda)?;
        writeln!(f, "limit_eig {:.12e}", self.limit_eig)?;
        writeln!(f, "satisfied {}", self.satisfied)
    }
}

fn grid(lambda_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(lambda_max >= 0.0 && lambda_max.is_finite() && step > 0.0 && step.is_finite()) {
        return Err(Error::BadShape(format!("bad grid: lambda_max {lambda_max}, step {step}")));
    }
    let n = (2.0 * lambda_max / step).round() as usize;
    Ok((0..=n).map(|i| -lambda_max + i as f64 * step).collect())
}

fn check_pair(ss: &StateSpace, a: &VertexSet, b: &VertexSet) -> Result<()> {
    if a.is_empty() || b.is_empty() || !a.is_disjoint(b) {
        return Err(Error::QueryInvalid("A and B must be disjoint and nonempty".into()));
    }
    for &v in a.iter().chain(b) {
        if v == 0 || v > ss.k {
            return Err(Error::OutOfRange { vertex: v, n: ss.k });
        }
    }
    Ok(())
}

fn sub(f: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| f[(rows[i], cols[j])])
}

fn indices(s: &VertexSet) -> Vec<usize> {
    s.iter().map(|v| v - 1).collect()
}

/// Largest eigenvalue of `f_AA^{-1/2} f_AB f_BB^{-1} f_BA f_AA^{-1/2}`.
/// `None` when `f_BB` is numerically singular.
fn coherence_eig(f: &CMatrix, ai: &[usize], bi: &[usize]) -> Option<f64> {
    let (faa, fab, fbb) = (sub(f, ai, ai), sub(f, ai, bi), sub(f, bi, bi));
    let inv_sqrt_aa = hermitian_function(&faa, |x| 1.0 / x.max(EIG_FLOOR).sqrt());
    let eb = SymmetricEigen::new(hermitian(&fbb));
    let bmax = eb.eigenvalues.max();
    if !(eb.eigenvalues.min() > EIG_FLOOR * bmax.max(EIG_FLOOR)) {
        return None;
    }
    let inv_bb = rebuild(&eb, |x| 1.0 / x);
    let d = &inv_sqrt_aa * &fab * inv_bb * fab.adjoint() * &inv_sqrt_aa;
    Some(SymmetricEigen::new(hermitian(&d)).eigenvalues.max().max(0.0))
}

fn hermitian(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

fn rebuild(e: &SymmetricEigen<Complex<f64>, nalgebra::Dyn>, g: impl Fn(f64) -> f64) -> CMatrix {
    let v = &e.eigenvectors;
    let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * g(e.eigenvalues[j]));
    scaled * v.adjoint()
}

fn hermitian_function(m: &CMatrix, g: impl Fn(f64) -> f64) -> CMatrix {
    rebuild(&SymmetricEigen::new(hermitian(m)), g)
}

fn require_strict(ss: &StateSpace) -> Result<()> {
    let min_eig = crate::kernels::min_sym_eigenvalue(&ss.sigma_l)?;
    if min_eig <= STRICT_EIG_FLOOR {
        return Err(Error::NotStrict { min_eig });
    }
    Ok(())
}

/// Checks `d_AB(lambda) < I` on the grid `[-lambda_max, lambda_max]` and for
/// the high-frequency limit, where `f ~ Sigma_L / (2 pi lambda^{2p})`.
pub fn assumption_density_check(
    ss: &StateSpace,
    a: &VertexSet,
    b: &VertexSet,
    lambda_max: f64,
    step: f64,
) -> Result<AssumptionReport> {
    let pairs = [(a.clone(), b.clone())];
    Ok(assumption_density_check_pairs(ss, &pairs, lambda_max, step)?.remove(0))
}

/// [`assumption_density_check`] for several pairs, evaluating the spectral
/// density once per frequency.
pub fn assumption_density_check_pairs(
    ss: &StateSpace,
    pairs: &[(VertexSet, VertexSet)],
    lambda_max: f64,
    step: f64,
) -> Result<Vec<AssumptionReport>> {
    require_strict(ss)?;
    for (a, b) in pairs {
        check_pair(ss, a, b)?;
    }
    let lambdas = grid(lambda_max, step)?;
    let idx: Vec<(Vec<usize>, Vec<usize>)> = pairs.iter().map(|(a, b)| (indices(a), indices(b))).collect();
    let mut best = vec![(0.0_f64, 0.0_f64); pairs.len()];
    for &lambda in &lambdas {
        // d_AB is invariant under scaling f; this keeps f of order one.
        let scale = 2.0 * PI * (1.0 + lambda * lambda).powi(ss.p as i32);
        let f = ss.spectral_density(lambda)? * Complex::new(scale, 0.0);
        for (slot, (ai, bi)) in best.iter_mut().zip(&idx) {
            let eig = coherence_eig(&f, ai, bi).ok_or(Error::SingularBlock { lambda })?;
            if eig > slot.0 {
                *slot = (eig, lambda);
            }
        }
    }
    let h = ss.sigma_l.map(|x| Complex::new(x, 0.0));
    pairs
        .iter()
        .zip(&idx)
        .zip(best)
        .map(|(((a, b), (ai, bi)), (sup_eig, argmax_lambda))| {
            let limit_eig = coherence_eig(&h, ai, bi).ok_or(Error::SingularBlock { lambda: f64::INFINITY })?;
            Ok(AssumptionReport {
                a: a.clone(),
                b: b.clone(),
                lambda_max,
                step,
                grid_points: lambdas.len(),
                sup_eig,
                argmax_lambda,
                limit_eig,
                satisfied: sup_eig < 1.0 && limit_eig < 1.0,
            })
        })
        .collect()
}

/// Every ordered pair of disjoint nonempty subsets of `1..=k`.
pub fn all_disjoint_pairs(k: usize) -> Vec<(VertexSet, VertexSet)> {
    let mut out = Vec::new();
    // Each vertex is in A (1), B (2) or neither (0).
    let total = 3usize.pow(k as u32);
    for code in 0..total {
        let (mut a, mut b) = (VertexSet::new(), VertexSet::new());
        let mut c = code;
        for v in 1..=k {
            match c % 3 {
                1 => {
                    a.insert(v);
                }
                2 => {
                    b.insert(v);
                }
                _ => {}
            }
            c /= 3;
        }
        if !a.is_empty() && !b.is_empty() {
            out.push((a, b));
        }
    }
    out
}

/// Max-norm gap between the trapezoid integral of the spectral density over
/// `[-lambda_max, lambda_max]` and the lag-zero covariance of `Y`.
pub fn spectral_mass_check(ss: &StateSpace, lambda_max: f64, step: f64) -> Result<f64> {
    let lambdas = grid(lambda_max, step)?;
    let k = ss.k;
    let mut total = CMatrix::zeros(k, k);
    let last = lambdas.len() - 1;
    for (i, &lambda) in lambdas.iter().enumerate() {
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        total += ss.spectral_density(lambda)? * Complex::new(w * step, 0.0);
    }
    let c0 = &ss.c * &ss.gamma0 * ss.c.transpose();
    Ok((0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (total[(i, j)] - Complex::new(c0[(i, j)], 0.0)).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vset;
    use crate::model::{build_state_space, reference_ou_spec, McarSpec};
    use crate::random_models::random_ou_spec;
    use crate::simulate::simulate_exact_gaussian;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> StateSpace {
        build_state_space(&reference_ou_spec()).unwrap()
    }

    #[test]
    fn innovation_correlation_pattern() {
        let ss = reference();
        let path = simulate_exact_gaussian(&ss, 0.01, 100_000, 1).unwrap();
        let corr = innovation_correlation(&path, &ss).unwrap();
        assert!((corr[(0, 2)] - 0.5).abs() < 0.1);
        assert!(corr[(0, 1)].abs() <= 0.05 && corr[(1, 2)].abs() <= 0.05);
        for j in 0..3 {
            assert_eq!(corr[(j, j)], 1.0);
        }
    }

    #[test]
    fn innovation_shape_mismatch() {
        let ss = reference();
        let other = build_state_space(
            &McarSpec::new(vec![Matrix::identity(2, 2)], Matrix::identity(2, 2)).unwrap(),
        )
        .unwrap();
        let path = simulate_exact_gaussian(&other, 0.1, 100, 1).unwrap();
        assert!(matches!(innovation_correlation(&path, &ss), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn var1_estimate_on_reference_path() {
        let ss = reference();
        let h = 0.1;
        let path = simulate_exact_gaussian(&ss, h, 100_000, 3).unwrap();
        let (t, q) = estimate_var1(&path).unwrap();
        let (t_exact, q_exact) = ss.sampled_var1(h).unwrap();
        assert!((t - t_exact).amax() <= 0.02);
        assert!((q - q_exact).amax() <= 0.01);
    }

    #[test]
    fn var1_estimate_noiseless() {
        let ss = reference();
        let h = 0.1;
        let n = 90;
        let step = expm(&(&ss.a * h)).unwrap();
        let mut x = DVector::from_vec(vec![1.0, -0.7, 0.4]);
        let mut states = Matrix::zeros(n + 1, 3);
        for i in 0..=n {
            states.row_mut(i).copy_from(&x.transpose());
            x = &step * x;
        }
        let path = SamplePath::from_states(&ss, h, states, 0).unwrap();
        let (t, q) = estimate_var1(&path).unwrap();
        assert!((t - step).amax() < 1e-8);
        assert!(q.amax() < 1e-20);
    }

    #[test]
    fn var1_estimate_diagonal_zeros() {
        let d = Matrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let ss = build_state_space(&McarSpec::ornstein_uhlenbeck(d, Matrix::identity(2, 2)).unwrap()).unwrap();
        let path = simulate_exact_gaussian(&ss, 0.1, 100_000, 4).unwrap();
        let (t, _) = estimate_var1(&path).unwrap();
        assert!(t[(0, 1)].abs() <= 0.01 && t[(1, 0)].abs() <= 0.01);
    }

    #[test]
    fn var1_estimate_needs_data() {
        let ss = reference();
        let path = simulate_exact_gaussian(&ss, 0.1, 50, 4).unwrap();
        assert!(matches!(estimate_var1(&path), Err(Error::InsufficientData { needed: 90, got: 50 })));
        let states = Matrix::zeros(200, 3);
        let path = SamplePath::from_states(&ss, 0.1, states, 0).unwrap();
        assert!(matches!(estimate_var1(&path), Err(Error::RankDeficient)));
    }

    #[test]
    fn reference_assumption_holds() {
        let ss = reference();
        let rep = assumption_density_check(&ss, &vset(&[1]), &vset(&[2, 3]), 100.0, 0.05).unwrap();
        assert!(rep.satisfied);
        assert!(rep.sup_eig >= 0.0 && rep.sup_eig < 1.0);
        assert_eq!(rep.grid_points, 4001);
        // Limit: squared multiple correlation of L_1 on (L_2, L_3) = 0.25.
        assert!((rep.limit_eig - 0.25).abs() < 1e-12);
    }

    #[test]
    fn independent_components_have_zero_coherence() {
        let d = Matrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let ss = build_state_space(&McarSpec::ornstein_uhlenbeck(d, Matrix::identity(2, 2)).unwrap()).unwrap();
        let rep = assumption_density_check(&ss, &vset(&[1]), &vset(&[2]), 10.0, 0.5).unwrap();
        assert_eq!(rep.sup_eig, 0.0);
        assert_eq!(rep.limit_eig, 0.0);
    }

    #[test]
    fn two_dimensional_coherence() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.3, -2.0]);
        let s = Matrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 2.0]);
        let ss = build_state_space(&McarSpec::ornstein_uhlenbeck(a, s).unwrap()).unwrap();
        let mut expected = 0.0_f64;
        for i in 0..=40 {
            let lambda = -10.0 + i as f64 * 0.5;
            let f = ss.spectral_density_polynomial(lambda).unwrap();
            let coh = f[(0, 1)].norm_sqr() / (f[(0, 0)].re * f[(1, 1)].re);
            assert!((0.0..1.0).contains(&coh));
            expected = expected.max(coh);
        }
        let rep = assumption_density_check(&ss, &vset(&[1]), &vset(&[2]), 10.0, 0.5).unwrap();
        assert!((rep.sup_eig - expected).abs() < 1e-12);
        let swapped = assumption_density_check(&ss, &vset(&[2]), &vset(&[1]), 10.0, 0.5).unwrap();
        assert!((swapped.sup_eig - expected).abs() < 1e-12);
    }

    #[test]
    fn assumption_errors() {
        let ss = reference();
        assert!(matches!(
            assumption_density_check(&ss, &vset(&[1]), &vset(&[1]), 1.0, 0.1),
            Err(Error::QueryInvalid(_))
        ));
        assert!(matches!(
            assumption_density_check(&ss, &vset(&[1]), &vset(&[4]), 1.0, 0.1),
            Err(Error::OutOfRange { .. })
        ));
        let weak = McarSpec::new(vec![Matrix::identity(2, 2)], Matrix::from_element(2, 2, 1.0))
            .unwrap()
            .with_strict(false);
        let ss = build_state_space(&weak).unwrap();
        assert!(matches!(
            assumption_density_check(&ss, &vset(&[1]), &vset(&[2]), 1.0, 0.1),
            Err(Error::NotStrict { .. })
        ));
    }

    #[test]
    fn random_ou_models_satisfy_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let ss = build_state_space(&random_ou_spec(&mut rng, 3)).unwrap();
            let reps = assumption_density_check_pairs(&ss, &all_disjoint_pairs(3), 20.0, 0.1).unwrap();
            assert!(reps.iter().all(|r| r.satisfied));
        }
    }

    #[test]
    fn disjoint_pair_count() {
        // 3^k - 2 * 2^k + 1 ordered pairs of disjoint nonempty sets.
        assert_eq!(all_disjoint_pairs(2).len(), 2);
        assert_eq!(all_disjoint_pairs(3).len(), 12);
        assert_eq!(all_disjoint_pairs(4).len(), 50);
    }

    #[test]
    fn spectral_mass_scalar_and_monotone() {
        let ss = crate::simulate::tests::scalar_ou(1.0, 1.0);
        // Tail mass beyond L is 1/(pi L); 1000 puts it below 1e-3.
        assert!(spectral_mass_check(&ss, 1000.0, 0.01).unwrap() <= 1e-3);
        let d200 = spectral_mass_check(&ss, 200.0, 0.01).unwrap();
        assert!((d200 - 1.0 / (PI * 200.0)).abs() < 1e-5);
        let ss = reference();
        let coarse = spectral_mass_check(&ss, 50.0, 0.01).unwrap();
        let fine = spectral_mass_check(&ss, 200.0, 0.01).unwrap();
        assert!(fine <= 1e-2 && fine < coarse);
    }

    #[test]
    fn report_text() {
        let rep = AssumptionReport {
            a: vset(&[1]),
            b: vset(&[2, 3]),
            lambda_max: 100.0,
            step: 0.05,
            grid_points: 4001,
            sup_eig: 0.5,
            argmax_lambda: 0.0,
            limit_eig: 0.25,
            satisfied: true,
        };
        assert_eq!(
            rep.to_string(),
            "pair A={1} B={2,3}\ngrid lambda in [-100, 100] step 0.05 (4001 points)\n\
             sup_eig 5.000000000000e-1 at lambda 0\nlimit_eig 2.500000000000e-1\nsatisfied true\n"
        );
    }
}
