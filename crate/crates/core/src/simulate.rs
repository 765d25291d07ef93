//! Sample paths: exact Gaussian transitions on a grid and an Euler scheme for
//! Brownian plus compound-Poisson drivers.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so identical
//! inputs reproduce identical paths.

use std::io::Write;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::{asymmetry, ensure_finite, max_abs, min_sym_eigenvalue, psd_factor, Matrix};
use crate::model::StateSpace;

/// Zero-mean Levy driver with finite second moments.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyDriver {
    /// Brownian motion with `Cov(L(1)) = cov`.
    Brownian { cov: Matrix },
    /// Jumps at `rate` per unit time, each `N(0, jump_cov)`.
    CompoundPoisson { rate: f64, jump_cov: Matrix },
    /// Independent sum of drivers.
    Sum(Vec<LevyDriver>),
}

impl LevyDriver {
    /// Covariance of `L(1)`.
    pub fn sigma_l(&self) -> Matrix {
        match self {
            LevyDriver::Brownian { cov } => cov.clone(),
            LevyDriver::CompoundPoisson { rate, jump_cov } => jump_cov * *rate,
            LevyDriver::Sum(parts) => {
                let k = self.dim().unwrap_or(0);
                parts.iter().fold(Matrix::zeros(k, k), |acc, d| acc + d.sigma_l())
            }
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            LevyDriver::Brownian { cov } => Some(cov.nrows()),
            LevyDriver::CompoundPoisson { jump_cov, .. } => Some(jump_cov.nrows()),
            LevyDriver::Sum(parts) => parts.first().and_then(|d| d.dim()),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let check_cov = |m: &Matrix, what: &str| -> Result<()> {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::BadDriver(format!("{what} must be {k}x{k}, got {}x{}", m.nrows(), m.ncols())));
            }
            ensure_finite(m).map_err(|_| Error::BadDriver(format!("{what} has a non-finite entry")))?;
            if asymmetry(m) > 1e-12 * max_abs(m).max(1.0) {
                return Err(Error::BadDriver(format!("{what} is not symmetric")));
            }
            let min_eig = min_sym_eigenvalue(m)?;
            if min_eig < -1e-12 * max_abs(m).max(1.0) {
                return Err(Error::BadDriver(format!("{what} is not positive semidefinite ({min_eig:e})")));
            }
            Ok(())
        };
        match self {
            LevyDriver::Brownian { cov } => check_cov(cov, "Brownian covariance"),
            LevyDriver::CompoundPoisson { rate, jump_cov } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(Error::BadDriver(format!("jump rate must be finite and >= 0, got {rate}")));
                }
                check_cov(jump_cov, "jump covariance")
            }
            LevyDriver::Sum(parts) => {
                if parts.is_empty() {
                    return Err(Error::BadDriver("empty driver sum".into()));
                }
                parts.iter().try_for_each(|d| d.validate(k))
            }
        }
    }
}

/// Driver components prepared for sampling: factors and Poisson laws.
enum Prepared {
    Brownian(Matrix),
    Jumps(Option<Poisson<f64>>, Matrix),
}

fn prepare(driver: &LevyDriver, delta: f64, out: &mut Vec<Prepared>) -> Result<()> {
    match driver {
        LevyDriver::Brownian { cov } => out.push(Prepared::Brownian(psd_factor(cov)? * delta.sqrt())),
        LevyDriver::CompoundPoisson { rate, jump_cov } => {
            let law = if *rate > 0.0 {
                Some(Poisson::new(rate * delta).map_err(|e| Error::BadDriver(e.to_string()))?)
            } else {
                None
            };
            out.push(Prepared::Jumps(law, psd_factor(jump_cov)?));
        }
        LevyDriver::Sum(parts) => {
            for d in parts {
                prepare(d, delta, out)?;
            }
        }
    }
    Ok(())
}

/// A path on the grid `t = 0, h, ..., n_steps h`; row `i` of `states` and
/// `observations` belongs to `t = i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub h: f64,
    pub n_steps: usize,
    pub states: Matrix,
    pub observations: Matrix,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl SamplePath {
    /// Wraps a state trajectory, computing `Y = C X` row by row.
    pub fn from_states(ss: &StateSpace, h: f64, states: Matrix, seed: u64) -> Result<Self> {
        if states.ncols() != ss.dim() || states.nrows() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "expected at least 2 rows of {} states, got {}x{}",
                ss.dim(),
                states.nrows(),
                states.ncols()
            )));
        }
        let observations = states.columns(0, ss.k).into_owned();
        Ok(Self { h, n_steps: states.nrows() - 1, states, observations, seed, warnings: Vec::new() })
    }

    pub fn state_dim(&self) -> usize {
        self.states.ncols()
    }

    pub fn obs_dim(&self) -> usize {
        self.observations.ncols()
    }

    /// CSV with header `t,X1..Xkp,Y1..Yk` and 17 significant digits.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.state_dim()).map(|i| format!("X{i}")));
        header.extend((1..=self.obs_dim()).map(|i| format!("Y{i}")));
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for i in 0..=self.n_steps {
            line.clear();
            line.push_str(&format!("{:.16e}", i as f64 * self.h));
            for v in self.states.row(i).iter().chain(self.observations.row(i).iter()) {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn check_grid(h: f64, n_steps: usize) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NegativeHorizon { h, expected: "positive" });
    }
    if n_steps < 1 {
        return Err(Error::BadShape("n_steps must be at least 1".into()));
    }
    Ok(())
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Exact simulation with Gaussian increments: `X(0) ~ N(0, Gamma(0))` and
/// `X(t+h) = e^{Ah} X(t) + eta`, `eta ~ N(0, Q(h))`.
pub fn simulate_exact_gaussian(ss: &StateSpace, h: f64, n_steps: usize, seed: u64) -> Result<SamplePath> {
    check_grid(h, n_steps)?;
    let (transition, noise) = ss.sampled_var1(h)?;
    let noise_factor = psd_factor(&noise)?;
    let init_factor = psd_factor(&ss.gamma0)?;
    let n = ss.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Matrix::zeros(n_steps + 1, n);
    let mut x = &init_factor * normals(&mut rng, n);
    states.row_mut(0).copy_from(&x.transpose());
    for i in 1..=n_steps {
        x = &transition * &x + &noise_factor * normals(&mut rng, n);
        states.row_mut(i).copy_from(&x.transpose());
    }
    SamplePath::from_states(ss, h, states, seed)
}

/// Euler scheme at internal step `h / substeps` after a burn-in of
/// `ceil(20 / |margin| / delta)` sub-steps from zero.
pub fn simulate_euler_levy(
    ss: &StateSpace,
    driver: &LevyDriver,
    h: f64,
    n_steps: usize,
    substeps: usize,
    seed: u64,
) -> Result<SamplePath> {
    euler(ss, driver, h, n_steps, substeps, seed, None)
}

/// [`simulate_euler_levy`] started at `x0` without burn-in.
pub fn simulate_euler_levy_from(
    ss: &StateSpace,
    driver: &LevyDriver,
    h: f64,
    n_steps: usize,
    substeps: usize,
    seed: u64,
    x0: &DVector<f64>,
) -> Result<SamplePath> {
    if x0.len() != ss.dim() {
        return Err(Error::ShapeMismatch(format!("initial state has length {}, expected {}", x0.len(), ss.dim())));
    }
    euler(ss, driver, h, n_steps, substeps, seed, Some(x0))
}

fn euler(
    ss: &StateSpace,
    driver: &LevyDriver,
    h: f64,
    n_steps: usize,
    substeps: usize,
    seed: u64,
    x0: Option<&DVector<f64>>,
) -> Result<SamplePath> {
    check_grid(h, n_steps)?;
    if substeps < 1 {
        return Err(Error::BadShape("substeps must be at least 1".into()));
    }
    driver.validate(ss.k)?;
    let mut warnings = Vec::new();
    let mismatch = max_abs(&(driver.sigma_l() - &ss.sigma_l));
    if mismatch > 1e-9 {
        warnings.push(format!("driver covariance differs from the model's Sigma_L by {mismatch:e}"));
    }
    let delta = h / substeps as f64;
    let mut parts = Vec::new();
    prepare(driver, delta, &mut parts)?;

    let (k, n) = (ss.k, ss.dim());
    let step = Matrix::identity(n, n) + &ss.a * delta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut increment = DVector::zeros(k);
    let mut advance = |x: &mut DVector<f64>, rng: &mut ChaCha8Rng| {
        increment.fill(0.0);
        for part in &parts {
            match part {
                Prepared::Brownian(f) => increment += f * normals(rng, k),
                Prepared::Jumps(Some(law), f) => {
                    let count = law.sample(rng) as usize;
                    for _ in 0..count {
                        increment += f * normals(rng, k);
                    }
                }
                Prepared::Jumps(None, _) => {}
            }
        }
        *x = &step * &*x;
        let mut tail = x.rows_mut(n - k, k);
        tail += &increment;
    };

    let mut x = match x0 {
        Some(x0) => x0.clone(),
        None => {
            let mut x = DVector::zeros(n);
            let burn_in = (20.0 / ss.margin.abs() / delta).ceil() as usize;
            for _ in 0..burn_in {
                advance(&mut x, &mut rng);
            }
            x
        }
    };
    let mut states = Matrix::zeros(n_steps + 1, n);
    states.row_mut(0).copy_from(&x.transpose());
    for i in 1..=n_steps {
        for _ in 0..substeps {
            advance(&mut x, &mut rng);
        }
        states.row_mut(i).copy_from(&x.transpose());
    }
    let mut path = SamplePath::from_states(ss, h, states, seed)?;
    path.warnings = warnings;
    Ok(path)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::kernels::expm;
    use crate::model::{build_state_space, reference_ou_spec, McarSpec};

    pub(crate) fn scalar_ou(a: f64, s2: f64) -> StateSpace {
        let spec = McarSpec::new(vec![Matrix::from_element(1, 1, a)], Matrix::from_element(1, 1, s2)).unwrap();
        build_state_space(&spec).unwrap()
    }

    /// Lag-`m` sample autocovariance of the columns, with batch-means
    /// standard errors over 50 batches.
    pub(crate) fn lagged_cov_with_se(x: &Matrix, m: usize) -> (Matrix, Matrix) {
        let (rows, d) = (x.nrows() - m, x.ncols());
        let batches = 50;
        let len = rows / batches;
        let mut per_batch = Vec::new();
        for b in 0..batches {
            let mut c = Matrix::zeros(d, d);
            for t in b * len..(b + 1) * len {
                for i in 0..d {
                    for j in 0..d {
                        c[(i, j)] += x[(t + m, i)] * x[(t, j)];
                    }
                }
            }
            per_batch.push(c / len as f64);
        }
        let mean = per_batch.iter().fold(Matrix::zeros(d, d), |a, c| a + c) / batches as f64;
        let var = per_batch
            .iter()
            .fold(Matrix::zeros(d, d), |a, c| a + (c - &mean).map(|v| v * v))
            / (batches - 1) as f64;
        (mean, var.map(|v| (v / batches as f64).sqrt()))
    }

    #[test]
    fn scalar_lag_one_autocorrelation() {
        let ss = scalar_ou(1.0, 1.0);
        let path = simulate_exact_gaussian(&ss, 0.1, 100_000, 42).unwrap();
        let y = path.observations.column(0);
        let n = y.len();
        let mean = y.mean();
        let c0: f64 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let c1: f64 = (0..n - 1).map(|t| (y[t + 1] - mean) * (y[t] - mean)).sum::<f64>() / n as f64;
        assert!((c1 / c0 - (-0.1f64).exp()).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_path() {
        let ss = build_state_space(&reference_ou_spec()).unwrap();
        let a = simulate_exact_gaussian(&ss, 0.05, 500, 7).unwrap();
        let b = simulate_exact_gaussian(&ss, 0.05, 500, 7).unwrap();
        let c = simulate_exact_gaussian(&ss, 0.05, 500, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.states, c.states);
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ba).unwrap();
        b.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb);

        let driver = LevyDriver::CompoundPoisson { rate: 2.0, jump_cov: ss.sigma_l.clone() / 2.0 };
        let e1 = simulate_euler_levy(&ss, &driver, 0.05, 200, 3, 1).unwrap();
        let e2 = simulate_euler_levy(&ss, &driver, 0.05, 200, 3, 1).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn observations_equal_first_block() {
        let spec = McarSpec::new(
            vec![Matrix::identity(2, 2) * 3.0, Matrix::identity(2, 2) * 2.0],
            Matrix::identity(2, 2),
        )
        .unwrap();
        let ss = build_state_space(&spec).unwrap();
        let path = simulate_exact_gaussian(&ss, 0.1, 100, 3).unwrap();
        assert_eq!(path.states.nrows(), 101);
        for i in 0..=100 {
            let cx = &ss.c * path.states.row(i).transpose();
            assert_eq!(cx.transpose(), path.observations.row(i).into_owned());
        }
    }

    #[test]
    fn reference_covariance_within_three_standard_errors() {
        let ss = build_state_space(&reference_ou_spec()).unwrap();
        let path = simulate_exact_gaussian(&ss, 0.05, 100_000, 2024).unwrap();
        let (cov, se) = lagged_cov_with_se(&path.observations, 0);
        for i in 0..3 {
            for j in 0..3 {
                let z = (cov[(i, j)] - ss.gamma0[(i, j)]).abs() / se[(i, j)];
                assert!(z < 3.0, "entry ({i},{j}): z = {z}");
            }
        }
    }

    #[test]
    fn lagged_autocovariances_match() {
        let ss = build_state_space(&reference_ou_spec()).unwrap();
        let h = 0.05;
        let path = simulate_exact_gaussian(&ss, h, 100_000, 99).unwrap();
        for m in [0usize, 1, 5] {
            let (cov, se) = lagged_cov_with_se(&path.states, m);
            let exact = ss.autocovariance(m as f64 * h).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let z = (cov[(i, j)] - exact[(i, j)]).abs() / se[(i, j)];
                    assert!(z < 4.0, "lag {m} entry ({i},{j}): z = {z}");
                }
            }
        }
    }

    #[test]
    fn euler_brownian_close_to_exact() {
        let ss = build_state_space(&reference_ou_spec()).unwrap();
        let driver = LevyDriver::Brownian { cov: ss.sigma_l.clone() };
        let euler = simulate_euler_levy(&ss, &driver, 0.01, 100_000, 1, 5).unwrap();
        assert!(euler.warnings.is_empty());
        let (cov, _) = lagged_cov_with_se(&euler.observations, 0);
        for i in 0..3 {
            let rel = (cov[(i, i)] - ss.gamma0[(i, i)]).abs() / ss.gamma0[(i, i)];
            assert!(rel < 0.1, "variance {i}: relative error {rel}");
        }
    }

    #[test]
    fn zero_driver_follows_ode() {
        let ss = build_state_space(&reference_ou_spec()).unwrap();
        let zero = LevyDriver::Sum(vec![
            LevyDriver::Brownian { cov: Matrix::zeros(3, 3) },
            LevyDriver::CompoundPoisson { rate: 0.0, jump_cov: Matrix::identity(3, 3) },
        ]);
        let x0 = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let path = simulate_euler_levy_from(&ss, &zero, 0.1, 20, 1000, 0, &x0).unwrap();
        assert_eq!(path.warnings.len(), 1);
        for i in [0, 5, 20] {
            let exact = expm(&(&ss.a * (0.1 * i as f64))).unwrap() * &x0;
            let got = path.states.row(i).transpose();
            assert!((got - exact).amax() < 1e-3);
        }
    }

    #[test]
    fn compound_poisson_stationary_variance() {
        let ss = scalar_ou(1.0, 1.0);
        let driver = LevyDriver::CompoundPoisson { rate: 5.0, jump_cov: Matrix::from_element(1, 1, 0.2) };
        let path = simulate_euler_levy(&ss, &driver, 0.05, 100_000, 5, 17).unwrap();
        assert!(path.warnings.is_empty());
        let y = path.observations.column(0);
        let var = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        assert!((var - 0.5).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn euler_bias_shrinks_with_substeps() {
        let ss = scalar_ou(1.0, 1.0);
        let driver = LevyDriver::Brownian { cov: Matrix::identity(1, 1) };
        let bias: Vec<f64> = [1usize, 2, 4]
            .iter()
            .map(|&s| {
                let path = simulate_euler_levy(&ss, &driver, 0.2, 1_000_000, s, 31).unwrap();
                let y = path.observations.column(0);
                (y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64 - 0.5).abs()
            })
            .collect();
        assert!(bias[0] > bias[1] && bias[1] > bias[2], "biases {bias:?}");
    }

    #[test]
    fn bad_inputs() {
        let ss = scalar_ou(1.0, 1.0);
        assert!(matches!(simulate_exact_gaussian(&ss, 0.0, 10, 0), Err(Error::NegativeHorizon { .. })));
        assert!(matches!(simulate_exact_gaussian(&ss, 0.1, 0, 0), Err(Error::BadShape(_))));
        let bad = LevyDriver::CompoundPoisson { rate: -1.0, jump_cov: Matrix::identity(1, 1) };
        assert!(matches!(simulate_euler_levy(&ss, &bad, 0.1, 10, 1, 0), Err(Error::BadDriver(_))));
        let bad = LevyDriver::Brownian { cov: Matrix::identity(2, 2) };
        assert!(matches!(simulate_euler_levy(&ss, &bad, 0.1, 10, 1, 0), Err(Error::BadDriver(_))));
        let bad = LevyDriver::Brownian { cov: Matrix::from_element(1, 1, -1.0) };
        assert!(matches!(simulate_euler_levy(&ss, &bad, 0.1, 10, 1, 0), Err(Error::BadDriver(_))));
        let ok = LevyDriver::Brownian { cov: Matrix::identity(1, 1) };
        assert!(matches!(simulate_euler_levy(&ss, &ok, 0.1, 10, 0, 0), Err(Error::BadShape(_))));
    }

    #[test]
    fn csv_layout() {
        let ss = build_state_space(&reference_ou_spec()).unwrap();
        let path = simulate_exact_gaussian(&ss, 0.5, 2, 1).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,X1,X2,X3,Y1,Y2,Y3");
        assert_eq!(lines.len(), 4);
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], 0.5);
        assert_eq!(fields[1], path.states[(1, 0)]);
        assert_eq!(fields[4], path.observations[(1, 0)]);
    }
}
