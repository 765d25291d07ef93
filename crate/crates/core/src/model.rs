//! MCAR(p) models: companion state space, stationary covariance,
//! autocovariance, spectral density, predictors and exact sampled dynamics.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    self, asymmetry, ensure_finite, expm, gramian, max_abs, min_sym_eigenvalue, solve_lyapunov,
    stability_margin, CMatrix, Matrix,
};

/// Eigenvalue floor below which a Levy covariance counts as singular in
/// strict mode.
pub const STRICT_EIG_FLOOR: f64 = 1e-10;

/// User-facing MCAR(p) parameters.
///
/// The autoregressive polynomial is `P(z) = I z^p + A_1 z^{p-1} + ... + A_p`
/// and `sigma_l` is the covariance of `L(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct McarSpec {
    pub k: usize,
    pub p: usize,
    pub ar_coeffs: Vec<Matrix>,
    pub sigma_l: Matrix,
    /// Reject Levy covariances that are not strictly positive definite.
    pub strict: bool,
}

impl McarSpec {
    /// Builds a spec from `A_1..A_p` and `Sigma_L`; strict mode is on.
    pub fn new(ar_coeffs: Vec<Matrix>, sigma_l: Matrix) -> Result<Self> {
        let p = ar_coeffs.len();
        if p == 0 {
            return Err(Error::BadShape("at least one AR coefficient is required".into()));
        }
        let k = sigma_l.nrows();
        if k == 0 || sigma_l.ncols() != k {
            return Err(Error::BadShape(format!(
                "sigma_L must be square and non-empty, got {}x{}",
                sigma_l.nrows(),
                sigma_l.ncols()
            )));
        }
        for (j, a) in ar_coeffs.iter().enumerate() {
            if a.nrows() != k || a.ncols() != k {
                return Err(Error::BadShape(format!(
                    "A_{} must be {k}x{k}, got {}x{}",
                    j + 1,
                    a.nrows(),
                    a.ncols()
                )));
            }
            ensure_finite(a)?;
        }
        ensure_finite(&sigma_l)?;
        Ok(Self { k, p, ar_coeffs, sigma_l, strict: true })
    }

    /// Ornstein-Uhlenbeck model `dY = A Y dt + dL`, i.e. `A_1 = -A`.
    pub fn ornstein_uhlenbeck(drift: Matrix, sigma_l: Matrix) -> Result<Self> {
        Self::new(vec![-drift], sigma_l)
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Block companion matrix: identity blocks on the super-diagonal and
    /// `-A_p, ..., -A_1` in the last block row.
    pub fn companion(&self) -> Matrix {
        let (k, p) = (self.k, self.p);
        let n = k * p;
        let mut a = Matrix::zeros(n, n);
        for j in 0..p.saturating_sub(1) {
            a.view_mut((j * k, (j + 1) * k), (k, k))
                .copy_from(&Matrix::identity(k, k));
        }
        for j in 0..p {
            // A_{p-j} sits in block column j.
            a.view_mut(((p - 1) * k, j * k), (k, k))
                .copy_from(&(-&self.ar_coeffs[p - 1 - j]));
        }
        a
    }

    /// Smallest eigenvalue of `Sigma_L`.
    pub fn sigma_min_eigenvalue(&self) -> Result<f64> {
        min_sym_eigenvalue(&self.sigma_l)
    }

    /// Checks that `Sigma_L` is symmetric PSD (PD in strict mode) and that the
    /// companion matrix is stable. Returns the stability margin.
    pub fn validate(&self) -> Result<f64> {
        let asym = asymmetry(&self.sigma_l);
        if asym > 1e-12 * max_abs(&self.sigma_l).max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let min_eig = self.sigma_min_eigenvalue()?;
        if self.strict && min_eig <= STRICT_EIG_FLOOR {
            return Err(Error::NotStrict { min_eig });
        }
        if min_eig < -1e-10 * max_abs(&self.sigma_l).max(1.0) {
            return Err(Error::NotStrict { min_eig });
        }
        let margin = stability_margin(&self.companion())?;
        if margin >= 0.0 {
            return Err(Error::Unstable { margin });
        }
        Ok(margin)
    }

    /// Parses a model file (TOML key/value form).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_spec()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    /// Serialises to the model-file format with row-major nested arrays.
    pub fn to_toml_string(&self) -> String {
        let rows = |m: &Matrix| -> Vec<Vec<f64>> {
            // `+ 0.0` turns negative zeros into plain zeros.
            m.row_iter().map(|r| r.iter().map(|x| x + 0.0).collect()).collect()
        };
        let file = ModelFile {
            k: self.k,
            p: self.p,
            ar_coeffs: self.ar_coeffs.iter().map(|m| MatrixRepr::Rows(rows(m))).collect(),
            sigma_l: MatrixRepr::Rows(rows(&self.sigma_l)),
            strict: self.strict,
        };
        toml::to_string(&file).expect("model file serialises")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixRepr {
    fn to_matrix(&self, k: usize, name: &str) -> Result<Matrix> {
        match self {
            MatrixRepr::Flat(v) => {
                if v.len() != k * k {
                    return Err(Error::BadShape(format!(
                        "{name}: expected {} entries, got {}",
                        k * k,
                        v.len()
                    )));
                }
                Ok(Matrix::from_row_slice(k, k, v))
            }
            MatrixRepr::Rows(rows) => {
                if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                    return Err(Error::BadShape(format!("{name}: expected {k} rows of {k} entries")));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Ok(Matrix::from_row_slice(k, k, &flat))
            }
        }
    }
}

fn default_strict() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    k: usize,
    p: usize,
    ar_coeffs: Vec<MatrixRepr>,
    #[serde(rename = "sigma_L", alias = "sigma_l")]
    sigma_l: MatrixRepr,
    #[serde(default = "default_strict")]
    strict: bool,
}

impl ModelFile {
    fn into_spec(self) -> Result<McarSpec> {
        if self.k == 0 || self.p == 0 {
            return Err(Error::BadShape("k and p must be positive".into()));
        }
        if self.ar_coeffs.len() != self.p {
            return Err(Error::BadShape(format!(
                "expected {} AR coefficient matrices, got {}",
                self.p,
                self.ar_coeffs.len()
            )));
        }
        let ar = self
            .ar_coeffs
            .iter()
            .enumerate()
            .map(|(j, m)| m.to_matrix(self.k, &format!("ar_coeffs[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let sigma = self.sigma_l.to_matrix(self.k, "sigma_L")?;
        Ok(McarSpec::new(ar, sigma)?.with_strict(self.strict))
    }
}

/// Selector `E_j` (kp x k) picking the j-th k-block, `j` 1-based.
pub fn selector(k: usize, p: usize, j: usize) -> Matrix {
    assert!((1..=p).contains(&j), "block index {j} out of 1..={p}");
    let mut e = Matrix::zeros(k * p, k);
    e.view_mut((k * (j - 1), 0), (k, k)).copy_from(&Matrix::identity(k, k));
    e
}

/// Companion-form state space of a causal MCAR(p) model with its cached
/// stationary covariance.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub k: usize,
    pub p: usize,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub gamma0: Matrix,
    pub sigma_l: Matrix,
    pub ar_coeffs: Vec<Matrix>,
    pub margin: f64,
}

/// Builds the companion triple and solves for the stationary covariance.
pub fn build_state_space(spec: &McarSpec) -> Result<StateSpace> {
    let margin = spec.validate()?;
    let (k, p) = (spec.k, spec.p);
    let a = spec.companion();
    let b = selector(k, p, p);
    let c = selector(k, p, 1).transpose();
    let w = &b * &spec.sigma_l * b.transpose();
    let gamma0 = solve_lyapunov(&a, &kernels::symmetrize(&w))?;
    Ok(StateSpace {
        k,
        p,
        a,
        b,
        c,
        gamma0,
        sigma_l: spec.sigma_l.clone(),
        ar_coeffs: spec.ar_coeffs.clone(),
        margin,
    })
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        self.k * self.p
    }

    /// State noise intensity `B Sigma_L B^T`.
    pub fn noise_intensity(&self) -> Matrix {
        kernels::symmetrize(&(&self.b * &self.sigma_l * self.b.transpose()))
    }

    pub fn selector(&self, j: usize) -> Matrix {
        selector(self.k, self.p, j)
    }

    /// State autocovariance `E[X(t+s) X(s)^T]`: `e^{At} Gamma(0)` for
    /// `t >= 0` and the transpose of the lag `-t` value otherwise.
    pub fn autocovariance(&self, t: f64) -> Result<Matrix> {
        if t >= 0.0 {
            Ok(expm(&(&self.a * t))? * &self.gamma0)
        } else {
            Ok(self.autocovariance(-t)?.transpose())
        }
    }

    /// Observation autocovariance (upper-left k x k block).
    pub fn observation_autocovariance(&self, t: f64) -> Result<Matrix> {
        Ok(&self.c * self.autocovariance(t)? * self.c.transpose())
    }

    /// Spectral density of `Y` at frequency `lambda`, evaluated through the
    /// resolvent `G = C (i lambda I - A)^{-1} B` as `G Sigma_L G^H / 2 pi`.
    pub fn spectral_density(&self, lambda: f64) -> Result<CMatrix> {
        let g = self.transfer(lambda)?;
        let sigma = self.sigma_l.map(|x| Complex::new(x, 0.0));
        let f = &g * sigma * g.adjoint() / Complex::new(2.0 * PI, 0.0);
        Ok(hermitian_part(&f))
    }

    /// Transfer matrix `C (i lambda I - A)^{-1} B`.
    pub fn transfer(&self, lambda: f64) -> Result<CMatrix> {
        let n = self.dim();
        let iw = Complex::new(0.0, lambda);
        let res = CMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { iw } else { Complex::new(0.0, 0.0) };
            d - Complex::new(self.a[(i, j)], 0.0)
        });
        let rhs = self.b.map(|x| Complex::new(x, 0.0));
        let sol = res.lu().solve(&rhs).ok_or(Error::SingularResolvent { lambda })?;
        Ok(sol.rows(0, self.k).into_owned())
    }

    /// Spectral density from the autoregressive polynomial,
    /// `P(i lambda)^{-1} Sigma_L (P(-i lambda)^{-1})^T / 2 pi`.
    /// Independent of the state-space route; kept as a cross-check.
    pub fn spectral_density_polynomial(&self, lambda: f64) -> Result<CMatrix> {
        let p_plus = self.ar_polynomial(Complex::new(0.0, lambda));
        let p_minus = self.ar_polynomial(Complex::new(0.0, -lambda));
        let inv_plus = p_plus.try_inverse().ok_or(Error::SingularResolvent { lambda })?;
        let inv_minus = p_minus.try_inverse().ok_or(Error::SingularResolvent { lambda })?;
        let sigma = self.sigma_l.map(|x| Complex::new(x, 0.0));
        Ok(inv_plus * sigma * inv_minus.transpose() / Complex::new(2.0 * PI, 0.0))
    }

    /// `P(z) = I z^p + A_1 z^{p-1} + ... + A_p`, by Horner's rule.
    pub fn ar_polynomial(&self, z: Complex<f64>) -> CMatrix {
        let k = self.k;
        let mut acc = CMatrix::identity(k, k);
        for a in &self.ar_coeffs {
            acc = acc * z + a.map(|x| Complex::new(x, 0.0));
        }
        acc
    }

    /// Predictor coefficients `Theta_j(h) = C e^{Ah} E_j`, `j = 1..p`.
    pub fn predictor_coefficients(&self, h: f64) -> Result<Vec<Matrix>> {
        if !(h >= 0.0) {
            return Err(Error::NegativeHorizon { h, expected: "non-negative" });
        }
        let ce = &self.c * expm(&(&self.a * h))?;
        Ok((0..self.p)
            .map(|j| ce.columns(j * self.k, self.k).into_owned())
            .collect())
    }

    /// Exact one-step dynamics of the state sampled on a grid of width `h`:
    /// `X(t+h) = e^{Ah} X(t) + eps`, `Cov(eps) = Q(h)`.
    pub fn sampled_var1(&self, h: f64) -> Result<(Matrix, Matrix)> {
        if !(h > 0.0) {
            return Err(Error::NegativeHorizon { h, expected: "positive" });
        }
        let transition = expm(&(&self.a * h))?;
        let noise = gramian(&self.a, &self.noise_intensity(), h)?;
        Ok((transition, noise))
    }
}

pub(crate) fn hermitian_part(f: &CMatrix) -> CMatrix {
    (f + f.adjoint()) * Complex::new(0.5, 0.0)
}

/// The three-dimensional Ornstein-Uhlenbeck example used throughout the
/// tests: drift `A` and Levy covariance `Sigma_L`, returned as `(A, Sigma_L)`.
pub fn reference_ou_parameters() -> (Matrix, Matrix) {
    let a = Matrix::from_row_slice(3, 3, &[-2.0, 0.0, 0.0, 0.0, -2.0, 1.0, 1.0, 1.0, -2.0]);
    let s = Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0, 1.0]);
    (a, s)
}

/// [`reference_ou_parameters`] as a spec.
pub fn reference_ou_spec() -> McarSpec {
    let (a, s) = reference_ou_parameters();
    McarSpec::ornstein_uhlenbeck(a, s).expect("reference model is well formed")
}
