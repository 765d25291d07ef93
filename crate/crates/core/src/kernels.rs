//! Dense real-matrix primitives: exponential, spectrum, Lyapunov solve,
//! finite-horizon Gramian and power stacks.
//!
//! Everything here works on small dense matrices (order up to a few dozen)
//! stored as [`nalgebra::DMatrix`].

use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};

use crate::error::{Error, Result};

/// Real square or rectangular matrix.
pub type Matrix = DMatrix<f64>;
/// Complex matrix, used for spectral densities.
pub type CMatrix = DMatrix<Complex<f64>>;

const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::BadShape(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced infinity-norm (maximum absolute row sum).
pub fn norm_inf(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Returns `(m + m^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub(crate) fn asymmetry(m: &Matrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_sym_eigenvalue(m: &Matrix) -> Result<f64> {
    ensure_finite(m)?;
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Factor a symmetric positive semi-definite matrix as `L L^T`.
///
/// Uses a symmetric eigendecomposition with negative eigenvalues clipped to
/// zero. Eigenvalues below `-1e-8 * max|eig|` mean the input is genuinely
/// indefinite and are reported as an error.
pub fn psd_factor(m: &Matrix) -> Result<Matrix> {
    ensure_finite(m)?;
    let eig = SymmetricEigen::try_new(symmetrize(m), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::FactorizationFailure("eigen iteration did not converge".into()))?;
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut vecs = eig.eigenvectors;
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::FactorizationFailure(format!(
                "matrix is indefinite (eigenvalue {lam:e})"
            )));
        }
        let s = lam.max(0.0).sqrt();
        vecs.column_mut(j).scale_mut(s);
    }
    Ok(vecs)
}

// Pade coefficients b_0..b_m for degrees 3, 5, 7, 9, 13 and the matching
// 1-norm thresholds below which degree m attains double-precision accuracy.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

fn pade_low(a: &Matrix, b: &[f64]) -> (Matrix, Matrix) {
    let n = a.nrows();
    let a2 = a * a;
    let mut even = Matrix::identity(n, n) * b[0];
    let mut odd = Matrix::identity(n, n) * b[1];
    let mut pow = Matrix::identity(n, n);
    for i in 1..b.len() / 2 {
        pow = &pow * &a2;
        even += &pow * b[2 * i];
        odd += &pow * b[2 * i + 1];
    }
    (a * odd, even)
}

fn pade13(a: &Matrix) -> (Matrix, Matrix) {
    let b = &PADE13;
    let n = a.nrows();
    let id = Matrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    (u, v)
}

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant (degree 3 to 13, chosen from the 1-norm).
pub fn expm(m: &Matrix) -> Result<Matrix> {
    ensure_square(m, "expm argument")?;
    ensure_finite(m)?;
    let n = m.nrows();
    let nrm = norm1(m);
    if nrm == 0.0 {
        return Ok(Matrix::identity(n, n));
    }

    let (scaled, squarings, (u, v)) = match THETA.iter().find(|(_, theta)| nrm <= *theta) {
        Some(&(deg, _)) => {
            let coeffs: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            (m.clone(), 0, pade_low(m, coeffs))
        }
        None => {
            let s = (nrm / THETA13).log2().ceil().max(0.0) as i32;
            let scaled = m * 2f64.powi(-s);
            let uv = pade13(&scaled);
            (scaled, s, uv)
        }
    };
    drop(scaled);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom.lu().solve(&numer).ok_or(Error::Singular)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    ensure_finite(&r)?;
    Ok(r)
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex<f64>>> {
    ensure_square(m, "matrix")?;
    ensure_finite(m)?;
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part over the spectrum. Negative iff the matrix is stable.
pub fn stability_margin(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Solve `A X + X A^T = -W` for stable `A` and symmetric `W`.
///
/// The system is vectorised into `(I (x) A + A (x) I) vec(X) = -vec(W)` and
/// solved by LU; the result is symmetrised.
pub fn solve_lyapunov(a: &Matrix, w: &Matrix) -> Result<Matrix> {
    ensure_square(a, "A")?;
    ensure_finite(a)?;
    ensure_finite(w)?;
    let n = a.nrows();
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::BadShape(format!(
            "W must be {n}x{n}, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    let asym = asymmetry(w);
    if asym > SYMMETRY_TOL * max_abs(w).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let margin = stability_margin(a)?;
    if margin >= 0.0 {
        return Err(Error::Unstable { margin });
    }

    let id = Matrix::identity(n, n);
    let sys = id.kronecker(a) + a.kronecker(&id);
    let rhs = -Matrix::from_column_slice(n * n, 1, w.as_slice());
    let sol = sys.lu().solve(&rhs).ok_or(Error::Singular)?;
    let x = Matrix::from_column_slice(n, n, sol.as_slice());
    Ok(symmetrize(&x))
}

/// Finite-horizon Gramian `Q(h) = int_0^h e^{Au} W e^{A^T u} du`.
///
/// The Van Loan block exponential `exp([[A, W], [0, -A^T]] h0)` gives `Q(h0)`
/// for a short step `h0 = h / 2^s`; the horizon is then reached by doubling,
/// `Q(2t) = Q(t) + e^{At} Q(t) e^{A^T t}`, which stays bounded for stable `A`
/// where a single long-horizon block exponential would overflow.
pub fn gramian(a: &Matrix, w: &Matrix, h: f64) -> Result<Matrix> {
    ensure_square(a, "A")?;
    ensure_finite(a)?;
    ensure_finite(w)?;
    if !(h >= 0.0) {
        return Err(Error::NegativeHorizon { h, expected: "non-negative" });
    }
    let n = a.nrows();
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::BadShape(format!(
            "W must be {n}x{n}, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    let asym = asymmetry(w);
    if asym > SYMMETRY_TOL * max_abs(w).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if h == 0.0 {
        return Ok(Matrix::zeros(n, n));
    }

    let nrm = norm1(a) * h;
    let doublings = if nrm > 1.0 { nrm.log2().ceil() as i32 } else { 0 };
    let h0 = h * 2f64.powi(-doublings);

    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * h0));
    block.view_mut((0, n), (n, n)).copy_from(&(w * h0));
    block.view_mut((n, n), (n, n)).copy_from(&(-a.transpose() * h0));
    let f = expm(&block)?;
    let mut e = f.view((0, 0), (n, n)).into_owned();
    let mut q = f.view((0, n), (n, n)) * e.transpose();
    q = symmetrize(&q);

    for _ in 0..doublings {
        q = &q + &e * &q * e.transpose();
        q = symmetrize(&q);
        e = &e * &e;
    }
    ensure_finite(&q)?;
    Ok(q)
}

/// Powers `M^0, M^1, ..., M^n` by repeated multiplication.
pub fn power_stack(m: &Matrix, n: usize) -> Result<Vec<Matrix>> {
    ensure_square(m, "matrix")?;
    ensure_finite(m)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Matrix::identity(m.nrows(), m.nrows()));
    for i in 0..n {
        let next = m * &out[i];
        out.push(next);
    }
    Ok(out)
}
