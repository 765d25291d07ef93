//! A bivariate MCAR(2): covariance, spectral density and linear predictors.

use mcar_graphs::builder::{local_orthogonality_graph, orthogonality_graph, DEFAULT_TOL};
use mcar_graphs::kernels::{gramian, solve_lyapunov, Matrix};
use mcar_graphs::model::{build_state_space, McarSpec};

fn main() -> mcar_graphs::Result<()> {
    let a1 = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 3.0]);
    let a2 = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.5, 2.0]);
    let spec = McarSpec::new(vec![a1, a2], Matrix::identity(2, 2))?;
    let ss = build_state_space(&spec)?;
    println!("stability margin {:.4}", ss.margin);

    let w = ss.noise_intensity();
    let lyap = solve_lyapunov(&ss.a, &w)?;
    let finite = gramian(&ss.a, &w, 10.0)?;
    println!("stationary covariance vs Gramian(10): {:.2e}", (lyap - finite).amax());
    println!("observation autocovariance at lag 0.5:{:.4}", ss.observation_autocovariance(0.5)?);
    println!("spectral density at 1.0:{:.4}", ss.spectral_density(1.0)?);

    for (j, c) in ss.predictor_coefficients(0.5)?.iter().enumerate() {
        println!("predictor weight on derivative {j}:{c:.4}");
    }
    println!("OG:\n{}", orthogonality_graph(&spec, DEFAULT_TOL)?.graph);
    println!("local:\n{}", local_orthogonality_graph(&spec, DEFAULT_TOL)?.graph);
    Ok(())
}
