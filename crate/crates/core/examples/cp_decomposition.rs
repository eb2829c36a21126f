//! Fits a rank-3 CP model to a noisy synthetic tensor and reports the fit.

use num_complex::Complex64;
use pce::cp::{cp_als, CpFactors, CpSolveConfig};
use pce::sim::complex_noise;
use pce::tensor::cp_compose;
use pce::{ComplexMatrix, ComplexTensor};

fn main() -> pce::Result<()> {
    let factor = |rows: usize, shift: f64| {
        ComplexMatrix::from_fn(rows, 3, |i, r| Complex64::from_polar(1.0, (i as f64) * (r as f64 + shift)))
    };
    let truth = CpFactors {
        a1: factor(12, 0.3),
        a2: factor(10, 1.1),
        a3: factor(8, 2.0),
    };
    let clean = cp_compose(&truth)?;
    let noise = complex_noise(clean.len(), 1e-4, 7);
    let noisy = ComplexTensor::new(
        clean.dims().to_vec(),
        clean.data().iter().zip(&noise).map(|(a, b)| a + b).collect(),
    )?;

    let sol = cp_als(&noisy, &CpSolveConfig::default().with_rank(3))?;
    println!(
        "restart {} won after {} sweeps, residual ratio {:.3e}",
        sol.restart,
        sol.fit_history.len(),
        sol.residual
    );
    let err = cp_compose(&sol.factors)?.sub(&clean)?.frobenius() / clean.frobenius();
    println!("model vs noiseless tensor: {err:.3e}");
    for r in 0..3 {
        println!("component {r}: |a2| = {:.3}", pce::tensor::norm(sol.factors.a2.column(r)));
    }
    Ok(())
}
