//! ESPRIT on a noisy tone, then an exact line search and a two-frequency ACD
//! on a matched-filter ratio.

use num_complex::Complex64;
use pce::harmonic::{acd_2d, esprit_tone, max_unit_circle, vandermonde, AcdConfig, Coordinate, TrigPolyRatio};
use pce::sim::complex_noise;

fn main() -> pce::Result<()> {
    let omega = 1.234;
    let noise = complex_noise(32, 1e-3, 5);
    let v: Vec<Complex64> = vandermonde(omega, 32).iter().zip(&noise).map(|(a, b)| a + b).collect();
    println!("ESPRIT: {:.6} (true {omega})", esprit_tone(&v)?);

    // |Σ_k c_k e^{jkω}|² / |Σ_k d_k e^{jkω}|² with a nonvanishing denominator.
    let num: Vec<Complex64> = vandermonde(-0.7, 6);
    let den = vec![Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.5)];
    let ratio = TrigPolyRatio::new(num, den)?;
    let m = max_unit_circle(&ratio)?;
    println!("line search: max {:.6} at ω = {:.6} ({} roots)", m.value, m.omega, m.roots_used);

    // Separable 2-D objective with its peak at (0.5, -2.0).
    let c = vandermonde(-0.5, 8);
    let d = vandermonde(2.0, 8);
    let res = acd_2d(
        |coord, fixed| {
            let (vary, other) = match coord {
                Coordinate::A => (&c, &d),
                Coordinate::B => (&d, &c),
            };
            let gain: Complex64 = other
                .iter()
                .enumerate()
                .map(|(k, x)| x * Complex64::from_polar(1.0, k as f64 * fixed))
                .sum();
            TrigPolyRatio::new(vary.iter().map(|x| x * gain).collect(), vec![])
        },
        &AcdConfig::default(),
    )?;
    println!(
        "ACD: ({:.6}, {:.6}) objective {:.3} after {} sweeps",
        res.omega_a, res.omega_b, res.objective, res.sweeps
    );
    Ok(())
}
