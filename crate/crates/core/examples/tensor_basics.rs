//! Unfolding, folding, and the Khatri–Rao identity on a small complex tensor.

use num_complex::Complex64;
use pce::tensor::{khatri_rao, rank1_compose};
use pce::{ComplexMatrix, ComplexTensor};

fn main() -> pce::Result<()> {
    let t = ComplexTensor::from_fn(&[2, 3, 4], |i| Complex64::new(i[0] as f64, (i[1] + 10 * i[2]) as f64));
    for mode in 0..3 {
        let m = t.unfold(mode)?;
        let back = ComplexTensor::fold(&m, mode, t.dims())?;
        println!("mode {mode}: {}×{} unfolding, fold error {:.1e}", m.rows(), m.cols(), back.sub(&t)?.frobenius());
    }

    // A rank-1 tensor unfolds to a ⊗ (c ⊙ b)ᵀ.
    let a = vec![Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.0)];
    let b = vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(3.0, 0.0)];
    let c = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
    let x = rank1_compose(&[&a, &b, &c])?;
    let kr = khatri_rao(&ComplexMatrix::from_columns(&[c])?, &ComplexMatrix::from_columns(&[b])?)?;
    let want = ComplexMatrix::from_columns(&[a])?.matmul(&kr.transpose())?;
    let got = x.unfold(0)?;
    let diff: f64 = got.data().iter().zip(want.data()).map(|(p, q)| (p - q).norm_sqr()).sum();
    println!("rank-1 unfolding vs Khatri–Rao: {:.1e}", diff.sqrt());
    Ok(())
}
