use std::time::Instant;

use num_complex::Complex64;

use super::{
    assemble, elapsed_ms, fit_mode, front, jade, per_path, EstimationResult, EstimatorConfig, JadeFit, PathFit,
    DENOMINATOR_RIDGE,
};
use crate::cp::CpFactors;
use crate::error::{Error, Result};
use crate::harmonic::{esprit_tone, max_unit_circle, vandermonde, wrap_angle, AcdConfig, TrigPolyRatio};
use crate::sim::{ChannelParamSet, PathParams, PilotHybrid, SystemDims};
use crate::tensor::{ComplexMatrix, ComplexTensor};

/// AoA from the combiner-domain factor: maximizes `|r(ψ)ᴴ a3|² / ‖r(ψ)‖²`
/// with `r_m(ψ) = Σ_u r[m,u] e^{juψ}`, which profiles out a complex gain.
pub fn estimate_psi_hybrid(a3_hat: &[Complex64], r: &ComplexMatrix) -> Result<f64> {
    if r.frobenius() == 0.0 {
        return Err(Error::PilotDesign("combiner is identically zero".into()));
    }
    let ratio = TrigPolyRatio::from_linear_family_ridged(r, a3_hat, DENOMINATOR_RIDGE)?;
    Ok(wrap_angle(max_unit_circle(&ratio)?.omega))
}

/// Least-squares ToF/stream factor of one rank-1 component given the Doppler
/// steering and the combined AoA response.
pub fn refine_a1(component: &ComplexTensor, a2_hat: &[Complex64], a3_hat: &[Complex64]) -> Result<Vec<Complex64>> {
    fit_mode(component, 0, a2_hat, a3_hat)
}

/// Joint ToF/AoD search on the refined subcarrier factor; `omega` of the
/// result is ω₁.
pub fn jade_hybrid(a1_hat: &[Complex64], pilot: &PilotHybrid, cfg: &AcdConfig) -> Result<JadeFit> {
    jade(&pilot.transmitted(), a1_hat, cfg)
}

/// `r(ψ)`, the combiner output for a unit plane wave at spatial frequency ψ.
fn combined_response(r: &ComplexMatrix, psi: f64) -> Vec<Complex64> {
    r.apply(&vandermonde(psi, r.cols()))
        .expect("steering length matches combiner width")
}

fn branch(f: &CpFactors, l: usize, pilot: &PilotHybrid, x: &ComplexMatrix, cfg: &EstimatorConfig) -> Result<PathFit> {
    let (a1, a2, a3) = (f.a1.column(l), f.a2.column(l), f.a3.column(l));
    let omega2 = esprit_tone(a2)?;
    let psi = estimate_psi_hybrid(a3, &pilot.r)?;
    let v2 = vandermonde(omega2, a2.len());
    let r_psi = combined_response(&pilot.r, psi);
    let a1_hat = if cfg.refine {
        refine_a1(&f.component(l)?, &v2, &r_psi)?
    } else {
        let k = (0..r_psi.len())
            .max_by(|&i, &j| r_psi[i].norm().total_cmp(&r_psi[j].norm()).then(j.cmp(&i)))
            .ok_or(Error::ZeroVector("combiner response"))?;
        if r_psi[k].norm() == 0.0 {
            return Err(Error::ZeroVector("combiner response"));
        }
        let s = a2[0] * a3[k] / r_psi[k];
        a1.iter().map(|z| z * s).collect()
    };
    let fit = jade(x, &a1_hat, &cfg.acd)?;
    Ok(PathFit {
        params: PathParams {
            b: fit.b,
            omega1: fit.omega,
            omega2,
            psi,
            varsigma: fit.varsigma,
        },
        objective: fit.objective,
        sweeps: fit.sweeps,
    })
}

/// Path parameters from a given CP model of the hybrid observation, sorted
/// by descending `|b|`.
pub fn estimate_hybrid_paths(f: &CpFactors, pilot: &PilotHybrid, cfg: &EstimatorConfig) -> Result<ChannelParamSet> {
    let x = pilot.transmitted();
    let mut fits = per_path(f.rank(), cfg.parallel, |l| branch(f, l, pilot, &x, cfg))?;
    fits.sort_by(|p, q| q.params.b.norm().total_cmp(&p.params.b.norm()));
    Ok(ChannelParamSet::new(fits.into_iter().map(|f| f.params).collect()))
}

/// Full multi-stream pipeline on the combined observation `y` (`n_c × n_s × d_r`).
pub fn estimate_hybrid(y: &ComplexTensor, pilot: &PilotHybrid, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    let started = Instant::now();
    let d = y.dims();
    if d.len() != 3 || d[0] != pilot.s.rows() || d[2] != pilot.r.rows() || pilot.p.cols() != pilot.s.cols() {
        return Err(Error::ShapeMismatch(format!(
            "observation {d:?} does not match hybrid pilot ({} subcarriers, {} RF chains)",
            pilot.s.rows(),
            pilot.r.rows()
        )));
    }
    let (n_r, n_t, d_t) = (pilot.r.cols(), pilot.p.rows(), pilot.p.cols());
    let dims = SystemDims::hybrid(d[0], d[1], n_r, n_t, d_t, d[2]);
    let x = pilot.transmitted();
    let fr = front(y, &cfg.cp)?;
    let clock = Instant::now();
    let fits = match &fr.factors {
        Some(f) => per_path(f.rank(), cfg.parallel, |l| branch(f, l, pilot, &x, cfg))?,
        None => Vec::new(),
    };
    let per_path_ms = elapsed_ms(clock);
    Ok(assemble(fr, fits, &dims, per_path_ms, started))
}
