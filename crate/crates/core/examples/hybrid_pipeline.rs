//! End-to-end estimation behind DFT subpanel combiners.

use pce::bench::match_paths;
use pce::estimate::{estimate_hybrid, relative_error, EstimatorConfig};
use pce::sim::{channel_tensor, draw_channel, make_pilot_hybrid, receive_hybrid, snr_to_n0, ChannelGenConfig, SystemDims};

fn main() -> pce::Result<()> {
    let dims = SystemDims::hybrid(31, 32, 16, 16, 4, 4);
    let pilot = make_pilot_hybrid(&dims, 0)?;
    let truth = draw_channel(&ChannelGenConfig {
        l: 2,
        min_separation: 0.5,
        seed: 4,
        ..Default::default()
    })?;
    let h = channel_tensor(&truth, &dims);
    for snr_db in [f64::INFINITY, 30.0] {
        let n0 = snr_to_n0(&h, &pilot, snr_db)?;
        let y = receive_hybrid(&h, &pilot, n0, 9)?;
        let est = estimate_hybrid(&y, &pilot, &EstimatorConfig::default())?;
        let m = match_paths(&truth, &est.params);
        println!(
            "SNR {snr_db} dB: l_hat {}, rel_err {:.3e}, worst frequency RMSE {:.2e}",
            est.l_hat,
            relative_error(&h, &est.h_hat)?,
            m.frequency_rmse.iter().copied().fold(0.0, f64::max)
        );
    }
    Ok(())
}
