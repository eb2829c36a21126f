//! Per-mode MDL detection of the number of paths in a noisy received tensor.

use pce::mdl::estimate_model_order;
use pce::sim::{channel_tensor, draw_channel, make_pilot_digital, receive_digital, snr_to_n0, ChannelGenConfig, SystemDims};

fn main() -> pce::Result<()> {
    let dims = SystemDims::digital(31, 32, 16, 16);
    let pilot = make_pilot_digital(&dims, 0);
    let truth = draw_channel(&ChannelGenConfig {
        l: 5,
        min_separation: 0.5,
        seed: 11,
        ..Default::default()
    })?;
    let h = channel_tensor(&truth, &dims);
    for snr_db in [0.0, 10.0, 20.0, 30.0] {
        let n0 = snr_to_n0(&h, &pilot, snr_db)?;
        let (_, a) = receive_digital(&h, &pilot, n0, 3)?;
        let report = estimate_model_order(&a)?;
        println!(
            "SNR {snr_db:>4} dB: per mode {:?} -> l_hat {} (true {})",
            report.per_mode_estimates,
            report.l_hat,
            truth.l()
        );
    }
    Ok(())
}
