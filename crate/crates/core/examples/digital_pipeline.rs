//! End-to-end estimation with a fully digital receiver.

use pce::bench::match_paths;
use pce::estimate::{estimate_digital, relative_error, EstimatorConfig};
use pce::sim::{channel_tensor, draw_channel, make_pilot_digital, receive_digital, snr_to_n0, ChannelGenConfig, SystemDims};

fn main() -> pce::Result<()> {
    let dims = SystemDims::digital(31, 32, 16, 16);
    let pilot = make_pilot_digital(&dims, 0);
    let truth = draw_channel(&ChannelGenConfig {
        l: 4,
        min_separation: 0.5,
        seed: 2,
        ..Default::default()
    })?;
    let h = channel_tensor(&truth, &dims);
    let n0 = snr_to_n0(&h, &pilot, 20.0)?;
    let (_, a) = receive_digital(&h, &pilot, n0, 1)?;

    let est = estimate_digital(&a, &pilot, &EstimatorConfig::default())?;
    let m = match_paths(&truth, &est.params);
    println!("l_hat {} (true {})", est.l_hat, truth.l());
    println!("relative channel error {:.3e}", relative_error(&h, &est.h_hat)?);
    let rmse: Vec<String> = m.frequency_rmse.iter().map(|x| format!("{x:.2e}")).collect();
    println!("frequency RMSE (ω₁, ω₂, ψ, ς): {}", rmse.join(", "));
    let t = &est.timings;
    println!(
        "timings ms: mdl {:.1}, cp {:.1}, paths {:.1}, total {:.1}",
        t.model_order_ms, t.cp_ms, t.per_path_ms, t.total_ms
    );
    Ok(())
}
