//! Compares the estimator with the brute-force single-path oracle.

use pce::bench::{oracle_single_path, Observation};
use pce::estimate::{estimate_digital, EstimatorConfig};
use pce::harmonic::angular_distance;
use pce::sim::{channel_tensor, draw_channel, make_pilot_digital, receive_digital, snr_to_n0, ChannelGenConfig, SystemDims};

fn main() -> pce::Result<()> {
    let dims = SystemDims::digital(16, 16, 16, 4);
    let pilot = make_pilot_digital(&dims, 0);
    for seed in 0..3 {
        let truth = draw_channel(&ChannelGenConfig {
            l: 1,
            seed,
            ..Default::default()
        })?;
        let h = channel_tensor(&truth, &dims);
        let (_, a) = receive_digital(&h, &pilot, snr_to_n0(&h, &pilot, 20.0)?, seed)?;
        let est = estimate_digital(&a, &pilot, &EstimatorConfig::default())?;
        let orc = oracle_single_path(Observation::Digital { a: &a, pilot: &pilot }, 128)?;
        let gap = est.params.paths[0]
            .frequencies()
            .iter()
            .zip(orc.frequencies())
            .map(|(x, y)| angular_distance(*x, y))
            .fold(0.0, f64::max);
        println!("seed {seed}: largest estimator/oracle frequency gap {gap:.2e} rad");
    }
    Ok(())
}
