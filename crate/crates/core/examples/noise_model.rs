//! Input/output noise and output impulses on a clean stream.

use damtcc::noise::{corrupt_stream, NoiseConfig, PowerProfile};
use damtcc::phasegen::{voltage_at, PhaseParams};

fn main() -> damtcc::Result<()> {
    let p = PhaseParams::nominal();
    let clean: Vec<_> = (0..=100_000).map(|t| voltage_at(&p, t)).collect();
    let cfg = NoiseConfig::new(20.0, 42);
    let pairs = corrupt_stream(&clean, &cfg, &PowerProfile::constant(p.mean_power()))?;

    let n = pairs.len() as f64;
    let input_var: f64 = pairs
        .iter()
        .zip(&clean)
        .map(|(q, c)| (q.x_noisy - c).norm_sqr())
        .sum::<f64>()
        / n;
    let output_dev: Vec<f64> = pairs
        .iter()
        .zip(&clean[1..])
        .map(|(q, c)| (q.d_noisy - c).norm_sqr())
        .collect();
    let impulses = output_dev.iter().filter(|&&e| e > 1.0).count();

    println!("signal power        {:.4}", p.mean_power());
    println!(
        "input noise var     {input_var:.5} (expected {:.5})",
        p.mean_power() / 100.0
    );
    println!(
        "output deviations > 1: {impulses} of {} (p = {})",
        pairs.len(),
        cfg.impulse_prob
    );
    Ok(())
}
