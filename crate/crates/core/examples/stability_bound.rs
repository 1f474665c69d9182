//! Step-size bound from the regressor covariance and an empirical probe around it.

use damtcc::analysis::{kappa, stability_bound, Hermitian2, StabilityInputs};
use damtcc::config::parse_config;
use damtcc::experiment::run_stability_probe;

fn main() -> damtcc::Result<()> {
    let b = stability_bound(&StabilityInputs {
        r: Hermitian2::identity().scale(1.5),
        sigma: 1.0,
        sigma_i2: 0.01,
        w_bar_norm2: 2.0,
    })?;
    println!(
        "κ = {:.6} (direct {:.6}), μ_max = {:.4}, λ_min variant = {:.4}",
        b.kappa,
        kappa(1.0, 0.01),
        b.mu_max,
        b.mu_max_with_lambda_min
    );

    let cfg = parse_config(
        "seed = 3\n[noise]\nsnr_db = 60.0\nimpulse_prob = 0.0\n[stability]\niters = 5000\n",
    )?;
    let report = run_stability_probe(&cfg, &[0.1, 1.0, 2.0, 50.0])?;
    println!("network μ_max = {:.4}", report.bound.mu_max);
    for r in &report.rows {
        println!(
            "  {:>5}×  {:<7} max ‖w‖ = {:.3}",
            r.multiplier, r.algorithm, r.max_norm
        );
    }
    Ok(())
}
