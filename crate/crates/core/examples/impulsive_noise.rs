//! Effect of output impulses: DAMTCC and DACLMS on identical noise realizations.

use damtcc::analysis::bias_variance;
use damtcc::config::parse_config;
use damtcc::experiment::monte_carlo;
use damtcc::wlfilter::Algorithm;

fn main() -> damtcc::Result<()> {
    for p in [0.0, 0.005, 0.02] {
        let cfg = parse_config(&format!(
            "iters = 4000\nmonte_carlo_runs = 10\nseed = 6\n[noise]\nsnr_db = 30.0\nimpulse_prob = {p}\n[filter]\nmu = 0.005\n"
        ))?;
        print!("p = {p:<6}");
        for a in [Algorithm::Damtcc, Algorithm::Daclms] {
            let st = bias_variance(&monte_carlo(&cfg, a)?, 50.0, cfg.steady_window)?;
            let var = st.iter().map(|s| s.variance).sum::<f64>() / st.len() as f64;
            print!("  {a}: {var:.3e} Hz²");
        }
        println!();
    }
    Ok(())
}
