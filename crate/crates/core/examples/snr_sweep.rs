//! Steady-state variance of both algorithms across SNR (reduced run count).

use damtcc::config::parse_config;
use damtcc::experiment::snr_sweep;
use damtcc::wlfilter::Algorithm;

fn main() -> damtcc::Result<()> {
    let cfg =
        parse_config("iters = 3000\nmonte_carlo_runs = 10\nseed = 5\n[filter]\nmu = 0.005\n")?;
    let snrs = [10.0, 20.0, 30.0, 40.0];
    let rows = snr_sweep(&cfg, &snrs)?;
    println!("{:>6} {:>12} {:>12}", "SNR", "DAMTCC", "DACLMS");
    for snr in snrs {
        let mean = |a: Algorithm| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.snr_db == snr && r.algorithm == a)
                .map(|r| r.variance)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        println!(
            "{snr:>6.0} {:>12.3e} {:>12.3e}",
            mean(Algorithm::Damtcc),
            mean(Algorithm::Daclms)
        );
    }
    Ok(())
}
