//! Runs a tracking configuration and writes its CSV.
//!
//! `cargo run --example tracking_experiment -- [config.toml] [out.csv]`

use std::fs::File;
use std::io::BufWriter;

use damtcc::config::parse_config;
use damtcc::experiment::{tracking, write_tracking_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/tracking.toml").into()
    });
    let out = args.next().unwrap_or_else(|| "tracking.csv".into());

    let cfg = parse_config(&std::fs::read_to_string(&path)?)?;
    let series = tracking(&cfg)?;
    for s in &series {
        let mean = s.network_mean();
        let tail = &mean[mean.len() - cfg.steady_window..];
        println!(
            "{} run {}: network mean over final window {:.4} Hz",
            s.algorithm,
            s.run,
            tail.iter().sum::<f64>() / tail.len() as f64
        );
    }
    write_tracking_csv(&series, BufWriter::new(File::create(&out)?))?;
    println!("wrote {out}");
    Ok(())
}
