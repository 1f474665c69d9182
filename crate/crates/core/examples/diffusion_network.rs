//! Metropolis weights of a fixture topology and one noisy network run.

use damtcc::analysis::{bias_variance, steady_window};
use damtcc::diffusion::{metropolis_weights, run, NetworkState, NetworkTopology};
use damtcc::noise::{corrupt_stream, split_seed, NoiseConfig, PowerProfile};
use damtcc::phasegen::{voltage_at, PhaseParams, NOMINAL_DT};
use damtcc::wlfilter::{Algorithm, FilterParams};

fn main() -> damtcc::Result<()> {
    let topo = NetworkTopology::topology1();
    let c = metropolis_weights(&topo);
    println!("Metropolis weights:");
    for l in 0..topo.len() {
        let row: Vec<String> = (0..topo.len())
            .map(|k| format!("{:.3}", c.get(l, k)))
            .collect();
        println!("  {}", row.join(" "));
    }

    let p = PhaseParams::nominal();
    let iters = 4000;
    let clean: Vec<_> = (0..=iters).map(|t| voltage_at(&p, t)).collect();
    let power = PowerProfile::constant(p.mean_power());
    let streams = (0..topo.len())
        .map(|k| {
            corrupt_stream(
                &clean,
                &NoiseConfig::new(30.0, split_seed(11, k as u64)),
                &power,
            )
        })
        .collect::<damtcc::Result<Vec<_>>>()?;

    let mut net = NetworkState::uniform(
        topo,
        FilterParams::new(0.01, 1.0, 1.0)?,
        Algorithm::Damtcc,
        NOMINAL_DT,
    )?;
    let series = run(&mut net, &streams, 0, iters)?;
    for st in bias_variance(&[series], 50.0, steady_window(iters))? {
        println!(
            "node {}: bias {:+.4} Hz, variance {:.2e} Hz²",
            st.node, st.bias, st.variance
        );
    }
    Ok(())
}
