//! A single widely-linear tracker following a sag, with and without the conjugate weight.

use damtcc::noise::NoisyPair;
use damtcc::phasegen::{make_type_d_sag, PhaseParams, Scenario, ScenarioEvent, NOMINAL_DT};
use damtcc::wlfilter::{Algorithm, FilterParams, WlFilter};

fn main() -> damtcc::Result<()> {
    let nominal = PhaseParams::nominal();
    let scenario = Scenario::new(vec![
        ScenarioEvent {
            at_tau: 0,
            new_params: nominal,
        },
        ScenarioEvent {
            at_tau: 4000,
            new_params: make_type_d_sag(0.5, &nominal)?,
        },
    ])?;
    let params = FilterParams::new(0.05, 1.0, 1.0)?;

    for freeze in [false, true] {
        let mut filter = WlFilter::new(Algorithm::Damtcc, params, NOMINAL_DT)?;
        filter.freeze_conjugate = freeze;
        print!(
            "{:<16}",
            if freeze {
                "strictly linear"
            } else {
                "widely linear"
            }
        );
        for tau in 0..12_000 {
            let pair = NoisyPair {
                x_noisy: scenario.sample(tau),
                d_noisy: scenario.sample(tau + 1),
            };
            let out = filter.step(&pair)?;
            if tau % 2000 == 1999 {
                print!(" {:7.3}", out.estimate.f_hat);
            }
        }
        println!("  (Hz every 2000 samples; sag at 4000)");
    }
    Ok(())
}
