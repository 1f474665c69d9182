//! Analytic gradients against finite differences, and the exact weight solver.

use damtcc::analysis::{finite_difference_gradients, solve_wl_weights};
use damtcc::phasegen::{make_type_d_sag, voltage_at, PhaseParams, NOMINAL_DT};
use damtcc::wlfilter::{
    damtcc_gradients, error, frequency_estimate, AugmentedWeights, FilterParams,
};
use damtcc::Complex64;

fn main() -> damtcc::Result<()> {
    let w = AugmentedWeights::new(Complex64::new(0.9, -0.2), Complex64::new(0.1, 0.05));
    let (v, d) = (Complex64::new(1.1, 0.4), Complex64::new(0.8, 0.9));
    let p = FilterParams::new(0.01, 1.0, 1.0)?;
    let analytic = damtcc_gradients(error(d, &w, v), v, &w, &p)?;
    let (fd_h, fd_g) = finite_difference_gradients(&w, v, d, &p, 1e-6);
    println!("∂J/∂h*: analytic {:.9}  numeric {:.9}", analytic.h, fd_h);
    println!("∂J/∂g*: analytic {:.9}  numeric {:.9}", analytic.g, fd_g);

    let sag = make_type_d_sag(0.5, &PhaseParams::nominal())?;
    let oracle = solve_wl_weights(&[
        voltage_at(&sag, 0),
        voltage_at(&sag, 1),
        voltage_at(&sag, 2),
    ])?;
    let est = frequency_estimate(&oracle, NOMINAL_DT);
    println!(
        "sag oracle: h = {:.6}, g = {:.6}, f = {:.9} Hz",
        oracle.h, oracle.g, est.f_hat
    );
    Ok(())
}
