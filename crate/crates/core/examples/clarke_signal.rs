//! Three-phase generation, the Clarke transform and the complex voltage
//! for a balanced grid and a type-D sag.

use damtcc::phasegen::{
    clarke, gen_three_phase, make_type_d_sag, theoretical_phasors, voltage_at, PhaseParams,
};

fn main() -> damtcc::Result<()> {
    let balanced = PhaseParams::nominal();
    let sag = make_type_d_sag(0.5, &balanced)?;

    for (name, p) in [("balanced", balanced), ("type-D d=0.5", sag)] {
        let ph = theoretical_phasors(&p);
        println!(
            "{name}: |A| = {:.6}, |B| = {:.6}, power = {:.6}",
            ph.a.norm(),
            ph.b.norm(),
            p.mean_power()
        );
        for tau in 0..4 {
            let f = gen_three_phase(&p, tau);
            let (v0, va, vb) = clarke(&f);
            let v = voltage_at(&p, tau);
            println!(
                "  τ={tau}: a={:+.4} b={:+.4} c={:+.4} -> v0={:+.1e} vα={:+.4} vβ={:+.4}  |v|={:.4}",
                f.va, f.vb, f.vc, v0, va, vb, v.norm()
            );
        }
    }
    Ok(())
}
