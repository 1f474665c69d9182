//! Three-phase voltage synthesis and the αβ complex voltage.
//!
//! Phase voltages follow
//!
//! ```text
//! v_a(τ) = V_a cos(ωτΔT + ϑ)
//! v_b(τ) = V_b cos(ωτΔT + ϑ + Δϑ_b − 2π/3)
//! v_c(τ) = V_c cos(ωτΔT + ϑ + Δϑ_c + 2π/3)
//! ```
//!
//! and are mapped to `v = v_α + j v_β` through the power-invariant Clarke
//! transform. Any such stream can be written `v(τ) = A e^{jφ(τ)} + B e^{−jφ(τ)}`
//! with `φ(τ) = ωτΔT + ϑ`; the conjugate phasor `B` vanishes exactly when the
//! system is balanced, which makes the stream second-order circular.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Complex αβ voltage sample, `v_α + j v_β`.
pub type ComplexVoltage = Complex64;

pub const NOMINAL_FREQUENCY_HZ: f64 = 50.0;
pub const NOMINAL_DT: f64 = 1.0 / 2500.0;

const TWO_THIRDS_PI: f64 = 2.0 * PI / 3.0;

/// `√(2/3)·M`, the power-invariant Clarke matrix. Rows produce (v0, vα, vβ).
pub const CLARKE: [[f64; 3]; 3] = {
    // √(2/3), √(2/3)·√2/2 = 1/√3, √(2/3)·√3/2 = 1/√2
    const K: f64 = 0.816_496_580_927_726;
    const K0: f64 = 0.577_350_269_189_625_8;
    [
        [K0, K0, K0],
        [K, -0.5 * K, -0.5 * K],
        [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    ]
};

/// Amplitudes, timing and phase offsets of one three-phase regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub amp_a: f64,
    pub amp_b: f64,
    pub amp_c: f64,
    /// System frequency in Hz.
    pub freq: f64,
    /// Sampling interval in seconds.
    pub dt: f64,
    /// Initial phase of phase `a`, radians.
    pub theta0: f64,
    /// Deviation of phase `b` from its nominal −2π/3 offset, radians.
    pub dtheta_b: f64,
    /// Deviation of phase `c` from its nominal +2π/3 offset, radians.
    pub dtheta_c: f64,
}

impl PhaseParams {
    /// Balanced system of amplitude `amp` at `freq` Hz sampled every `dt` seconds.
    pub fn balanced(amp: f64, freq: f64, dt: f64) -> Self {
        Self {
            amp_a: amp,
            amp_b: amp,
            amp_c: amp,
            freq,
            dt,
            theta0: 0.0,
            dtheta_b: 0.0,
            dtheta_c: 0.0,
        }
    }

    /// Balanced unit-amplitude 50 Hz system sampled at 2.5 kHz.
    pub fn nominal() -> Self {
        Self::balanced(1.0, NOMINAL_FREQUENCY_HZ, NOMINAL_DT)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, amp) in [
            ("amp_a", self.amp_a),
            ("amp_b", self.amp_b),
            ("amp_c", self.amp_c),
        ] {
            if !(amp.is_finite() && amp >= 0.0) {
                return Err(invalid(
                    name,
                    format!("amplitude must be finite and >= 0, got {amp}"),
                ));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        let nyquist = 0.5 / self.dt;
        if !(self.freq > 0.0 && self.freq < nyquist) {
            return Err(invalid(
                "freq",
                format!("must lie in (0, {nyquist}) Hz, got {}", self.freq),
            ));
        }
        for (name, v) in [
            ("theta0", self.theta0),
            ("dtheta_b", self.dtheta_b),
            ("dtheta_c", self.dtheta_c),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_balanced(&self) -> bool {
        self.amp_a == self.amp_b
            && self.amp_b == self.amp_c
            && self.dtheta_b == 0.0
            && self.dtheta_c == 0.0
    }

    /// Angular advance per sample, `ωΔT`.
    pub fn omega_dt(&self) -> f64 {
        2.0 * PI * self.freq * self.dt
    }

    /// Instantaneous angle `ωτΔT + ϑ`.
    pub fn angle(&self, tau: usize) -> f64 {
        self.omega_dt() * tau as f64 + self.theta0
    }

    /// Time-averaged power `E|v|² = |A|² + |B|²` of the complex voltage.
    pub fn mean_power(&self) -> f64 {
        let p = theoretical_phasors(self);
        p.a.norm_sqr() + p.b.norm_sqr()
    }
}

/// One sample of the three phase voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePhaseFrame {
    pub tau: usize,
    pub va: f64,
    pub vb: f64,
    pub vc: f64,
}

/// Positive- and negative-sequence phasors: `v(τ) = A e^{jφ} + B e^{−jφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasorPair {
    pub a: Complex64,
    pub b: Complex64,
}

impl PhasorPair {
    pub fn reconstruct(&self, angle: f64) -> ComplexVoltage {
        self.a * Complex64::from_polar(1.0, angle) + self.b * Complex64::from_polar(1.0, -angle)
    }
}

pub fn gen_three_phase(p: &PhaseParams, tau: usize) -> ThreePhaseFrame {
    let phi = p.angle(tau);
    ThreePhaseFrame {
        tau,
        va: p.amp_a * phi.cos(),
        vb: p.amp_b * (phi + p.dtheta_b - TWO_THIRDS_PI).cos(),
        vc: p.amp_c * (phi + p.dtheta_c + TWO_THIRDS_PI).cos(),
    }
}

/// Clarke transform; returns `(v0, vα, vβ)`.
pub fn clarke(frame: &ThreePhaseFrame) -> (f64, f64, f64) {
    let x = [frame.va, frame.vb, frame.vc];
    let row = |r: &[f64; 3]| r[0] * x[0] + r[1] * x[1] + r[2] * x[2];
    (row(&CLARKE[0]), row(&CLARKE[1]), row(&CLARKE[2]))
}

pub fn complex_voltage(v_alpha: f64, v_beta: f64) -> ComplexVoltage {
    Complex64::new(v_alpha, v_beta)
}

/// Complex voltage of `p` at sample `tau` via synthesis and the Clarke transform.
/// The zero-sequence component is dropped.
pub fn voltage_at(p: &PhaseParams, tau: usize) -> ComplexVoltage {
    let (_, alpha, beta) = clarke(&gen_three_phase(p, tau));
    complex_voltage(alpha, beta)
}

pub fn theoretical_phasors(p: &PhaseParams) -> PhasorPair {
    let k = 6f64.sqrt() / 6.0;
    let a = Complex64::new(p.amp_a, 0.0)
        + p.amp_b * Complex64::from_polar(1.0, p.dtheta_b)
        + p.amp_c * Complex64::from_polar(1.0, p.dtheta_c);
    let b = Complex64::new(p.amp_a, 0.0)
        + p.amp_b * Complex64::from_polar(1.0, -(p.dtheta_b + TWO_THIRDS_PI))
        + p.amp_c * Complex64::from_polar(1.0, -(p.dtheta_c - TWO_THIRDS_PI));
    PhasorPair { a: k * a, b: k * b }
}

/// Type-D sag of characteristic voltage `d` applied to `nominal`.
///
/// The phasor set is `V_a = d`, `V_b = −d/2 − j√3/2`, `V_c = −d/2 + j√3/2`
/// (per unit of `nominal.amp_a`), converted to amplitude and deviation from the
/// ∓2π/3 nominal phase. Timing and initial phase are copied from `nominal`.
/// `d = 1` returns the balanced system.
pub fn make_type_d_sag(d: f64, nominal: &PhaseParams) -> Result<PhaseParams> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(invalid(
            "d",
            format!("sag depth must lie in (0, 1], got {d}"),
        ));
    }
    let v = nominal.amp_a;
    if d == 1.0 {
        return Ok(PhaseParams {
            amp_b: v,
            amp_c: v,
            dtheta_b: 0.0,
            dtheta_c: 0.0,
            ..*nominal
        });
    }
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    let pb = Complex64::new(-d / 2.0, -half_sqrt3);
    let pc = Complex64::new(-d / 2.0, half_sqrt3);
    Ok(PhaseParams {
        amp_a: v * d,
        amp_b: v * pb.norm(),
        amp_c: v * pc.norm(),
        dtheta_b: pb.arg() + TWO_THIRDS_PI,
        dtheta_c: pc.arg() - TWO_THIRDS_PI,
        ..*nominal
    })
}

/// Regime switch taking effect at sample `at_tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioEvent {
    pub at_tau: usize,
    pub new_params: PhaseParams,
}

/// Validated, time-ordered sequence of regimes. The first regime starts at τ = 0.
///
/// Sample angles are taken from the absolute index τ, so phase is continuous
/// across switches whenever frequency and initial phase are unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    events: Vec<ScenarioEvent>,
}

impl Scenario {
    pub fn new(events: Vec<ScenarioEvent>) -> Result<Self> {
        let first = events
            .first()
            .ok_or_else(|| invalid("events", "scenario needs at least one event"))?;
        if first.at_tau != 0 {
            return Err(invalid(
                "events",
                format!("first event must start at tau = 0, got {}", first.at_tau),
            ));
        }
        for (i, pair) in events.windows(2).enumerate() {
            if pair[1].at_tau <= pair[0].at_tau {
                return Err(Error::UnsortedEvents {
                    index: i + 1,
                    at: pair[1].at_tau,
                    previous: pair[0].at_tau,
                });
            }
        }
        for e in &events {
            e.new_params.validate()?;
        }
        Ok(Self { events })
    }

    pub fn constant(params: PhaseParams) -> Result<Self> {
        Self::new(vec![ScenarioEvent {
            at_tau: 0,
            new_params: params,
        }])
    }

    pub fn events(&self) -> &[ScenarioEvent] {
        &self.events
    }

    /// Regime active at sample `tau`.
    pub fn params_at(&self, tau: usize) -> &PhaseParams {
        let idx = self.events.partition_point(|e| e.at_tau <= tau) - 1;
        &self.events[idx].new_params
    }

    pub fn sample(&self, tau: usize) -> ComplexVoltage {
        voltage_at(self.params_at(tau), tau)
    }

    /// Analytic mean power of each regime, keyed by its start sample.
    pub fn power_profile(&self) -> Vec<(usize, f64)> {
        self.events
            .iter()
            .map(|e| (e.at_tau, e.new_params.mean_power()))
            .collect()
    }
}

/// `n` consecutive complex voltages starting at τ = 0.
pub fn scenario_stream(events: &[ScenarioEvent], n: usize) -> Result<Vec<ComplexVoltage>> {
    if n == 0 {
        return Err(invalid("n", "stream length must be > 0"));
    }
    let scenario = Scenario::new(events.to_vec())?;
    Ok((0..n).map(|tau| scenario.sample(tau)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frame(va: f64, vb: f64, vc: f64) -> ThreePhaseFrame {
        ThreePhaseFrame { tau: 0, va, vb, vc }
    }

    #[test]
    fn unit_balanced_at_origin() {
        let f = gen_three_phase(&PhaseParams::nominal(), 0);
        assert_abs_diff_eq!(f.va, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.vb, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.vc, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let f = gen_three_phase(&PhaseParams::balanced(0.0, 50.0, NOMINAL_DT), 17);
        assert_eq!((f.va, f.vb, f.vc), (0.0, 0.0, 0.0));
    }

    #[test]
    fn tau_twelve_matches_direct_cosines() {
        // 2π·50·12/2500 = 0.48π
        let phi = 0.48 * PI;
        let f = gen_three_phase(&PhaseParams::nominal(), 12);
        assert_abs_diff_eq!(f.va, phi.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.vb, (phi - 2.0 * PI / 3.0).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.vc, (phi + 2.0 * PI / 3.0).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.va, 0.062_790_519_529_313_37, epsilon = 1e-14);
    }

    #[test]
    fn clarke_examples() {
        let (v0, a, b) = clarke(&frame(1.0, -0.5, -0.5));
        assert_abs_diff_eq!(v0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a, 1.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);

        assert_eq!(clarke(&frame(0.0, 0.0, 0.0)), (0.0, 0.0, 0.0));

        let (v0, a, b) = clarke(&frame(1.0, 1.0, 1.0));
        assert_abs_diff_eq!(v0, 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn clarke_constants_match_closed_form() {
        let k = (2.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(CLARKE[0][0], k * 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(CLARKE[1][0], k, epsilon = 1e-15);
        assert_abs_diff_eq!(CLARKE[2][1], k * 3f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn clarke_is_orthogonal() {
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| CLARKE[k][i] * CLARKE[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn complex_voltage_examples() {
        let v = complex_voltage(1.5f64.sqrt(), 0.0);
        assert_eq!(v, Complex64::new(1.5f64.sqrt(), 0.0));
        assert_eq!(complex_voltage(0.0, 0.0), Complex64::new(0.0, 0.0));
        let v = complex_voltage(0.3, -0.4);
        assert_eq!(v, Complex64::new(0.3, -0.4));
        assert_abs_diff_eq!(v.norm(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn balanced_phasors() {
        let p = theoretical_phasors(&PhaseParams::nominal());
        assert_abs_diff_eq!(p.a.re, 1.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.a.im, 0.0, epsilon = 1e-15);
        assert!(p.b.norm() < 1e-15);
    }

    #[test]
    fn single_phase_phasors() {
        let params = PhaseParams {
            amp_b: 0.0,
            amp_c: 0.0,
            ..PhaseParams::nominal()
        };
        let p = theoretical_phasors(&params);
        let k = 6f64.sqrt() / 6.0;
        assert_abs_diff_eq!((p.a - k).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((p.b - k).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn type_d_half_depth() {
        let p = make_type_d_sag(0.5, &PhaseParams::nominal()).unwrap();
        // |−0.25 ∓ j√3/2| and arg(V_b) + 2π/3, computed from the raw phasor.
        let mag = (0.25f64 * 0.25 + 0.75).sqrt();
        let dth_b = (-(3f64.sqrt()) / 2.0).atan2(-0.25) + 2.0 * PI / 3.0;
        assert_abs_diff_eq!(p.amp_a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.amp_b, mag, epsilon = 1e-15);
        assert_abs_diff_eq!(p.amp_c, mag, epsilon = 1e-15);
        assert_abs_diff_eq!(p.amp_b, 0.901_387_818_865_997_3, epsilon = 1e-12);
        assert_abs_diff_eq!(p.dtheta_b, dth_b, epsilon = 1e-15);
        assert_abs_diff_eq!(p.dtheta_b, 0.242_563_874_095_485, epsilon = 1e-12);
        assert_abs_diff_eq!(p.dtheta_c, -dth_b, epsilon = 1e-15);
        assert!(!p.is_balanced());
    }

    #[test]
    fn type_d_phase_b_phasor_matches_definition() {
        let p = make_type_d_sag(0.5, &PhaseParams::nominal()).unwrap();
        let pb = Complex64::from_polar(p.amp_b, p.dtheta_b - 2.0 * PI / 3.0);
        assert_abs_diff_eq!(
            (pb - Complex64::new(-0.25, -(3f64.sqrt()) / 2.0)).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn type_d_half_depth_phasor_oracle() {
        // Hand evaluation for d = 0.5: V_b e^{jΔϑ_b} = 0.875 + 0.2165j, V_c e^{jΔϑ_c} its
        // conjugate, so A = √6/6·2.25; the conjugate-sequence terms sum to −1.25, B = √6/6·(−0.75).
        let p = theoretical_phasors(&make_type_d_sag(0.5, &PhaseParams::nominal()).unwrap());
        let k = 6f64.sqrt() / 6.0;
        assert_abs_diff_eq!((p.a - k * 2.25).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((p.b + k * 0.75).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn type_d_unit_depth_is_balanced() {
        let nominal = PhaseParams::nominal();
        let p = make_type_d_sag(1.0, &nominal).unwrap();
        assert!(p.is_balanced());
        assert_eq!(p, nominal);
    }

    #[test]
    fn type_d_rejects_out_of_range() {
        for d in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(
                make_type_d_sag(d, &PhaseParams::nominal()).is_err(),
                "d = {d}"
            );
        }
    }

    #[test]
    fn type_d_is_noncircular_below_unity() {
        for d in [0.1, 0.3, 0.5, 0.9, 0.99] {
            let p = theoretical_phasors(&make_type_d_sag(d, &PhaseParams::nominal()).unwrap());
            assert!(p.b.norm() > 1e-3, "d = {d}");
        }
    }

    #[test]
    fn reconstruction_paths_agree_for_type_d() {
        let params = PhaseParams {
            theta0: 0.3,
            ..make_type_d_sag(0.5, &PhaseParams::nominal()).unwrap()
        };
        let phasors = theoretical_phasors(&params);
        for tau in 0..200 {
            let direct = voltage_at(&params, tau);
            let rebuilt = phasors.reconstruct(params.angle(tau));
            assert!((direct - rebuilt).norm() < 1e-10, "tau = {tau}");
        }
    }

    #[test]
    fn single_balanced_event_is_circular() {
        let ev = ScenarioEvent {
            at_tau: 0,
            new_params: PhaseParams::nominal(),
        };
        let s = scenario_stream(&[ev], 3).unwrap();
        let rot = Complex64::from_polar(1.0, PhaseParams::nominal().omega_dt());
        assert!((s[1] - s[0] * rot).norm() < 1e-12);
        assert!((s[2] - s[1] * rot).norm() < 1e-12);
    }

    #[test]
    fn one_sample_stream() {
        let ev = ScenarioEvent {
            at_tau: 0,
            new_params: PhaseParams::nominal(),
        };
        let s = scenario_stream(&[ev], 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0] - 1.5f64.sqrt()).norm() < 1e-15);
        assert!(scenario_stream(&[ev], 0).is_err());
    }

    #[test]
    fn circularity_breaks_after_sag() {
        let nominal = PhaseParams::nominal();
        let events = [
            ScenarioEvent {
                at_tau: 0,
                new_params: nominal,
            },
            ScenarioEvent {
                at_tau: 500,
                new_params: make_type_d_sag(0.5, &nominal).unwrap(),
            },
        ];
        let s = scenario_stream(&events, 1000).unwrap();
        let rot = Complex64::from_polar(1.0, nominal.omega_dt());
        let residual = |t: usize| (s[t + 1] - s[t] * rot).norm();
        assert!((0..499).all(|t| residual(t) < 1e-12));
        let worst_after = (500..999).map(residual).fold(0.0, f64::max);
        assert!(worst_after > 1e-3, "worst residual after sag {worst_after}");
    }

    #[test]
    fn scenario_rejects_unsorted_or_duplicate_events() {
        let p = PhaseParams::nominal();
        let ev = |at_tau| ScenarioEvent {
            at_tau,
            new_params: p,
        };
        assert!(matches!(
            Scenario::new(vec![ev(0), ev(10), ev(10)]),
            Err(Error::UnsortedEvents { index: 2, .. })
        ));
        assert!(matches!(
            Scenario::new(vec![ev(0), ev(10), ev(5)]),
            Err(Error::UnsortedEvents { .. })
        ));
        assert!(Scenario::new(vec![ev(3)]).is_err());
        assert!(Scenario::new(vec![]).is_err());
    }

    #[test]
    fn params_validation() {
        let good = PhaseParams::nominal();
        assert!(good.validate().is_ok());
        assert!(PhaseParams {
            freq: 1250.0,
            ..good
        }
        .validate()
        .is_err());
        assert!(PhaseParams { freq: 0.0, ..good }.validate().is_err());
        assert!(PhaseParams { dt: 0.0, ..good }.validate().is_err());
        assert!(PhaseParams {
            amp_b: -1.0,
            ..good
        }
        .validate()
        .is_err());
    }

    #[test]
    fn balanced_predicate() {
        let p = PhaseParams::nominal();
        assert!(p.is_balanced());
        assert!(!PhaseParams { amp_c: 0.9, ..p }.is_balanced());
        assert!(!PhaseParams {
            dtheta_b: 0.01,
            ..p
        }
        .is_balanced());
    }

    #[test]
    fn mean_power_is_three_halves_for_unit_balanced() {
        assert_abs_diff_eq!(PhaseParams::nominal().mean_power(), 1.5, epsilon = 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = PhaseParams> {
            (
                0.0..2.0f64,
                0.0..2.0f64,
                0.0..2.0f64,
                1.0..1000.0f64,
                -PI..PI,
                -1.0..1.0f64,
                -1.0..1.0f64,
            )
                .prop_map(|(a, b, c, f, th, db, dc)| PhaseParams {
                    amp_a: a,
                    amp_b: b,
                    amp_c: c,
                    freq: f,
                    dt: NOMINAL_DT,
                    theta0: th,
                    dtheta_b: db,
                    dtheta_c: dc,
                })
        }

        proptest! {
            #[test]
            fn clarke_preserves_norm(va in -10.0..10.0f64, vb in -10.0..10.0f64, vc in -10.0..10.0f64) {
                let (v0, a, b) = clarke(&frame(va, vb, vc));
                let lhs = v0 * v0 + a * a + b * b;
                let rhs = va * va + vb * vb + vc * vc;
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }

            #[test]
            fn reconstruction_equivalence(p in params(), tau in 0usize..5000) {
                let direct = voltage_at(&p, tau);
                let rebuilt = theoretical_phasors(&p).reconstruct(p.angle(tau));
                prop_assert!((direct - rebuilt).norm() < 1e-10);
            }

            #[test]
            fn balanced_rotation(amp in 0.01..5.0f64, f in 1.0..100.0f64, tau in 0usize..10_000) {
                let p = PhaseParams::balanced(amp, f, NOMINAL_DT);
                let rot = Complex64::from_polar(1.0, p.omega_dt());
                let lhs = voltage_at(&p, tau + 1);
                let rhs = voltage_at(&p, tau) * rot;
                prop_assert!((lhs - rhs).norm() < 1e-12 * amp.max(1.0));
                prop_assert!((lhs.norm() - voltage_at(&p, tau).norm()).abs() < 1e-12 * amp.max(1.0));
            }
        }
    }
}
