//! Errors-in-variables noise and impulsive contamination.
//!
//! Every node observes `x̃(τ) = v(τ) + m(τ)` as regressor and
//! `d̃(τ) = v(τ+1) + n(τ) + i(τ)` as desired sample. `m` and `n` are circular
//! complex white Gaussian noises (real and imaginary parts each carry half the
//! variance) and `i` is a Bernoulli-Gaussian impulse on the output only.
//!
//! The three noise sources are drawn from separate ChaCha streams of the same
//! seed, so they are mutually independent and each is reproducible on its own.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::phasegen::ComplexVoltage;

const INPUT_STREAM: u64 = 0;
const OUTPUT_STREAM: u64 = 1;
const IMPULSE_STREAM: u64 = 2;

pub const DEFAULT_IMPULSE_PROB: f64 = 0.005;
pub const DEFAULT_IMPULSE_VAR: f64 = 10.0;

/// Per-node noise environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Input SNR in dB; `f64::INFINITY` disables the input noise.
    pub snr_db: f64,
    /// Output SNR in dB. When absent the output noise matches the input noise (γ = 1).
    pub output_snr_db: Option<f64>,
    /// Explicit σ_o²/σ_i². Overrides `output_snr_db`.
    pub gamma: Option<f64>,
    pub impulse_prob: f64,
    pub impulse_var: f64,
    pub seed: u64,
    /// Reuse the regressor noise of sample τ+1 as the output noise of sample τ,
    /// as a single physical sensor would.
    pub shared_measurement_noise: bool,
}

impl NoiseConfig {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db,
            output_snr_db: None,
            gamma: None,
            impulse_prob: DEFAULT_IMPULSE_PROB,
            impulse_var: DEFAULT_IMPULSE_VAR,
            seed,
            shared_measurement_noise: false,
        }
    }

    pub fn noiseless() -> Self {
        Self {
            impulse_prob: 0.0,
            ..Self::new(f64::INFINITY, 0)
        }
    }

    pub fn without_impulses(self) -> Self {
        Self {
            impulse_prob: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() {
            return Err(invalid("snr_db", "must not be NaN"));
        }
        if let Some(out) = self.output_snr_db {
            if out.is_nan() {
                return Err(invalid("output_snr_db", "must not be NaN"));
            }
            if self.gamma.is_none() && self.snr_db == f64::INFINITY && out.is_finite() {
                return Err(invalid(
                    "output_snr_db",
                    "noisy output with noiseless input needs an explicit gamma",
                ));
            }
        }
        if let Some(g) = self.gamma {
            if !(g.is_finite() && g >= 0.0) {
                return Err(invalid(
                    "gamma",
                    format!("must be finite and >= 0, got {g}"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.impulse_prob) {
            return Err(invalid(
                "impulse_prob",
                format!("must lie in [0, 1], got {}", self.impulse_prob),
            ));
        }
        if !(self.impulse_var.is_finite() && self.impulse_var >= 0.0) {
            return Err(invalid(
                "impulse_var",
                format!("must be finite and >= 0, got {}", self.impulse_var),
            ));
        }
        if self.shared_measurement_noise && self.gamma.is_some_and(|g| g != 1.0) {
            return Err(invalid(
                "gamma",
                "shared measurement noise implies gamma = 1",
            ));
        }
        Ok(())
    }

    /// Noise variance ratio σ_o²/σ_i².
    pub fn gamma(&self) -> f64 {
        if self.shared_measurement_noise {
            return 1.0;
        }
        if let Some(g) = self.gamma {
            return g;
        }
        match self.output_snr_db {
            Some(out) if !(self.snr_db.is_infinite() && out.is_infinite()) => {
                10f64.powf((self.snr_db - out) / 10.0)
            }
            _ => 1.0,
        }
    }
}

/// Observation presented to a node at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyPair {
    /// Noisy regressor ṽ(τ).
    pub x_noisy: Complex64,
    /// Noisy desired sample ṽ(τ+1).
    pub d_noisy: Complex64,
}

/// Noise variance giving `snr_db` against `signal_power`. Infinite SNR yields 0.
pub fn snr_to_variance(signal_power: f64, snr_db: f64) -> Result<f64> {
    if !(signal_power > 0.0 && signal_power.is_finite()) {
        return Err(invalid(
            "signal_power",
            format!("must be finite and > 0, got {signal_power}"),
        ));
    }
    if snr_db.is_nan() {
        return Err(invalid("snr_db", "must not be NaN"));
    }
    Ok(signal_power * 10f64.powf(-snr_db / 10.0))
}

/// `v` plus circular complex Gaussian noise of total variance `var`.
pub fn add_complex_gaussian<R: Rng + ?Sized>(v: Complex64, var: f64, rng: &mut R) -> Complex64 {
    if var == 0.0 {
        return v;
    }
    v + complex_gaussian(var, rng)
}

fn complex_gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let scale = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Bernoulli-Gaussian draw: with probability `p` a complex Gaussian of total
/// variance `var`, otherwise zero.
pub fn impulsive_sample<R: Rng + ?Sized>(p: f64, var: f64, rng: &mut R) -> Complex64 {
    let hit = rng.random::<f64>() < p;
    if hit && var > 0.0 {
        complex_gaussian(var, rng)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Piecewise-constant signal power used to turn SNRs into variances.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    /// `(start_tau, power)`, strictly increasing in `start_tau`, first at 0.
    segments: Vec<(usize, f64)>,
}

impl PowerProfile {
    pub fn constant(power: f64) -> Self {
        Self {
            segments: vec![(0, power)],
        }
    }

    pub fn piecewise(segments: Vec<(usize, f64)>) -> Result<Self> {
        match segments.first() {
            Some((0, _)) => {}
            _ => return Err(invalid("segments", "power profile must start at tau = 0")),
        }
        if segments.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid(
                "segments",
                "segment starts must be strictly increasing",
            ));
        }
        Ok(Self { segments })
    }

    /// Mean `|v|²` of the whole stream.
    pub fn empirical(clean: &[ComplexVoltage]) -> Self {
        let p = clean.iter().map(|v| v.norm_sqr()).sum::<f64>() / clean.len().max(1) as f64;
        Self::constant(p)
    }

    pub fn power_at(&self, tau: usize) -> f64 {
        let idx = self.segments.partition_point(|s| s.0 <= tau) - 1;
        self.segments[idx].1
    }
}

/// Variances `(σ_i², σ_o²)` applied at sample `tau`.
pub fn noise_variances(cfg: &NoiseConfig, power: &PowerProfile, tau: usize) -> Result<(f64, f64)> {
    let si2 = snr_to_variance(power.power_at(tau), cfg.snr_db)?;
    Ok((si2, cfg.gamma() * si2))
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic child seed; used to derive per-run and per-node seeds from a master seed.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 finalizer over the combined key.
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Turns a clean stream of `n` samples into `n − 1` noisy regressor/desired pairs.
pub fn corrupt_stream(
    clean: &[ComplexVoltage],
    cfg: &NoiseConfig,
    power: &PowerProfile,
) -> Result<Vec<NoisyPair>> {
    if clean.len() < 2 {
        return Err(Error::StreamTooShort {
            needed: 2,
            got: clean.len(),
        });
    }
    cfg.validate()?;
    let mut input_rng = substream(cfg.seed, INPUT_STREAM);
    let mut output_rng = substream(cfg.seed, OUTPUT_STREAM);
    let mut impulse_rng = substream(cfg.seed, IMPULSE_STREAM);

    let steps = clean.len() - 1;
    let mut out = Vec::with_capacity(steps);

    if cfg.shared_measurement_noise {
        let mut measured = Vec::with_capacity(clean.len());
        for (tau, v) in clean.iter().enumerate() {
            let (si2, _) = noise_variances(cfg, power, tau)?;
            measured.push(add_complex_gaussian(*v, si2, &mut input_rng));
        }
        for tau in 0..steps {
            let imp = impulsive_sample(cfg.impulse_prob, cfg.impulse_var, &mut impulse_rng);
            out.push(NoisyPair {
                x_noisy: measured[tau],
                d_noisy: measured[tau + 1] + imp,
            });
        }
        return Ok(out);
    }

    for tau in 0..steps {
        let (si2, _) = noise_variances(cfg, power, tau)?;
        let (_, so2) = noise_variances(cfg, power, tau + 1)?;
        let x_noisy = add_complex_gaussian(clean[tau], si2, &mut input_rng);
        let d = add_complex_gaussian(clean[tau + 1], so2, &mut output_rng);
        let imp = impulsive_sample(cfg.impulse_prob, cfg.impulse_var, &mut impulse_rng);
        out.push(NoisyPair {
            x_noisy,
            d_noisy: d + imp,
        });
    }
    Ok(out)
}
