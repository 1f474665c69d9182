//! Widely-linear one-step predictor and its adaptation rules.
//!
//! The predictor is `v̂(τ+1) = v(τ)·h* + v*(τ)·g*`. For a balanced system the
//! exact weights are `h = e^{−jωΔT}`, `g = 0`; an unbalanced system needs the
//! conjugate weight `g` as well.
//!
//! The correntropy update ascends the instantaneous total-correntropy objective
//!
//! ```text
//! J = exp(−|e|² / (2σ²·D)),   D = |h|² + |g|² + γ
//! ```
//!
//! using Wirtinger gradients with respect to `h*` and `g*`:
//!
//! ```text
//! ∂J/∂h* = J · (e*·v·D + |e|²·h) / (2σ²D²)
//! ∂J/∂g* = J · (e*·v*·D + |e|²·g) / (2σ²D²)
//! ```
//!
//! The normalization by `D` handles noise on the regressor (total least
//! squares) and the exponential factor shuts the update off for outliers.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::noise::NoisyPair;

/// Standard and conjugate weight of a single-tap widely-linear predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedWeights {
    pub h: Complex64,
    pub g: Complex64,
}

impl AugmentedWeights {
    pub const fn new(h: Complex64, g: Complex64) -> Self {
        Self { h, g }
    }

    /// `h = 1`, `g = 0`: a 0 Hz initial estimate.
    pub const fn initial() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub const fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.g.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.g.is_finite()
    }
}

impl Default for AugmentedWeights {
    fn default() -> Self {
        Self::initial()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Step size μ.
    pub mu: f64,
    /// Kernel width σ.
    pub sigma: f64,
    /// Noise variance ratio γ = σ_o²/σ_i².
    pub gamma: f64,
}

impl FilterParams {
    pub fn new(mu: f64, sigma: f64, gamma: f64) -> Result<Self> {
        let p = Self { mu, sigma, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(invalid(
                "mu",
                format!("must be finite and > 0, got {}", self.mu),
            ));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid(
                "sigma",
                format!("must be finite and > 0, got {}", self.sigma),
            ));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid(
                "gamma",
                format!("must be finite and >= 0, got {}", self.gamma),
            ));
        }
        Ok(())
    }
}

/// Augmented regressor `x = [v, v*]ᵀ` and the desired next sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorPair {
    pub x: [Complex64; 2],
    pub d: Complex64,
}

impl RegressorPair {
    pub fn from_sample(v: Complex64, d: Complex64) -> Self {
        Self {
            x: [v, v.conj()],
            d,
        }
    }

    /// `d − wᴴx`.
    pub fn error(&self, w: &AugmentedWeights) -> Complex64 {
        self.d - (w.h.conj() * self.x[0] + w.g.conj() * self.x[1])
    }
}

impl From<NoisyPair> for RegressorPair {
    fn from(p: NoisyPair) -> Self {
        Self::from_sample(p.x_noisy, p.d_noisy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    pub f_hat: f64,
    /// False when the discriminant `Im(h)² − |g|²` was negative or the arcsine
    /// argument left `[−1, 1]`; `f_hat` is then computed from the clamped value.
    pub valid: bool,
}

/// Which local update a node runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Augmented complex maximum total correntropy.
    Damtcc,
    /// Augmented complex LMS baseline.
    Daclms,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Damtcc => "damtcc",
            Algorithm::Daclms => "daclms",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "damtcc" => Ok(Algorithm::Damtcc),
            "daclms" => Ok(Algorithm::Daclms),
            other => Err(invalid("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

pub fn predict(w: &AugmentedWeights, v: Complex64) -> Complex64 {
    v * w.h.conj() + v.conj() * w.g.conj()
}

pub fn error(d: Complex64, w: &AugmentedWeights, v: Complex64) -> Complex64 {
    d - predict(w, v)
}

/// Wirtinger gradients of the instantaneous correntropy objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradients {
    pub h: Complex64,
    pub g: Complex64,
}

impl Gradients {
    pub const ZERO: Gradients = Gradients {
        h: Complex64::new(0.0, 0.0),
        g: Complex64::new(0.0, 0.0),
    };
}

/// Exponential weight `exp(−|e|²/(2σ²D))` applied to the update.
pub fn correntropy_weight(e: Complex64, w: &AugmentedWeights, p: &FilterParams) -> Result<f64> {
    let denom = w.norm_sqr() + p.gamma;
    if denom <= 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok((-e.norm_sqr() / (2.0 * p.sigma * p.sigma * denom)).exp())
}

pub fn damtcc_gradients(
    e: Complex64,
    v: Complex64,
    w: &AugmentedWeights,
    p: &FilterParams,
) -> Result<Gradients> {
    let denom = w.norm_sqr() + p.gamma;
    if denom <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let e2 = e.norm_sqr();
    let two_s2 = 2.0 * p.sigma * p.sigma;
    let kernel = (-e2 / (two_s2 * denom)).exp();
    let scale = kernel / (two_s2 * denom * denom);
    let ec = e.conj();
    Ok(Gradients {
        h: (ec * v * denom + w.h * e2) * scale,
        g: (ec * v.conj() * denom + w.g * e2) * scale,
    })
}

/// Local correntropy ascent step; returns the intermediate weights `(Ψ, Υ)`.
pub fn damtcc_adapt(w: &AugmentedWeights, grads: &Gradients, p: &FilterParams) -> AugmentedWeights {
    AugmentedWeights {
        h: w.h + grads.h * p.mu,
        g: w.g + grads.g * p.mu,
    }
}

/// Augmented CLMS step `h + μe*v`, `g + μe*v*`.
pub fn daclms_adapt(w: &AugmentedWeights, e: Complex64, v: Complex64, mu: f64) -> AugmentedWeights {
    let ec = e.conj();
    AugmentedWeights {
        h: w.h + ec * v * mu,
        g: w.g + ec * v.conj() * mu,
    }
}

/// One local update of `algorithm` on `pair`. Returns the intermediate weights
/// and the a-priori error. With `freeze_conjugate` the conjugate weight is
/// pinned to zero, giving the strictly-linear special case.
pub fn local_update(
    algorithm: Algorithm,
    w: &AugmentedWeights,
    pair: &NoisyPair,
    p: &FilterParams,
    freeze_conjugate: bool,
) -> Result<(AugmentedWeights, Complex64)> {
    let v = pair.x_noisy;
    let e = error(pair.d_noisy, w, v);
    let mut next = match algorithm {
        Algorithm::Damtcc => damtcc_adapt(w, &damtcc_gradients(e, v, w, p)?, p),
        Algorithm::Daclms => daclms_adapt(w, e, v, p.mu),
    };
    if freeze_conjugate {
        next.g = Complex64::new(0.0, 0.0);
    }
    Ok((next, e))
}

/// Frequency implied by widely-linear weights.
///
/// `f̂ = arcsin(Im(h + a·g)) / (2πΔT)` with
/// `a = (−j·Im(h) + j·√(Im(h)² − |g|²)) / g`. At `g = 0` the product `a·g`
/// takes its limit `−j·Im(h) + j·|Im(h)|`.
pub fn frequency_estimate(w: &AugmentedWeights, dt: f64) -> FrequencyEstimate {
    let im_h = w.h.im;
    let disc = im_h * im_h - w.g.norm_sqr();
    let mut valid = disc >= 0.0 && w.is_finite();
    let root = disc.max(0.0).sqrt();
    let j = Complex64::new(0.0, 1.0);
    let ag = if w.g == Complex64::new(0.0, 0.0) {
        j * (root - im_h)
    } else {
        let a = (-j * im_h + j * root) / w.g;
        a * w.g
    };
    let mut s = (w.h + ag).im;
    if !(-1.0..=1.0).contains(&s) {
        valid = false;
        s = s.clamp(-1.0, 1.0);
    }
    if s.is_nan() {
        return FrequencyEstimate {
            f_hat: 0.0,
            valid: false,
        };
    }
    FrequencyEstimate {
        f_hat: s.asin() / (2.0 * std::f64::consts::PI * dt),
        valid,
    }
}

/// What one filter step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub error: Complex64,
    pub estimate: FrequencyEstimate,
}

/// Stand-alone (non-diffusion) widely-linear frequency tracker.
#[derive(Debug, Clone)]
pub struct WlFilter {
    pub weights: AugmentedWeights,
    pub params: FilterParams,
    pub algorithm: Algorithm,
    pub freeze_conjugate: bool,
    pub dt: f64,
}

impl WlFilter {
    pub fn new(algorithm: Algorithm, params: FilterParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self {
            weights: AugmentedWeights::initial(),
            params,
            algorithm,
            freeze_conjugate: false,
            dt,
        })
    }

    pub fn with_weights(mut self, weights: AugmentedWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn step(&mut self, pair: &NoisyPair) -> Result<StepOutput> {
        let (next, error) = local_update(
            self.algorithm,
            &self.weights,
            pair,
            &self.params,
            self.freeze_conjugate,
        )?;
        self.weights = next;
        Ok(StepOutput {
            error,
            estimate: frequency_estimate(&self.weights, self.dt),
        })
    }
}
