//! Distributed frequency estimation for three-phase power systems.
//!
//! Each node of a sensor network observes a noisy copy of the complex
//! αβ voltage of a (possibly unbalanced) three-phase system. Nodes run a
//! widely-linear predictor trained with an augmented complex maximum total
//! correntropy criterion, which tolerates noise on both the regressor and the
//! desired sample and suppresses impulsive outliers, and exchange their
//! intermediate weights through adapt-then-combine diffusion.
//!
//! Module map:
//!
//! - [`phasegen`]: three-phase synthesis, Clarke transform, sag scenarios
//! - [`noise`]: errors-in-variables Gaussian noise and Bernoulli-Gaussian impulses
//! - [`wlfilter`]: widely-linear prediction, correntropy gradients, ACLMS baseline,
//!   frequency extraction
//! - [`diffusion`]: topologies, Metropolis weights, the network driver
//! - [`analysis`]: verification oracles, stability bound, steady-state metrics
//! - [`config`] / [`experiment`]: TOML experiment descriptions, Monte-Carlo runners
//!   and CSV output

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod phasegen;
pub mod wlfilter;

pub use error::{Error, Result};
pub use num_complex::Complex64;
