//! TOML experiment configuration.
//!
//! ```toml
//! iters = 5000
//! monte_carlo_runs = 20
//! seed = 7
//! algorithm = "both"          # damtcc | daclms | both
//!
//! [topology]
//! fixture = "topology1"       # or: nodes = 4, edges = [[0, 1], [1, 2], [2, 3]]
//!
//! [signal]
//! freq = 50.0
//! dt = 0.0004
//!
//! [noise]
//! snr_db = 30.0               # or one value per node
//! impulse_prob = 0.005
//! impulse_var = 10.0
//!
//! [filter]
//! mu = 0.01
//! sigma = 1.0
//!
//! [[scenario]]
//! at = 0
//! kind = "balanced"
//!
//! [[scenario]]
//! at = 2500
//! kind = "sag-d"
//! depth = 0.5
//! ```
//!
//! Every section is optional. Unknown keys are rejected.

use serde::Deserialize;

use crate::diffusion::NetworkTopology;
use crate::error::{Error, Result};
use crate::noise::{NoiseConfig, DEFAULT_IMPULSE_PROB, DEFAULT_IMPULSE_VAR};
use crate::phasegen::{
    make_type_d_sag, PhaseParams, Scenario, ScenarioEvent, NOMINAL_DT, NOMINAL_FREQUENCY_HZ,
};
use crate::wlfilter::{Algorithm, FilterParams};

/// Which algorithms an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Damtcc,
    Daclms,
    #[default]
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            Self::Damtcc => vec![Algorithm::Damtcc],
            Self::Daclms => vec![Algorithm::Daclms],
            Self::Both => vec![Algorithm::Damtcc, Algorithm::Daclms],
        }
    }
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "damtcc" => Ok(Self::Damtcc),
            "daclms" => Ok(Self::Daclms),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!(
                "unknown algorithm `{other}` (expected damtcc, daclms or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerNode {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerNode {
    fn expand(&self, n: usize, key: &str) -> Result<Vec<f64>> {
        match self {
            Self::Scalar(v) => Ok(vec![*v; n]),
            Self::List(v) if v.len() == n => Ok(v.clone()),
            Self::List(v) => Err(Error::Config(format!(
                "{key}: expected one value per node ({n}), got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    fixture: Option<String>,
    nodes: Option<usize>,
    edges: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSignal {
    freq: f64,
    dt: f64,
    amplitude: f64,
    theta0: f64,
}

impl Default for RawSignal {
    fn default() -> Self {
        Self {
            freq: NOMINAL_FREQUENCY_HZ,
            dt: NOMINAL_DT,
            amplitude: 1.0,
            theta0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawNoise {
    snr_db: PerNode,
    output_snr_db: Option<PerNode>,
    gamma: Option<f64>,
    impulse_prob: f64,
    impulse_var: f64,
    shared_measurement_noise: bool,
}

impl Default for RawNoise {
    fn default() -> Self {
        Self {
            snr_db: PerNode::Scalar(30.0),
            output_snr_db: None,
            gamma: None,
            impulse_prob: DEFAULT_IMPULSE_PROB,
            impulse_var: DEFAULT_IMPULSE_VAR,
            shared_measurement_noise: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawFilter {
    mu: f64,
    sigma: f64,
    daclms_mu: Option<f64>,
    freeze_conjugate: bool,
}

impl Default for RawFilter {
    fn default() -> Self {
        Self {
            mu: 0.01,
            sigma: 1.0,
            daclms_mu: None,
            freeze_conjugate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    at: usize,
    kind: String,
    depth: Option<f64>,
    freq: Option<f64>,
    amp_a: Option<f64>,
    amp_b: Option<f64>,
    amp_c: Option<f64>,
    dtheta_b: Option<f64>,
    dtheta_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    snr_db: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawStability {
    multipliers: Option<Vec<f64>>,
    iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    topology: RawTopology,
    #[serde(default)]
    signal: RawSignal,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    filter: RawFilter,
    #[serde(default)]
    scenario: Vec<RawEvent>,
    iters: Option<usize>,
    monte_carlo_runs: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    algorithm: AlgorithmChoice,
    output: Option<String>,
    steady_window: Option<usize>,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    stability: RawStability,
}

/// Per-node noise settings before seeding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeNoise {
    pub snr_db: f64,
    pub output_snr_db: Option<f64>,
}

/// Validated experiment configuration with all defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: NetworkTopology,
    pub node_noise: Vec<NodeNoise>,
    pub gamma: Option<f64>,
    pub impulse_prob: f64,
    pub impulse_var: f64,
    pub shared_measurement_noise: bool,
    pub mu: f64,
    pub sigma: f64,
    pub daclms_mu: Option<f64>,
    pub freeze_conjugate: bool,
    pub nominal: PhaseParams,
    pub scenario: Scenario,
    pub iters: usize,
    pub monte_carlo_runs: usize,
    pub seed: u64,
    pub algorithm: AlgorithmChoice,
    pub output: Option<String>,
    pub steady_window: usize,
    pub sweep_snr_db: Vec<f64>,
    pub stability_multipliers: Vec<f64>,
    pub stability_iters: usize,
}

pub const DEFAULT_ITERS: usize = 5000;
pub const DEFAULT_SWEEP_SNR_DB: [f64; 7] = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
pub const DEFAULT_STABILITY_MULTIPLIERS: [f64; 2] = [0.1, 50.0];

fn build_topology(raw: &RawTopology) -> Result<NetworkTopology> {
    match (&raw.fixture, raw.nodes, &raw.edges) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(Error::Config(
            "topology: give either `fixture` or `nodes`/`edges`, not both".into(),
        )),
        (Some(name), None, None) => match name.as_str() {
            "topology1" => Ok(NetworkTopology::topology1()),
            "topology2" => Ok(NetworkTopology::topology2()),
            other => Err(Error::Config(format!(
                "topology: unknown fixture `{other}` (expected topology1 or topology2)"
            ))),
        },
        (None, Some(n), edges) => NetworkTopology::new(n, edges.as_deref().unwrap_or(&[])),
        (None, None, Some(_)) => Err(Error::Config("topology: `edges` requires `nodes`".into())),
        (None, None, None) => Ok(NetworkTopology::topology1()),
    }
}

fn build_event(raw: &RawEvent, nominal: &PhaseParams) -> Result<ScenarioEvent> {
    let base = PhaseParams {
        freq: raw.freq.unwrap_or(nominal.freq),
        ..*nominal
    };
    let allowed: &[&str] = match raw.kind.as_str() {
        "balanced" => &["freq"],
        "sag-d" => &["freq", "depth"],
        "custom" => &["freq", "amp_a", "amp_b", "amp_c", "dtheta_b", "dtheta_c"],
        other => {
            return Err(Error::Config(format!(
                "scenario at {}: unknown kind `{other}` (expected balanced, sag-d or custom)",
                raw.at
            )))
        }
    };
    let present = [
        ("depth", raw.depth.is_some()),
        ("amp_a", raw.amp_a.is_some()),
        ("amp_b", raw.amp_b.is_some()),
        ("amp_c", raw.amp_c.is_some()),
        ("dtheta_b", raw.dtheta_b.is_some()),
        ("dtheta_c", raw.dtheta_c.is_some()),
    ];
    if let Some((key, _)) = present.iter().find(|(k, set)| *set && !allowed.contains(k)) {
        return Err(Error::Config(format!(
            "scenario at {}: `{key}` is not valid for kind `{}`",
            raw.at, raw.kind
        )));
    }
    let new_params = match raw.kind.as_str() {
        "balanced" => base,
        "sag-d" => make_type_d_sag(raw.depth.unwrap_or(0.5), &base)?,
        _ => PhaseParams {
            amp_a: raw.amp_a.unwrap_or(base.amp_a),
            amp_b: raw.amp_b.unwrap_or(base.amp_b),
            amp_c: raw.amp_c.unwrap_or(base.amp_c),
            dtheta_b: raw.dtheta_b.unwrap_or(0.0),
            dtheta_c: raw.dtheta_c.unwrap_or(0.0),
            ..base
        },
    };
    Ok(ScenarioEvent {
        at_tau: raw.at,
        new_params,
    })
}

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;

    let topology = build_topology(&raw.topology)?;
    let n = topology.len();

    let snr = raw.noise.snr_db.expand(n, "noise.snr_db")?;
    let out_snr = match &raw.noise.output_snr_db {
        Some(v) => v
            .expand(n, "noise.output_snr_db")?
            .into_iter()
            .map(Some)
            .collect(),
        None => vec![None; n],
    };
    let node_noise: Vec<NodeNoise> = snr
        .into_iter()
        .zip(out_snr)
        .map(|(snr_db, output_snr_db)| NodeNoise {
            snr_db,
            output_snr_db,
        })
        .collect();

    let s = &raw.signal;
    if !(s.amplitude > 0.0) {
        return Err(Error::Config(format!(
            "signal.amplitude must be > 0, got {}",
            s.amplitude
        )));
    }
    if !(s.dt > 0.0) {
        return Err(Error::Config(format!(
            "signal.dt must be > 0, got {}",
            s.dt
        )));
    }
    let nominal = PhaseParams {
        theta0: s.theta0,
        ..PhaseParams::balanced(s.amplitude, s.freq, s.dt)
    };
    nominal.validate()?;

    let events = if raw.scenario.is_empty() {
        vec![ScenarioEvent {
            at_tau: 0,
            new_params: nominal,
        }]
    } else {
        raw.scenario
            .iter()
            .map(|e| build_event(e, &nominal))
            .collect::<Result<Vec<_>>>()?
    };
    let scenario = Scenario::new(events)?;

    let iters = raw.iters.unwrap_or(DEFAULT_ITERS);
    if iters == 0 {
        return Err(Error::Config("iters must be >= 1".into()));
    }
    let monte_carlo_runs = raw.monte_carlo_runs.unwrap_or(1);
    if monte_carlo_runs == 0 {
        return Err(Error::Config("monte_carlo_runs must be >= 1".into()));
    }
    let steady_window = raw
        .steady_window
        .unwrap_or_else(|| crate::analysis::steady_window(iters));
    if steady_window == 0 || steady_window > iters {
        return Err(Error::Config(format!(
            "steady_window must lie in [1, {iters}], got {steady_window}"
        )));
    }

    let sweep_snr_db = raw
        .sweep
        .snr_db
        .unwrap_or_else(|| DEFAULT_SWEEP_SNR_DB.to_vec());
    if sweep_snr_db.is_empty() {
        return Err(Error::Config("sweep.snr_db must not be empty".into()));
    }
    let stability_multipliers = raw
        .stability
        .multipliers
        .unwrap_or_else(|| DEFAULT_STABILITY_MULTIPLIERS.to_vec());
    if stability_multipliers.is_empty() {
        return Err(Error::Config(
            "stability.multipliers must not be empty".into(),
        ));
    }
    if let Some(m) = stability_multipliers.iter().find(|m| !(**m > 0.0)) {
        return Err(Error::Config(format!(
            "stability.multipliers must be > 0, got {m}"
        )));
    }

    let cfg = ExperimentConfig {
        topology,
        node_noise,
        gamma: raw.noise.gamma,
        impulse_prob: raw.noise.impulse_prob,
        impulse_var: raw.noise.impulse_var,
        shared_measurement_noise: raw.noise.shared_measurement_noise,
        mu: raw.filter.mu,
        sigma: raw.filter.sigma,
        daclms_mu: raw.filter.daclms_mu,
        freeze_conjugate: raw.filter.freeze_conjugate,
        nominal,
        scenario,
        iters,
        monte_carlo_runs,
        seed: raw.seed.unwrap_or(0),
        algorithm: raw.algorithm,
        output: raw.output,
        steady_window,
        sweep_snr_db,
        stability_multipliers,
        stability_iters: raw.stability.iters.unwrap_or(10_000),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Checks cross-field invariants; `parse_config` calls this.
    pub fn validate(&self) -> Result<()> {
        if self.node_noise.len() != self.topology.len() {
            return Err(Error::DimensionMismatch {
                expected: self.topology.len(),
                got: self.node_noise.len(),
            });
        }
        for k in 0..self.topology.len() {
            self.noise_config(k, 0).validate()?;
        }
        for algorithm in [Algorithm::Damtcc, Algorithm::Daclms] {
            for k in 0..self.topology.len() {
                self.filter_params(algorithm, k)?;
            }
        }
        if self.monte_carlo_runs == 0 {
            return Err(Error::Config("monte_carlo_runs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.topology.len()
    }

    /// Noise environment of node `k` with the given stream seed.
    pub fn noise_config(&self, k: usize, seed: u64) -> NoiseConfig {
        let nn = self.node_noise[k];
        NoiseConfig {
            snr_db: nn.snr_db,
            output_snr_db: nn.output_snr_db,
            gamma: self.gamma,
            impulse_prob: self.impulse_prob,
            impulse_var: self.impulse_var,
            seed,
            shared_measurement_noise: self.shared_measurement_noise,
        }
    }

    /// Filter parameters of node `k`. The cost's γ follows the node's noise ratio.
    /// DACLMS uses `daclms_mu`, or by default the step that matches DAMTCC's
    /// small-error update magnitude, `μ / (2σ²(1 + γ))`.
    pub fn filter_params(&self, algorithm: Algorithm, k: usize) -> Result<FilterParams> {
        let gamma = self.noise_config(k, 0).gamma();
        let mu = match algorithm {
            Algorithm::Damtcc => self.mu,
            Algorithm::Daclms => self
                .daclms_mu
                .unwrap_or(self.mu / (2.0 * self.sigma * self.sigma * (1.0 + gamma))),
        };
        FilterParams::new(mu, self.sigma, gamma)
    }

    /// Copy of this configuration with every node at `snr_db`.
    pub fn with_uniform_snr(&self, snr_db: f64) -> Self {
        let mut cfg = self.clone();
        for nn in &mut cfg.node_noise {
            nn.snr_db = snr_db;
            nn.output_snr_db = None;
        }
        cfg
    }
}
