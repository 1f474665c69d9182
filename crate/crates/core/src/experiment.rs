//! Monte-Carlo experiment orchestration and CSV emission.
//!
//! Seeding: run `r` draws from `split_seed(seed, r)` and node `k` of that run
//! from `split_seed(split_seed(seed, r), k)`. Both algorithms see the same
//! noise realization for a given run, and results never depend on the number
//! of worker threads.

use std::io::Write;

use rayon::prelude::*;

use crate::analysis::{
    augmented_regressors, bias_variance, input_covariance, solve_wl_weights, stability_bound,
    MetricSeries, StabilityBound, StabilityInputs,
};
use crate::config::ExperimentConfig;
use crate::diffusion::{run, NetworkState};
use crate::error::{invalid, Result};
use crate::noise::{corrupt_stream, noise_variances, split_seed, NoisyPair, PowerProfile};
use crate::phasegen::ComplexVoltage;
use crate::wlfilter::{Algorithm, FilterParams};

pub const TRACKING_HEADER: [&str; 7] = [
    "run",
    "iteration",
    "node",
    "f_hat",
    "valid",
    "sq_error",
    "algorithm",
];
pub const SWEEP_HEADER: [&str; 8] = [
    "snr_db",
    "node",
    "algorithm",
    "bias",
    "variance",
    "samples",
    "excluded",
    "runs",
];
pub const STABILITY_HEADER: [&str; 11] = [
    "multiplier",
    "mu",
    "mu_max",
    "mu_max_lambda_min",
    "lambda_min",
    "lambda_max",
    "kappa",
    "algorithm",
    "run",
    "max_norm",
    "diverged",
];

/// Norm above which a probe run counts as divergent.
pub const DIVERGENCE_NORM: f64 = 1e3;

fn fmt(x: f64) -> String {
    format!("{x:.15e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Clean scenario samples `v(0..=iters)`.
pub fn clean_stream(cfg: &ExperimentConfig) -> Vec<ComplexVoltage> {
    (0..=cfg.iters).map(|t| cfg.scenario.sample(t)).collect()
}

/// Noisy per-node streams of run `run`.
pub fn node_streams(
    cfg: &ExperimentConfig,
    clean: &[ComplexVoltage],
    run: usize,
) -> Result<Vec<Vec<NoisyPair>>> {
    let power = PowerProfile::piecewise(cfg.scenario.power_profile())?;
    let run_seed = split_seed(cfg.seed, run as u64);
    (0..cfg.nodes())
        .map(|k| {
            corrupt_stream(
                clean,
                &cfg.noise_config(k, split_seed(run_seed, k as u64)),
                &power,
            )
        })
        .collect()
}

fn network(cfg: &ExperimentConfig, algorithm: Algorithm) -> Result<NetworkState> {
    let params = (0..cfg.nodes())
        .map(|k| cfg.filter_params(algorithm, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(
        NetworkState::new(cfg.topology.clone(), params, algorithm, cfg.nominal.dt)?
            .with_frozen_conjugate(cfg.freeze_conjugate),
    )
}

/// All Monte-Carlo runs of one algorithm, in run order.
pub fn monte_carlo(cfg: &ExperimentConfig, algorithm: Algorithm) -> Result<Vec<MetricSeries>> {
    cfg.validate()?;
    let clean = clean_stream(cfg);
    (0..cfg.monte_carlo_runs)
        .into_par_iter()
        .map(|r| {
            let streams = node_streams(cfg, &clean, r)?;
            let mut net = network(cfg, algorithm)?;
            run(&mut net, &streams, r, cfg.iters)
        })
        .collect()
}

/// Tracking series for every selected algorithm.
pub fn tracking(cfg: &ExperimentConfig) -> Result<Vec<MetricSeries>> {
    let mut all = Vec::new();
    for algorithm in cfg.algorithm.algorithms() {
        all.extend(monte_carlo(cfg, algorithm)?);
    }
    Ok(all)
}

pub fn write_tracking_csv<W: Write>(series: &[MetricSeries], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(TRACKING_HEADER)?;
    for s in series {
        let algo = s.algorithm.name();
        let run = s.run.to_string();
        for r in s.records() {
            w.write_record([
                run.as_str(),
                &r.iteration.to_string(),
                &r.node.to_string(),
                &fmt(r.f_hat),
                if r.valid { "true" } else { "false" },
                &fmt(r.sq_error),
                algo,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs the configured tracking experiment and writes per-iteration CSV rows.
pub fn run_tracking<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    write_tracking_csv(&tracking(cfg)?, out)
}

/// Steady-state statistics of one node at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub node: usize,
    pub algorithm: Algorithm,
    pub bias: f64,
    pub variance: f64,
    pub samples: usize,
    pub excluded: usize,
    pub runs: usize,
}

/// Steady-state bias and variance with every node at each SNR in `snr_list`.
pub fn snr_sweep(cfg: &ExperimentConfig, snr_list: &[f64]) -> Result<Vec<SweepRow>> {
    if snr_list.is_empty() {
        return Err(invalid("snr_list", "must not be empty"));
    }
    let f_true = cfg.scenario.params_at(cfg.iters).freq;
    let mut rows = Vec::new();
    for &snr in snr_list {
        let at = cfg.with_uniform_snr(snr);
        for algorithm in cfg.algorithm.algorithms() {
            let series = monte_carlo(&at, algorithm)?;
            for st in bias_variance(&series, f_true, cfg.steady_window)? {
                rows.push(SweepRow {
                    snr_db: snr,
                    node: st.node,
                    algorithm,
                    bias: st.bias,
                    variance: st.variance,
                    samples: st.samples,
                    excluded: st.excluded,
                    runs: series.len(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt(r.snr_db),
            r.node.to_string(),
            r.algorithm.name().to_string(),
            fmt(r.bias),
            fmt(r.variance),
            r.samples.to_string(),
            r.excluded.to_string(),
            r.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_snr_sweep<W: Write>(cfg: &ExperimentConfig, snr_list: &[f64], out: W) -> Result<()> {
    write_sweep_csv(&snr_sweep(cfg, snr_list)?, out)
}

/// Network step-size bound: the smallest per-node bound, using oracle weights
/// from the first three clean samples and the clean regressor covariance.
pub fn network_stability_bound(cfg: &ExperimentConfig) -> Result<StabilityBound> {
    let clean = clean_stream(cfg);
    if clean.len() < 3 {
        return Err(invalid(
            "iters",
            "stability bound needs at least 2 iterations",
        ));
    }
    let w_bar = solve_wl_weights(&[clean[0], clean[1], clean[2]])?;
    let r = input_covariance(&augmented_regressors(&clean[..clean.len() - 1]))?;
    let power = PowerProfile::piecewise(cfg.scenario.power_profile())?;
    let mut best: Option<StabilityBound> = None;
    for k in 0..cfg.nodes() {
        let noise = cfg.noise_config(k, 0);
        let (sigma_i2, _) = noise_variances(&noise, &power, 0)?;
        let b = stability_bound(&StabilityInputs {
            r,
            sigma: cfg.sigma,
            sigma_i2,
            w_bar_norm2: w_bar.norm_sqr() + noise.gamma(),
        })?;
        if best.is_none_or(|cur| b.mu_max < cur.mu_max) {
            best = Some(b);
        }
    }
    Ok(best.expect("topology has at least one node"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub multiplier: f64,
    pub mu: f64,
    pub algorithm: Algorithm,
    pub run: usize,
    /// Largest `‖w_k‖` over all nodes and iterations; infinite on overflow.
    pub max_norm: f64,
}

impl ProbeRow {
    pub fn diverged(&self) -> bool {
        !(self.max_norm <= DIVERGENCE_NORM)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub bound: StabilityBound,
    pub rows: Vec<ProbeRow>,
}

fn probe_once(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    mu: f64,
    run_id: usize,
    clean: &[ComplexVoltage],
) -> Result<f64> {
    let streams = node_streams(cfg, clean, run_id)?;
    let params = (0..cfg.nodes())
        .map(|k| {
            let base = cfg.filter_params(Algorithm::Damtcc, k)?;
            FilterParams::new(mu, base.sigma, base.gamma)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut net = NetworkState::new(cfg.topology.clone(), params, algorithm, cfg.nominal.dt)?
        .with_frozen_conjugate(cfg.freeze_conjugate);
    let mut pairs = Vec::with_capacity(cfg.nodes());
    for t in 0..cfg.stability_iters {
        pairs.clear();
        pairs.extend(streams.iter().map(|s| s[t]));
        net.step(&pairs)?;
        if !net.peak_norm().is_finite() {
            break;
        }
    }
    Ok(net.peak_norm())
}

/// Runs every selected algorithm at `μ = m·μ_max` for each multiplier `m` and
/// records the peak weight norm of each Monte-Carlo run.
pub fn run_stability_probe(
    cfg: &ExperimentConfig,
    mu_multipliers: &[f64],
) -> Result<StabilityReport> {
    if mu_multipliers.is_empty() {
        return Err(invalid("mu_multipliers", "must not be empty"));
    }
    if let Some(m) = mu_multipliers.iter().find(|m| !(**m > 0.0)) {
        return Err(invalid("mu_multipliers", format!("must be > 0, got {m}")));
    }
    let bound = network_stability_bound(cfg)?;
    let long = ExperimentConfig {
        iters: cfg.iters.max(cfg.stability_iters),
        ..cfg.clone()
    };
    let clean = clean_stream(&long);
    let mut jobs = Vec::new();
    for &m in mu_multipliers {
        for algorithm in cfg.algorithm.algorithms() {
            for r in 0..cfg.monte_carlo_runs {
                jobs.push((m, algorithm, r));
            }
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(multiplier, algorithm, run)| {
            let mu = multiplier * bound.mu_max;
            let max_norm = probe_once(&long, algorithm, mu, run, &clean)?;
            Ok(ProbeRow {
                multiplier,
                mu,
                algorithm,
                run,
                max_norm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport { bound, rows })
}

pub fn write_stability_csv<W: Write>(report: &StabilityReport, out: W) -> Result<()> {
    let b = &report.bound;
    let mut w = csv_writer(out);
    w.write_record(STABILITY_HEADER)?;
    for r in &report.rows {
        w.write_record([
            fmt(r.multiplier),
            fmt(r.mu),
            fmt(b.mu_max),
            fmt(b.mu_max_with_lambda_min),
            fmt(b.lambda_min),
            fmt(b.lambda_max),
            fmt(b.kappa),
            r.algorithm.name().to_string(),
            r.run.to_string(),
            fmt(r.max_norm),
            r.diverged().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
