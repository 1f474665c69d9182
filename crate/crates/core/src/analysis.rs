//! Verification oracles, the step-size stability bound and steady-state metrics.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::wlfilter::{Algorithm, AugmentedWeights, FilterParams};

/// Instantaneous correntropy objective written out in full from `(w, v, d)`.
fn instantaneous_cost(
    h: Complex64,
    g: Complex64,
    v: Complex64,
    d: Complex64,
    p: &FilterParams,
) -> f64 {
    let e = d - v * h.conj() - v.conj() * g.conj();
    let denom = h.norm_sqr() + g.norm_sqr() + p.gamma;
    (-e.norm_sqr() / (2.0 * p.sigma * p.sigma * denom)).exp()
}

/// Central-difference Wirtinger gradients `∂J/∂h*`, `∂J/∂g*` of the
/// instantaneous objective, using `∂/∂z* = ½(∂/∂Re z + j·∂/∂Im z)`.
pub fn finite_difference_gradients(
    w: &AugmentedWeights,
    v: Complex64,
    d: Complex64,
    p: &FilterParams,
    step: f64,
) -> (Complex64, Complex64) {
    let cost = |h: Complex64, g: Complex64| instantaneous_cost(h, g, v, d, p);
    let re = Complex64::new(step, 0.0);
    let im = Complex64::new(0.0, step);
    let central = |f: &dyn Fn(Complex64) -> f64, dz: Complex64| (f(dz) - f(-dz)) / (2.0 * step);

    let along_h = |dz: Complex64| cost(w.h + dz, w.g);
    let along_g = |dz: Complex64| cost(w.h, w.g + dz);
    let grad_h = 0.5 * Complex64::new(central(&along_h, re), central(&along_h, im));
    let grad_g = 0.5 * Complex64::new(central(&along_g, re), central(&along_g, im));
    (grad_h, grad_g)
}

/// Exact widely-linear weights from three consecutive clean samples: solves
/// `[[v₀, v₀*], [v₁, v₁*]]·[h*, g*]ᵀ = [v₁, v₂]ᵀ`.
pub fn solve_wl_weights(v: &[Complex64; 3]) -> Result<AugmentedWeights> {
    let [v0, v1, v2] = *v;
    let det = v0 * v1.conj() - v0.conj() * v1;
    let scale = v0.norm() * v1.norm();
    if !(det.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
        return Err(Error::SingularSystem(det.norm()));
    }
    let h_conj = (v1 * v1.conj() - v0.conj() * v2) / det;
    let g_conj = (v0 * v2 - v1 * v1) / det;
    Ok(AugmentedWeights::new(h_conj.conj(), g_conj.conj()))
}

/// `κ = σ² / (σ² + σ_i²/2)`.
pub fn kappa(sigma: f64, sigma_i2: f64) -> f64 {
    let s2 = sigma * sigma;
    s2 / (s2 + 0.5 * sigma_i2)
}

/// 2×2 Hermitian matrix `[[a, b], [b*, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hermitian2 {
    pub a: f64,
    pub b: Complex64,
    pub c: f64,
}

impl Hermitian2 {
    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: Complex64::new(0.0, 0.0),
            c: 1.0,
        }
    }

    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.a, 0.0), self.b],
            [self.b.conj(), Complex64::new(self.c, 0.0)],
        ]
    }

    /// `(λ_min, λ_max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a + self.c);
        let half_diff = 0.5 * (self.a - self.c);
        let radius = (half_diff * half_diff + self.b.norm_sqr()).sqrt();
        (mean - radius, mean + radius)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
        }
    }
}

/// Sample mean of `x·xᴴ`.
pub fn input_covariance(xs: &[[Complex64; 2]]) -> Result<Hermitian2> {
    if xs.len() < 2 {
        return Err(Error::StreamTooShort {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let (mut a, mut b, mut c) = (0.0, Complex64::new(0.0, 0.0), 0.0);
    for x in xs {
        a += x[0].norm_sqr();
        b += x[0] * x[1].conj();
        c += x[1].norm_sqr();
    }
    Ok(Hermitian2 {
        a: a / n,
        b: b / n,
        c: c / n,
    })
}

/// Augmented regressors `[v, v*]` of a sample stream.
pub fn augmented_regressors(v: &[Complex64]) -> Vec<[Complex64; 2]> {
    v.iter().map(|&z| [z, z.conj()]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityInputs {
    /// Regressor covariance `E[x xᴴ]`.
    pub r: Hermitian2,
    pub sigma: f64,
    /// Input noise variance σ_i².
    pub sigma_i2: f64,
    /// `|h°|² + |g°|² + γ`.
    pub w_bar_norm2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBound {
    /// Largest stable step size, `2‖w̄°‖² / (κ²·λ_max(R))`.
    pub mu_max: f64,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Eigenvalues `(most negative, least negative)` of the Hessian block
    /// `H_A = −κ²R / (2σ²‖w̄°‖²)`.
    pub hessian_eigenvalues: (f64, f64),
    /// The same expression evaluated with `λ_min(R)`; looser than `mu_max`.
    pub mu_max_with_lambda_min: f64,
}

/// Step-size bound from the linearized mean weight-error recursion.
///
/// Stability needs `|1 + η·λ(H_A)| < 1` for every Hessian eigenvalue with
/// `μ = η/(2σ²)`; the binding eigenvalue is the most negative one, which
/// corresponds to `λ_max(R)`.
pub fn stability_bound(si: &StabilityInputs) -> Result<StabilityBound> {
    if !(si.sigma > 0.0) {
        return Err(invalid("sigma", "must be > 0"));
    }
    if !(si.sigma_i2 >= 0.0) {
        return Err(invalid("sigma_i2", "must be >= 0"));
    }
    if !(si.w_bar_norm2 > 0.0) {
        return Err(invalid("w_bar_norm2", "must be > 0"));
    }
    let (lambda_min, lambda_max) = si.r.eigenvalues();
    if !(lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite(lambda_min));
    }
    let k = kappa(si.sigma, si.sigma_i2);
    let two_s2 = 2.0 * si.sigma * si.sigma;
    let hessian = si.r.scale(-k * k / (two_s2 * si.w_bar_norm2));
    let hessian_eigenvalues = hessian.eigenvalues();
    let mu_max = -2.0 / (two_s2 * hessian_eigenvalues.0);
    Ok(StabilityBound {
        mu_max,
        kappa: k,
        lambda_min,
        lambda_max,
        hessian_eigenvalues,
        mu_max_with_lambda_min: 2.0 * si.w_bar_norm2 / (k * k * lambda_min),
    })
}

/// One node's output at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRecord {
    pub iteration: usize,
    pub node: usize,
    pub f_hat: f64,
    pub valid: bool,
    /// `|e|²` of the a-priori error at this iteration.
    pub sq_error: f64,
}

/// Per-iteration, per-node estimates of one simulation run. Rows are stored
/// iteration-major and iterations are contiguous from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub run: usize,
    pub algorithm: Algorithm,
    nodes: usize,
    records: Vec<MetricRecord>,
}

impl MetricSeries {
    pub fn new(run: usize, algorithm: Algorithm, nodes: usize) -> Self {
        Self {
            run,
            algorithm,
            nodes,
            records: Vec::new(),
        }
    }

    pub fn with_capacity(
        run: usize,
        algorithm: Algorithm,
        nodes: usize,
        iterations: usize,
    ) -> Self {
        Self {
            records: Vec::with_capacity(nodes * iterations),
            ..Self::new(run, algorithm, nodes)
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn iterations(&self) -> usize {
        self.records.len().checked_div(self.nodes).unwrap_or(0)
    }

    /// Appends one iteration; `rows[l] = (f_hat, valid, sq_error)` for node `l`.
    pub fn push_iteration(
        &mut self,
        rows: impl IntoIterator<Item = (f64, bool, f64)>,
    ) -> Result<()> {
        let iteration = self.iterations();
        let before = self.records.len();
        for (node, (f_hat, valid, sq_error)) in rows.into_iter().enumerate() {
            self.records.push(MetricRecord {
                iteration,
                node,
                f_hat,
                valid,
                sq_error,
            });
        }
        let pushed = self.records.len() - before;
        if pushed != self.nodes {
            self.records.truncate(before);
            return Err(Error::DimensionMismatch {
                expected: self.nodes,
                got: pushed,
            });
        }
        Ok(())
    }

    pub fn records(&self) -> &[MetricRecord] {
        &self.records
    }

    pub fn record(&self, iteration: usize, node: usize) -> &MetricRecord {
        &self.records[iteration * self.nodes + node]
    }

    pub fn iteration(&self, iteration: usize) -> &[MetricRecord] {
        &self.records[iteration * self.nodes..(iteration + 1) * self.nodes]
    }

    /// Network-average `f̂` at each iteration.
    pub fn network_mean(&self) -> Vec<f64> {
        (0..self.iterations())
            .map(|t| self.iteration(t).iter().map(|r| r.f_hat).sum::<f64>() / self.nodes as f64)
            .collect()
    }
}

/// Steady-state statistics of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStats {
    pub node: usize,
    pub bias: f64,
    /// Sample variance (n − 1 denominator) of the pooled valid estimates.
    pub variance: f64,
    pub samples: usize,
    /// Rows dropped for carrying an invalid flag.
    pub excluded: usize,
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Bias and variance of `f̂` over the last `window` iterations, pooled across runs.
///
/// Values are sorted before summation, so the result does not depend on the
/// order of `series`.
pub fn bias_variance(
    series: &[MetricSeries],
    f_true: f64,
    window: usize,
) -> Result<Vec<NodeStats>> {
    let first = series
        .first()
        .ok_or_else(|| invalid("series", "need at least one run"))?;
    let nodes = first.nodes();
    let iterations = first.iterations();
    for s in series {
        if s.nodes() != nodes {
            return Err(Error::DimensionMismatch {
                expected: nodes,
                got: s.nodes(),
            });
        }
        if s.iterations() != iterations {
            return Err(Error::DimensionMismatch {
                expected: iterations,
                got: s.iterations(),
            });
        }
    }
    if window == 0 || window > iterations {
        return Err(invalid(
            "window",
            format!("must lie in [1, {iterations}], got {window}"),
        ));
    }
    let start = iterations - window;
    (0..nodes)
        .map(|node| {
            let mut values = Vec::with_capacity(window * series.len());
            let mut excluded = 0;
            for s in series {
                for t in start..iterations {
                    let r = s.record(t, node);
                    if r.valid {
                        values.push(r.f_hat);
                    } else {
                        excluded += 1;
                    }
                }
            }
            if values.is_empty() {
                return Err(Error::AllInvalid { node });
            }
            let n = values.len();
            let mean = sorted_sum(&mut values) / n as f64;
            let mut dev: Vec<f64> = values.iter().map(|f| (f - mean) * (f - mean)).collect();
            let variance = if n > 1 {
                sorted_sum(&mut dev) / (n - 1) as f64
            } else {
                0.0
            };
            Ok(NodeStats {
                node,
                bias: mean - f_true,
                variance,
                samples: n,
                excluded,
            })
        })
        .collect()
}

/// Default steady-state window: the final 20% of `iterations` (at least one).
pub fn steady_window(iterations: usize) -> usize {
    (iterations / 5).max(1)
}
