//! Network topology, combination weights and the adapt-then-combine recursion.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::analysis::MetricSeries;
use crate::error::{invalid, Error, Result};
use crate::noise::NoisyPair;
use crate::wlfilter::{
    frequency_estimate, local_update, Algorithm, AugmentedWeights, FilterParams,
};

/// Undirected connected graph. Every node's neighbourhood includes itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl NetworkTopology {
    /// Duplicate edges (in either orientation) are merged. Self-loops,
    /// out-of-range indices and disconnected graphs are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("nodes", "need at least one node"));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidEdge(a, b));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbors: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let topo = Self {
            neighbors,
            edges: set.into_iter().collect(),
        };
        if let Some(node) = topo.first_unreachable() {
            return Err(Error::Disconnected { node });
        }
        Ok(topo)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &l in &self.neighbors[k] {
                if !seen[l] {
                    seen[l] = true;
                    stack.push(l);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn single() -> Self {
        Self::new(1, &[]).expect("single node")
    }

    pub fn ring(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .map(|k| (k, (k + 1) % n))
            .filter(|(a, b)| a != b)
            .collect();
        Self::new(n, &edges)
    }

    pub fn line(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
        Self::new(n, &edges)
    }

    /// Eight-node ring with two chords.
    pub fn topology1() -> Self {
        let mut edges: Vec<_> = (0..8).map(|k| (k, (k + 1) % 8)).collect();
        edges.extend([(0, 4), (2, 6)]);
        Self::new(8, &edges).expect("fixture is connected")
    }

    /// Eight-node irregular mesh.
    pub fn topology2() -> Self {
        let edges = [
            (0, 1),
            (0, 3),
            (1, 2),
            (1, 5),
            (2, 4),
            (3, 6),
            (4, 7),
            (5, 6),
            (5, 7),
            (6, 7),
            (2, 3),
        ];
        Self::new(8, &edges).expect("fixture is connected")
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Sorted neighbourhood of `k`, including `k`.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    /// Neighbourhood size including the node itself.
    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    /// Canonical edge list, `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Dense `N × N` combination matrix; entry `(l, k)` weights node `l`'s
/// intermediate estimate in node `k`'s combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationMatrix {
    n: usize,
    c: Vec<f64>,
}

impl CombinationMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut c = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            c.extend(row);
        }
        Ok(Self { n, c })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.c[l * self.n + k]
    }

    pub fn column_sum(&self, k: usize) -> f64 {
        (0..self.n).map(|l| self.get(l, k)).sum()
    }

    pub fn row_sum(&self, l: usize) -> f64 {
        (0..self.n).map(|k| self.get(l, k)).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|l| (0..l).all(|k| (self.get(l, k) - self.get(k, l)).abs() <= tol))
    }
}

/// Metropolis rule: `c_lk = 1/max(n_l, n_k)` for neighbours, the remainder on the diagonal.
pub fn metropolis_weights(topo: &NetworkTopology) -> CombinationMatrix {
    let n = topo.len();
    let mut c = vec![0.0; n * n];
    for k in 0..n {
        let mut off = 0.0;
        for &l in topo.neighbors(k) {
            if l != k {
                let w = 1.0 / topo.degree(k).max(topo.degree(l)) as f64;
                c[l * n + k] = w;
                off += w;
            }
        }
        c[k * n + k] = 1.0 - off;
    }
    CombinationMatrix { n, c }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub weights: AugmentedWeights,
    pub params: FilterParams,
}

/// Adapt step at every node. Returns the intermediate weights and a-priori errors.
pub fn adapt_all(
    algorithm: Algorithm,
    nodes: &[NodeState],
    pairs: &[NoisyPair],
    freeze_conjugate: bool,
) -> Result<(Vec<AugmentedWeights>, Vec<Complex64>)> {
    if pairs.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: pairs.len(),
        });
    }
    let mut psi = Vec::with_capacity(nodes.len());
    let mut errors = Vec::with_capacity(nodes.len());
    for (node, pair) in nodes.iter().zip(pairs) {
        let (next, e) = local_update(
            algorithm,
            &node.weights,
            pair,
            &node.params,
            freeze_conjugate,
        )?;
        psi.push(next);
        errors.push(e);
    }
    Ok((psi, errors))
}

/// Combine step: `w_k = Σ_{l ∈ N_k} c_lk ψ_l`.
pub fn combine_all(
    topo: &NetworkTopology,
    c: &CombinationMatrix,
    psi: &[AugmentedWeights],
) -> Result<Vec<AugmentedWeights>> {
    if psi.len() != topo.len() || c.len() != topo.len() {
        return Err(Error::DimensionMismatch {
            expected: topo.len(),
            got: psi.len().min(c.len()),
        });
    }
    Ok((0..topo.len())
        .map(|k| {
            let mut terms = topo.neighbors(k).iter().map(|&l| {
                let w = c.get(l, k);
                (psi[l].h * w, psi[l].g * w)
            });
            let (mut h, mut g) = terms.next().expect("neighbourhood includes self");
            for (dh, dg) in terms {
                h += dh;
                g += dg;
            }
            AugmentedWeights::new(h, g)
        })
        .collect())
}

/// Output of one network iteration at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOutput {
    pub f_hat: f64,
    pub valid: bool,
    pub sq_error: f64,
}

/// Complete diffusion network state.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub topology: NetworkTopology,
    pub combination: CombinationMatrix,
    pub nodes: Vec<NodeState>,
    pub algorithm: Algorithm,
    pub freeze_conjugate: bool,
    pub dt: f64,
    peak_norm: f64,
}

impl NetworkState {
    /// Metropolis-weighted network whose nodes start from `(h, g) = (1, 0)`.
    pub fn new(
        topology: NetworkTopology,
        params: Vec<FilterParams>,
        algorithm: Algorithm,
        dt: f64,
    ) -> Result<Self> {
        if params.len() != topology.len() {
            return Err(Error::DimensionMismatch {
                expected: topology.len(),
                got: params.len(),
            });
        }
        if !(dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {dt}")));
        }
        for p in &params {
            p.validate()?;
        }
        let combination = metropolis_weights(&topology);
        let nodes = params
            .into_iter()
            .map(|params| NodeState {
                weights: AugmentedWeights::initial(),
                params,
            })
            .collect();
        Ok(Self {
            topology,
            combination,
            nodes,
            algorithm,
            freeze_conjugate: false,
            dt,
            peak_norm: AugmentedWeights::initial().norm(),
        })
    }

    /// Same parameters at every node.
    pub fn uniform(
        topology: NetworkTopology,
        params: FilterParams,
        algorithm: Algorithm,
        dt: f64,
    ) -> Result<Self> {
        let n = topology.len();
        Self::new(topology, vec![params; n], algorithm, dt)
    }

    pub fn with_frozen_conjugate(mut self, freeze: bool) -> Self {
        self.freeze_conjugate = freeze;
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weights(&self) -> Vec<AugmentedWeights> {
        self.nodes.iter().map(|n| n.weights).collect()
    }

    /// Largest `‖w_k‖` seen at any node so far (infinite once a weight overflows).
    pub fn peak_norm(&self) -> f64 {
        self.peak_norm
    }

    /// One adapt-then-combine iteration; `pairs[k]` is node `k`'s sample.
    pub fn step(&mut self, pairs: &[NoisyPair]) -> Result<Vec<NodeOutput>> {
        let (psi, errors) = adapt_all(self.algorithm, &self.nodes, pairs, self.freeze_conjugate)?;
        let combined = combine_all(&self.topology, &self.combination, &psi)?;
        let mut out = Vec::with_capacity(combined.len());
        for ((node, w), e) in self.nodes.iter_mut().zip(combined).zip(errors) {
            node.weights = w;
            let norm = w.norm();
            self.peak_norm = if norm.is_finite() {
                self.peak_norm.max(norm)
            } else {
                f64::INFINITY
            };
            let est = frequency_estimate(&w, self.dt);
            out.push(NodeOutput {
                f_hat: est.f_hat,
                valid: est.valid,
                sq_error: e.norm_sqr(),
            });
        }
        Ok(out)
    }
}

/// Runs `iters` iterations over per-node noisy streams and records every output.
pub fn run(
    state: &mut NetworkState,
    streams: &[Vec<NoisyPair>],
    run_id: usize,
    iters: usize,
) -> Result<MetricSeries> {
    if streams.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            got: streams.len(),
        });
    }
    if let Some(short) = streams.iter().find(|s| s.len() < iters) {
        return Err(Error::StreamTooShort {
            needed: iters,
            got: short.len(),
        });
    }
    let mut series = MetricSeries::with_capacity(run_id, state.algorithm, state.len(), iters);
    let mut pairs = Vec::with_capacity(state.len());
    for t in 0..iters {
        pairs.clear();
        pairs.extend(streams.iter().map(|s| s[t]));
        let outputs = state.step(&pairs)?;
        series.push_iteration(outputs.iter().map(|o| (o.f_hat, o.valid, o.sq_error)))?;
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{corrupt_stream, NoiseConfig, PowerProfile};
    use crate::phasegen::{voltage_at, PhaseParams, NOMINAL_DT};
    use crate::wlfilter::WlFilter;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params() -> FilterParams {
        FilterParams::new(0.01, 1.0, 1.0).unwrap()
    }

    #[test]
    fn two_node_weights_are_halves() {
        let m = metropolis_weights(&NetworkTopology::line(2).unwrap());
        for l in 0..2 {
            for k in 0..2 {
                assert_eq!(m.get(l, k), 0.5);
            }
        }
    }

    #[test]
    fn single_node_weight_is_one() {
        let m = metropolis_weights(&NetworkTopology::single());
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn line_of_three() {
        // Degrees (with self) 2, 3, 2.
        let m = metropolis_weights(&NetworkTopology::line(3).unwrap());
        let third = 1.0 / 3.0;
        assert_eq!(m.get(0, 1), third);
        assert_eq!(m.get(0, 0), 1.0 - third);
        assert!((m.get(1, 1) - third).abs() < 1e-15);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn fixtures_are_doubly_stochastic() {
        for topo in [
            NetworkTopology::topology1(),
            NetworkTopology::topology2(),
            NetworkTopology::ring(8).unwrap(),
            NetworkTopology::line(5).unwrap(),
        ] {
            let m = metropolis_weights(&topo);
            assert!(m.is_symmetric(0.0));
            for k in 0..topo.len() {
                assert!((m.column_sum(k) - 1.0).abs() < 1e-12);
                assert!((m.row_sum(k) - 1.0).abs() < 1e-12);
                for l in 0..topo.len() {
                    let w = m.get(l, k);
                    assert!(w >= 0.0);
                    assert_eq!(w > 0.0, topo.neighbors(k).contains(&l) || l == k);
                }
            }
        }
    }

    #[test]
    fn topology_validation() {
        assert!(matches!(
            NetworkTopology::new(3, &[(0, 0)]),
            Err(Error::InvalidEdge(0, 0))
        ));
        assert!(matches!(
            NetworkTopology::new(3, &[(0, 5)]),
            Err(Error::InvalidEdge(0, 5))
        ));
        assert!(matches!(
            NetworkTopology::new(3, &[(0, 1)]),
            Err(Error::Disconnected { node: 2 })
        ));
        assert!(NetworkTopology::new(0, &[]).is_err());
        let t = NetworkTopology::new(3, &[(0, 1), (1, 0), (2, 1), (1, 2)]).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(t.neighbors(1), &[0, 1, 2]);
    }

    #[test]
    fn fixture_shapes() {
        let t1 = NetworkTopology::topology1();
        assert_eq!(t1.len(), 8);
        assert_eq!(t1.edges().len(), 10);
        let t2 = NetworkTopology::topology2();
        assert_eq!(t2.edges().len(), 11);
    }

    #[test]
    fn combine_two_nodes_averages() {
        let topo = NetworkTopology::line(2).unwrap();
        let m = metropolis_weights(&topo);
        let psi = [
            AugmentedWeights::new(c(1.0, 0.0), c(0.0, 0.0)),
            AugmentedWeights::new(c(0.0, 1.0), c(0.2, 0.0)),
        ];
        let w = combine_all(&topo, &m, &psi).unwrap();
        for wk in &w {
            assert_eq!(wk.h, c(0.5, 0.5));
            assert_eq!(wk.g, c(0.1, 0.0));
        }
    }

    #[test]
    fn combine_identical_estimates_is_identity() {
        let topo = NetworkTopology::topology2();
        let m = metropolis_weights(&topo);
        let psi = vec![AugmentedWeights::new(c(0.9, -0.2), c(0.01, 0.03)); 8];
        for w in combine_all(&topo, &m, &psi).unwrap() {
            assert!((w.h - psi[0].h).norm() < 1e-15);
            assert!((w.g - psi[0].g).norm() < 1e-15);
        }
    }

    #[test]
    fn combine_rejects_wrong_width() {
        let topo = NetworkTopology::ring(3).unwrap();
        let m = metropolis_weights(&topo);
        assert!(combine_all(&topo, &m, &[AugmentedWeights::initial()]).is_err());
    }

    fn noisy_streams(n_nodes: usize, len: usize, seed: u64) -> Vec<Vec<NoisyPair>> {
        let clean: Vec<_> = (0..=len)
            .map(|t| voltage_at(&PhaseParams::nominal(), t))
            .collect();
        let power = PowerProfile::constant(PhaseParams::nominal().mean_power());
        (0..n_nodes)
            .map(|k| {
                corrupt_stream(&clean, &NoiseConfig::new(30.0, seed + k as u64), &power).unwrap()
            })
            .collect()
    }

    #[test]
    fn single_node_network_matches_standalone_filter() {
        let streams = noisy_streams(1, 2000, 4);
        for algorithm in [Algorithm::Damtcc, Algorithm::Daclms] {
            let mut net =
                NetworkState::uniform(NetworkTopology::single(), params(), algorithm, NOMINAL_DT)
                    .unwrap();
            let mut solo = WlFilter::new(algorithm, params(), NOMINAL_DT).unwrap();
            for pair in &streams[0] {
                let out = net.step(std::slice::from_ref(pair)).unwrap();
                let s = solo.step(pair).unwrap();
                assert_eq!(net.nodes[0].weights, solo.weights);
                assert_eq!(out[0].f_hat, s.estimate.f_hat);
                assert_eq!(out[0].sq_error, s.error.norm_sqr());
            }
        }
    }

    #[test]
    fn symmetric_pair_stays_symmetric() {
        let stream = noisy_streams(1, 500, 9).remove(0);
        let mut net = NetworkState::uniform(
            NetworkTopology::line(2).unwrap(),
            params(),
            Algorithm::Damtcc,
            NOMINAL_DT,
        )
        .unwrap();
        for pair in &stream {
            net.step(&[*pair, *pair]).unwrap();
            assert_eq!(net.nodes[0].weights, net.nodes[1].weights);
        }
    }

    #[test]
    fn run_records_every_iteration() {
        let streams = noisy_streams(8, 300, 1);
        let mut net = NetworkState::uniform(
            NetworkTopology::topology1(),
            params(),
            Algorithm::Damtcc,
            NOMINAL_DT,
        )
        .unwrap();
        let series = run(&mut net, &streams, 3, 300).unwrap();
        assert_eq!(series.iterations(), 300);
        assert_eq!(series.nodes(), 8);
        assert_eq!(series.run, 3);
        assert!(run(&mut net, &streams, 0, 301).is_err());
        assert!(run(&mut net, &streams[..7], 0, 10).is_err());
    }

    #[test]
    fn network_converges_on_clean_data() {
        let clean: Vec<_> = (0..=6000)
            .map(|t| voltage_at(&PhaseParams::nominal(), t))
            .collect();
        let pairs: Vec<_> = clean
            .windows(2)
            .map(|w| NoisyPair {
                x_noisy: w[0],
                d_noisy: w[1],
            })
            .collect();
        let streams = vec![pairs; 8];
        let mut net = NetworkState::uniform(
            NetworkTopology::topology2(),
            FilterParams::new(0.05, 1.0, 1.0).unwrap(),
            Algorithm::Damtcc,
            NOMINAL_DT,
        )
        .unwrap();
        let series = run(&mut net, &streams, 0, 6000).unwrap();
        for r in series.iteration(5999) {
            assert!(r.valid);
            assert!((r.f_hat - 50.0).abs() < 1e-3, "{}", r.f_hat);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metropolis_column_sums_are_one(n in 2usize..12, extra in proptest::collection::vec((0usize..12, 0usize..12), 0..20)) {
            let mut edges: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
            edges.extend(extra.into_iter().filter(|&(a, b)| a < n && b < n && a != b));
            let topo = NetworkTopology::new(n, &edges).unwrap();
            let m = metropolis_weights(&topo);
            prop_assert!(m.is_symmetric(0.0));
            for k in 0..n {
                prop_assert!((m.column_sum(k) - 1.0).abs() < 1e-12);
                prop_assert!(m.get(k, k) > 0.0);
            }
        }

        #[test]
        fn combine_is_convex(hs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 8)) {
            let topo = NetworkTopology::topology1();
            let m = metropolis_weights(&topo);
            let psi: Vec<_> = hs.iter().map(|&(re, im)| AugmentedWeights::new(c(re, im), c(im, re))).collect();
            let bound = psi.iter().map(|w| w.h.norm()).fold(0.0, f64::max);
            for w in combine_all(&topo, &m, &psi).unwrap() {
                prop_assert!(w.h.norm() <= bound + 1e-12);
            }
            // The network mean is preserved by a doubly-stochastic combination.
            let before: Complex64 = psi.iter().map(|w| w.h).sum();
            let after: Complex64 = combine_all(&topo, &m, &psi).unwrap().iter().map(|w| w.h).sum();
            prop_assert!((before - after).norm() < 1e-12);
        }
    }
}
