//! Seeded Monte Carlo for the full model: identical or per-layer parameters,
//! any graph, any threshold. Replication `r` draws from a dedicated ChaCha
//! stream keyed by `(seed, r)`, and all tallies are integers, so serial and
//! parallel runs produce bit-identical reports.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::model::{LinkConfiguration, ModelParams, NonIdenticalParams};

/// Replications per parallel work unit; fixed so the chunk split never
/// depends on the thread count.
const CHUNK: u64 = 1024;
const CONFIG_LINK_CAP: usize = 20;
const JOINT_LINK_CAP: usize = 3;

/// What to tally per replication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatisticKind {
    /// Histogram of the merged configuration bitmask (graphs up to 20 links).
    ConfigCounts,
    /// Indicator of the merged configuration equalling a target (no link cap).
    ConfigMatch(LinkConfiguration),
    /// Joint histogram of the layer multiplicities of up to 3 links.
    MultiplicityJoint(Vec<usize>),
    /// Size of the component containing a node.
    ClusterSize(usize),
    /// Number of active links in the merged graph.
    ActiveLinks,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    pub statistics: Vec<StatisticKind>,
}

/// Sample mean with its standard error (sample std / sqrt(replications)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarEstimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatisticResult {
    ConfigCounts { counts: BTreeMap<u64, u64> },
    ConfigMatch { config: LinkConfiguration, estimate: ScalarEstimate },
    MultiplicityJoint { links: Vec<usize>, counts: BTreeMap<Vec<u16>, u64> },
    ClusterSize { node: usize, estimate: ScalarEstimate },
    ActiveLinks { estimate: ScalarEstimate },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub replications: u64,
    pub seed: u64,
    pub results: Vec<StatisticResult>,
}

impl EstimateReport {
    pub fn config_counts(&self) -> Option<&BTreeMap<u64, u64>> {
        self.results.iter().find_map(|r| match r {
            StatisticResult::ConfigCounts { counts } => Some(counts),
            _ => None,
        })
    }

    pub fn config_match(&self) -> Option<ScalarEstimate> {
        self.results.iter().find_map(|r| match r {
            StatisticResult::ConfigMatch { estimate, .. } => Some(*estimate),
            _ => None,
        })
    }

    pub fn cluster_size(&self, node: usize) -> Option<ScalarEstimate> {
        self.results.iter().find_map(|r| match r {
            StatisticResult::ClusterSize { node: n, estimate } if *n == node => Some(*estimate),
            _ => None,
        })
    }

    pub fn active_links(&self) -> Option<ScalarEstimate> {
        self.results.iter().find_map(|r| match r {
            StatisticResult::ActiveLinks { estimate } => Some(*estimate),
            _ => None,
        })
    }

    pub fn multiplicity_joint(&self) -> Option<(&[usize], &BTreeMap<Vec<u16>, u64>)> {
        self.results.iter().find_map(|r| match r {
            StatisticResult::MultiplicityJoint { links, counts } => {
                Some((links.as_slice(), counts))
            }
            _ => None,
        })
    }
}

enum LayerView<'a> {
    Identical(&'a ModelParams),
    PerLayer(&'a NonIdenticalParams),
}

impl<'a> LayerView<'a> {
    fn layers(&self) -> u32 {
        match self {
            LayerView::Identical(p) => p.layers,
            LayerView::PerLayer(p) => p.layers(),
        }
    }

    fn threshold(&self) -> u32 {
        match self {
            LayerView::Identical(p) => p.threshold,
            LayerView::PerLayer(p) => p.threshold,
        }
    }

    fn link_prob(&self, layer: usize, link: usize) -> f64 {
        match self {
            LayerView::Identical(p) => p.p[link],
            LayerView::PerLayer(p) => p.p[layer][link],
        }
    }

    fn node_prob(&self, layer: usize, node: usize) -> f64 {
        match self {
            LayerView::Identical(p) => p.q[node],
            LayerView::PerLayer(p) => p.q[layer][node],
        }
    }
}

/// Simulate the model with layer-identical parameters.
pub fn simulate(g: &BaseGraph, params: &ModelParams, cfg: &SimConfig) -> Result<EstimateReport> {
    run(g, &LayerView::Identical(params), cfg)
}

/// Simulate with independent, non-identical layers.
pub fn simulate_nonidentical(
    g: &BaseGraph,
    params: &NonIdenticalParams,
    cfg: &SimConfig,
) -> Result<EstimateReport> {
    run(g, &LayerView::PerLayer(params), cfg)
}

/// Empirical joint pmf of the multiplicities of a few links, as counts.
pub fn empirical_multiplicity_joint(
    g: &BaseGraph,
    params: &ModelParams,
    cfg: &SimConfig,
    links: &[usize],
) -> Result<BTreeMap<Vec<u16>, u64>> {
    let cfg = SimConfig {
        replications: cfg.replications,
        seed: cfg.seed,
        statistics: vec![StatisticKind::MultiplicityJoint(links.to_vec())],
    };
    let report = simulate(g, params, &cfg)?;
    match report.results.into_iter().next() {
        Some(StatisticResult::MultiplicityJoint { counts, .. }) => Ok(counts),
        _ => unreachable!("requested statistic is always produced"),
    }
}

#[derive(Clone)]
enum Tally {
    Config(BTreeMap<u64, u64>),
    Joint(BTreeMap<Vec<u16>, u64>),
    Scalar { sum: u64, sum_sq: u128 },
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        match (self, other) {
            (Tally::Config(a), Tally::Config(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            (Tally::Joint(a), Tally::Joint(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            (Tally::Scalar { sum, sum_sq }, Tally::Scalar { sum: s, sum_sq: q }) => {
                *sum += s;
                *sum_sq += q;
            }
            _ => unreachable!("tally kinds are aligned by construction"),
        }
    }
}

fn validate_statistics(g: &BaseGraph, cfg: &SimConfig) -> Result<()> {
    if cfg.replications < 1 {
        return Err(Error::Validation("at least one replication is required".into()));
    }
    for stat in &cfg.statistics {
        match stat {
            StatisticKind::ConfigCounts => {
                if g.num_links() > CONFIG_LINK_CAP {
                    return Err(Error::SizeCap(format!(
                        "configuration counting capped at {CONFIG_LINK_CAP} links"
                    )));
                }
            }
            StatisticKind::ConfigMatch(config) => {
                if config.len() != g.num_links() {
                    return Err(Error::Validation(
                        "target configuration length does not match the graph".into(),
                    ));
                }
            }
            StatisticKind::MultiplicityJoint(links) => {
                if links.is_empty() || links.len() > JOINT_LINK_CAP {
                    return Err(Error::Validation(format!(
                        "joint multiplicity tracks 1..={JOINT_LINK_CAP} links"
                    )));
                }
                if links.iter().any(|&l| l >= g.num_links()) {
                    return Err(Error::Validation("joint multiplicity link out of range".into()));
                }
            }
            StatisticKind::ClusterSize(node) => {
                if *node >= g.num_nodes() {
                    return Err(Error::Validation(format!("cluster node {node} out of range")));
                }
            }
            StatisticKind::ActiveLinks => {}
        }
    }
    Ok(())
}

fn run(g: &BaseGraph, view: &LayerView<'_>, cfg: &SimConfig) -> Result<EstimateReport> {
    validate_statistics(g, cfg)?;
    let layers = view.layers();
    let threshold = view.threshold();
    if threshold < 1 || threshold > layers {
        return Err(Error::Validation(format!("threshold {threshold} outside 1..={layers}")));
    }

    let n_chunks = cfg.replications.div_ceil(CHUNK);
    let chunk_tallies: Vec<Vec<Tally>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(cfg.replications);
            let mut tallies = fresh_tallies(cfg);
            let mut active = vec![false; g.num_nodes()];
            let mut mult = vec![0u32; g.num_links()];
            for rep in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(rep);
                sample_replication(g, view, &mut rng, &mut active, &mut mult);
                record(g, cfg, &mut tallies, &mult, threshold);
            }
            tallies
        })
        .collect();

    // Fold chunks in index order: merges are integer adds, so the result is
    // independent of how the chunks were scheduled.
    let mut total = fresh_tallies(cfg);
    for chunk in chunk_tallies {
        for (acc, t) in total.iter_mut().zip(chunk) {
            acc.merge(t);
        }
    }

    let results = cfg
        .statistics
        .iter()
        .zip(total)
        .map(|(stat, tally)| finish(stat, tally, cfg.replications))
        .collect();
    Ok(EstimateReport { replications: cfg.replications, seed: cfg.seed, results })
}

fn fresh_tallies(cfg: &SimConfig) -> Vec<Tally> {
    cfg.statistics
        .iter()
        .map(|stat| match stat {
            StatisticKind::ConfigCounts => Tally::Config(BTreeMap::new()),
            StatisticKind::MultiplicityJoint(_) => Tally::Joint(BTreeMap::new()),
            _ => Tally::Scalar { sum: 0, sum_sq: 0 },
        })
        .collect()
}

fn sample_replication(
    g: &BaseGraph,
    view: &LayerView<'_>,
    rng: &mut ChaCha8Rng,
    active: &mut [bool],
    mult: &mut [u32],
) {
    mult.fill(0);
    for layer in 0..view.layers() as usize {
        for (i, slot) in active.iter_mut().enumerate() {
            *slot = rng.random::<f64>() < view.node_prob(layer, i);
        }
        for (l, &(u, v)) in g.links().iter().enumerate() {
            if active[u] && active[v] {
                let p = view.link_prob(layer, l);
                if p >= 1.0 || rng.random::<f64>() < p {
                    mult[l] += 1;
                }
            }
        }
    }
}

fn record(g: &BaseGraph, cfg: &SimConfig, tallies: &mut [Tally], mult: &[u32], threshold: u32) {
    for (stat, tally) in cfg.statistics.iter().zip(tallies.iter_mut()) {
        match (stat, tally) {
            (StatisticKind::ConfigCounts, Tally::Config(counts)) => {
                let mut mask = 0u64;
                for (l, &w) in mult.iter().enumerate() {
                    if w >= threshold {
                        mask |= 1 << l;
                    }
                }
                *counts.entry(mask).or_insert(0) += 1;
            }
            (StatisticKind::ConfigMatch(config), Tally::Scalar { sum, sum_sq }) => {
                let matches = mult
                    .iter()
                    .zip(config.bits())
                    .all(|(&w, &bit)| (w >= threshold) == bit);
                if matches {
                    *sum += 1;
                    *sum_sq += 1;
                }
            }
            (StatisticKind::MultiplicityJoint(links), Tally::Joint(counts)) => {
                let key: Vec<u16> = links.iter().map(|&l| mult[l] as u16).collect();
                *counts.entry(key).or_insert(0) += 1;
            }
            (StatisticKind::ClusterSize(node), Tally::Scalar { sum, sum_sq }) => {
                let size = component_size(g, mult, threshold, *node) as u64;
                *sum += size;
                *sum_sq += (size * size) as u128;
            }
            (StatisticKind::ActiveLinks, Tally::Scalar { sum, sum_sq }) => {
                let count = mult.iter().filter(|&&w| w >= threshold).count() as u64;
                *sum += count;
                *sum_sq += (count * count) as u128;
            }
            _ => unreachable!("tally kinds are aligned by construction"),
        }
    }
}

fn component_size(g: &BaseGraph, mult: &[u32], threshold: u32, node: usize) -> usize {
    let mut parent: Vec<usize> = (0..g.num_nodes()).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (l, &(u, v)) in g.links().iter().enumerate() {
        if mult[l] >= threshold {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
            }
        }
    }
    let root = find(&mut parent, node);
    (0..g.num_nodes()).filter(|&v| find(&mut parent, v) == root).count()
}

fn finish(stat: &StatisticKind, tally: Tally, replications: u64) -> StatisticResult {
    match (stat, tally) {
        (StatisticKind::ConfigCounts, Tally::Config(counts)) => {
            StatisticResult::ConfigCounts { counts }
        }
        (StatisticKind::ConfigMatch(config), Tally::Scalar { sum, sum_sq }) => {
            StatisticResult::ConfigMatch {
                config: config.clone(),
                estimate: estimate(sum, sum_sq, replications),
            }
        }
        (StatisticKind::MultiplicityJoint(links), Tally::Joint(counts)) => {
            StatisticResult::MultiplicityJoint { links: links.clone(), counts }
        }
        (StatisticKind::ClusterSize(node), Tally::Scalar { sum, sum_sq }) => {
            StatisticResult::ClusterSize { node: *node, estimate: estimate(sum, sum_sq, replications) }
        }
        (StatisticKind::ActiveLinks, Tally::Scalar { sum, sum_sq }) => {
            StatisticResult::ActiveLinks { estimate: estimate(sum, sum_sq, replications) }
        }
        _ => unreachable!("tally kinds are aligned by construction"),
    }
}

fn estimate(sum: u64, sum_sq: u128, replications: u64) -> ScalarEstimate {
    let r = replications as f64;
    let mean = sum as f64 / r;
    let std_error = if replications > 1 {
        let var = (sum_sq as f64 - (sum as f64) * (sum as f64) / r) / (r - 1.0);
        (var.max(0.0) / r).sqrt()
    } else {
        0.0
    };
    ScalarEstimate { mean, std_error }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(replications: u64, seed: u64, statistics: Vec<StatisticKind>) -> SimConfig {
        SimConfig { replications, seed, statistics }
    }

    #[test]
    fn degenerate_parameters_are_exact() {
        let g = BaseGraph::path(3);
        let params = ModelParams::uniform(&g, 2, 1, 1.0, 1.0);
        let report = simulate(
            &g,
            &params,
            &cfg(
                500,
                7,
                vec![
                    StatisticKind::ConfigCounts,
                    StatisticKind::ClusterSize(0),
                    StatisticKind::ActiveLinks,
                ],
            ),
        )
        .unwrap();
        let counts = report.config_counts().unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&0b111], 500);
        let cluster = report.cluster_size(0).unwrap();
        assert_eq!(cluster.mean, 4.0);
        assert_eq!(cluster.std_error, 0.0);
        assert_eq!(report.active_links().unwrap().mean, 3.0);
    }

    #[test]
    fn single_link_estimate_brackets_closed_form() {
        let g = BaseGraph::path(1);
        let params = ModelParams::uniform(&g, 2, 1, 1.0, 0.5);
        let report = simulate(&g, &params, &cfg(100_000, 42, vec![StatisticKind::ConfigCounts])).unwrap();
        let counts = report.config_counts().unwrap();
        let hits = counts.get(&1).copied().unwrap_or(0) as f64;
        let p_hat = hits / 100_000.0;
        let exact = 0.4375; // 1 - (1 - 0.25)^2
        let se = (exact * (1.0 - exact) / 100_000.0f64).sqrt();
        assert!((p_hat - exact).abs() < 3.0 * se, "p_hat = {p_hat}");
    }

    #[test]
    fn same_seed_same_report_across_thread_counts() {
        let g = BaseGraph::star_with_branches(&[2, 2, 1]);
        let params = ModelParams::uniform(&g, 3, 2, 0.8, 0.6);
        let config = cfg(
            5000,
            1234,
            vec![
                StatisticKind::ConfigCounts,
                StatisticKind::ClusterSize(0),
                StatisticKind::ActiveLinks,
                StatisticKind::MultiplicityJoint(vec![0, 1]),
            ],
        );
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate(&g, &params, &config).unwrap());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate(&g, &params, &config).unwrap());
        assert_eq!(serial, parallel);
        let again = simulate(&g, &params, &config).unwrap();
        assert_eq!(serial, again);
    }

    #[test]
    fn nonidentical_two_layer_toy() {
        let g = BaseGraph::path(1);
        let params = NonIdenticalParams {
            threshold: 1,
            p: vec![vec![0.1], vec![0.2]],
            q: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        };
        let reps = 200_000u64;
        let report =
            simulate_nonidentical(&g, &params, &cfg(reps, 99, vec![StatisticKind::ActiveLinks]))
                .unwrap();
        let est = report.active_links().unwrap();
        let exact = 1.0 - 0.9 * 0.8;
        assert!((est.mean - exact).abs() < 4.0 * est.std_error.max(1e-6));
    }

    #[test]
    fn joint_multiplicity_single_link_binomial() {
        let g = BaseGraph::path(1);
        let params = ModelParams::uniform(&g, 1, 1, 0.7, 0.6);
        let counts = empirical_multiplicity_joint(
            &g,
            &params,
            &cfg(50_000, 5, Vec::new()),
            &[0],
        )
        .unwrap();
        let p1 = counts.get(&vec![1u16]).copied().unwrap_or(0) as f64 / 50_000.0;
        let exact = 0.7 * 0.36;
        let se = (exact * (1.0 - exact) / 50_000.0f64).sqrt();
        assert!((p1 - exact).abs() < 4.0 * se);
    }

    #[test]
    fn statistic_validation() {
        let g = BaseGraph::path(1);
        let params = ModelParams::uniform(&g, 1, 1, 1.0, 0.5);
        assert!(simulate(&g, &params, &cfg(10, 0, vec![StatisticKind::ClusterSize(9)])).is_err());
        assert!(simulate(
            &g,
            &params,
            &cfg(10, 0, vec![StatisticKind::MultiplicityJoint(vec![0, 0, 0, 0])])
        )
        .is_err());
        assert!(simulate(&g, &params, &cfg(0, 0, vec![])).is_err());
    }
}
