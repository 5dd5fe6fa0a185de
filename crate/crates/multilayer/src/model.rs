//! Model parameters, link configurations and the layer-merge semantics.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::BaseGraph;

/// Parameters of the layered model: `layers` i.i.d. layers, a link is active
/// in the merged graph when it shows up in at least `threshold` of them.
/// `p[l]` is the per-layer survival probability of link `l`, `q[i]` the
/// per-layer activation probability of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layers: u32,
    pub threshold: u32,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ModelParams {
    pub fn new(layers: u32, threshold: u32, p: Vec<f64>, q: Vec<f64>) -> Self {
        ModelParams { layers, threshold, p, q }
    }

    /// Uniform survival/activation probabilities over the whole graph.
    pub fn uniform(g: &BaseGraph, layers: u32, threshold: u32, p: f64, q: f64) -> Self {
        ModelParams {
            layers,
            threshold,
            p: vec![p; g.num_links()],
            q: vec![q; g.num_nodes()],
        }
    }
}

/// Per-layer (independent but non-identical) parameters.
/// `p[m][l]` and `q[m][i]` index layer `m`, link `l`, node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonIdenticalParams {
    pub threshold: u32,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl NonIdenticalParams {
    pub fn layers(&self) -> u32 {
        self.p.len() as u32
    }

    pub fn validate(&self, g: &BaseGraph) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.p.is_empty() {
            report.errors.push("at least one layer is required".into());
        }
        if self.p.len() != self.q.len() {
            report
                .errors
                .push(format!("{} link rows vs {} node rows", self.p.len(), self.q.len()));
        }
        let m = self.layers();
        if self.threshold < 1 || self.threshold > m {
            report
                .errors
                .push(format!("threshold {} outside 1..={m}", self.threshold));
        }
        for (layer, row) in self.p.iter().enumerate() {
            if row.len() != g.num_links() {
                report
                    .errors
                    .push(format!("layer {layer}: {} link entries, expected {}", row.len(), g.num_links()));
                continue;
            }
            for (l, &v) in row.iter().enumerate() {
                if !(v > 0.0 && v <= 1.0) {
                    report.errors.push(format!("layer {layer}: p[{l}] = {v} outside (0, 1]"));
                }
            }
        }
        for (layer, row) in self.q.iter().enumerate() {
            if row.len() != g.num_nodes() {
                report
                    .errors
                    .push(format!("layer {layer}: {} node entries, expected {}", row.len(), g.num_nodes()));
                continue;
            }
            for (i, &v) in row.iter().enumerate() {
                if !(v > 0.0 && v <= 1.0) {
                    report.errors.push(format!("layer {layer}: q[{i}] = {v} outside (0, 1]"));
                }
            }
        }
        report
    }
}

/// Outcome of validating a graph/parameter pair. Errors are fatal;
/// warnings flag assumptions worth knowing about (e.g. a disconnected graph).
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check the parameter invariants against a graph. A disconnected graph is a
/// warning, not an error.
pub fn validate_model(g: &BaseGraph, params: &ModelParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    if params.layers < 1 {
        report.errors.push("layer count must be at least 1".into());
    }
    if params.threshold < 1 {
        report.errors.push("threshold K must be at least 1".into());
    } else if params.threshold > params.layers {
        report.errors.push(format!(
            "K exceeds M: threshold {} > layer count {}",
            params.threshold, params.layers
        ));
    }
    if params.p.len() != g.num_links() {
        report.errors.push(format!(
            "{} link probabilities for {} links",
            params.p.len(),
            g.num_links()
        ));
    } else {
        for (l, &v) in params.p.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                report.errors.push(format!("p[{l}] = {v} outside (0, 1]"));
            }
        }
    }
    if params.q.len() != g.num_nodes() {
        report.errors.push(format!(
            "{} node probabilities for {} nodes",
            params.q.len(),
            g.num_nodes()
        ));
    } else {
        for (i, &v) in params.q.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                report.errors.push(format!("q[{i}] = {v} outside (0, 1]"));
            }
        }
    }
    if !g.is_connected() {
        report.warnings.push("base graph is not connected".into());
    }
    report
}

/// On/off state of every link of the merged network, aligned with the
/// base graph's link order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkConfiguration {
    bits: Vec<bool>,
}

impl LinkConfiguration {
    pub fn new(bits: Vec<bool>) -> Self {
        LinkConfiguration { bits }
    }

    pub fn all_zeros(len: usize) -> Self {
        LinkConfiguration { bits: vec![false; len] }
    }

    pub fn all_ones(len: usize) -> Self {
        LinkConfiguration { bits: vec![true; len] }
    }

    /// Interpret bit `l` of `mask` as the state of link `l`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!(len <= 64);
        LinkConfiguration {
            bits: (0..len).map(|l| mask >> l & 1 == 1).collect(),
        }
    }

    /// Pack into a bitmask (link `l` -> bit `l`); `None` above 64 links.
    pub fn to_mask(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        let mut mask = 0u64;
        for (l, &b) in self.bits.iter().enumerate() {
            if b {
                mask |= 1 << l;
            }
        }
        Some(mask)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, l: usize) -> bool {
        self.bits[l]
    }

    pub fn set(&mut self, l: usize, value: bool) {
        self.bits[l] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// All `2^len` configurations in mask order. Panics above 20 links.
    pub fn enumerate(len: usize) -> impl Iterator<Item = LinkConfiguration> {
        assert!(len <= 20, "configuration enumeration capped at 20 links");
        (0u64..1 << len).map(move |mask| LinkConfiguration::from_mask(mask, len))
    }
}

impl fmt::Display for LinkConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// One sampled layer: which nodes are active, which links survived thinning,
/// and the resulting layer link set (survival AND both endpoints active).
#[derive(Debug, Clone)]
pub struct LayerSample {
    pub active_nodes: Vec<bool>,
    pub surviving_links: Vec<bool>,
    pub layer_links: Vec<bool>,
}

impl LayerSample {
    pub fn new(g: &BaseGraph, active_nodes: Vec<bool>, surviving_links: Vec<bool>) -> Result<Self> {
        if active_nodes.len() != g.num_nodes() || surviving_links.len() != g.num_links() {
            return Err(Error::Validation(format!(
                "layer sample dimensions ({}, {}) do not match graph ({}, {})",
                active_nodes.len(),
                surviving_links.len(),
                g.num_nodes(),
                g.num_links()
            )));
        }
        let layer_links = g
            .links()
            .iter()
            .enumerate()
            .map(|(l, &(u, v))| surviving_links[l] && active_nodes[u] && active_nodes[v])
            .collect();
        Ok(LayerSample { active_nodes, surviving_links, layer_links })
    }
}

/// Number of layers each link shows up in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityVector {
    pub counts: Vec<u32>,
}

/// Per-link layer multiplicities across a set of layer samples.
pub fn multiplicities(layers: &[LayerSample]) -> Result<MultiplicityVector> {
    let Some(first) = layers.first() else {
        return Err(Error::Validation("no layers to merge".into()));
    };
    let num_links = first.layer_links.len();
    let mut counts = vec![0u32; num_links];
    for layer in layers {
        if layer.layer_links.len() != num_links {
            return Err(Error::Validation("mismatched layer dimensions".into()));
        }
        for (l, &present) in layer.layer_links.iter().enumerate() {
            counts[l] += present as u32;
        }
    }
    Ok(MultiplicityVector { counts })
}

/// Merge layers under threshold `k`: link active iff it shows up in at least
/// `k` layers. `k = 1` is the plain union.
pub fn merge_layers(layers: &[LayerSample], k: u32) -> Result<LinkConfiguration> {
    if k < 1 || k as usize > layers.len() {
        return Err(Error::Validation(format!(
            "threshold {k} outside 1..={}",
            layers.len()
        )));
    }
    let mult = multiplicities(layers)?;
    Ok(LinkConfiguration::new(mult.counts.iter().map(|&c| c >= k).collect()))
}
