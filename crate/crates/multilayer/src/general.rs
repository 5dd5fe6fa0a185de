//! Exhaustive solvers for small graphs: single-layer configuration law,
//! merge recursion over layers (threshold 1), full multilayer brute force for
//! any threshold, conditioned variants, and independent-set counting.

use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::model::{LinkConfiguration, ModelParams};

/// Work bound for the exhaustive paths (number of enumerated branches).
const WORK_CAP: u64 = 1 << 26;
/// Hard cap on links so distributions fit in a dense `2^|E|` table.
const LINK_CAP: usize = 20;

/// Dense probability table over all `2^num_links` link configurations,
/// indexed by bitmask (bit `l` = state of link `l`).
#[derive(Debug, Clone)]
pub struct ConfigDistribution {
    pub probs: Vec<f64>,
    num_links: usize,
}

impl ConfigDistribution {
    fn zeros(num_links: usize) -> Self {
        ConfigDistribution { probs: vec![0.0; 1 << num_links], num_links }
    }

    pub fn num_links(&self) -> usize {
        self.num_links
    }

    pub fn prob_of(&self, x: &LinkConfiguration) -> f64 {
        let mask = x.to_mask().expect("configuration fits in a mask") as usize;
        self.probs[mask]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// P[link `l` active].
    pub fn marginal(&self, l: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask >> l & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

fn check_link_cap(g: &BaseGraph) -> Result<()> {
    if g.num_links() > LINK_CAP {
        return Err(Error::SizeCap(format!(
            "{} links exceeds the {LINK_CAP}-link enumeration cap",
            g.num_links()
        )));
    }
    Ok(())
}

/// Configuration law of a single layer, by exhausting node-activation
/// patterns and folding link thinning in with product weights. `force`
/// pins one node's activation (used by the conditioned variants).
fn layer_dist(g: &BaseGraph, p: &[f64], q: &[f64], force: Option<(usize, bool)>) -> Result<ConfigDistribution> {
    check_link_cap(g)?;
    let n = g.num_nodes();
    let node_prob = |i: usize| -> f64 {
        match force {
            Some((node, active)) if node == i => {
                if active {
                    1.0
                } else {
                    0.0
                }
            }
            _ => q[i],
        }
    };

    let mut free_nodes = Vec::new();
    let mut forced_active = 0u64;
    for i in 0..n {
        let qi = node_prob(i);
        if qi >= 1.0 {
            forced_active |= 1 << i;
        } else if qi > 0.0 {
            free_nodes.push(i);
        }
    }
    let thinnable = g.links().iter().enumerate().filter(|&(l, _)| p[l] < 1.0).count();
    let work = (1u64 << free_nodes.len().min(63)).saturating_mul(1u64 << thinnable.min(63));
    if free_nodes.len() >= 63 || work > WORK_CAP {
        return Err(Error::SizeCap(format!(
            "single-layer enumeration needs ~2^{} branches",
            free_nodes.len() + thinnable
        )));
    }

    let mut dist = ConfigDistribution::zeros(g.num_links());
    for pattern in 0u64..1 << free_nodes.len() {
        let mut active = forced_active;
        let mut weight = 1.0;
        for (bit, &i) in free_nodes.iter().enumerate() {
            if pattern >> bit & 1 == 1 {
                active |= 1 << i;
                weight *= node_prob(i);
            } else {
                weight *= 1.0 - node_prob(i);
            }
        }
        // Candidate links: both endpoints active this layer.
        let mut base = 0u64;
        let mut thin = Vec::new();
        for (l, &(u, v)) in g.links().iter().enumerate() {
            if active >> u & 1 == 1 && active >> v & 1 == 1 {
                if p[l] >= 1.0 {
                    base |= 1 << l;
                } else {
                    thin.push(l);
                }
            }
        }
        for sub in 0u64..1 << thin.len() {
            let mut mask = base;
            let mut w = weight;
            for (bit, &l) in thin.iter().enumerate() {
                if sub >> bit & 1 == 1 {
                    mask |= 1 << l;
                    w *= p[l];
                } else {
                    w *= 1.0 - p[l];
                }
            }
            dist.probs[mask as usize] += w;
        }
    }
    Ok(dist)
}

/// Configuration law of one layer of the model.
pub fn single_layer_dist(g: &BaseGraph, params: &ModelParams) -> Result<ConfigDistribution> {
    layer_dist(g, &params.p, &params.q, None)
}

/// Merge-one-more-layer recursion for threshold 1: each step convolves the
/// current law with the single-layer law under set union. Computed through
/// subset-sum (zeta) transforms: `P[S ∪ T ⊆ x] = P[S ⊆ x] P[T ⊆ x]`
/// pointwise, inverted back to exact-configuration masses.
pub fn merge_recursion(q1: &ConfigDistribution, layers: u32) -> ConfigDistribution {
    assert!(layers >= 1);
    if layers == 1 {
        return q1.clone();
    }
    let num_links = q1.num_links();
    let mut layer_zeta = q1.probs.clone();
    subset_sums(&mut layer_zeta, num_links);
    let mut zeta = layer_zeta.clone();
    for _ in 1..layers {
        for (acc, &z) in zeta.iter_mut().zip(&layer_zeta) {
            *acc *= z;
        }
    }
    let mut probs = zeta;
    inverse_subset_sums(&mut probs, num_links);
    for p in &mut probs {
        *p = p.max(0.0);
    }
    ConfigDistribution { probs, num_links }
}

/// In place `f'[x] = sum over y ⊆ x of f[y]`.
fn subset_sums(f: &mut [f64], bits: usize) {
    for b in 0..bits {
        for mask in 0..f.len() {
            if mask >> b & 1 == 1 {
                f[mask] += f[mask ^ (1 << b)];
            }
        }
    }
}

fn inverse_subset_sums(f: &mut [f64], bits: usize) {
    for b in 0..bits {
        for mask in 0..f.len() {
            if mask >> b & 1 == 1 {
                f[mask] -= f[mask ^ (1 << b)];
            }
        }
    }
}

/// Exhaust all per-layer link-set outcomes over every layer and merge with
/// the multiplicity threshold. Independent of [`merge_recursion`]'s
/// convolution and valid for any threshold.
pub fn brute_force_dist(g: &BaseGraph, params: &ModelParams) -> Result<ConfigDistribution> {
    let layer = layer_dist(g, &params.p, &params.q, None)?;
    let supports = vec![support(&layer); params.layers as usize];
    merged_from_supports(g.num_links(), &supports, params.threshold)
}

/// As [`brute_force_dist`], conditioned on `node` being active in exactly `m`
/// layers. By exchangeability this is the same as conditioning on a fixed set
/// of `m` layers, which is how it is computed: `node` is pinned active in the
/// first `m` layers and inactive in the rest.
pub fn conditioned_brute_force(
    g: &BaseGraph,
    params: &ModelParams,
    node: usize,
    m: u32,
) -> Result<ConfigDistribution> {
    if m > params.layers {
        return Err(Error::Validation(format!(
            "conditioning on {m} layers with only {} available",
            params.layers
        )));
    }
    if params.q[node] >= 1.0 && m < params.layers {
        return Err(Error::Validation(
            "conditioning event has probability zero (node always active)".into(),
        ));
    }
    if params.q[node] <= 0.0 && m > 0 {
        return Err(Error::Validation(
            "conditioning event has probability zero (node never active)".into(),
        ));
    }
    let active = support(&layer_dist(g, &params.p, &params.q, Some((node, true)))?);
    let inactive = support(&layer_dist(g, &params.p, &params.q, Some((node, false)))?);
    let mut supports = Vec::with_capacity(params.layers as usize);
    for layer in 0..params.layers {
        supports.push(if layer < m { active.clone() } else { inactive.clone() });
    }
    merged_from_supports(g.num_links(), &supports, params.threshold)
}

fn support(dist: &ConfigDistribution) -> Vec<(u64, f64)> {
    dist.probs
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > 0.0)
        .map(|(mask, &p)| (mask as u64, p))
        .collect()
}

fn merged_from_supports(
    num_links: usize,
    supports: &[Vec<(u64, f64)>],
    threshold: u32,
) -> Result<ConfigDistribution> {
    let layers = supports.len() as u32;
    if threshold < 1 || threshold > layers {
        return Err(Error::Validation(format!("threshold {threshold} outside 1..={layers}")));
    }
    let mut work = 1u64;
    for s in supports {
        work = work.saturating_mul(s.len() as u64);
        if work > WORK_CAP {
            return Err(Error::SizeCap(format!(
                "layer-outcome enumeration exceeds {WORK_CAP} branches"
            )));
        }
    }
    let mut dist = ConfigDistribution::zeros(num_links);
    let mut counts = vec![0u32; num_links];
    recurse(supports, 0, 1.0, &mut counts, threshold, &mut dist);
    Ok(dist)
}

fn recurse(
    supports: &[Vec<(u64, f64)>],
    depth: usize,
    weight: f64,
    counts: &mut [u32],
    threshold: u32,
    out: &mut ConfigDistribution,
) {
    if depth == supports.len() {
        let mut mask = 0u64;
        for (l, &c) in counts.iter().enumerate() {
            if c >= threshold {
                mask |= 1 << l;
            }
        }
        out.probs[mask as usize] += weight;
        return;
    }
    for &(set, prob) in &supports[depth] {
        let mut bits = set;
        while bits != 0 {
            let l = bits.trailing_zeros() as usize;
            counts[l] += 1;
            bits &= bits - 1;
        }
        recurse(supports, depth + 1, weight * prob, counts, threshold, out);
        let mut bits = set;
        while bits != 0 {
            let l = bits.trailing_zeros() as usize;
            counts[l] -= 1;
            bits &= bits - 1;
        }
    }
}

/// Number of independent sets (including the empty set), by exhaustive
/// subset check against adjacency masks.
pub fn count_independent_sets(g: &BaseGraph) -> Result<u64> {
    let n = g.num_nodes();
    if n > 24 {
        return Err(Error::SizeCap(format!("{n} nodes exceeds the 24-node counting cap")));
    }
    let mut adj = vec![0u64; n];
    for &(u, v) in g.links() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let mut count = 0u64;
    'subsets: for set in 0u64..1 << n {
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            if adj[v] & set != 0 {
                continue 'subsets;
            }
            rest &= rest - 1;
        }
        count += 1;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(g: &BaseGraph, layers: u32, threshold: u32, p: f64, q: f64) -> ModelParams {
        ModelParams::uniform(g, layers, threshold, p, q)
    }

    #[test]
    fn single_link_layer_law() {
        let g = BaseGraph::path(1);
        let params = ModelParams::new(1, 1, vec![1.0], vec![0.3, 0.7]);
        let dist = single_layer_dist(&g, &params).unwrap();
        assert!((dist.probs[1] - 0.3 * 0.7).abs() < 1e-15);
        assert!((dist.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_empty_config_counts_independent_sets() {
        // At q = 1/2, p = 1, one layer: P[empty] = (#independent sets) / 2^n.
        let g = BaseGraph::complete(3);
        let dist = single_layer_dist(&g, &uniform(&g, 1, 1, 1.0, 0.5)).unwrap();
        let count = count_independent_sets(&g).unwrap();
        assert_eq!(count, 4);
        assert!((dist.probs[0] - count as f64 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn thinning_table_on_two_link_path() {
        let g = BaseGraph::path(2);
        let params = ModelParams::new(1, 1, vec![0.5, 1.0], vec![1.0, 1.0, 1.0]);
        let dist = single_layer_dist(&g, &params).unwrap();
        assert_eq!(dist.probs[0b00], 0.0);
        assert_eq!(dist.probs[0b01], 0.0);
        assert!((dist.probs[0b10] - 0.5).abs() < 1e-15);
        assert!((dist.probs[0b11] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn merge_single_step_is_identity() {
        let g = BaseGraph::path(2);
        let q1 = single_layer_dist(&g, &uniform(&g, 1, 1, 1.0, 0.4)).unwrap();
        let merged = merge_recursion(&q1, 1);
        assert_eq!(q1.probs, merged.probs);
    }

    #[test]
    fn merge_single_link_closed_form() {
        let g = BaseGraph::path(1);
        let q1 = single_layer_dist(&g, &uniform(&g, 1, 1, 1.0, 0.6)).unwrap();
        for layers in 1..=5u32 {
            let merged = merge_recursion(&q1, layers);
            let expect = 1.0 - (1.0 - 0.36f64).powi(layers as i32);
            assert!((merged.probs[1] - expect).abs() < 1e-12);
            assert!((merged.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn merge_matches_brute_force_on_triangle() {
        let g = BaseGraph::complete(3);
        let params = uniform(&g, 2, 1, 1.0, 0.5);
        let q1 = single_layer_dist(&g, &params).unwrap();
        let merged = merge_recursion(&q1, 2);
        let brute = brute_force_dist(&g, &params).unwrap();
        for mask in 0..8 {
            assert!((merged.probs[mask] - brute.probs[mask]).abs() < 1e-13);
        }
    }

    #[test]
    fn marginal_grows_with_layers() {
        let g = BaseGraph::cycle(4);
        let q1 = single_layer_dist(&g, &uniform(&g, 1, 1, 0.8, 0.5)).unwrap();
        let mut prev = 0.0;
        for layers in 1..=4 {
            let marg = merge_recursion(&q1, layers).marginal(2);
            assert!(marg >= prev - 1e-14);
            prev = marg;
        }
    }

    #[test]
    fn brute_force_threshold_two() {
        let g = BaseGraph::path(1);
        let params = ModelParams::new(2, 2, vec![1.0], vec![0.3, 0.7]);
        let dist = brute_force_dist(&g, &params).unwrap();
        assert!((dist.probs[1] - (0.3f64 * 0.7).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn brute_force_degenerate_point_mass() {
        let g = BaseGraph::complete(3);
        for threshold in 1..=2 {
            let dist = brute_force_dist(&g, &uniform(&g, 2, threshold, 1.0, 1.0)).unwrap();
            assert_eq!(dist.probs[0b111], 1.0);
        }
    }

    #[test]
    fn conditioned_on_zero_layers_kills_incident_links() {
        let g = BaseGraph::path(2);
        let params = uniform(&g, 2, 1, 1.0, 0.5);
        let dist = conditioned_brute_force(&g, &params, 1, 0).unwrap();
        // Node 1 touches both links.
        for mask in 1..4 {
            assert_eq!(dist.probs[mask], 0.0);
        }
        assert!((dist.probs[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditioned_on_all_layers_matches_always_active_node() {
        let g = BaseGraph::path(2);
        let params = uniform(&g, 2, 1, 1.0, 0.5);
        let cond = conditioned_brute_force(&g, &params, 1, 2).unwrap();
        let mut pinned = params.clone();
        pinned.q[1] = 1.0;
        let direct = brute_force_dist(&g, &pinned).unwrap();
        for mask in 0..4 {
            assert!((cond.probs[mask] - direct.probs[mask]).abs() < 1e-13);
        }
    }

    #[test]
    fn conditioning_with_zero_probability_is_an_error() {
        let g = BaseGraph::path(1);
        let params = ModelParams::new(2, 1, vec![1.0], vec![1.0, 0.5]);
        assert!(conditioned_brute_force(&g, &params, 0, 1).is_err());
    }

    #[test]
    fn independent_set_counts() {
        let single = BaseGraph::new(1, vec![]).unwrap();
        assert_eq!(count_independent_sets(&single).unwrap(), 2);
        assert_eq!(count_independent_sets(&BaseGraph::path(2)).unwrap(), 5);
        assert_eq!(count_independent_sets(&BaseGraph::complete(3)).unwrap(), 4);
    }
}
