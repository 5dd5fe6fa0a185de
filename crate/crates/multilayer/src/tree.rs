//! Bottom-up dynamic program for configuration probabilities on trees, valid
//! for arbitrary per-link survival, per-node activation and any threshold.
//!
//! For each node `v` (leaves first) it carries the vector
//! `f_v[m] = P[v active in m layers, subtree below v in its configured state]`.
//! A parent absorbs a child through the overlap of their layer sets: given the
//! parent in `m` layers and the child in `k`, the shared count is
//! hypergeometric, and the link is active iff at least `K` of the shared
//! layers keep it after thinning.

use std::collections::HashMap;

use crate::dist::{binom_ccdf_with, binom_pmf_with, hypergeom_pmf_with, LogFactorial};
use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::model::{LinkConfiguration, ModelParams};

/// Largest pair-table size ((M+1)^2 entries) kept in memory per distinct
/// survival probability; larger layer counts fall back to on-the-fly sums.
const PAIR_TABLE_CAP: usize = 1 << 22;

/// A tree with a chosen root, children lists and a leaves-first evaluation
/// order. Link identities refer back to the originating graph's link order.
#[derive(Debug, Clone)]
pub struct RootedTree {
    num_nodes: usize,
    num_links: usize,
    root: usize,
    children: Vec<Vec<usize>>,
    parent_link: Vec<Option<usize>>,
    order: Vec<usize>,
}

impl RootedTree {
    pub fn new(g: &BaseGraph, root: usize) -> Result<Self> {
        if !g.is_tree() {
            return Err(Error::Validation("graph is not a tree".into()));
        }
        if root >= g.num_nodes() {
            return Err(Error::Validation(format!("root {root} out of range")));
        }
        let n = g.num_nodes();
        let mut children = vec![Vec::new(); n];
        let mut parent_link = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = std::collections::VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    children[v].push(w);
                    parent_link[w] = g.link_between(v, w);
                    queue.push_back(w);
                }
            }
        }
        order.reverse();
        Ok(RootedTree {
            num_nodes: n,
            num_links: g.num_links(),
            root,
            children,
            parent_link,
            order,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_links(&self) -> usize {
        self.num_links
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Leaves-first visitation order ending at the root.
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Joint law of a node's layer count and its subtree's configuration state.
#[derive(Debug, Clone)]
pub struct NodeLayerDist {
    pub values: Vec<f64>,
}

/// One parent-child absorption step: probability that the connecting link is
/// in state `x_bit` and the child's subtree in its configured state, given
/// the parent is active in `m` layers.
pub fn edge_factor(
    child: &NodeLayerDist,
    m: u32,
    x_bit: bool,
    p_link: f64,
    layers: u32,
    threshold: u32,
    lf: &LogFactorial,
) -> f64 {
    let ccdf: Vec<f64> = (0..=layers)
        .map(|j| binom_ccdf_with(lf, threshold, j, p_link))
        .collect();
    let mut acc = 0.0;
    for (k, &fk) in child.values.iter().enumerate() {
        if fk == 0.0 {
            continue;
        }
        acc += fk * pair_value(lf, layers, m, k as u32, &ccdf, x_bit);
    }
    acc
}

/// Per-link absorption kernel. With union merge and no thinning the link is
/// active iff the layer sets overlap at all, and P[no overlap | m, k] is a
/// single binomial ratio; otherwise the binomial tail is averaged over the
/// hypergeometric overlap.
enum LinkKernel {
    UnionUnthinned,
    Tail(Vec<f64>),
}

fn link_kernel(lf: &LogFactorial, layers: u32, threshold: u32, p: f64) -> LinkKernel {
    if threshold == 1 && p >= 1.0 {
        LinkKernel::UnionUnthinned
    } else {
        LinkKernel::Tail(
            (0..=layers).map(|j| binom_ccdf_with(lf, threshold, j, p)).collect(),
        )
    }
}

/// P[link active | parent in m layers, child in k layers].
fn pair_active(lf: &LogFactorial, layers: u32, m: u32, k: u32, kernel: &LinkKernel) -> f64 {
    match kernel {
        LinkKernel::UnionUnthinned => {
            if k > layers - m {
                1.0
            } else {
                1.0 - (lf.ln_choose((layers - m) as usize, k as usize)
                    - lf.ln_choose(layers as usize, k as usize))
                .exp()
            }
        }
        LinkKernel::Tail(ccdf) => {
            let lo = (m + k).saturating_sub(layers);
            let hi = m.min(k);
            let mut active = 0.0;
            for j in lo..=hi {
                active += hypergeom_pmf_with(lf, j, layers, m, k) * ccdf[j as usize];
            }
            active
        }
    }
}

/// Tail-kernel overlap sum with the active/inactive switch, used by the
/// standalone [`edge_factor`].
fn pair_value(lf: &LogFactorial, layers: u32, m: u32, k: u32, ccdf: &[f64], x_bit: bool) -> f64 {
    let lo = (m + k).saturating_sub(layers);
    let hi = m.min(k);
    let mut active = 0.0;
    for j in lo..=hi {
        active += hypergeom_pmf_with(lf, j, layers, m, k) * ccdf[j as usize];
    }
    if x_bit {
        active
    } else {
        1.0 - active
    }
}

/// Reusable solver: per-node activation pmfs and per-link pair tables are
/// computed once, so sweeping many configurations costs `O(|E| M^2)` each.
pub struct TreeSolver<'a> {
    tree: &'a RootedTree,
    params: &'a ModelParams,
    lf: LogFactorial,
    activation: Vec<Vec<f64>>,
    pair_tables: HashMap<u64, Vec<f64>>,
}

impl<'a> TreeSolver<'a> {
    pub fn new(tree: &'a RootedTree, params: &'a ModelParams) -> Result<Self> {
        let layers = params.layers;
        if params.threshold < 1 || params.threshold > layers {
            return Err(Error::Validation(format!(
                "threshold {} outside 1..={layers}",
                params.threshold
            )));
        }
        if params.p.len() != tree.num_links || params.q.len() != tree.num_nodes {
            return Err(Error::Validation("parameter dimensions do not match the tree".into()));
        }
        let lf = LogFactorial::new(layers as usize);
        let activation = params
            .q
            .iter()
            .map(|&q| (0..=layers).map(|m| binom_pmf_with(&lf, m, layers, q)).collect())
            .collect();
        let side = layers as usize + 1;
        let mut pair_tables = HashMap::new();
        if side * side <= PAIR_TABLE_CAP {
            for &p in &params.p {
                pair_tables.entry(p.to_bits()).or_insert_with(|| {
                    let kernel = link_kernel(&lf, layers, params.threshold, p);
                    let mut table = vec![0.0; side * side];
                    for m in 0..=layers {
                        for k in 0..=layers {
                            table[m as usize * side + k as usize] =
                                pair_active(&lf, layers, m, k, &kernel);
                        }
                    }
                    table
                });
            }
        }
        Ok(TreeSolver { tree, params, lf, activation, pair_tables })
    }

    pub fn config_prob(&self, x: &LinkConfiguration) -> Result<f64> {
        if x.len() != self.tree.num_links {
            return Err(Error::Validation(format!(
                "configuration has {} bits for {} links",
                x.len(),
                self.tree.num_links
            )));
        }
        let layers = self.params.layers;
        let side = layers as usize + 1;
        let mut node_dist: Vec<Option<Vec<f64>>> = vec![None; self.tree.num_nodes];
        for &v in self.tree.order() {
            let mut vals = self.activation[v].clone();
            for &w in self.tree.children(v) {
                let link = self.tree.parent_link[w].expect("non-root child has a parent link");
                let x_bit = x.get(link);
                let child = node_dist[w].take().expect("children are evaluated first");
                let table = self.pair_tables.get(&self.params.p[link].to_bits());
                let kernel = if table.is_none() {
                    Some(link_kernel(&self.lf, layers, self.params.threshold, self.params.p[link]))
                } else {
                    None
                };
                for m in 0..=layers {
                    let mut g = 0.0;
                    match table {
                        Some(t) => {
                            let row = &t[m as usize * side..(m as usize + 1) * side];
                            if x_bit {
                                for (k, &fk) in child.iter().enumerate() {
                                    g += fk * row[k];
                                }
                            } else {
                                for (k, &fk) in child.iter().enumerate() {
                                    g += fk * (1.0 - row[k]);
                                }
                            }
                        }
                        None => {
                            let kernel = kernel.as_ref().expect("kernel built when no table");
                            for (k, &fk) in child.iter().enumerate() {
                                if fk == 0.0 {
                                    continue;
                                }
                                let active = pair_active(&self.lf, layers, m, k as u32, kernel);
                                g += fk * if x_bit { active } else { 1.0 - active };
                            }
                        }
                    }
                    vals[m as usize] *= g;
                }
            }
            node_dist[v] = Some(vals);
        }
        let root_dist = node_dist[self.tree.root].take().expect("root evaluated last");
        Ok(root_dist.iter().sum::<f64>().clamp(0.0, 1.0))
    }

    /// `f_v` vector for a node, mainly for inspection in tests.
    pub fn node_dist(&self, x: &LinkConfiguration, node: usize) -> Result<NodeLayerDist> {
        let layers = self.params.layers;
        let mut solver_tree_dist: Vec<Option<Vec<f64>>> = vec![None; self.tree.num_nodes];
        for &v in self.tree.order() {
            let mut vals = self.activation[v].clone();
            for &w in self.tree.children(v) {
                let link = self.tree.parent_link[w].expect("non-root child has a parent link");
                let child = NodeLayerDist {
                    values: solver_tree_dist[w].take().expect("children first"),
                };
                for m in 0..=layers {
                    vals[m as usize] *= edge_factor(
                        &child,
                        m,
                        x.get(link),
                        self.params.p[link],
                        layers,
                        self.params.threshold,
                        &self.lf,
                    );
                }
            }
            if v == node {
                return Ok(NodeLayerDist { values: vals });
            }
            solver_tree_dist[v] = Some(vals);
        }
        Err(Error::Validation(format!("node {node} not in tree")))
    }
}

/// Probability that the tree's links are exactly in state `x`.
pub fn tree_config_prob(
    tree: &RootedTree,
    x: &LinkConfiguration,
    params: &ModelParams,
) -> Result<f64> {
    TreeSolver::new(tree, params)?.config_prob(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::general::brute_force_dist;
    use crate::line::{config_prob, LineSpec};

    fn uniform_tree(g: &BaseGraph, layers: u32, threshold: u32, p: f64, q: f64) -> ModelParams {
        ModelParams::uniform(g, layers, threshold, p, q)
    }

    #[test]
    fn rejects_non_trees() {
        let g = BaseGraph::cycle(3);
        assert!(RootedTree::new(&g, 0).is_err());
        let disconnected = BaseGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert!(RootedTree::new(&disconnected, 0).is_err());
    }

    #[test]
    fn edge_factor_degenerate_parent() {
        // Parent in zero layers: an active link is impossible, an inactive
        // one certain, leaving the child's total mass.
        let lf = LogFactorial::new(3);
        let child = NodeLayerDist { values: vec![0.1, 0.2, 0.3, 0.15] };
        let total: f64 = child.values.iter().sum();
        let active = edge_factor(&child, 0, true, 0.8, 3, 1, &lf);
        let inactive = edge_factor(&child, 0, false, 0.8, 3, 1, &lf);
        assert_eq!(active, 0.0);
        assert!((inactive - total).abs() < 1e-15);
    }

    #[test]
    fn edge_factor_full_overlap() {
        // Parent in all layers, p = 1, K = 1: the link is active unless the
        // child sits in no layer at all.
        let lf = LogFactorial::new(4);
        let child = NodeLayerDist {
            values: (0..=4).map(|k| binom_pmf_with(&lf, k, 4, 0.3)).collect(),
        };
        let v = edge_factor(&child, 4, true, 1.0, 4, 1, &lf);
        assert!((v - (1.0 - (1.0f64 - 0.3).powi(4))).abs() < 1e-13);
    }

    #[test]
    fn single_link_matches_closed_form() {
        let g = BaseGraph::path(1);
        for &(layers, threshold, p, q) in
            &[(3u32, 1u32, 1.0, 0.5), (4, 2, 0.7, 0.6), (5, 5, 0.9, 0.8)]
        {
            let tree = RootedTree::new(&g, 0).unwrap();
            let params = uniform_tree(&g, layers, threshold, p, q);
            let on = tree_config_prob(&tree, &LinkConfiguration::all_ones(1), &params).unwrap();
            let expect = crate::dist::binom_ccdf(threshold, layers, p * q * q);
            assert!((on - expect).abs() < 1e-12, "{layers} {threshold} {p} {q}");
        }
    }

    #[test]
    fn matches_brute_force_with_heterogeneous_parameters() {
        let g = BaseGraph::star_with_branches(&[1, 2, 1]);
        let params = ModelParams {
            layers: 3,
            threshold: 2,
            p: vec![0.9, 0.6, 1.0, 0.75],
            q: vec![0.5, 0.8, 0.35, 0.9, 0.6],
        };
        let tree = RootedTree::new(&g, 0).unwrap();
        let solver = TreeSolver::new(&tree, &params).unwrap();
        let brute = brute_force_dist(&g, &params).unwrap();
        for mask in 0u64..1 << 4 {
            let x = LinkConfiguration::from_mask(mask, 4);
            let dp = solver.config_prob(&x).unwrap();
            assert!((dp - brute.probs[mask as usize]).abs() < 1e-12, "mask {mask}");
        }
    }

    #[test]
    fn root_choice_is_irrelevant() {
        let g = BaseGraph::star_with_branches(&[2, 1, 2]);
        let params = ModelParams {
            layers: 4,
            threshold: 2,
            p: vec![0.8, 0.95, 1.0, 0.7, 0.85],
            q: vec![0.6, 0.4, 0.9, 0.55, 0.75, 0.5],
        };
        let x = LinkConfiguration::from_mask(0b10110, 5);
        let reference = {
            let tree = RootedTree::new(&g, 0).unwrap();
            tree_config_prob(&tree, &x, &params).unwrap()
        };
        for root in 1..g.num_nodes() {
            let tree = RootedTree::new(&g, root).unwrap();
            let v = tree_config_prob(&tree, &x, &params).unwrap();
            assert!((v - reference).abs() < 1e-13, "root {root}");
        }
    }

    #[test]
    fn subsumes_line_solver_on_paths() {
        let g = BaseGraph::path(4);
        let params = uniform_tree(&g, 3, 1, 1.0, 0.45);
        let spec = LineSpec::new(4, 0.45, 3).unwrap();
        let tree = RootedTree::new(&g, 0).unwrap();
        let solver = TreeSolver::new(&tree, &params).unwrap();
        for mask in 0u64..1 << 4 {
            let x = LinkConfiguration::from_mask(mask, 4);
            let a = solver.config_prob(&x).unwrap();
            let b = config_prob(&x, &spec).unwrap();
            assert!((a - b).abs() < 1e-11, "mask {mask}");
        }
    }

    #[test]
    fn normalizes_and_threshold_monotone() {
        let g = BaseGraph::star_with_branches(&[2, 2, 1]);
        let mut all_ones_prev = 1.0;
        for threshold in 1..=3u32 {
            let params = ModelParams {
                layers: 5,
                threshold,
                p: vec![0.9, 0.8, 1.0, 0.6, 0.95],
                q: vec![0.7, 0.5, 0.8, 0.9, 0.4, 0.65],
            };
            let tree = RootedTree::new(&g, 0).unwrap();
            let solver = TreeSolver::new(&tree, &params).unwrap();
            let mut total = 0.0;
            for mask in 0u64..1 << 5 {
                total += solver.config_prob(&LinkConfiguration::from_mask(mask, 5)).unwrap();
            }
            assert!((total - 1.0).abs() < 1e-10, "K={threshold} total={total}");
            let all_ones = solver.config_prob(&LinkConfiguration::all_ones(5)).unwrap();
            assert!(all_ones <= all_ones_prev + 1e-14);
            all_ones_prev = all_ones;
        }
    }

    #[test]
    fn union_unthinned_kernel_at_ten_thousand_layers() {
        // The closed-form overlap kernel keeps the no-thinning union case
        // tractable far beyond the pair-table range; a single link has the
        // binomial-tail closed form to check against.
        let g = BaseGraph::path(1);
        let layers = 10_000u32;
        let q = 0.01;
        let params = uniform_tree(&g, layers, 1, 1.0, q);
        let tree = RootedTree::new(&g, 0).unwrap();
        let on = tree_config_prob(&tree, &LinkConfiguration::all_ones(1), &params).unwrap();
        let expect = 1.0 - (1.0 - q * q).powi(layers as i32);
        assert!((on - expect).abs() < 1e-10, "{on} vs {expect}");
    }

    #[test]
    fn matches_line_solver_at_five_thousand_layers() {
        let g = BaseGraph::path(2);
        let layers = 5_000u32;
        let q = 0.015;
        let params = uniform_tree(&g, layers, 1, 1.0, q);
        let spec = LineSpec::new(2, q, layers).unwrap();
        let tree = RootedTree::new(&g, 0).unwrap();
        let solver = TreeSolver::new(&tree, &params).unwrap();
        for mask in 0u64..4 {
            let x = LinkConfiguration::from_mask(mask, 2);
            let a = solver.config_prob(&x).unwrap();
            let b = config_prob(&x, &spec).unwrap();
            assert!((a - b).abs() < 1e-10, "mask {mask}: {a} vs {b}");
        }
    }

    #[test]
    fn node_dist_mass_bounded() {
        let g = BaseGraph::path(3);
        let params = uniform_tree(&g, 3, 1, 1.0, 0.5);
        let tree = RootedTree::new(&g, 0).unwrap();
        let solver = TreeSolver::new(&tree, &params).unwrap();
        let f = solver.node_dist(&LinkConfiguration::all_zeros(3), 1).unwrap();
        let total: f64 = f.values.iter().sum();
        assert!(total <= 1.0 + 1e-12 && f.values.iter().all(|&v| v >= 0.0));
    }
}
