//! Feasibility of merged configurations when the base graph is a clique and
//! links are never thinned: a configuration is attainable iff the subgraph of
//! its active links has a clique edge cover no larger than the layer count.
//! The minimum cover itself is found exactly at small scale.

use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::model::LinkConfiguration;

const LINK_CAP: usize = 20;
const NODE_CAP: usize = 32;

/// A set of cliques together with the base-graph links they cover.
#[derive(Debug, Clone)]
pub struct CliqueCover {
    pub cliques: Vec<Vec<usize>>,
    pub covered_links: LinkConfiguration,
}

/// Subgraph on the same node set keeping only the links active in `x`.
pub fn induced_subgraph(g: &BaseGraph, x: &LinkConfiguration) -> Result<BaseGraph> {
    if x.len() != g.num_links() {
        return Err(Error::Validation("configuration length mismatch".into()));
    }
    let links = g
        .links()
        .iter()
        .enumerate()
        .filter(|&(l, _)| x.get(l))
        .map(|(_, &link)| link)
        .collect();
    BaseGraph::new(g.num_nodes(), links)
}

/// All maximal cliques as node bitmasks (Bron-Kerbosch with pivoting).
fn maximal_cliques(adj: &[u64], n: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    bron_kerbosch(0, all, 0, adj, &mut out);
    out
}

fn bron_kerbosch(r: u64, p: u64, x: u64, adj: &[u64], out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    // Pivot on the candidate covering most of p.
    let mut pivot = 0usize;
    let mut best = -1i32;
    let mut scan = p | x;
    while scan != 0 {
        let v = scan.trailing_zeros() as usize;
        let score = (adj[v] & p).count_ones() as i32;
        if score > best {
            best = score;
            pivot = v;
        }
        scan &= scan - 1;
    }
    let mut candidates = p & !adj[pivot];
    let mut p = p;
    let mut x = x;
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        let bit = 1u64 << v;
        bron_kerbosch(r | bit, p & adj[v], x & adj[v], adj, out);
        p &= !bit;
        x |= bit;
        candidates &= candidates - 1;
    }
}

/// Exact minimum clique edge cover via iterative deepening over maximal
/// cliques, branching on a least-covered uncovered link.
pub fn min_clique_edge_cover(g: &BaseGraph) -> Result<CliqueCover> {
    if g.num_links() > LINK_CAP {
        return Err(Error::SizeCap(format!(
            "{} links exceeds the {LINK_CAP}-link cover-search cap",
            g.num_links()
        )));
    }
    if g.num_nodes() > NODE_CAP {
        return Err(Error::SizeCap(format!(
            "{} nodes exceeds the {NODE_CAP}-node cover-search cap",
            g.num_nodes()
        )));
    }
    let n = g.num_nodes();
    let mut adj = vec![0u64; n];
    for &(u, v) in g.links() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let target: u64 = (0..g.num_links()).fold(0, |acc, l| acc | 1 << l);
    if target == 0 {
        return Ok(CliqueCover {
            cliques: Vec::new(),
            covered_links: LinkConfiguration::all_zeros(g.num_links()),
        });
    }
    // Only cliques on >= 2 nodes cover anything; any optimal cover can be
    // lifted to maximal cliques, so searching those alone is sound.
    let cliques: Vec<u64> = maximal_cliques(&adj, n)
        .into_iter()
        .filter(|c| c.count_ones() >= 2)
        .collect();
    let edge_masks: Vec<u64> = cliques.iter().map(|&c| clique_edges(g, c)).collect();

    for size in 1..=g.num_links() {
        let mut chosen = Vec::new();
        if search_cover(target, 0, size, &edge_masks, &mut chosen) {
            let cliques: Vec<Vec<usize>> = chosen
                .iter()
                .map(|&idx| mask_nodes(cliques[idx]))
                .collect();
            let covered = chosen.iter().fold(0u64, |acc, &idx| acc | edge_masks[idx]);
            return Ok(CliqueCover {
                cliques,
                covered_links: LinkConfiguration::from_mask(covered, g.num_links()),
            });
        }
    }
    unreachable!("every link is itself a 2-clique");
}

fn clique_edges(g: &BaseGraph, clique: u64) -> u64 {
    let mut mask = 0u64;
    for (l, &(u, v)) in g.links().iter().enumerate() {
        if clique >> u & 1 == 1 && clique >> v & 1 == 1 {
            mask |= 1 << l;
        }
    }
    mask
}

fn mask_nodes(mask: u64) -> Vec<usize> {
    let mut nodes = Vec::new();
    let mut m = mask;
    while m != 0 {
        nodes.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    nodes
}

fn search_cover(covered_target: u64, covered: u64, budget: usize, edge_masks: &[u64], chosen: &mut Vec<usize>) -> bool {
    let missing = covered_target & !covered;
    if missing == 0 {
        return true;
    }
    if budget == 0 {
        return false;
    }
    let pick = missing.trailing_zeros();
    for (idx, &mask) in edge_masks.iter().enumerate() {
        if mask >> pick & 1 == 0 {
            continue;
        }
        chosen.push(idx);
        if search_cover(covered_target, covered | mask, budget - 1, edge_masks, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Is `x` attainable on clique base `g` with `layers` layers (no thinning,
/// union merge)? True iff the induced subgraph is covered by at most
/// `layers` cliques.
pub fn mcc_feasible(x: &LinkConfiguration, layers: u32, g: &BaseGraph) -> Result<bool> {
    if !g.is_clique() {
        return Err(Error::Validation("feasibility test requires a clique base graph".into()));
    }
    let active = x.count_ones();
    if active == 0 {
        return Ok(true);
    }
    if layers as usize >= active {
        // Links are 2-cliques.
        return Ok(true);
    }
    let induced = induced_subgraph(g, x)?;
    Ok(min_clique_edge_cover(&induced)?.cliques.len() <= layers as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_subgraph_cases() {
        let g = BaseGraph::complete(3);
        let empty = induced_subgraph(&g, &LinkConfiguration::all_zeros(3)).unwrap();
        assert_eq!(empty.num_links(), 0);
        let full = induced_subgraph(&g, &LinkConfiguration::all_ones(3)).unwrap();
        assert_eq!(full.num_links(), 3);
        let path = induced_subgraph(&g, &LinkConfiguration::new(vec![true, true, false])).unwrap();
        assert_eq!(path.num_links(), 2);
        assert!(!path.is_clique());
    }

    #[test]
    fn cover_sizes_on_small_graphs() {
        assert_eq!(min_clique_edge_cover(&BaseGraph::complete(3)).unwrap().cliques.len(), 1);
        assert_eq!(min_clique_edge_cover(&BaseGraph::path(2)).unwrap().cliques.len(), 2);
        // Triangle-free, so each link needs its own clique.
        assert_eq!(min_clique_edge_cover(&BaseGraph::cycle(4)).unwrap().cliques.len(), 4);
        assert_eq!(min_clique_edge_cover(&BaseGraph::cycle(5)).unwrap().cliques.len(), 5);
    }

    #[test]
    fn cover_covers_everything() {
        let g = BaseGraph::complete(4);
        let cover = min_clique_edge_cover(&g).unwrap();
        assert_eq!(cover.cliques.len(), 1);
        assert_eq!(cover.covered_links.count_ones(), 6);

        // Two triangles sharing an edge.
        let diamond = BaseGraph::new(4, vec![(0, 1), (1, 2), (2, 0), (1, 3), (3, 2)]).unwrap();
        let cover = min_clique_edge_cover(&diamond).unwrap();
        assert_eq!(cover.cliques.len(), 2);
        assert_eq!(cover.covered_links.count_ones(), 5);
    }

    #[test]
    fn feasibility_on_cliques() {
        let k3 = BaseGraph::complete(3);
        let one_edge = LinkConfiguration::new(vec![true, false, false]);
        assert!(mcc_feasible(&one_edge, 1, &k3).unwrap());

        let k4 = BaseGraph::complete(4);
        // Links of K4 in order: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3);
        // the 4-cycle 0-1-2-3-0 uses (0,1) (1,2) (2,3) (0,3).
        let mut cycle = LinkConfiguration::all_zeros(6);
        for l in [0usize, 3, 5, 2] {
            cycle.set(l, true);
        }
        assert!(!mcc_feasible(&cycle, 1, &k4).unwrap());
        assert!(!mcc_feasible(&cycle, 2, &k4).unwrap());
        assert!(!mcc_feasible(&cycle, 3, &k4).unwrap());
        assert!(mcc_feasible(&cycle, 4, &k4).unwrap());

        // Five edges of K4 = two triangles sharing an edge.
        let mut five = LinkConfiguration::all_ones(6);
        five.set(2, false);
        assert!(!mcc_feasible(&five, 1, &k4).unwrap());
        assert!(mcc_feasible(&five, 2, &k4).unwrap());
    }

    #[test]
    fn feasibility_monotone_in_layers() {
        let k4 = BaseGraph::complete(4);
        for mask in 0u64..1 << 6 {
            let x = LinkConfiguration::from_mask(mask, 6);
            let mut prev = false;
            for layers in 1..=6u32 {
                let now = mcc_feasible(&x, layers, &k4).unwrap();
                assert!(now || !prev, "feasibility lost when adding layers");
                prev = now;
            }
            assert!(prev);
        }
    }

    #[test]
    fn non_clique_base_rejected() {
        let g = BaseGraph::path(2);
        assert!(mcc_feasible(&LinkConfiguration::all_ones(2), 1, &g).is_err());
    }
}
