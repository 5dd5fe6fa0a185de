use std::collections::HashMap;

use crate::error::{Error, Result};

/// Undirected simple graph with dense node ids `0..num_nodes`.
///
/// The link order given at construction is fixed and defines the bit
/// positions of a [`crate::model::LinkConfiguration`].
#[derive(Debug, Clone)]
pub struct BaseGraph {
    num_nodes: usize,
    links: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    link_index: HashMap<(usize, usize), usize>,
}

impl BaseGraph {
    /// Build a graph, rejecting self-loops, duplicate links and dangling ids.
    pub fn new(num_nodes: usize, links: Vec<(usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); num_nodes];
        let mut link_index = HashMap::new();
        for (idx, &(u, v)) in links.iter().enumerate() {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Validation(format!(
                    "link {idx} = ({u}, {v}) references a node id >= {num_nodes}"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("link {idx} is a self-loop at node {u}")));
            }
            let key = (u.min(v), u.max(v));
            if link_index.insert(key, idx).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate link ({}, {})",
                    key.0, key.1
                )));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(BaseGraph { num_nodes, links, adjacency, link_index })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    /// Endpoints of link `idx` in input order.
    pub fn link(&self, idx: usize) -> (usize, usize) {
        self.links[idx]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Index of the link joining `u` and `v`, if present.
    pub fn link_between(&self, u: usize, v: usize) -> Option<usize> {
        self.link_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn is_connected(&self) -> bool {
        if self.num_nodes <= 1 {
            return true;
        }
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.num_nodes
    }

    pub fn is_tree(&self) -> bool {
        self.num_nodes >= 1 && self.links.len() + 1 == self.num_nodes && self.is_connected()
    }

    pub fn is_clique(&self) -> bool {
        self.links.len() == self.num_nodes * (self.num_nodes.saturating_sub(1)) / 2
    }

    /// Line of `n_links + 1` nodes; link `j` joins nodes `j` and `j + 1`.
    pub fn path(n_links: usize) -> Self {
        let links = (0..n_links).map(|j| (j, j + 1)).collect();
        BaseGraph::new(n_links + 1, links).expect("path construction")
    }

    pub fn cycle(n_nodes: usize) -> Self {
        assert!(n_nodes >= 3, "a cycle needs at least 3 nodes");
        let links = (0..n_nodes).map(|j| (j, (j + 1) % n_nodes)).collect();
        BaseGraph::new(n_nodes, links).expect("cycle construction")
    }

    pub fn complete(n_nodes: usize) -> Self {
        let mut links = Vec::new();
        for u in 0..n_nodes {
            for v in (u + 1)..n_nodes {
                links.push((u, v));
            }
        }
        BaseGraph::new(n_nodes, links).expect("complete graph construction")
    }

    /// Node 0 is a hub with one hanging path per entry of `branch_lengths`;
    /// entry `b` contributes `b` extra nodes chained off the hub.
    pub fn star_with_branches(branch_lengths: &[usize]) -> Self {
        let mut links = Vec::new();
        let mut next = 1usize;
        for &len in branch_lengths {
            let mut prev = 0usize;
            for _ in 0..len {
                links.push((prev, next));
                prev = next;
                next += 1;
            }
        }
        BaseGraph::new(next, links).expect("star construction")
    }

    /// Complete binary tree with `height + 1` levels (`2^(height+1) - 1` nodes),
    /// nodes numbered level by level from the root.
    pub fn complete_binary_tree(height: u32) -> Self {
        let n = (1usize << (height + 1)) - 1;
        let mut links = Vec::new();
        for v in 1..n {
            links.push(((v - 1) / 2, v));
        }
        BaseGraph::new(n, links).expect("binary tree construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(BaseGraph::new(3, vec![(0, 0)]).is_err());
        assert!(BaseGraph::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(BaseGraph::new(2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn path_structure() {
        let g = BaseGraph::path(3);
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.num_links(), 3);
        assert!(g.is_tree());
        assert_eq!(g.link_between(1, 2), Some(1));
        assert_eq!(g.link_between(0, 2), None);
    }

    #[test]
    fn star_and_btree_shapes() {
        let star = BaseGraph::star_with_branches(&[2, 3, 4, 3]);
        assert_eq!(star.num_nodes(), 13);
        assert_eq!(star.num_links(), 12);
        assert!(star.is_tree());
        assert_eq!(star.degree(0), 4);
        let mut degs: Vec<usize> = (0..13).map(|v| star.degree(v)).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 4]);

        let bt = BaseGraph::complete_binary_tree(5);
        assert_eq!(bt.num_nodes(), 63);
        assert_eq!(bt.num_links(), 62);
        assert!(bt.is_tree());
    }

    #[test]
    fn connectivity_and_cliques() {
        let g = BaseGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        assert!(BaseGraph::complete(4).is_clique());
        assert!(!BaseGraph::cycle(4).is_clique());
    }
}
