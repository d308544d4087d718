use std::collections::BTreeMap;
use std::sync::Arc;

use super::{PhyloTree, TaxonSet, TreeError, Vertex};

/// Mutable labelled tree used while constructing or rearranging topologies.
///
/// Vertices are arbitrary slots; removed slots stay dead until [`build`]
/// renumbers everything into the [`PhyloTree`] convention. Internal vertices
/// keep their relative slot order, which makes builds deterministic.
///
/// [`build`]: TreeBuilder::build
#[derive(Debug, Clone, Default)]
pub struct TreeBuilder {
    adj: Vec<Vec<usize>>,
    label: Vec<Option<String>>,
    alive: Vec<bool>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tree(tree: &PhyloTree) -> Self {
        let nv = tree.num_vertices();
        let adj = (0..nv).map(|v| tree.neighbors(v).to_vec()).collect();
        let label = (0..nv)
            .map(|v| tree.leaf_taxon(v).map(|t| tree.taxa().label(t).to_string()))
            .collect();
        TreeBuilder { adj, label, alive: vec![true; nv] }
    }

    pub fn add_leaf(&mut self, label: impl Into<String>) -> usize {
        self.push(Some(label.into()))
    }

    pub fn add_internal(&mut self) -> usize {
        self.push(None)
    }

    fn push(&mut self, label: Option<String>) -> usize {
        self.adj.push(Vec::new());
        self.label.push(label);
        self.alive.push(true);
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        self.adj[v].push(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u].retain(|&w| w != v);
        self.adj[v].retain(|&w| w != u);
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.label[v].as_deref()
    }

    pub fn is_alive(&self, v: usize) -> bool {
        self.alive[v]
    }

    pub fn vertex_of_label(&self, label: &str) -> Option<usize> {
        (0..self.adj.len()).find(|&v| self.alive[v] && self.label[v].as_deref() == Some(label))
    }

    /// Live edges `(u, v)` with `u < v`, sorted by slot.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.adj.len() {
            if !self.alive[v] {
                continue;
            }
            for &u in &self.adj[v] {
                if v < u {
                    out.push((v, u));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Inserts a fresh vertex in the middle of edge `{u, v}` and returns it.
    pub fn subdivide(&mut self, u: usize, v: usize) -> usize {
        let w = self.add_internal();
        self.remove_edge(u, v);
        self.add_edge(u, w);
        self.add_edge(w, v);
        w
    }

    /// Removes unlabelled degree-2 vertex `v`, joining its two neighbours.
    pub fn suppress(&mut self, v: usize) {
        debug_assert!(self.label[v].is_none() && self.adj[v].len() == 2);
        let (a, b) = (self.adj[v][0], self.adj[v][1]);
        self.remove_edge(v, a);
        self.remove_edge(v, b);
        self.add_edge(a, b);
        self.alive[v] = false;
    }

    /// Deletes a vertex and its incident edges.
    pub fn delete(&mut self, v: usize) {
        for u in std::mem::take(&mut self.adj[v]) {
            self.adj[u].retain(|&w| w != v);
        }
        self.alive[v] = false;
    }

    /// Deletes a leaf and suppresses its former neighbour.
    pub fn prune_leaf(&mut self, v: usize) {
        let p = self.adj[v][0];
        self.delete(v);
        if self.label[p].is_none() && self.adj[p].len() == 2 {
            self.suppress(p);
        }
    }

    /// All live vertices reachable from `start` without crossing `{start, blocked}`.
    pub fn component(&self, start: usize, blocked: usize) -> Vec<usize> {
        let mut seen = vec![false; self.adj.len()];
        seen[start] = true;
        seen[blocked] = true;
        let mut stack = vec![start];
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            out.push(v);
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Renumbers into a validated [`PhyloTree`].
    pub fn build(&self) -> Result<PhyloTree, TreeError> {
        let live: Vec<usize> = (0..self.adj.len()).filter(|&v| self.alive[v]).collect();
        let mut leaves = BTreeMap::new();
        for &v in &live {
            if let Some(l) = &self.label[v] {
                if leaves.insert(l.clone(), v).is_some() {
                    return Err(TreeError::DuplicateLabel(l.clone()));
                }
            }
        }
        let taxa = Arc::new(TaxonSet::new(leaves.keys().cloned())?);
        let n = taxa.len();
        let mut map = vec![usize::MAX; self.adj.len()];
        for (t, &v) in leaves.values().enumerate() {
            map[v] = t;
        }
        let mut next = n;
        for &v in &live {
            if self.label[v].is_none() {
                map[v] = next;
                next += 1;
            }
        }
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); next];
        for &v in &live {
            for &u in &self.adj[v] {
                if map[u] == usize::MAX {
                    return Err(TreeError::NotATree);
                }
                adj[map[v]].push(map[u]);
            }
        }
        PhyloTree::from_adjacency(taxa, adj)
    }
}
