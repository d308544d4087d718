//! Unrooted binary leaf-labelled trees.
//!
//! Vertex numbering is fixed when a tree is built: the leaf carrying taxon
//! `x` is vertex `x`, and internal vertices occupy `n..2n-2`. Taxon ids follow
//! the lexicographic order of the labels, so two trees over the same label
//! set always agree on ids.

mod builder;
mod subtrees;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use builder::TreeBuilder;
pub use subtrees::{Handle, RootedSubtrees};

/// Taxon identifier, an index into a [`TaxonSet`].
pub type Taxon = usize;
/// Vertex identifier inside one [`PhyloTree`].
pub type Vertex = usize;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown taxon label {0:?}")]
    UnknownLabel(String),
    #[error("taxon id {0} out of range")]
    UnknownTaxon(Taxon),
    #[error("empty block")]
    EmptyBlock,
    #[error("duplicate leaf label {0:?}")]
    DuplicateLabel(String),
    #[error("tree needs at least 3 leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("vertex {vertex} has degree {degree}; binary trees need 1 or 3")]
    NotBinary { vertex: Vertex, degree: usize },
    #[error("tree is not connected or contains a cycle")]
    NotATree,
    #[error("trees are over different taxon sets")]
    TaxonMismatch,
}

/// Ordered set of distinct taxon labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonSet {
    labels: Vec<String>,
    index: HashMap<String, Taxon>,
}

impl TaxonSet {
    /// Builds the set from arbitrary labels; ids follow sorted label order.
    pub fn new<I, S>(labels: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(TreeError::DuplicateLabel(w[0].clone()));
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(TaxonSet { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, taxon: Taxon) -> &str {
        &self.labels[taxon]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<Taxon> {
        self.index.get(label).copied()
    }

    pub fn ids<'a, I>(&self, labels: I) -> Result<Block, TreeError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let ids = labels
            .into_iter()
            .map(|l| self.id(l).ok_or_else(|| TreeError::UnknownLabel(l.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Block::new(ids))
    }
}

/// A sorted, duplicate-free set of taxa. Ordering is lexicographic on the
/// sorted id sequence, which is the canonical block order used for
/// tie-breaking throughout the solver.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Block(Vec<Taxon>);

impl Block {
    pub fn new(mut taxa: Vec<Taxon>) -> Self {
        taxa.sort_unstable();
        taxa.dedup();
        Block(taxa)
    }

    pub fn singleton(taxon: Taxon) -> Self {
        Block(vec![taxon])
    }

    pub fn taxa(&self) -> &[Taxon] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, taxon: Taxon) -> bool {
        self.0.binary_search(&taxon).is_ok()
    }

    pub fn labels<'a>(&self, taxa: &'a TaxonSet) -> Vec<&'a str> {
        self.0.iter().map(|&t| taxa.label(t)).collect()
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Taxon> for Block {
    fn from_iter<I: IntoIterator<Item = Taxon>>(iter: I) -> Self {
        Block::new(iter.into_iter().collect())
    }
}

/// The minimal subtree of a host tree connecting a block's leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub block: Block,
    /// All vertices of the connecting subtree, sorted.
    pub span: Vec<Vertex>,
    /// `span` without leaves, sorted.
    pub internal: Vec<Vertex>,
}

/// Unrooted binary phylogenetic tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhyloTree {
    taxa: Arc<TaxonSet>,
    adj: Vec<Vec<Vertex>>,
}

impl PhyloTree {
    /// Validates and wraps an adjacency list that follows the vertex numbering
    /// convention (leaf `x` is vertex `x`).
    pub fn from_adjacency(taxa: Arc<TaxonSet>, mut adj: Vec<Vec<Vertex>>) -> Result<Self, TreeError> {
        let n = taxa.len();
        if n < 3 {
            return Err(TreeError::TooFewLeaves(n));
        }
        if adj.len() != 2 * n - 2 {
            return Err(TreeError::NotATree);
        }
        for (v, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            let want = if v < n { 1 } else { 3 };
            if nbrs.len() != want {
                return Err(TreeError::NotBinary { vertex: v, degree: nbrs.len() });
            }
            if nbrs.iter().any(|&u| u >= 2 * n - 2 || u == v) {
                return Err(TreeError::NotATree);
            }
        }
        for (v, nbrs) in adj.iter().enumerate() {
            if nbrs.iter().any(|&u| !adj[u].contains(&v)) {
                return Err(TreeError::NotATree);
            }
        }
        // 2n-3 edges on 2n-2 vertices: connected iff acyclic.
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        if count != adj.len() {
            return Err(TreeError::NotATree);
        }
        Ok(PhyloTree { taxa, adj })
    }

    pub fn taxa(&self) -> &TaxonSet {
        &self.taxa
    }

    pub fn taxa_arc(&self) -> &Arc<TaxonSet> {
        &self.taxa
    }

    pub fn num_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        v < self.num_taxa()
    }

    /// Taxon carried by `v`, if `v` is a leaf.
    pub fn leaf_taxon(&self, v: Vertex) -> Option<Taxon> {
        self.is_leaf(v).then_some(v)
    }

    pub fn leaf_vertex(&self, taxon: Taxon) -> Vertex {
        taxon
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn internal_vertices(&self) -> std::ops::Range<Vertex> {
        self.num_taxa()..self.num_vertices()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.num_vertices() - 1);
        for (v, nbrs) in self.adj.iter().enumerate() {
            for &u in nbrs {
                if v < u {
                    out.push((v, u));
                }
            }
        }
        out
    }

    pub fn same_taxa(&self, other: &PhyloTree) -> bool {
        self.taxa.labels() == other.taxa.labels()
    }

    fn check_block(&self, block: &Block) -> Result<(), TreeError> {
        if block.is_empty() {
            return Err(TreeError::EmptyBlock);
        }
        match block.taxa().iter().find(|&&t| t >= self.num_taxa()) {
            Some(&t) => Err(TreeError::UnknownTaxon(t)),
            None => Ok(()),
        }
    }

    /// Membership mask of the minimal subtree connecting `block`.
    pub(crate) fn span_mask(&self, block: &Block) -> Vec<bool> {
        let nv = self.num_vertices();
        let mut in_block = vec![false; nv];
        for &t in block.taxa() {
            in_block[t] = true;
        }
        let root = block.taxa()[0];
        // Iterative DFS from a block leaf; a vertex is in the span iff the
        // subtree below it (away from `root`) contains a block leaf.
        let mut parent = vec![usize::MAX; nv];
        let mut order = Vec::with_capacity(nv);
        let mut stack = vec![root];
        parent[root] = root;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &u in &self.adj[v] {
                if parent[u] == usize::MAX {
                    parent[u] = v;
                    stack.push(u);
                }
            }
        }
        let mut span = in_block;
        for &v in order.iter().rev() {
            if span[v] && v != root {
                span[parent[v]] = true;
            }
        }
        span
    }

    pub fn embedding(&self, block: &Block) -> Result<Embedding, TreeError> {
        self.check_block(block)?;
        let mask = self.span_mask(block);
        let span: Vec<Vertex> = (0..self.num_vertices()).filter(|&v| mask[v]).collect();
        let internal = span.iter().copied().filter(|&v| !self.is_leaf(v)).collect();
        Ok(Embedding { block: block.clone(), span, internal })
    }

    /// Canonical Newick descriptor of `T|block`.
    pub fn restrict(&self, block: &Block) -> Result<String, TreeError> {
        self.check_block(block)?;
        let mask = self.span_mask(block);
        Ok(self.canonical_string(&mask, block.taxa()[0]))
    }

    /// Canonical serialization of the subtree induced by `mask`, with
    /// degree-2 vertices suppressed. `first` must be the smallest taxon in
    /// the mask.
    fn canonical_string(&self, mask: &[bool], first: Taxon) -> String {
        let label = |t: Taxon| self.taxa.label(t).to_string();
        let others = |v: Vertex, from: Vertex| -> Vec<Vertex> {
            self.adj[v].iter().copied().filter(|&u| u != from && mask[u]).collect()
        };
        // Walk away from the smallest leaf to the first branching vertex.
        let mut prev = first;
        let Some(&start) = self.adj[first].iter().find(|&&u| mask[u]) else {
            return format!("{};", label(first));
        };
        let mut cur = start;
        loop {
            let next = others(cur, prev);
            match next.len() {
                0 => {
                    let (a, b) = (label(first), label(cur));
                    return format!("({a},{b});");
                }
                1 => {
                    prev = cur;
                    cur = next[0];
                }
                _ => {
                    let mut parts = vec![(first, label(first))];
                    for u in next {
                        parts.push(self.rooted_string(mask, cur, u));
                    }
                    parts.sort();
                    let body: Vec<String> = parts.into_iter().map(|p| p.1).collect();
                    return format!("({});", body.join(","));
                }
            }
        }
    }

    /// (smallest taxon, canonical string) of the masked subtree hanging from
    /// `from -> v`.
    fn rooted_string(&self, mask: &[bool], from: Vertex, v: Vertex) -> (Taxon, String) {
        let mut prev = from;
        let mut cur = v;
        loop {
            if self.is_leaf(cur) {
                return (cur, self.taxa.label(cur).to_string());
            }
            let next: Vec<Vertex> = self.adj[cur]
                .iter()
                .copied()
                .filter(|&u| u != prev && mask[u])
                .collect();
            match next.len() {
                1 => {
                    prev = cur;
                    cur = next[0];
                }
                2 => {
                    let mut a = self.rooted_string(mask, cur, next[0]);
                    let mut b = self.rooted_string(mask, cur, next[1]);
                    if b < a {
                        std::mem::swap(&mut a, &mut b);
                    }
                    return (a.0, format!("({},{})", a.1, b.1));
                }
                _ => unreachable!("masked subtree has a dangling internal vertex"),
            }
        }
    }

    /// Canonical Newick string of the whole tree.
    pub fn to_canonical_newick(&self) -> String {
        let mask = vec![true; self.num_vertices()];
        self.canonical_string(&mask, 0)
    }

    /// Copy of the tree with every adjacency list permuted by `perm_seed`;
    /// topology and vertex ids are unchanged. Used to exercise order
    /// independence of traversal-based code.
    #[doc(hidden)]
    pub fn with_shuffled_adjacency(&self, perm_seed: u64) -> PhyloTree {
        let mut adj = self.adj.clone();
        let mut s = perm_seed | 1;
        for nbrs in &mut adj {
            for i in (1..nbrs.len()).rev() {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                nbrs.swap(i, (s % (i as u64 + 1)) as usize);
            }
        }
        PhyloTree { taxa: self.taxa.clone(), adj }
    }
}

impl fmt::Display for PhyloTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_newick())
    }
}

/// True iff `T1|block = T2|block`.
pub fn is_agreement_block(t1: &PhyloTree, t2: &PhyloTree, block: &Block) -> bool {
    match (t1.restrict(block), t2.restrict(block)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse;

    fn quartet() -> PhyloTree {
        parse("((a,b),(c,d));").unwrap()
    }

    fn blk(t: &PhyloTree, labels: &[&str]) -> Block {
        t.taxa().ids(labels.iter().copied()).unwrap()
    }

    #[test]
    fn restrict_to_three_leaves_is_star() {
        let q = quartet();
        assert_eq!(q.restrict(&blk(&q, &["a", "b", "c"])).unwrap(), "(a,b,c);");
    }

    #[test]
    fn restrict_to_everything_is_serialization() {
        let q = quartet();
        assert_eq!(q.restrict(&blk(&q, &["a", "b", "c", "d"])).unwrap(), q.to_canonical_newick());
    }

    #[test]
    fn restrict_small_cases() {
        let q = quartet();
        assert_eq!(q.restrict(&blk(&q, &["a", "d"])).unwrap(), "(a,d);");
        assert_eq!(q.restrict(&blk(&q, &["c"])).unwrap(), "c;");
        assert_eq!(q.restrict(&Block::singleton(9)), Err(TreeError::UnknownTaxon(9)));
        assert_eq!(q.restrict(&Block::default()), Err(TreeError::EmptyBlock));
    }

    #[test]
    fn embedding_of_cherry_and_triple() {
        let q = quartet();
        let ab = q.embedding(&blk(&q, &["a", "b"])).unwrap();
        assert_eq!(ab.internal.len(), 1);
        let u = ab.internal[0];
        assert!(q.neighbors(u).contains(&0) && q.neighbors(u).contains(&1));
        let abc = q.embedding(&blk(&q, &["a", "b", "c"])).unwrap();
        assert_eq!(abc.internal, vec![4, 5]);
        assert_eq!(abc.span, vec![0, 1, 2, 4, 5]);
        let single = q.embedding(&blk(&q, &["d"])).unwrap();
        assert!(single.internal.is_empty());
        assert_eq!(single.span, vec![3]);
    }

    #[test]
    fn agreement_on_quartets() {
        let q1 = quartet();
        let q2 = parse("((a,c),(b,d));").unwrap();
        assert!(is_agreement_block(&q1, &q2, &blk(&q1, &["a", "b", "c"])));
        assert!(!is_agreement_block(&q1, &q2, &blk(&q1, &["a", "b", "c", "d"])));
        assert!(is_agreement_block(&q1, &q1, &blk(&q1, &["a", "b", "c", "d"])));
    }

    #[test]
    fn taxon_set_rejects_duplicates() {
        assert_eq!(
            TaxonSet::new(["b", "a", "b"]),
            Err(TreeError::DuplicateLabel("b".into()))
        );
        let ts = TaxonSet::new(["b", "a"]).unwrap();
        assert_eq!(ts.id("a"), Some(0));
        assert_eq!(ts.label(1), "b");
    }

    #[test]
    fn from_adjacency_validates() {
        let taxa = Arc::new(TaxonSet::new(["a", "b", "c"]).unwrap());
        let ok = vec![vec![3], vec![3], vec![3], vec![0, 1, 2]];
        assert!(PhyloTree::from_adjacency(taxa.clone(), ok).is_ok());
        let bad = vec![vec![3], vec![3], vec![3], vec![0, 1]];
        assert!(matches!(
            PhyloTree::from_adjacency(taxa, bad),
            Err(TreeError::NotBinary { .. }) | Err(TreeError::NotATree)
        ));
    }
}
