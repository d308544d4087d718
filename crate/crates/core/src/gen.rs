//! Random instance generation: skewed random binary trees and random TBR
//! moves.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`, which is
//! portable across platforms, so a `(t, s, k, seed)` spec always yields the
//! same pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::phylo::{PhyloTree, TreeBuilder};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least 4 taxa, got {0}")]
    TooFewTaxa(usize),
    #[error("skew must be a percentage in 0..=100, got {0}")]
    BadSkew(u32),
}

/// One point of the generation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenSpec {
    /// Leaf count.
    pub t: usize,
    /// Path bias in percent.
    pub s: u32,
    /// Number of TBR moves.
    pub k: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.t < 4 {
            return Err(GenError::TooFewTaxa(self.t));
        }
        if self.s > 100 {
            return Err(GenError::BadSkew(self.s));
        }
        Ok(())
    }
}

/// Leaf label `i` (1-based) for a tree with `t` leaves: `t01`, `t02`, ...
pub fn leaf_label(i: usize, t: usize) -> String {
    let width = t.to_string().len().max(2);
    format!("t{i:0width$}")
}

pub fn random_tree(t: usize, s: u32, seed: u64) -> Result<PhyloTree, GenError> {
    random_tree_rng(t, s, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Sequential leaf insertion from the 3-star. With probability `s/100` the new
/// leaf goes onto the pendant edge of the previous leaf, otherwise onto a
/// uniformly random edge.
pub fn random_tree_rng<R: Rng>(t: usize, s: u32, rng: &mut R) -> Result<PhyloTree, GenError> {
    GenSpec { t, s, k: 0, seed: 0 }.validate()?;
    let mut b = TreeBuilder::new();
    let c = b.add_internal();
    let mut last = 0;
    for i in 1..=3 {
        last = b.add_leaf(leaf_label(i, t));
        b.add_edge(c, last);
    }
    for i in 4..=t {
        let (u, v) = if rng.gen_range(0..100) < s {
            (last, b.neighbors(last)[0])
        } else {
            let edges = b.edges();
            edges[rng.gen_range(0..edges.len())]
        };
        let w = b.subdivide(u, v);
        last = b.add_leaf(leaf_label(i, t));
        b.add_edge(w, last);
    }
    Ok(b.build().expect("insertion keeps the tree binary"))
}

pub fn tbr_move(tree: &PhyloTree, seed: u64) -> Result<PhyloTree, GenError> {
    tbr_move_rng(tree, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Cuts a uniformly random edge and reconnects the two halves between
/// uniformly random edges (or the lone leaf) of each half.
pub fn tbr_move_rng<R: Rng>(tree: &PhyloTree, rng: &mut R) -> Result<PhyloTree, GenError> {
    if tree.num_taxa() < 4 {
        return Err(GenError::TooFewTaxa(tree.num_taxa()));
    }
    let mut b = TreeBuilder::from_tree(tree);
    let edges = b.edges();
    let (u, v) = edges[rng.gen_range(0..edges.len())];
    b.remove_edge(u, v);
    let mut ends = [0; 2];
    for (slot, x) in [u, v].into_iter().enumerate() {
        ends[slot] = if b.label(x).is_some() {
            x
        } else {
            let a = b.neighbors(x)[0];
            b.suppress(x);
            let comp = b.component(a, a);
            let local: Vec<(usize, usize)> =
                b.edges().into_iter().filter(|(p, _)| comp.binary_search(p).is_ok()).collect();
            let (p, q) = local[rng.gen_range(0..local.len())];
            b.subdivide(p, q)
        };
    }
    b.add_edge(ends[0], ends[1]);
    Ok(b.build().expect("reconnection keeps the tree binary"))
}

/// `T1 = random_tree`, `T2 = k` successive TBR moves on it, all from one
/// seeded stream.
pub fn generate_pair(spec: &GenSpec) -> Result<(PhyloTree, PhyloTree), GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let t1 = random_tree_rng(spec.t, spec.s, &mut rng)?;
    let mut t2 = t1.clone();
    for _ in 0..spec.k {
        t2 = tbr_move_rng(&t2, &mut rng)?;
    }
    Ok((t1, t2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse;
    use crate::oracle::brute_umaf;

    #[test]
    fn labels_are_padded() {
        assert_eq!(leaf_label(3, 8), "t03");
        assert_eq!(leaf_label(7, 150), "t007");
    }

    #[test]
    fn full_skew_is_a_caterpillar() {
        let t = random_tree(9, 100, 1).unwrap();
        // A caterpillar has exactly two cherries.
        let cherries = t
            .internal_vertices()
            .filter(|&v| t.neighbors(v).iter().filter(|&&u| t.is_leaf(u)).count() == 2)
            .count();
        assert_eq!(cherries, 2);
    }

    #[test]
    fn structure_and_determinism() {
        for seed in 0..20 {
            let t = random_tree(12, 50, seed).unwrap();
            assert_eq!((t.num_taxa(), t.num_vertices()), (12, 22));
            assert_eq!(t, random_tree(12, 50, seed).unwrap());
            let m = tbr_move(&t, seed).unwrap();
            assert_eq!((m.num_taxa(), m.num_vertices()), (12, 22));
            assert!(m.same_taxa(&t));
        }
    }

    #[test]
    fn quartet_moves_reach_the_other_quartets() {
        let q = parse("((a,b),(c,d));").unwrap();
        let mut seen: Vec<String> = (0..200).map(|s| tbr_move(&q, s).unwrap().to_canonical_newick()).collect();
        seen.sort();
        seen.dedup();
        let mut want: Vec<String> = ["((a,b),(c,d));", "((a,c),(b,d));", "((a,d),(b,c));"]
            .iter()
            .map(|s| parse(s).unwrap().to_canonical_newick())
            .collect();
        want.sort();
        assert_eq!(seen, want);
    }

    #[test]
    fn one_move_is_at_most_two_blocks() {
        for seed in 0..30 {
            let t = random_tree(7, 70, seed).unwrap();
            let m = tbr_move(&t, seed + 1000).unwrap();
            assert!(brute_umaf(&t, &m).unwrap().size <= 2);
        }
    }

    #[test]
    fn pair_respects_k_bound() {
        for seed in 0..10 {
            let spec = GenSpec { t: 8, s: 50, k: 2, seed };
            let (a, b) = generate_pair(&spec).unwrap();
            assert!((1..=3).contains(&brute_umaf(&a, &b).unwrap().size));
            let (a0, b0) = generate_pair(&GenSpec { k: 0, ..spec }).unwrap();
            assert_eq!(a0, b0);
        }
        assert_eq!(random_tree(3, 50, 0).unwrap_err(), GenError::TooFewTaxa(3));
    }
}
