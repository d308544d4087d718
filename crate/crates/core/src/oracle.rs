//! Brute-force ground truth: exact uMAF by partition enumeration and exact
//! WMAST by subset enumeration. Meant to be obviously correct, not fast.

use thiserror::Error;

use crate::phylo::{is_agreement_block, Block, PhyloTree};
use crate::wmast::{evaluate_block, DualValues, WeightAssignment, WmastEngine};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} taxa exceeds the brute-force limit of {limit}")]
    TooManyTaxa { n: usize, limit: usize },
    #[error("trees are over different taxon sets")]
    TaxonMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_taxa_umaf: usize,
    pub max_taxa_wmast: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_taxa_umaf: 8, max_taxa_wmast: 12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleForest {
    pub size: usize,
    pub forest: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBlock {
    pub value: f64,
    pub block: Block,
}

fn check(t1: &PhyloTree, t2: &PhyloTree, limit: usize) -> Result<usize, OracleError> {
    if !t1.same_taxa(t2) {
        return Err(OracleError::TaxonMismatch);
    }
    let n = t1.num_taxa();
    if n > limit {
        return Err(OracleError::TooManyTaxa { n, limit });
    }
    Ok(n)
}

fn block_of_mask(mask: usize, n: usize) -> Block {
    Block::new((0..n).filter(|&x| mask >> x & 1 == 1).collect())
}

/// Vertex bitmask of the span of `block`.
fn span_bits(t: &PhyloTree, block: &Block) -> u128 {
    t.embedding(block).unwrap().span.iter().fold(0u128, |m, &v| m | 1u128 << v)
}

/// Every nonempty agreeing subset of the taxa, as bitmasks in increasing order.
pub fn agreement_blocks(t1: &PhyloTree, t2: &PhyloTree) -> Result<Vec<Block>, OracleError> {
    agreement_blocks_with(t1, t2, &OracleLimits::default())
}

pub fn agreement_blocks_with(t1: &PhyloTree, t2: &PhyloTree, limits: &OracleLimits) -> Result<Vec<Block>, OracleError> {
    let n = check(t1, t2, limits.max_taxa_wmast)?;
    Ok((1..1usize << n)
        .map(|m| block_of_mask(m, n))
        .filter(|b| is_agreement_block(t1, t2, b))
        .collect())
}

pub fn brute_umaf(t1: &PhyloTree, t2: &PhyloTree) -> Result<OracleForest, OracleError> {
    brute_umaf_with(t1, t2, &OracleLimits::default())
}

/// Minimum agreement forest by enumerating set partitions in non-decreasing
/// block-count order; the first valid partition is optimal.
pub fn brute_umaf_with(t1: &PhyloTree, t2: &PhyloTree, limits: &OracleLimits) -> Result<OracleForest, OracleError> {
    let n = check(t1, t2, limits.max_taxa_umaf)?;
    let full = 1usize << n;
    // Per-subset agreement flag and span masks in both trees.
    let mut agrees = vec![false; full];
    let mut span1 = vec![0u128; full];
    let mut span2 = vec![0u128; full];
    for m in 1..full {
        let b = block_of_mask(m, n);
        if is_agreement_block(t1, t2, &b) {
            agrees[m] = true;
            span1[m] = span_bits(t1, &b);
            span2[m] = span_bits(t2, &b);
        }
    }
    let valid = |masks: &[usize]| {
        let (mut u1, mut u2) = (0u128, 0u128);
        for &m in masks {
            if !agrees[m] || u1 & span1[m] != 0 || u2 & span2[m] != 0 {
                return false;
            }
            u1 |= span1[m];
            u2 |= span2[m];
        }
        true
    };
    for k in 1..=n {
        let mut rgs = vec![0usize; n];
        let mut found = None;
        each_partition(&mut rgs, 1, 0, k, &mut |rgs| {
            let mut masks = vec![0usize; k];
            for (x, &b) in rgs.iter().enumerate() {
                masks[b] |= 1 << x;
            }
            if valid(&masks) {
                found = Some(masks);
                true
            } else {
                false
            }
        });
        if let Some(masks) = found {
            let mut forest: Vec<Block> = masks.into_iter().map(|m| block_of_mask(m, n)).collect();
            forest.sort();
            return Ok(OracleForest { size: k, forest });
        }
    }
    unreachable!("the all-singletons partition is always an agreement forest")
}

/// Restricted-growth strings with exactly `k` blocks; `visit` returning true
/// stops the enumeration.
fn each_partition(rgs: &mut [usize], pos: usize, max: usize, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let n = rgs.len();
    if pos == n {
        return max + 1 == k && visit(rgs);
    }
    // Not enough positions left to open the remaining blocks.
    if max + 1 + (n - pos) < k {
        return false;
    }
    for b in 0..=(max + 1).min(k - 1) {
        rgs[pos] = b;
        if each_partition(rgs, pos + 1, max.max(b), k, visit) {
            return true;
        }
    }
    false
}

pub fn brute_wmast(t1: &PhyloTree, t2: &PhyloTree, w: &WeightAssignment) -> Result<OracleBlock, OracleError> {
    brute_wmast_with(t1, t2, w, &OracleLimits::default())
}

/// Best weighted agreeing subset; ties go to the earliest subset in
/// bitmask order.
pub fn brute_wmast_with(t1: &PhyloTree, t2: &PhyloTree, w: &WeightAssignment, limits: &OracleLimits) -> Result<OracleBlock, OracleError> {
    let blocks = agreement_blocks_with(t1, t2, limits)?;
    let mut best: Option<OracleBlock> = None;
    for b in blocks {
        let value = evaluate_block(t1, t2, w, &b).unwrap();
        if best.as_ref().is_none_or(|o| value > o.value) {
            best = Some(OracleBlock { value, block: b });
        }
    }
    Ok(best.expect("singletons always agree"))
}

/// Best perturbed pricing score over agreeing subsets not in `forbidden`.
pub fn brute_price(
    t1: &PhyloTree,
    t2: &PhyloTree,
    duals: &DualValues,
    forbidden: &[Block],
) -> Result<Option<OracleBlock>, OracleError> {
    let blocks = agreement_blocks(t1, t2)?;
    let engine = WmastEngine::new(t1, t2).map_err(|_| OracleError::TaxonMismatch)?;
    let mut best: Option<OracleBlock> = None;
    for b in blocks {
        if forbidden.contains(&b) {
            continue;
        }
        let value = engine.score_block(duals, &b).unwrap().score;
        if best.as_ref().is_none_or(|o| value > o.value) {
            best = Some(OracleBlock { value, block: b });
        }
    }
    Ok(best)
}
