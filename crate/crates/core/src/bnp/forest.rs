use std::fmt;

use thiserror::Error;

use crate::phylo::{is_agreement_block, Block, PhyloTree};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("taxon {0} is covered {1} times")]
    NotAPartition(usize, usize),
    #[error("block {0} does not induce the same topology in both trees")]
    Disagreement(Block),
    #[error("blocks {0} and {1} have overlapping embeddings in tree {2}")]
    Overlap(Block, Block, u8),
    #[error("trees are over different taxon sets")]
    TaxonMismatch,
}

/// A validated agreement forest: a partition of the taxa into agreement
/// blocks whose embeddings are pairwise vertex-disjoint in both trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementForest {
    blocks: Vec<Block>,
}

impl AgreementForest {
    pub fn new(t1: &PhyloTree, t2: &PhyloTree, mut blocks: Vec<Block>) -> Result<Self, ForestError> {
        if !t1.same_taxa(t2) {
            return Err(ForestError::TaxonMismatch);
        }
        blocks.sort();
        let mut cover = vec![0usize; t1.num_taxa()];
        for b in &blocks {
            for &x in b.taxa() {
                cover[x] += 1;
            }
        }
        if let Some((x, &c)) = cover.iter().enumerate().find(|(_, &c)| c != 1) {
            return Err(ForestError::NotAPartition(x, c));
        }
        if let Some(b) = blocks.iter().find(|b| !is_agreement_block(t1, t2, b)) {
            return Err(ForestError::Disagreement(b.clone()));
        }
        for (tag, t) in [(1u8, t1), (2, t2)] {
            let mut owner: Vec<Option<usize>> = vec![None; t.num_vertices()];
            for (i, b) in blocks.iter().enumerate() {
                for v in t.embedding(b).expect("validated block").span {
                    if let Some(j) = owner[v] {
                        return Err(ForestError::Overlap(blocks[j].clone(), b.clone(), tag));
                    }
                    owner[v] = Some(i);
                }
            }
        }
        Ok(AgreementForest { blocks })
    }

    /// The `n` singleton blocks.
    pub fn singletons(t1: &PhyloTree, t2: &PhyloTree) -> Result<Self, ForestError> {
        Self::new(t1, t2, (0..t1.num_taxa()).map(Block::singleton).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }
}

impl fmt::Display for AgreementForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}
