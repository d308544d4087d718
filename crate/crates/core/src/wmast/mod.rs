//! Weighted maximum agreement subtree (WMAST), rooted and unrooted, and the
//! column pricing built on top of it.

mod dp;
mod price;

use thiserror::Error;

use crate::phylo::{is_agreement_block, Block, PhyloTree, RootedSubtrees, Taxon, TreeError, Vertex};
use dp::{block_of, DpInput, Score};

pub use dp::DpTables;
pub use price::{Candidate, DualValues, PricingOptions};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum WmastError {
    #[error("trees are over different taxon sets")]
    TaxonMismatch,
    #[error("weight vector {what} has length {got}, expected {want}")]
    WeightShape { what: &'static str, got: usize, want: usize },
    #[error("no edge {from}-{root} in tree {tree}")]
    UnknownHandle { tree: u8, from: Vertex, root: Vertex },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// How paired rooted values are combined across a cut edge pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PricingVariant {
    /// Root-pinned values on both sides; every witness is one connected block.
    #[default]
    Pinned,
    /// Sum of unpinned rooted optima (`ℳ + max{0, path}`) on both sides.
    /// Can overestimate and return a witness that is not a single block.
    Paper,
}

impl std::str::FromStr for PricingVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pinned" => Ok(PricingVariant::Pinned),
            "paper" => Ok(PricingVariant::Paper),
            _ => Err(format!("unknown variant {s:?} (expected pinned|paper)")),
        }
    }
}

/// Leaf and internal-vertex weights for both trees.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    /// Indexed by taxon.
    pub leaf: Vec<f64>,
    /// Indexed by vertex of tree 1; entries for leaves are ignored.
    pub internal1: Vec<f64>,
    /// Indexed by vertex of tree 2; entries for leaves are ignored.
    pub internal2: Vec<f64>,
}

impl WeightAssignment {
    pub fn uniform(t1: &PhyloTree, t2: &PhyloTree, leaf: f64, internal: f64) -> Self {
        WeightAssignment {
            leaf: vec![leaf; t1.num_taxa()],
            internal1: vec![internal; t1.num_vertices()],
            internal2: vec![internal; t2.num_vertices()],
        }
    }

    fn check(&self, t1: &PhyloTree, t2: &PhyloTree) -> Result<(), WmastError> {
        for (what, got, want) in [
            ("leaf", self.leaf.len(), t1.num_taxa()),
            ("internal1", self.internal1.len(), t1.num_vertices()),
            ("internal2", self.internal2.len(), t2.num_vertices()),
        ] {
            if got != want {
                return Err(WmastError::WeightShape { what, got, want });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WmastResult {
    pub value: f64,
    pub block: Block,
    /// The block is a single agreement block and `value` is its weight.
    pub connected: bool,
}

/// Total weight of `block`: its leaves plus the internal vertices of its
/// embeddings in both trees.
pub fn evaluate_block(t1: &PhyloTree, t2: &PhyloTree, w: &WeightAssignment, block: &Block) -> Result<f64, TreeError> {
    let e1 = t1.embedding(block)?;
    let e2 = t2.embedding(block)?;
    let leaves: f64 = block.taxa().iter().map(|&x| w.leaf[x]).sum();
    let i1: f64 = e1.internal.iter().map(|&v| w.internal1[v]).sum();
    let i2: f64 = e2.internal.iter().map(|&v| w.internal2[v]).sum();
    Ok(leaves + i1 + i2)
}

#[derive(Debug, Clone, Copy)]
enum Witness {
    Singleton(Taxon),
    Glued(usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    score: Score,
    witness: Witness,
    order: usize,
}

/// One DP evaluation with its ranked combine entries.
struct Run<'e> {
    engine: &'e WmastEngine<'e>,
    tables: DpTables,
    variant: PricingVariant,
    entries: Vec<Entry>,
}

const TIE_SCAN: usize = 64;

impl Run<'_> {
    fn side(&self, a: usize, b: usize) -> Score {
        let m = self.tables.m_score(a, b);
        if m.possible() {
            m.add(self.tables.path_above(a, b).max(0.0))
        } else {
            Score::ZERO
        }
    }

    fn block(&self, w: Witness) -> Block {
        let mut leaves = Vec::new();
        let (h1, h2) = (&self.engine.h1, &self.engine.h2);
        match w {
            Witness::Singleton(x) => leaves.push(x),
            Witness::Glued(a, b) => {
                let (ra, rb) = (h1.get(a).reverse, h2.get(b).reverse);
                match self.variant {
                    PricingVariant::Pinned => {
                        self.tables.trace_pinned(h1, h2, a, b, &mut leaves);
                        self.tables.trace_pinned(h1, h2, ra, rb, &mut leaves);
                    }
                    PricingVariant::Paper => {
                        for (x, y) in [(a, b), (ra, rb)] {
                            if self.tables.m_score(x, y).possible() {
                                self.tables.trace_rooted(h1, h2, x, y, &mut leaves);
                            }
                        }
                    }
                }
            }
        }
        block_of(leaves)
    }

    /// Best entry; exact score ties go to the smallest block.
    fn best(&self) -> Option<(Score, Block)> {
        let first = self.entries.first()?;
        let mut best = (first.score, self.block(first.witness));
        for e in self.entries.iter().skip(1).take(TIE_SCAN) {
            if e.score != first.score {
                break;
            }
            let b = self.block(e.witness);
            if b < best.1 {
                best.1 = b;
            }
        }
        Some(best)
    }

    /// Up to `limit` distinct blocks in score order.
    fn top_blocks(&self, limit: usize) -> Vec<(Score, Block)> {
        let mut out: Vec<(Score, Block)> = Vec::new();
        for e in self.entries.iter().take(limit.saturating_mul(8).max(limit)) {
            if out.len() >= limit {
                break;
            }
            let b = self.block(e.witness);
            if !out.iter().any(|(_, o)| *o == b) {
                out.push((e.score, b));
            }
        }
        out
    }
}

/// Precomputed rooted-subtree structure of a tree pair, reused across many
/// weight assignments.
pub struct WmastEngine<'t> {
    t1: &'t PhyloTree,
    t2: &'t PhyloTree,
    h1: RootedSubtrees,
    h2: RootedSubtrees,
}

impl<'t> WmastEngine<'t> {
    pub fn new(t1: &'t PhyloTree, t2: &'t PhyloTree) -> Result<Self, WmastError> {
        if !t1.same_taxa(t2) {
            return Err(WmastError::TaxonMismatch);
        }
        Ok(WmastEngine { t1, t2, h1: RootedSubtrees::new(t1), h2: RootedSubtrees::new(t2) })
    }

    pub fn tree1(&self) -> &PhyloTree {
        self.t1
    }

    pub fn tree2(&self) -> &PhyloTree {
        self.t2
    }

    pub fn handles1(&self) -> &RootedSubtrees {
        &self.h1
    }

    pub fn handles2(&self) -> &RootedSubtrees {
        &self.h2
    }

    pub fn tables(&self, w: &WeightAssignment) -> Result<DpTables, WmastError> {
        w.check(self.t1, self.t2)?;
        let leaf: Vec<Score> = w.leaf.iter().map(|&x| Score::ZERO.add(x)).collect();
        Ok(self.compute(&leaf, &w.internal1, &w.internal2))
    }

    fn compute(&self, leaf: &[Score], internal1: &[f64], internal2: &[f64]) -> DpTables {
        let input = DpInput { leaf, internal1, internal2 };
        DpTables::compute(&self.h1, &self.h2, self.t1.num_taxa(), &input)
    }

    /// Evaluates the DP and ranks all combine entries; `keep` bounds how many
    /// ranked entries are retained.
    fn run(&self, leaf: &[Score], internal1: &[f64], internal2: &[f64], variant: PricingVariant, keep: usize) -> Run<'_> {
        let tables = self.compute(leaf, internal1, internal2);
        let mut entries = Vec::new();
        for (x, &s) in leaf.iter().enumerate() {
            if s.possible() {
                entries.push(Entry { score: s, witness: Witness::Singleton(x), order: entries.len() });
            }
        }
        let mut run = Run { engine: self, tables, variant, entries: Vec::new() };
        for a in 0..self.h1.len() {
            let ra = self.h1.get(a).reverse;
            if ra < a {
                continue;
            }
            for b in 0..self.h2.len() {
                let rb = self.h2.get(b).reverse;
                let score = match variant {
                    PricingVariant::Pinned => run.tables.v_score(a, b).plus(run.tables.v_score(ra, rb)),
                    PricingVariant::Paper => {
                        if !run.tables.m_score(a, b).possible() && !run.tables.m_score(ra, rb).possible() {
                            continue;
                        }
                        run.side(a, b).plus(run.side(ra, rb))
                    }
                };
                if score.possible() {
                    entries.push(Entry { score, witness: Witness::Glued(a, b), order: entries.len() });
                }
            }
        }
        let cmp = |x: &Entry, y: &Entry| {
            y.score
                .hits
                .cmp(&x.score.hits)
                .then(y.score.value.total_cmp(&x.score.value))
                .then(x.order.cmp(&y.order))
        };
        let keep = keep.max(TIE_SCAN + 1);
        if entries.len() > keep {
            entries.select_nth_unstable_by(keep, cmp);
            entries.truncate(keep);
        }
        entries.sort_by(cmp);
        run.entries = entries;
        run
    }

    /// Unrooted WMAST: the best weighted agreement block.
    pub fn wmast(&self, w: &WeightAssignment, variant: PricingVariant) -> Result<WmastResult, WmastError> {
        w.check(self.t1, self.t2)?;
        let leaf: Vec<Score> = w.leaf.iter().map(|&x| Score::ZERO.add(x)).collect();
        let run = self.run(&leaf, &w.internal1, &w.internal2, variant, 1);
        let (score, block) = run.best().expect("a tree with leaves always has a singleton block");
        let connected = match variant {
            PricingVariant::Pinned => true,
            PricingVariant::Paper => self.is_exact_witness(w, &block, score.value),
        };
        Ok(WmastResult { value: score.value, block, connected })
    }

    /// Rooted WMAST of the handles `from1 -> root1` and `from2 -> root2`.
    pub fn rwmast(&self, handle1: (Vertex, Vertex), handle2: (Vertex, Vertex), w: &WeightAssignment) -> Result<WmastResult, WmastError> {
        w.check(self.t1, self.t2)?;
        let a = self.h1.find(handle1.0, handle1.1).ok_or(WmastError::UnknownHandle {
            tree: 1,
            from: handle1.0,
            root: handle1.1,
        })?;
        let b = self.h2.find(handle2.0, handle2.1).ok_or(WmastError::UnknownHandle {
            tree: 2,
            from: handle2.0,
            root: handle2.1,
        })?;
        let t = self.tables(w)?;
        let m = t.m_score(a, b);
        if !m.possible() {
            return Ok(WmastResult { value: f64::NEG_INFINITY, block: Block::default(), connected: false });
        }
        let value = m.value + t.path_above(a, b).max(0.0);
        let mut leaves = Vec::new();
        t.trace_rooted(&self.h1, &self.h2, a, b, &mut leaves);
        let block = block_of(leaves);
        let connected = self.is_exact_witness(w, &block, value);
        Ok(WmastResult { value, block, connected })
    }

    fn is_exact_witness(&self, w: &WeightAssignment, block: &Block, value: f64) -> bool {
        !block.is_empty()
            && is_agreement_block(self.t1, self.t2, block)
            && evaluate_block(self.t1, self.t2, w, block).is_ok_and(|v| (v - value).abs() <= 1e-9)
    }
}

/// Unrooted WMAST of two trees.
pub fn wmast(t1: &PhyloTree, t2: &PhyloTree, w: &WeightAssignment, variant: PricingVariant) -> Result<WmastResult, WmastError> {
    WmastEngine::new(t1, t2)?.wmast(w, variant)
}

/// Rooted WMAST of one handle per tree.
pub fn rwmast(
    t1: &PhyloTree,
    t2: &PhyloTree,
    handle1: (Vertex, Vertex),
    handle2: (Vertex, Vertex),
    w: &WeightAssignment,
) -> Result<WmastResult, WmastError> {
    WmastEngine::new(t1, t2)?.rwmast(handle1, handle2, w)
}
