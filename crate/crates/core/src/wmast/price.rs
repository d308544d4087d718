//! Column pricing: the most violated dual constraint of the master LP.
//!
//! The perturbed score of a block `Y` is
//! `Σα(Y) − Σβ(V1[Y]) − Σβ(V2[Y]) − ε·max β(V[Y])`. The max-term is not
//! decomposable, so the DP runs on a descending sequence of β thresholds:
//! vertices with β above the threshold are disallowed, the DP returns the
//! best unpenalised block, and the next threshold drops just below that
//! block's own max β. Forbidden blocks are skipped exactly by partitioning
//! the block space on required/excluded taxa.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::dp::Score;
use super::{PricingVariant, WmastEngine, WmastError};
use crate::phylo::{is_agreement_block, Block, Taxon, Vertex};

/// Master LP duals: `alpha` per taxon (cover rows), `beta1`/`beta2` per
/// vertex (packing rows; leaf entries unused) and the perturbation weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValues {
    pub alpha: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub epsilon: f64,
}

impl DualValues {
    /// Duals at which every block scores its leaf count.
    pub fn unit(t1_vertices: usize, t2_vertices: usize, taxa: usize) -> Self {
        DualValues {
            alpha: vec![1.0; taxa],
            beta1: vec![0.0; t1_vertices],
            beta2: vec![0.0; t2_vertices],
            epsilon: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub block: Block,
    /// Exact perturbed score.
    pub score: f64,
    /// `max β` over both embeddings (0 for a singleton).
    pub max_beta: f64,
    pub internal1: Vec<Vertex>,
    pub internal2: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingOptions {
    /// How many candidates to return, best first.
    pub max_candidates: usize,
    pub variant: PricingVariant,
    /// Drop candidates scoring below this.
    pub min_score: Option<f64>,
}

impl Default for PricingOptions {
    fn default() -> Self {
        PricingOptions { max_candidates: 10, variant: PricingVariant::Pinned, min_score: None }
    }
}

/// Partition cell of the exclusion search.
#[derive(Debug, Clone)]
struct Cell {
    required: Vec<Taxon>,
    excluded: Vec<Taxon>,
    best: Option<(f64, Block)>,
}

struct Ranked(f64, Block, usize);

impl PartialEq for Ranked {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Ranked {
    fn cmp(&self, o: &Self) -> Ordering {
        // max-heap: higher score, then smaller block, then earlier cell
        self.0.total_cmp(&o.0).then_with(|| o.1.cmp(&self.1)).then_with(|| o.2.cmp(&self.2))
    }
}

fn clamp(b: f64) -> f64 {
    if b > 0.0 {
        b
    } else {
        0.0
    }
}

impl WmastEngine<'_> {
    /// Exact perturbed score of `block` and its embedding vertices.
    pub fn score_block(&self, duals: &DualValues, block: &Block) -> Result<Candidate, WmastError> {
        let e1 = self.t1.embedding(block)?;
        let e2 = self.t2.embedding(block)?;
        let mut score: f64 = block.taxa().iter().map(|&x| duals.alpha[x]).sum();
        let mut max_beta: f64 = 0.0;
        for &v in &e1.internal {
            let b = clamp(duals.beta1[v]);
            score -= b;
            max_beta = max_beta.max(b);
        }
        for &v in &e2.internal {
            let b = clamp(duals.beta2[v]);
            score -= b;
            max_beta = max_beta.max(b);
        }
        score -= duals.epsilon * max_beta;
        Ok(Candidate { block: block.clone(), score, max_beta, internal1: e1.internal, internal2: e2.internal })
    }

    fn check_duals(&self, d: &DualValues) -> Result<(), WmastError> {
        for (what, got, want) in [
            ("alpha", d.alpha.len(), self.t1.num_taxa()),
            ("beta1", d.beta1.len(), self.t1.num_vertices()),
            ("beta2", d.beta2.len(), self.t2.num_vertices()),
        ] {
            if got != want {
                return Err(WmastError::WeightShape { what, got, want });
            }
        }
        Ok(())
    }

    /// The best-scoring agreement blocks (not in `forbidden`) under `duals`,
    /// best first. The first entry is the exact optimum for the pinned
    /// variant; the rest are runner-ups collected along the way.
    pub fn price(&self, duals: &DualValues, forbidden: &[Block], opts: &PricingOptions) -> Result<Vec<Candidate>, WmastError> {
        self.check_duals(duals)?;
        let forbidden: HashSet<&Block> = forbidden.iter().collect();
        let limit = opts.max_candidates.max(1);

        let n1 = self.t1.num_vertices();
        let mut thresholds: Vec<f64> = (self.t1.num_taxa()..n1)
            .map(|v| clamp(duals.beta1[v]))
            .chain(self.t2.internal_vertices().map(|v| clamp(duals.beta2[v])))
            .chain(std::iter::once(0.0))
            .collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();

        let mut pool: Vec<Block> = Vec::new();
        let mut search = Search { engine: self, duals, thresholds: &thresholds, opts, limit, pool: &mut pool };

        // Exclusion search over partition cells.
        let mut heap = BinaryHeap::new();
        let mut cells = vec![Cell { required: Vec::new(), excluded: Vec::new(), best: None }];
        cells[0].best = search.cell_best(&[], &[]);
        if let Some((s, b)) = cells[0].best.clone() {
            heap.push(Ranked(s, b, 0));
        }
        let mut optimum = None;
        while let Some(Ranked(_, block, id)) = heap.pop() {
            if !forbidden.contains(&block) {
                optimum = Some(block);
                break;
            }
            let (req, exc) = (cells[id].required.clone(), cells[id].excluded.clone());
            let free_in: Vec<Taxon> = block.taxa().iter().copied().filter(|x| !req.contains(x)).collect();
            let free_out: Vec<Taxon> = (0..self.t1.num_taxa())
                .filter(|x| !block.contains(*x) && !exc.contains(x))
                .collect();
            let mut children = Vec::new();
            // Blocks missing some taxon of `block`: first missing one is f_i.
            for (i, &f) in free_in.iter().enumerate() {
                let mut r = req.clone();
                r.extend_from_slice(&free_in[..i]);
                let mut e = exc.clone();
                e.push(f);
                children.push((r, e));
            }
            // Strict supersets of `block`: first extra taxon is g_j.
            for (j, &g) in free_out.iter().enumerate() {
                let mut r = req.clone();
                r.extend_from_slice(&free_in);
                r.push(g);
                let mut e = exc.clone();
                e.extend_from_slice(&free_out[..j]);
                children.push((r, e));
            }
            for (mut r, mut e) in children {
                r.sort_unstable();
                e.sort_unstable();
                let best = search.cell_best(&r, &e);
                let id = cells.len();
                if let Some((s, b)) = best.clone() {
                    heap.push(Ranked(s, b, id));
                }
                cells.push(Cell { required: r, excluded: e, best });
            }
        }

        let mut out: Vec<Candidate> = Vec::new();
        let mut seen: HashSet<Block> = HashSet::new();
        for b in optimum.into_iter().chain(pool) {
            if forbidden.contains(&b) || !seen.insert(b.clone()) || !is_agreement_block(self.t1, self.t2, &b) {
                continue;
            }
            let c = self.score_block(duals, &b)?;
            if opts.min_score.is_some_and(|m| c.score < m) {
                continue;
            }
            out.push(c);
        }
        out.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.block.cmp(&y.block)));
        out.truncate(limit);
        Ok(out)
    }
}

struct Search<'a, 'e> {
    engine: &'a WmastEngine<'e>,
    duals: &'a DualValues,
    thresholds: &'a [f64],
    opts: &'a PricingOptions,
    limit: usize,
    pool: &'a mut Vec<Block>,
}

impl Search<'_, '_> {
    /// Best exact perturbed score over blocks containing `required` and
    /// avoiding `excluded`.
    fn cell_best(&mut self, required: &[Taxon], excluded: &[Taxon]) -> Option<(f64, Block)> {
        let e = self.engine;
        let leaf: Vec<Score> = (0..e.t1.num_taxa())
            .map(|x| {
                if excluded.binary_search(&x).is_ok() {
                    Score::IMPOSSIBLE
                } else {
                    let hits = i32::from(required.binary_search(&x).is_ok());
                    Score { hits, value: self.duals.alpha[x] }
                }
            })
            .collect();
        let need = required.len() as i32;
        let mut cap = f64::INFINITY;
        let mut best: Option<(f64, Block)> = None;
        let mut w1 = vec![0.0; e.t1.num_vertices()];
        let mut w2 = vec![0.0; e.t2.num_vertices()];
        loop {
            let weight = |b: f64| {
                let b = clamp(b);
                if b <= cap {
                    -b
                } else {
                    f64::NEG_INFINITY
                }
            };
            for v in e.t1.internal_vertices() {
                w1[v] = weight(self.duals.beta1[v]);
            }
            for v in e.t2.internal_vertices() {
                w2[v] = weight(self.duals.beta2[v]);
            }
            let run = e.run(&leaf, &w1, &w2, self.opts.variant, self.limit * 8);
            for (_, b) in run.top_blocks(self.limit) {
                self.pool.push(b);
            }
            let Some((s, block)) = run.best() else { break };
            if s.hits < need || best.as_ref().is_some_and(|(bs, _)| s.value <= *bs) {
                break;
            }
            let Ok(c) = e.score_block(self.duals, &block) else { break };
            let valid = self.opts.variant == PricingVariant::Pinned || is_agreement_block(e.t1, e.t2, &block);
            if valid && best.as_ref().is_none_or(|(bs, bb)| c.score > *bs || (c.score == *bs && block < *bb)) {
                best = Some((c.score, block));
            }
            if self.duals.epsilon == 0.0 {
                break;
            }
            // Next threshold: the largest one strictly below this block's max β
            // (and below the current cap, which an inexact witness may exceed).
            let below = c.max_beta.min(cap);
            match self.thresholds.iter().rposition(|&t| t < below) {
                Some(i) => cap = self.thresholds[i],
                None => break,
            }
        }
        best
    }
}
