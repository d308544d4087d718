//! Classic data reduction: common pendant subtrees collapse to one leaf and
//! common chains are cut down to three leaves. Both preserve the uMAF size;
//! [`lift_forest`] maps a forest of the reduced pair back to the originals.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bnp::{AgreementForest, ForestError};
use crate::phylo::{Block, PhyloTree, RootedSubtrees, TreeBuilder, TreeError, Vertex};

/// Chains are truncated to this many leaves.
pub const CHAIN_KEEP: usize = 3;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ReduceError {
    #[error("trees are over different taxon sets")]
    TaxonMismatch,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("trace step {0} does not apply to these trees")]
    Replay(usize),
    #[error("could not lift the forest through trace step {0}")]
    Lift(usize),
    #[error("lifted forest is invalid: {0}")]
    Forest(#[from] ForestError),
    #[error("bad trace line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Subtree,
    Chain,
}

/// One reduction: `replaced` (sorted for subtrees, in chain order for chains)
/// became `replacement` (the fresh leaf, or the kept chain prefix).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub replaced: Vec<String>,
    pub replacement: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }
}

/// One step per line: `kind<TAB>replaced,...<TAB>replacement,...`.
impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let kind = match s.kind {
                StepKind::Subtree => "subtree",
                StepKind::Chain => "chain",
            };
            writeln!(f, "{kind}\t{}\t{}", s.replaced.join(","), s.replacement.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for ReductionTrace {
    type Err = ReduceError;

    fn from_str(text: &str) -> Result<Self, ReduceError> {
        let mut steps = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |msg: &str| ReduceError::Parse { line: i + 1, msg: msg.to_string() };
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(bad("expected three tab-separated fields"));
            }
            let kind = match parts[0] {
                "subtree" => StepKind::Subtree,
                "chain" => StepKind::Chain,
                _ => return Err(bad("unknown step kind")),
            };
            let list = |s: &str| s.split(',').filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>();
            steps.push(ReductionStep { kind, replaced: list(parts[1]), replacement: list(parts[2]) });
        }
        Ok(ReductionTrace { steps })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub t1: PhyloTree,
    pub t2: PhyloTree,
    pub trace: ReductionTrace,
}

/// Rooted canonical strings of every handle.
fn handle_strings(t: &PhyloTree, h: &RootedSubtrees) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(h.len());
    for handle in h.iter() {
        let s = match handle.children {
            None => t.taxa().label(handle.root).to_string(),
            Some((a, b)) => {
                let (x, y) = (&out[a], &out[b]);
                let first_a = h.get(a).leaves[0] < h.get(b).leaves[0];
                if first_a {
                    format!("({x},{y})")
                } else {
                    format!("({y},{x})")
                }
            }
        };
        out.push(s);
    }
    out
}

fn labels_of(t: &PhyloTree, taxa: &[usize]) -> Vec<String> {
    taxa.iter().map(|&x| t.taxa().label(x).to_string()).collect()
}

fn fresh_label(t: &PhyloTree, counter: &mut usize) -> String {
    loop {
        *counter += 1;
        let l = format!("_r{counter}");
        if t.taxa().id(&l).is_none() {
            return l;
        }
    }
}

/// Handle whose leaf set is exactly `labels`.
fn handle_with_leaves(t: &PhyloTree, h: &RootedSubtrees, labels: &[String]) -> Option<usize> {
    let mut ids: Vec<usize> = labels.iter().map(|l| t.taxa().id(l)).collect::<Option<_>>()?;
    ids.sort_unstable();
    (0..h.len()).find(|&i| h.get(i).leaves == ids)
}

/// Replaces the pendant subtree of handle `(from, root)` by leaf `label`.
fn collapse(t: &PhyloTree, from: Vertex, root: Vertex, label: &str) -> Result<PhyloTree, TreeError> {
    let mut b = TreeBuilder::from_tree(t);
    for v in b.component(root, from) {
        b.delete(v);
    }
    let x = b.add_leaf(label);
    b.add_edge(from, x);
    b.build()
}

fn prune(t: &PhyloTree, labels: &[String]) -> Result<PhyloTree, TreeError> {
    let mut b = TreeBuilder::from_tree(t);
    for l in labels {
        let v = b.vertex_of_label(l).ok_or_else(|| TreeError::UnknownLabel(l.clone()))?;
        b.prune_leaf(v);
    }
    b.build()
}

/// A directed edge `(from, root)` naming a pendant subtree.
type Pendant = (Vertex, Vertex);

/// One maximal common pendant subtree with between 2 and `n - 2` leaves.
fn find_common_subtree(t1: &PhyloTree, t2: &PhyloTree) -> Option<(Vec<String>, Pendant, Pendant)> {
    let n = t1.num_taxa();
    let (h1, h2) = (RootedSubtrees::new(t1), RootedSubtrees::new(t2));
    let (s1, s2) = (handle_strings(t1, &h1), handle_strings(t2, &h2));
    let by_leaves: HashMap<&[usize], usize> = (0..h2.len()).map(|i| (h2.get(i).leaves.as_slice(), i)).collect();
    // Largest first, so the first hit is maximal.
    for a in (0..h1.len()).rev() {
        let ha = h1.get(a);
        if ha.leaf_count() < 2 || ha.leaf_count() > n.saturating_sub(2) {
            continue;
        }
        if let Some(&b) = by_leaves.get(ha.leaves.as_slice()) {
            if s1[a] == s2[b] {
                let hb = h2.get(b);
                return Some((labels_of(t1, &ha.leaves), (ha.from, ha.root), (hb.from, hb.root)));
            }
        }
    }
    None
}

/// Applies the subtree rule until no common pendant subtree remains.
pub fn subtree_reduce(t1: &PhyloTree, t2: &PhyloTree) -> Result<Reduced, ReduceError> {
    let mut r = start(t1, t2)?;
    let mut counter = 0;
    subtree_pass(&mut r, &mut counter)?;
    Ok(r)
}

fn start(t1: &PhyloTree, t2: &PhyloTree) -> Result<Reduced, ReduceError> {
    if !t1.same_taxa(t2) {
        return Err(ReduceError::TaxonMismatch);
    }
    Ok(Reduced { t1: t1.clone(), t2: t2.clone(), trace: ReductionTrace::default() })
}

fn subtree_pass(r: &mut Reduced, counter: &mut usize) -> Result<bool, ReduceError> {
    let mut changed = false;
    while let Some((labels, e1, e2)) = find_common_subtree(&r.t1, &r.t2) {
        let fresh = fresh_label(&r.t1, counter);
        r.t1 = collapse(&r.t1, e1.0, e1.1, &fresh)?;
        r.t2 = collapse(&r.t2, e2.0, e2.1, &fresh)?;
        r.trace.steps.push(ReductionStep { kind: StepKind::Subtree, replaced: labels, replacement: vec![fresh] });
        changed = true;
    }
    Ok(changed)
}

/// The only leaf neighbour of `p`, if `p` is internal with exactly one.
fn chain_leaf(t: &PhyloTree, p: Vertex) -> Option<Vertex> {
    if t.is_leaf(p) {
        return None;
    }
    let mut leaves = t.neighbors(p).iter().filter(|&&u| t.is_leaf(u));
    match (leaves.next(), leaves.next()) {
        (Some(&x), None) => Some(x),
        _ => None,
    }
}

/// Maximal chains of `t` as taxon sequences (each of length ≥ 2).
fn chains(t: &PhyloTree) -> Vec<Vec<usize>> {
    let is_chain = |p: Vertex| chain_leaf(t, p).is_some();
    // Chain vertices induce disjoint paths; walk each from an end.
    let next = |p: Vertex| -> Vec<Vertex> { t.neighbors(p).iter().copied().filter(|&u| is_chain(u)).collect() };
    let mut seen = vec![false; t.num_vertices()];
    let mut out = Vec::new();
    for p in t.internal_vertices() {
        if seen[p] || !is_chain(p) || next(p).len() == 2 {
            continue;
        }
        let mut path = vec![p];
        seen[p] = true;
        let mut cur = p;
        while let Some(u) = next(cur).into_iter().find(|&u| !seen[u]) {
            seen[u] = true;
            path.push(u);
            cur = u;
        }
        if path.len() >= 2 {
            out.push(path.iter().map(|&v| chain_leaf(t, v).unwrap()).collect());
        }
    }
    out
}

/// Maximal segments of `t1`'s chains that are also chains of `t2`.
fn common_chains(t1: &PhyloTree, t2: &PhyloTree) -> Vec<Vec<usize>> {
    let parent2 = |x: usize| t2.neighbors(x)[0];
    let linked = |x: usize, y: usize| {
        let (p, q) = (parent2(x), parent2(y));
        chain_leaf(t2, p) == Some(x) && chain_leaf(t2, q) == Some(y) && t2.neighbors(p).contains(&q)
    };
    let mut out = Vec::new();
    for c in chains(t1) {
        let mut seg = vec![c[0]];
        for w in c.windows(2) {
            if linked(w[0], w[1]) {
                seg.push(w[1]);
            } else {
                out.push(std::mem::replace(&mut seg, vec![w[1]]));
            }
        }
        out.push(seg);
    }
    out.retain(|s| s.len() >= 2);
    out
}

/// Applies the chain rule: every common chain longer than three loses all
/// but its first three leaves.
pub fn chain_reduce(t1: &PhyloTree, t2: &PhyloTree) -> Result<Reduced, ReduceError> {
    let mut r = start(t1, t2)?;
    chain_pass(&mut r)?;
    Ok(r)
}

fn chain_pass(r: &mut Reduced) -> Result<bool, ReduceError> {
    let mut changed = false;
    loop {
        let Some(mut seg) = common_chains(&r.t1, &r.t2).into_iter().find(|s| s.len() > CHAIN_KEEP) else {
            return Ok(changed);
        };
        if seg[0] > seg[seg.len() - 1] {
            seg.reverse();
        }
        let labels = labels_of(&r.t1, &seg);
        r.t1 = prune(&r.t1, &labels[CHAIN_KEEP..])?;
        r.t2 = prune(&r.t2, &labels[CHAIN_KEEP..])?;
        r.trace.steps.push(ReductionStep {
            kind: StepKind::Chain,
            replacement: labels[..CHAIN_KEEP].to_vec(),
            replaced: labels,
        });
        changed = true;
    }
}

/// Both rules to a common fixpoint.
pub fn reduce(t1: &PhyloTree, t2: &PhyloTree) -> Result<Reduced, ReduceError> {
    let mut r = start(t1, t2)?;
    let mut counter = 0;
    loop {
        let a = subtree_pass(&mut r, &mut counter)?;
        let b = chain_pass(&mut r)?;
        if !a && !b {
            return Ok(r);
        }
    }
}

/// Re-applies one trace step to a tree pair.
fn replay(t1: &PhyloTree, t2: &PhyloTree, step: &ReductionStep, i: usize) -> Result<(PhyloTree, PhyloTree), ReduceError> {
    match step.kind {
        StepKind::Subtree => {
            let [fresh] = step.replacement.as_slice() else { return Err(ReduceError::Replay(i)) };
            let mut out = Vec::new();
            for t in [t1, t2] {
                let h = RootedSubtrees::new(t);
                let a = handle_with_leaves(t, &h, &step.replaced).ok_or(ReduceError::Replay(i))?;
                let ha = h.get(a);
                out.push(collapse(t, ha.from, ha.root, fresh)?);
            }
            let t2 = out.pop().unwrap();
            Ok((out.pop().unwrap(), t2))
        }
        StepKind::Chain => {
            if step.replaced.len() <= step.replacement.len() || step.replaced[..step.replacement.len()] != step.replacement[..] {
                return Err(ReduceError::Replay(i));
            }
            let gone = &step.replaced[step.replacement.len()..];
            Ok((prune(t1, gone)?, prune(t2, gone)?))
        }
    }
}

type LabelForest = Vec<BTreeSet<String>>;

fn to_blocks(t: &PhyloTree, f: &LabelForest) -> Option<Vec<Block>> {
    f.iter()
        .map(|b| t.taxa().ids(b.iter().map(String::as_str)).ok())
        .collect()
}

fn valid(t1: &PhyloTree, t2: &PhyloTree, f: &LabelForest) -> bool {
    to_blocks(t1, f).is_some_and(|b| AgreementForest::new(t1, t2, b).is_ok())
}

/// Candidate expansions of a chain step, best (fewest blocks) first among
/// those that validate.
fn lift_chain(t1: &PhyloTree, t2: &PhyloTree, f: &LabelForest, step: &ReductionStep) -> Option<LabelForest> {
    let kept: BTreeSet<String> = step.replacement.iter().cloned().collect();
    let tail: Vec<String> = step.replaced[step.replacement.len()..].to_vec();
    let mut candidates: Vec<LabelForest> = Vec::new();
    // Tail joins the block of a kept leaf, last kept leaf first.
    for k in step.replacement.iter().rev() {
        if let Some(i) = f.iter().position(|b| b.contains(k)) {
            let mut g = f.clone();
            g[i].extend(tail.iter().cloned());
            candidates.push(g);
        }
    }
    // Tail joins any other block.
    for i in 0..f.len() {
        let mut g = f.clone();
        g[i].extend(tail.iter().cloned());
        candidates.push(g);
    }
    // The whole chain leaves its blocks and forms or joins one block.
    let mut base: LabelForest = f.iter().map(|b| b.difference(&kept).cloned().collect()).collect();
    base.retain(|b: &BTreeSet<String>| !b.is_empty());
    let whole: BTreeSet<String> = step.replaced.iter().cloned().collect();
    let mut g = base.clone();
    g.push(whole.clone());
    candidates.push(g);
    for i in 0..base.len() {
        let mut g = base.clone();
        g[i].extend(whole.iter().cloned());
        candidates.push(g);
    }
    // Last resort: tail leaves as singletons.
    let mut g = f.clone();
    g.extend(tail.iter().map(|l| BTreeSet::from([l.clone()])));
    candidates.push(g);

    let mut best: Option<LabelForest> = None;
    for c in candidates {
        if best.as_ref().is_some_and(|b| b.len() <= c.len()) {
            continue;
        }
        if valid(t1, t2, &c) {
            best = Some(c);
        }
    }
    best
}

/// Maps a forest of the reduced pair back to the original pair.
pub fn lift_forest(
    t1: &PhyloTree,
    t2: &PhyloTree,
    reduced: &AgreementForest,
    reduced_t1: &PhyloTree,
    trace: &ReductionTrace,
) -> Result<AgreementForest, ReduceError> {
    if !t1.same_taxa(t2) {
        return Err(ReduceError::TaxonMismatch);
    }
    // Intermediate pairs: stages[i] is the pair before step i.
    let mut stages = vec![(t1.clone(), t2.clone())];
    for (i, s) in trace.steps.iter().enumerate() {
        let (a, b) = stages.last().unwrap();
        let next = replay(a, b, s, i)?;
        stages.push(next);
    }
    let mut f: LabelForest = reduced
        .blocks()
        .iter()
        .map(|b| b.labels(reduced_t1.taxa()).into_iter().map(String::from).collect())
        .collect();
    for (i, s) in trace.steps.iter().enumerate().rev() {
        let (a, b) = &stages[i];
        f = match s.kind {
            StepKind::Subtree => {
                let fresh = &s.replacement[0];
                let mut g = f;
                let blk = g.iter_mut().find(|b| b.contains(fresh)).ok_or(ReduceError::Lift(i))?;
                blk.remove(fresh);
                blk.extend(s.replaced.iter().cloned());
                g
            }
            StepKind::Chain => lift_chain(a, b, &f, s).ok_or(ReduceError::Lift(i))?,
        };
    }
    let blocks = to_blocks(t1, &f).ok_or(ReduceError::Lift(0))?;
    Ok(AgreementForest::new(t1, t2, blocks)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse;
    use crate::oracle::brute_umaf;

    fn pair(a: &str, b: &str) -> (PhyloTree, PhyloTree) {
        (parse(a).unwrap(), parse(b).unwrap())
    }

    #[test]
    fn common_cherry_collapses() {
        let (t1, t2) = pair("((a,b),(c,(d,e)));", "((a,b),(d,(c,e)));");
        let r = subtree_reduce(&t1, &t2).unwrap();
        assert_eq!(r.t1.num_taxa(), 4);
        assert_eq!(r.trace.steps[0].replaced, ["a", "b"]);
        assert_eq!(brute_umaf(&r.t1, &r.t2).unwrap().size, brute_umaf(&t1, &t2).unwrap().size);

        // Lifting puts {a, b} back into the block holding the fresh leaf.
        let f = brute_umaf(&r.t1, &r.t2).unwrap();
        let rf = AgreementForest::new(&r.t1, &r.t2, f.forest).unwrap();
        let lifted = lift_forest(&t1, &t2, &rf, &r.t1, &r.trace).unwrap();
        assert_eq!(lifted.len(), rf.len());
        let ab = t1.taxa().ids(["a", "b"]).unwrap();
        assert!(lifted.blocks().iter().any(|b| ab.taxa().iter().all(|&x| b.contains(x))));
    }

    #[test]
    fn identical_trees_shrink_to_three_leaves() {
        let (t1, t2) = pair("((a,b),((c,d),(e,f)),g);", "((a,b),((c,d),(e,f)),g);");
        let r = reduce(&t1, &t2).unwrap();
        assert_eq!(r.t1.num_taxa(), 3);
        assert_eq!(r.t1.to_canonical_newick(), r.t2.to_canonical_newick());
    }

    #[test]
    fn no_common_cherry_is_unchanged() {
        let (t1, t2) = pair("((a,b),(c,d));", "((a,c),(b,d));");
        let r = reduce(&t1, &t2).unwrap();
        assert!(r.trace.is_empty());
        assert_eq!(r.t1, t1);
    }

    #[test]
    fn long_common_chain_is_truncated() {
        // Caterpillars sharing the ordered chain c..h but with different ends.
        let (t1, t2) = pair(
            "((a,b),(c,(d,(e,(f,(g,(h,(i,j))))))));",
            "((a,i),(c,(d,(e,(f,(g,(h,(b,j))))))));",
        );
        let r = chain_reduce(&t1, &t2).unwrap();
        assert_eq!(r.trace.len(), 1);
        let s = &r.trace.steps[0];
        assert_eq!(s.kind, StepKind::Chain);
        assert_eq!(s.replaced, ["c", "d", "e", "f", "g", "h"]);
        assert_eq!(s.replacement, ["c", "d", "e"]);
        assert_eq!(r.t1.num_taxa(), 7);
    }

    #[test]
    fn chain_of_three_is_kept() {
        let (t1, t2) = pair("((a,b),(c,(d,(e,(f,g)))));", "((a,f),(c,(d,(e,(b,g)))));");
        let r = chain_reduce(&t1, &t2).unwrap();
        assert!(r.trace.is_empty());
    }

    #[test]
    fn trace_text_round_trip() {
        let t = ReductionTrace {
            steps: vec![
                ReductionStep { kind: StepKind::Subtree, replaced: vec!["a".into(), "b".into()], replacement: vec!["_r1".into()] },
                ReductionStep {
                    kind: StepKind::Chain,
                    replaced: ["c", "d", "e", "f"].map(String::from).to_vec(),
                    replacement: ["c", "d", "e"].map(String::from).to_vec(),
                },
            ],
        };
        let text = t.to_string();
        assert_eq!(text.lines().next().unwrap(), "subtree\ta,b\t_r1");
        assert_eq!(text.parse::<ReductionTrace>().unwrap(), t);
        assert!("bogus\ta\tb".parse::<ReductionTrace>().is_err());
    }
}
