//! Bottom-up evaluation of the 𝒱/𝒲/ℳ recurrences over pairs of rooted
//! subtrees, plus traceback.
//!
//! Two value families live side by side:
//!
//! * `V(a, b)` is root-pinned: the best rooted agreement subtree whose
//!   embedding in each host reaches the handle root, charging every vertex on
//!   the way down. Gluing `V(a, b)` and `V(rev a, rev b)` across the cut edges
//!   always yields one connected agreement block.
//! * `M(a, b)` is the unpinned rooted optimum, with `P(a, b)` holding the
//!   weight of the path from the handle roots down to the optimum's root.

use crate::phylo::{Block, RootedSubtrees, Taxon};

/// Values below this are treated as "impossible".
pub(crate) const IMPOSSIBLE_FLOOR: f64 = -1e300;

/// DP value: lexicographic (required-taxon hits, weight). `hits` lets the
/// exclusion search demand that certain taxa be present without big-M terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Score {
    pub hits: i32,
    pub value: f64,
}

impl Score {
    pub const IMPOSSIBLE: Score = Score { hits: i32::MIN, value: f64::NEG_INFINITY };
    pub const ZERO: Score = Score { hits: 0, value: 0.0 };

    #[inline]
    pub fn possible(self) -> bool {
        self.value > IMPOSSIBLE_FLOOR
    }

    #[inline]
    pub fn plus(self, o: Score) -> Score {
        if self.possible() && o.possible() {
            Score { hits: self.hits + o.hits, value: self.value + o.value }
        } else {
            Score::IMPOSSIBLE
        }
    }

    #[inline]
    pub fn add(self, w: f64) -> Score {
        if self.possible() && w > IMPOSSIBLE_FLOOR {
            Score { hits: self.hits, value: self.value + w }
        } else {
            Score::IMPOSSIBLE
        }
    }

    /// Strictly better.
    #[inline]
    pub fn beats(self, o: Score) -> bool {
        self.hits > o.hits || (self.hits == o.hits && self.value > o.value)
    }
}

const BASE: u8 = u8::MAX;

/// Inputs of one DP evaluation.
pub(crate) struct DpInput<'w> {
    /// Per taxon.
    pub leaf: &'w [Score],
    /// Per vertex of tree 1 / tree 2; leaf entries are ignored.
    pub internal1: &'w [f64],
    pub internal2: &'w [f64],
}

/// The 𝒱/ℳ tables for every pair of rooted subtrees of the two trees.
#[derive(Debug, Clone)]
pub struct DpTables {
    cols: usize,
    pub(crate) v: Vec<Score>,
    pub(crate) m: Vec<Score>,
    pub(crate) p: Vec<f64>,
    vchoice: Vec<u8>,
    mchoice: Vec<u8>,
    cross: Vec<bool>,
}

impl DpTables {
    #[inline]
    fn at(&self, a: usize, b: usize) -> usize {
        a * self.cols + b
    }

    /// Root-pinned value 𝒱 of handle pair `(a, b)`; `-inf` when no agreement
    /// subtree exists.
    pub fn pinned(&self, a: usize, b: usize) -> f64 {
        self.v[self.at(a, b)].value
    }

    /// Unpinned rooted value ℳ of handle pair `(a, b)`.
    pub fn rooted(&self, a: usize, b: usize) -> f64 {
        self.m[self.at(a, b)].value
    }

    /// Weight of the vertices above the root of the ℳ witness.
    pub fn path_above(&self, a: usize, b: usize) -> f64 {
        self.p[self.at(a, b)]
    }

    pub(crate) fn v_score(&self, a: usize, b: usize) -> Score {
        self.v[self.at(a, b)]
    }

    pub(crate) fn m_score(&self, a: usize, b: usize) -> Score {
        self.m[self.at(a, b)]
    }

    pub(crate) fn compute(h1: &RootedSubtrees, h2: &RootedSubtrees, n: usize, input: &DpInput<'_>) -> DpTables {
        let ps1 = path_sums(h1, n, input.internal1);
        let ps2 = path_sums(h2, n, input.internal2);
        let rows = h1.len();
        let cols = h2.len();
        let size = rows * cols;
        let mut t = DpTables {
            cols,
            v: vec![Score::IMPOSSIBLE; size],
            m: vec![Score::IMPOSSIBLE; size],
            p: vec![0.0; size],
            vchoice: vec![BASE; size],
            mchoice: vec![BASE; size],
            cross: vec![false; size],
        };
        for a in 0..rows {
            let ha = h1.get(a);
            let wa = input.internal1[ha.root];
            for b in 0..cols {
                let hb = h2.get(b);
                let idx = a * cols + b;
                match (ha.children, hb.children) {
                    (None, None) => {
                        if ha.root == hb.root {
                            let s = input.leaf[ha.root];
                            t.v[idx] = s;
                            t.m[idx] = s;
                        }
                    }
                    (None, Some(_)) => {
                        let x = ha.root;
                        let ps = ps2[b * n + x];
                        if !ps.is_nan() {
                            t.v[idx] = input.leaf[x].add(ps);
                            t.m[idx] = input.leaf[x];
                            t.p[idx] = ps;
                        }
                    }
                    (Some(_), None) => {
                        let x = hb.root;
                        let ps = ps1[a * n + x];
                        if !ps.is_nan() {
                            t.v[idx] = input.leaf[x].add(ps);
                            t.m[idx] = input.leaf[x];
                            t.p[idx] = ps;
                        }
                    }
                    (Some((a1, a2)), Some((b1, b2))) => {
                        let wb = input.internal2[hb.root];
                        let straight = t.v[a1 * cols + b1].plus(t.v[a2 * cols + b2]);
                        let crossed = t.v[a1 * cols + b2].plus(t.v[a2 * cols + b1]);
                        let (w, cross) = if crossed.beats(straight) { (crossed, true) } else { (straight, false) };
                        t.cross[idx] = cross;
                        let both = w.add(wa).add(wb);

                        let v_opts = [
                            both,
                            t.v[a1 * cols + b].add(wa),
                            t.v[a2 * cols + b].add(wa),
                            t.v[a * cols + b1].add(wb),
                            t.v[a * cols + b2].add(wb),
                        ];
                        let (vc, vs) = argmax(&v_opts);
                        t.v[idx] = vs;
                        t.vchoice[idx] = vc;

                        let m_opts = [
                            both,
                            t.m[a * cols + b1],
                            t.m[a * cols + b2],
                            t.m[a1 * cols + b],
                            t.m[a2 * cols + b],
                        ];
                        let (mc, ms) = argmax(&m_opts);
                        t.m[idx] = ms;
                        t.mchoice[idx] = mc;
                        t.p[idx] = match mc {
                            0 => 0.0,
                            1 => t.p[a * cols + b1] + wb,
                            2 => t.p[a * cols + b2] + wb,
                            3 => t.p[a1 * cols + b] + wa,
                            _ => t.p[a2 * cols + b] + wa,
                        };
                    }
                }
            }
        }
        t
    }

    /// Leaves of the pinned witness of `(a, b)`.
    pub(crate) fn trace_pinned(&self, h1: &RootedSubtrees, h2: &RootedSubtrees, a: usize, b: usize, out: &mut Vec<Taxon>) {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let idx = self.at(a, b);
            let (ha, hb) = (h1.get(a), h2.get(b));
            match self.vchoice[idx] {
                BASE => out.push(if ha.is_singleton() { ha.root } else { hb.root }),
                0 => self.push_pairing(h1, h2, a, b, &mut stack),
                1 => stack.push((ha.children.unwrap().0, b)),
                2 => stack.push((ha.children.unwrap().1, b)),
                3 => stack.push((a, hb.children.unwrap().0)),
                _ => stack.push((a, hb.children.unwrap().1)),
            }
        }
    }

    /// Leaves of the unpinned rooted witness of `(a, b)`.
    pub(crate) fn trace_rooted(&self, h1: &RootedSubtrees, h2: &RootedSubtrees, a: usize, b: usize, out: &mut Vec<Taxon>) {
        let (mut a, mut b) = (a, b);
        loop {
            let idx = self.at(a, b);
            let (ha, hb) = (h1.get(a), h2.get(b));
            match self.mchoice[idx] {
                BASE => {
                    out.push(if ha.is_singleton() { ha.root } else { hb.root });
                    return;
                }
                0 => {
                    let mut stack = Vec::new();
                    self.push_pairing(h1, h2, a, b, &mut stack);
                    for (x, y) in stack {
                        self.trace_pinned(h1, h2, x, y, out);
                    }
                    return;
                }
                1 => b = hb.children.unwrap().0,
                2 => b = hb.children.unwrap().1,
                3 => a = ha.children.unwrap().0,
                _ => a = ha.children.unwrap().1,
            }
        }
    }

    fn push_pairing(&self, h1: &RootedSubtrees, h2: &RootedSubtrees, a: usize, b: usize, stack: &mut Vec<(usize, usize)>) {
        let (a1, a2) = h1.get(a).children.unwrap();
        let (b1, b2) = h2.get(b).children.unwrap();
        if self.cross[self.at(a, b)] {
            stack.push((a1, b2));
            stack.push((a2, b1));
        } else {
            stack.push((a1, b1));
            stack.push((a2, b2));
        }
    }
}

/// First maximal option wins ties.
#[inline]
fn argmax(opts: &[Score; 5]) -> (u8, Score) {
    let mut best = (0u8, opts[0]);
    for (i, &s) in opts.iter().enumerate().skip(1) {
        if s.beats(best.1) {
            best = (i as u8, s);
        }
    }
    best
}

/// `ps[h * n + x]`: weight of the internal vertices from the root of `h`
/// down to leaf `x` (exclusive), `NaN` when `x` is not below `h`.
fn path_sums(h: &RootedSubtrees, n: usize, internal: &[f64]) -> Vec<f64> {
    let mut ps = vec![f64::NAN; h.len() * n];
    for (i, handle) in h.iter().enumerate() {
        match handle.children {
            None => ps[i * n + handle.root] = 0.0,
            Some((c1, c2)) => {
                let w = internal[handle.root];
                for c in [c1, c2] {
                    for &x in &h.get(c).leaves {
                        ps[i * n + x] = w + ps[c * n + x];
                    }
                }
            }
        }
    }
    ps
}

/// Unique sorted block from traced leaves.
pub(crate) fn block_of(mut leaves: Vec<Taxon>) -> Block {
    leaves.sort_unstable();
    Block::new(leaves)
}
