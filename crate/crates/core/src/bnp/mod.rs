//! Branch-and-price for the unrooted maximum agreement forest.
//!
//! The restricted master starts from the singleton encodings only; column
//! generation prices agreement blocks with the WMAST engine until no block
//! has positive reduced cost, first on the ε-perturbed master and then once
//! more with ε = 0 so that the final LP value is a valid lower bound. Nodes
//! are explored depth-first, fixing a fractional column to 1 before
//! forbidding it.

mod forest;
mod master;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lpcore::{DenseSimplex, LpError, LpSolution, LpSolver, LpStatus, INT_TOL};
use crate::phylo::{Block, PhyloTree};
use crate::wmast::{Candidate, PricingOptions, PricingVariant, WmastEngine, WmastError};

pub use crate::wmast::DualValues;
pub use forest::{AgreementForest, ForestError};
pub use master::{Column, RestrictedMaster};

/// Violation threshold for adding a column.
const ADD_TOL: f64 = 1e-6;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BnpError {
    #[error("trees are over different taxon sets")]
    TaxonMismatch,
    #[error("need at least 3 taxa, got {0}")]
    TooFewTaxa(usize),
    #[error("no fractional column to branch on")]
    NoFractionalColumn,
    #[error("restricted master became infeasible at the root")]
    RootInfeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Pricing(#[from] WmastError),
    #[error("extracted forest is invalid: {0}")]
    Forest(#[from] ForestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchStrategy {
    /// Largest leaf set.
    Size,
    /// Largest leaf count per internal vertex over both trees.
    #[default]
    Ratio,
}

impl std::str::FromStr for BranchStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "size" => Ok(BranchStrategy::Size),
            "ratio" => Ok(BranchStrategy::Ratio),
            _ => Err(format!("unknown strategy {s:?} (expected size|ratio)")),
        }
    }
}

impl std::fmt::Display for BranchStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BranchStrategy::Size => "size",
            BranchStrategy::Ratio => "ratio",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub strategy: BranchStrategy,
    pub epsilon: f64,
    /// `None` runs to completion.
    pub time_limit: Option<Duration>,
    pub variant: PricingVariant,
    /// Columns added per pricing round at most.
    pub max_columns_per_round: usize,
    /// Stop column generation at a node once the Lagrangian bound proves the
    /// incumbent optimal there. Disable to always converge the LP fully.
    pub early_stop: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            strategy: BranchStrategy::Ratio,
            epsilon: 1e-3,
            time_limit: Some(Duration::from_secs(300)),
            variant: PricingVariant::Pinned,
            max_columns_per_round: 10,
            early_stop: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Block columns added, not counting the singleton encodings.
    pub columns_generated: usize,
    /// Child nodes created by branching.
    pub branch_nodes: usize,
    pub nodes_explored: usize,
    pub pricing_rounds: usize,
    pub lp_iterations: usize,
    pub root_lp_value: f64,
    pub lp_time: Duration,
    pub pricing_time: Duration,
    pub total_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub forest: AgreementForest,
    pub stats: SolveStats,
    /// False when the time limit stopped the search early.
    pub optimal: bool,
    /// Duals of the converged (unperturbed) root LP; `None` when the root
    /// was closed early by its bound.
    pub root_duals: Option<DualValues>,
}

/// A search-tree node: columns fixed to one and columns forbidden.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BnpNode {
    pub fixed_one: Vec<usize>,
    pub forbidden: Vec<usize>,
    /// LP bound of the parent.
    pub bound: f64,
    pub depth: usize,
}

/// Splits `node` on column `col`: `(childOne, childZero)`.
pub fn branch(node: &BnpNode, col: usize, lp_value: f64) -> (BnpNode, BnpNode) {
    let mut one = node.clone();
    one.fixed_one.push(col);
    one.bound = lp_value;
    one.depth += 1;
    let mut zero = node.clone();
    zero.forbidden.push(col);
    zero.bound = lp_value;
    zero.depth += 1;
    (one, zero)
}

/// Index of the fractional column maximizing the strategy's criterion; ties
/// go to the smallest block.
pub fn select_branch_column(columns: &[Column], values: &[f64], strategy: BranchStrategy) -> Result<usize, BnpError> {
    let score = |c: &Column| match strategy {
        BranchStrategy::Size => c.block.len() as f64,
        BranchStrategy::Ratio => c.block.len() as f64 / c.num_internal().max(1) as f64,
    };
    let mut best: Option<usize> = None;
    for (i, c) in columns.iter().enumerate() {
        let v = values[i];
        if v <= INT_TOL || v >= 1.0 - INT_TOL {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (s, sb) = (score(c), score(&columns[b]));
                s > sb || (s == sb && c.block < columns[b].block)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best.ok_or(BnpError::NoFractionalColumn)
}

/// Greedily keeps violating candidates whose embeddings are vertex-disjoint
/// from those already kept.
fn pick_disjoint<'c>(cands: &'c [Candidate], master: &RestrictedMaster, nv1: usize, nv2: usize, limit: usize) -> Vec<&'c Candidate> {
    let mut used1 = vec![false; nv1];
    let mut used2 = vec![false; nv2];
    let mut out = Vec::new();
    for c in cands {
        if out.len() >= limit {
            break;
        }
        if c.score <= 1.0 + ADD_TOL || c.block.len() < 2 || master.contains(&c.block) {
            continue;
        }
        if c.internal1.iter().any(|&v| used1[v]) || c.internal2.iter().any(|&v| used2[v]) {
            continue;
        }
        for &v in &c.internal1 {
            used1[v] = true;
        }
        for &v in &c.internal2 {
            used2[v] = true;
        }
        out.push(c);
    }
    out
}

/// Solves with the built-in LP kernel.
pub fn solve(t1: &PhyloTree, t2: &PhyloTree, config: &SolverConfig) -> Result<SolveOutcome, BnpError> {
    solve_with(t1, t2, config, &mut DenseSimplex::default())
}

struct Driver<'a, 't> {
    t1: &'t PhyloTree,
    t2: &'t PhyloTree,
    config: &'a SolverConfig,
    engine: WmastEngine<'t>,
    master: RestrictedMaster,
    lp: &'a mut dyn LpSolver,
    stats: SolveStats,
    start: Instant,
}

enum NodeResult {
    Infeasible,
    Solved(LpSolution),
    /// The bound met the incumbent before convergence.
    Closed,
    TimedOut,
}

/// Lower bound on the node optimum from any dual solution: scaling the duals
/// by the largest unperturbed block score makes them dual feasible.
fn lagrangian_bound(d: &DualValues, max_score: f64) -> f64 {
    let sum: f64 = d.alpha.iter().sum::<f64>() - d.beta1.iter().sum::<f64>() - d.beta2.iter().sum::<f64>();
    sum / max_score.max(1.0)
}

impl Driver<'_, '_> {
    fn timed_out(&self) -> bool {
        self.config.time_limit.is_some_and(|l| self.start.elapsed() >= l)
    }

    fn solve_lp(&mut self) -> Result<LpSolution, BnpError> {
        let t = Instant::now();
        let sol = self.master.solve(self.lp)?;
        self.stats.lp_time += t.elapsed();
        self.stats.lp_iterations += sol.iterations;
        Ok(sol)
    }

    /// Column generation to convergence at `node`: perturbed first, then
    /// exact.
    fn converge(&mut self, node: &BnpNode, incumbent: &mut AgreementForest) -> Result<NodeResult, BnpError> {
        self.master.apply_fixings(&node.fixed_one, &node.forbidden);
        let forbidden: Vec<Block> = node.forbidden.iter().map(|&i| self.master.columns()[i].block.clone()).collect();
        let mut epsilon = self.config.epsilon;
        self.master.set_epsilon(epsilon);
        let opts = PricingOptions {
            max_candidates: self.config.max_columns_per_round.max(1),
            variant: self.config.variant,
            min_score: Some(1.0 + ADD_TOL),
        };
        loop {
            if self.timed_out() {
                return Ok(NodeResult::TimedOut);
            }
            let sol = self.solve_lp()?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(NodeResult::Infeasible),
                LpStatus::Unbounded => unreachable!("objective is bounded below by the cover rows"),
            }
            if self.master.is_integral(&sol) && sol.objective.round() < incumbent.len() as f64 {
                *incumbent = AgreementForest::new(self.t1, self.t2, self.master.selected_blocks(&sol))?;
            }
            let duals = self.master.duals(&sol, epsilon);
            let t = Instant::now();
            let cands = self.engine.price(&duals, &forbidden, &opts)?;
            self.stats.pricing_time += t.elapsed();
            self.stats.pricing_rounds += 1;
            if self.config.early_stop && node.fixed_one.is_empty() {
                let beta_max = duals.beta1.iter().chain(&duals.beta2).fold(0.0f64, |m, &b| m.max(b));
                let max_score = cands.first().map_or(1.0 + ADD_TOL, |c| c.score + epsilon * beta_max);
                if (lagrangian_bound(&duals, max_score) - 1e-6).ceil() >= incumbent.len() as f64 {
                    return Ok(NodeResult::Closed);
                }
            }
            let picked = pick_disjoint(
                &cands,
                &self.master,
                self.t1.num_vertices(),
                self.t2.num_vertices(),
                self.config.max_columns_per_round,
            );
            if picked.is_empty() {
                if epsilon > 0.0 {
                    epsilon = 0.0;
                    self.master.set_epsilon(0.0);
                    continue;
                }
                return Ok(NodeResult::Solved(sol));
            }
            for c in picked {
                self.master.add_column(c)?;
                self.stats.columns_generated += 1;
            }
        }
    }
}

/// Solves with a caller-provided LP backend.
pub fn solve_with(t1: &PhyloTree, t2: &PhyloTree, config: &SolverConfig, lp: &mut dyn LpSolver) -> Result<SolveOutcome, BnpError> {
    let start = Instant::now();
    if !t1.same_taxa(t2) {
        return Err(BnpError::TaxonMismatch);
    }
    if t1.num_taxa() < 3 {
        return Err(BnpError::TooFewTaxa(t1.num_taxa()));
    }
    let mut d = Driver {
        t1,
        t2,
        config,
        engine: WmastEngine::new(t1, t2)?,
        master: RestrictedMaster::new(t1, t2, config.epsilon),
        lp,
        stats: SolveStats::default(),
        start,
    };
    let mut incumbent = AgreementForest::singletons(t1, t2)?;
    let mut root_duals = None;
    let mut optimal = true;
    let mut stack = vec![BnpNode::default()];
    while let Some(node) = stack.pop() {
        let sol = match d.converge(&node, &mut incumbent)? {
            NodeResult::Solved(sol) => sol,
            NodeResult::Closed => {
                d.stats.nodes_explored += 1;
                continue;
            }
            NodeResult::Infeasible if node.depth == 0 => return Err(BnpError::RootInfeasible),
            NodeResult::Infeasible => continue,
            NodeResult::TimedOut => {
                optimal = false;
                break;
            }
        };
        d.stats.nodes_explored += 1;
        let value = sol.objective;
        debug_assert!(value >= node.bound - 1e-6, "LP bound decreased along a branch");
        if node.depth == 0 {
            d.stats.root_lp_value = value;
            root_duals = Some(d.master.duals(&sol, 0.0));
        }
        if (value - 1e-6).ceil() >= incumbent.len() as f64 {
            continue;
        }
        if d.master.is_integral(&sol) {
            incumbent = AgreementForest::new(t1, t2, d.master.selected_blocks(&sol))?;
            continue;
        }
        let values: Vec<f64> = (0..d.master.columns().len()).map(|i| d.master.column_value(&sol, i)).collect();
        let col = select_branch_column(d.master.columns(), &values, config.strategy)?;
        let (one, zero) = branch(&node, col, value);
        d.stats.branch_nodes += 2;
        stack.push(zero);
        stack.push(one);
    }
    d.stats.total_time = start.elapsed();
    Ok(SolveOutcome { forest: incumbent, stats: d.stats, optimal, root_duals })
}
