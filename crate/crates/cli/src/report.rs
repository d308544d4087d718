use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use umaf::oracle::OracleForest;
use umaf::{AgreementForest, PhyloTree, SolveOutcome, SolverConfig};

/// Machine-readable result of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveReport {
    pub maf_size: usize,
    pub blocks: Vec<Vec<String>>,
    pub columns_generated: usize,
    pub branch_nodes: usize,
    pub lp_time_ms: u64,
    pub pricing_time_ms: u64,
    pub total_time_ms: u64,
    pub optimal: bool,
    pub epsilon: f64,
    pub strategy: String,
    pub seed: Option<u64>,
    pub reduced: bool,
    pub method: String,
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

fn block_labels(t: &PhyloTree, forest: &AgreementForest) -> Vec<Vec<String>> {
    forest
        .blocks()
        .iter()
        .map(|b| b.labels(t.taxa()).into_iter().map(String::from).collect())
        .collect()
}

impl SolveReport {
    /// `forest` must already be over the taxa of `t1`; `total` overrides the
    /// solver's own clock so reduction and lifting are included.
    pub fn from_solve(t1: &PhyloTree, forest: &AgreementForest, out: &SolveOutcome, cfg: &SolverConfig, reduced: bool, total: Duration) -> Self {
        SolveReport {
            maf_size: forest.len(),
            blocks: block_labels(t1, forest),
            columns_generated: out.stats.columns_generated,
            branch_nodes: out.stats.branch_nodes,
            lp_time_ms: ms(out.stats.lp_time),
            pricing_time_ms: ms(out.stats.pricing_time),
            total_time_ms: ms(total),
            optimal: out.optimal,
            epsilon: cfg.epsilon,
            strategy: cfg.strategy.to_string(),
            seed: None,
            reduced,
            method: "branch-and-price".into(),
        }
    }

    pub fn from_oracle(t1: &PhyloTree, f: &OracleForest, total: Duration) -> Self {
        SolveReport {
            maf_size: f.size,
            blocks: f.forest.iter().map(|b| b.labels(t1.taxa()).into_iter().map(String::from).collect()).collect(),
            columns_generated: 0,
            branch_nodes: 0,
            lp_time_ms: 0,
            pricing_time_ms: 0,
            total_time_ms: ms(total),
            optimal: true,
            epsilon: 0.0,
            strategy: "none".into(),
            seed: None,
            reduced: false,
            method: "brute-force".into(),
        }
    }

    /// Clears every wall-clock field, for byte-comparable output.
    pub fn zero_times(&mut self) {
        self.lp_time_ms = 0;
        self.pricing_time_ms = 0;
        self.total_time_ms = 0;
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.optimal { "optimal" } else { "time limit reached, not proven optimal" };
        writeln!(f, "uMAF size:      {} ({status})", self.maf_size)?;
        writeln!(f, "TBR distance:   {}", self.maf_size.saturating_sub(1))?;
        writeln!(f, "method:         {}", self.method)?;
        if self.method != "brute-force" {
            writeln!(f, "strategy:       {} (epsilon {})", self.strategy, self.epsilon)?;
            writeln!(f, "reduced:        {}", self.reduced)?;
            writeln!(f, "columns:        {}", self.columns_generated)?;
            writeln!(f, "branch nodes:   {}", self.branch_nodes)?;
            writeln!(f, "time (ms):      {} total, {} LP, {} pricing", self.total_time_ms, self.lp_time_ms, self.pricing_time_ms)?;
        }
        writeln!(f, "blocks:")?;
        for b in &self.blocks {
            writeln!(f, "  {{{}}}", b.join(", "))?;
        }
        Ok(())
    }
}

/// One `bench` output line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRecord {
    pub id: usize,
    pub t: usize,
    pub s: u32,
    pub k: usize,
    #[serde(flatten)]
    pub report: SolveReport,
}
