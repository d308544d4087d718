//! Dense linear-programming kernel with exact row duals.
//!
//! Problems are always minimizations. Row duals follow the usual sign
//! convention: `≥` rows have non-negative duals, `≤` rows non-positive ones.

mod simplex;

use std::fmt::Write as _;

use thiserror::Error;

pub use simplex::{DenseSimplex, SimplexOptions};

/// Primal feasibility and reduced-cost optimality tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance for deciding whether an LP value is integral.
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpColumn {
    pub cost: f64,
    pub coeffs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LpError {
    #[error("column references row {row}, but the LP has {rows} rows")]
    BadRow { row: usize, rows: usize },
    #[error("column {col} has lower bound {lower} above upper bound {upper}")]
    BadBounds { col: usize, lower: f64, upper: f64 },
    #[error("basis matrix became singular")]
    Singular,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A basic variable: structural column or row slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisVar {
    Column(usize),
    Slack(usize),
}

/// Simplex basis usable as a warm start for a structurally related LP.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Basis {
    pub basic: Vec<BasisVar>,
    /// Nonbasic structural columns resting at their upper bound.
    pub at_upper: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

/// Minimization LP over bounded columns and relational rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    rows: Vec<LpRow>,
    columns: Vec<LpColumn>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_row(&mut self, relation: Relation, rhs: f64) -> usize {
        self.rows.push(LpRow { relation, rhs });
        self.rows.len() - 1
    }

    pub fn add_column(&mut self, cost: f64, coeffs: Vec<(usize, f64)>, lower: f64, upper: f64) -> Result<usize, LpError> {
        let col = self.columns.len();
        if let Some(&(row, _)) = coeffs.iter().find(|(r, _)| *r >= self.rows.len()) {
            return Err(LpError::BadRow { row, rows: self.rows.len() });
        }
        if lower > upper {
            return Err(LpError::BadBounds { col, lower, upper });
        }
        self.columns.push(LpColumn { cost, coeffs, lower, upper });
        Ok(col)
    }

    pub fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.rows[row].rhs = rhs;
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if lower > upper {
            return Err(LpError::BadBounds { col, lower, upper });
        }
        let c = &mut self.columns[col];
        c.lower = lower;
        c.upper = upper;
        Ok(())
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn columns(&self) -> &[LpColumn] {
        &self.columns
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for (c, &xv) in self.columns.iter().zip(x) {
            for &(r, a) in &c.coeffs {
                act[r] += a * xv;
            }
        }
        act
    }

    /// Dump in the CPLEX LP text format, for cross-checking with external tools.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::from("\\ umaf restricted master\nMinimize\n obj:");
        let term = |s: &mut String, a: f64, name: String, first: bool| {
            let sign = if a < 0.0 { "-" } else if first { "" } else { "+" };
            let _ = write!(s, " {sign} {} {name}", a.abs());
        };
        let mut first = true;
        for (j, c) in self.columns.iter().enumerate() {
            if c.cost != 0.0 {
                term(&mut s, c.cost, format!("x{j}"), first);
                first = false;
            }
        }
        if first {
            s.push_str(" 0 x0");
        }
        s.push_str("\nSubject To\n");
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.rows.len()];
        for (j, c) in self.columns.iter().enumerate() {
            for &(r, a) in &c.coeffs {
                by_row[r].push((j, a));
            }
        }
        for (i, (row, terms)) in self.rows.iter().zip(&by_row).enumerate() {
            let _ = write!(s, " r{i}:");
            if terms.is_empty() {
                s.push_str(" 0 x0");
            }
            for (k, &(j, a)) in terms.iter().enumerate() {
                term(&mut s, a, format!("x{j}"), k == 0);
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(s, " {rel} {}", row.rhs);
        }
        s.push_str("Bounds\n");
        for (j, c) in self.columns.iter().enumerate() {
            match (c.lower.is_finite(), c.upper.is_finite()) {
                (false, false) => {
                    let _ = writeln!(s, " x{j} free");
                }
                (true, true) => {
                    let _ = writeln!(s, " {} <= x{j} <= {}", c.lower, c.upper);
                }
                (true, false) => {
                    let _ = writeln!(s, " x{j} >= {}", c.lower);
                }
                (false, true) => {
                    let _ = writeln!(s, " -inf <= x{j} <= {}", c.upper);
                }
            }
        }
        s.push_str("End\n");
        s
    }
}

/// The solve contract consumed by the branch-and-price driver.
pub trait LpSolver {
    fn solve(&mut self, lp: &LinearProgram, warm_start: Option<&Basis>) -> Result<LpSolution, LpError>;
}

/// Solves with the built-in dense simplex and default options.
pub fn solve(lp: &LinearProgram, warm_start: Option<&Basis>) -> Result<LpSolution, LpError> {
    DenseSimplex::default().solve(lp, warm_start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_validates_rows_and_bounds() {
        let mut lp = LinearProgram::new();
        let r = lp.add_row(Relation::Ge, 1.0);
        assert!(lp.add_column(1.0, vec![(r, 1.0)], 0.0, f64::INFINITY).is_ok());
        assert_eq!(
            lp.add_column(1.0, vec![(3, 1.0)], 0.0, 1.0),
            Err(LpError::BadRow { row: 3, rows: 1 })
        );
        assert!(matches!(lp.add_column(1.0, vec![], 2.0, 1.0), Err(LpError::BadBounds { .. })));
    }

    #[test]
    fn lp_format_dump() {
        let mut lp = LinearProgram::new();
        let r = lp.add_row(Relation::Ge, 1.0);
        lp.add_column(1.0, vec![(r, 1.0)], f64::NEG_INFINITY, f64::INFINITY).unwrap();
        lp.add_column(2.0, vec![(r, -1.0)], 0.0, 1.0).unwrap();
        let text = lp.to_lp_format();
        assert!(text.contains("Minimize\n obj:  1 x0 + 2 x1"));
        assert!(text.contains(" r0:  1 x0 - 1 x1 >= 1"));
        assert!(text.contains(" x0 free"));
        assert!(text.contains(" 0 <= x1 <= 1"));
        assert!(text.ends_with("End\n"));
    }
}
