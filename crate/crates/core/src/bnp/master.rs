use std::collections::HashMap;

use crate::lpcore::{Basis, LinearProgram, LpError, LpSolution, LpSolver, Relation, INT_TOL};
use crate::phylo::{Block, PhyloTree, Vertex};
use crate::wmast::{Candidate, DualValues};

/// A generated agreement-block column `a_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub block: Block,
    pub internal1: Vec<Vertex>,
    pub internal2: Vec<Vertex>,
    /// LP column index of `a_Y`.
    pub var: usize,
}

impl Column {
    /// Internal vertices over both trees.
    pub fn num_internal(&self) -> usize {
        self.internal1.len() + self.internal2.len()
    }
}

/// The restricted master LP.
///
/// Rows: one `≥ 1` cover row per taxon, one `≤ 1` packing row per internal
/// vertex of each tree, and one `≤ ε` row per generated column. Columns: a
/// free `b_x` per taxon encoding the singleton `{x}`, then for every generated
/// block its `a_Y` and one `c_{v,Y}` per embedding vertex.
///
/// `c_{v,Y}` enters packing row `v` with coefficient −1, letting column `Y`
/// overlap others by at most ε in total. This is the primal whose dual carries
/// `m_Y ≥ β_v`; with ε = 0 it is exactly the unperturbed relaxation.
#[derive(Debug, Clone)]
pub struct RestrictedMaster {
    lp: LinearProgram,
    n: usize,
    epsilon: f64,
    pack1: Vec<Option<usize>>,
    pack2: Vec<Option<usize>>,
    columns: Vec<Column>,
    eps_rows: Vec<usize>,
    index: HashMap<Block, usize>,
    basis: Option<Basis>,
}

impl RestrictedMaster {
    pub fn new(t1: &PhyloTree, t2: &PhyloTree, epsilon: f64) -> Self {
        let n = t1.num_taxa();
        let mut lp = LinearProgram::new();
        for _ in 0..n {
            lp.add_row(Relation::Ge, 1.0);
        }
        let mut packing = |t: &PhyloTree| {
            let mut rows = vec![None; t.num_vertices()];
            for v in t.internal_vertices() {
                rows[v] = Some(lp.add_row(Relation::Le, 1.0));
            }
            rows
        };
        let pack1 = packing(t1);
        let pack2 = packing(t2);
        for x in 0..n {
            lp.add_column(1.0, vec![(x, 1.0)], f64::NEG_INFINITY, f64::INFINITY)
                .expect("cover row exists");
        }
        RestrictedMaster { lp, n, epsilon, pack1, pack2, columns: Vec::new(), eps_rows: Vec::new(), index: HashMap::new(), basis: None }
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn num_taxa(&self) -> usize {
        self.n
    }

    pub fn contains(&self, block: &Block) -> bool {
        self.index.contains_key(block)
    }

    pub fn column_of(&self, block: &Block) -> Option<usize> {
        self.index.get(block).copied()
    }

    /// Adds `a_Y` for a nonsingleton candidate; returns its column index.
    pub fn add_column(&mut self, c: &Candidate) -> Result<usize, LpError> {
        debug_assert!(c.block.len() >= 2 && !self.contains(&c.block));
        let eps_row = self.lp.add_row(Relation::Le, self.epsilon);
        let packs: Vec<usize> = c
            .internal1
            .iter()
            .map(|&v| self.pack1[v].expect("internal vertex"))
            .chain(c.internal2.iter().map(|&v| self.pack2[v].expect("internal vertex")))
            .collect();
        let mut coeffs: Vec<(usize, f64)> = c.block.taxa().iter().map(|&x| (x, 1.0)).collect();
        coeffs.extend(packs.iter().map(|&r| (r, 1.0)));
        let var = self.lp.add_column(1.0, coeffs, 0.0, f64::INFINITY)?;
        for r in packs {
            self.lp.add_column(0.0, vec![(r, -1.0), (eps_row, 1.0)], 0.0, f64::INFINITY)?;
        }
        self.eps_rows.push(eps_row);
        let id = self.columns.len();
        self.columns.push(Column {
            block: c.block.clone(),
            internal1: c.internal1.clone(),
            internal2: c.internal2.clone(),
            var,
        });
        self.index.insert(c.block.clone(), id);
        Ok(id)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Sets the right-hand side of every ε-row.
    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
        for &r in &self.eps_rows {
            self.lp.set_rhs(r, epsilon);
        }
    }

    /// Resets every `a_Y` to `[0, ∞)`, then fixes `one` to `≥ 1` and `zero`
    /// to `0`.
    pub fn apply_fixings(&mut self, one: &[usize], zero: &[usize]) {
        for c in &self.columns {
            self.lp.set_bounds(c.var, 0.0, f64::INFINITY).expect("valid bounds");
        }
        for &i in one {
            self.lp.set_bounds(self.columns[i].var, 1.0, f64::INFINITY).expect("valid bounds");
        }
        for &i in zero {
            self.lp.set_bounds(self.columns[i].var, 0.0, 0.0).expect("valid bounds");
        }
    }

    pub fn solve(&mut self, solver: &mut dyn LpSolver) -> Result<LpSolution, LpError> {
        let sol = solver.solve(&self.lp, self.basis.as_ref())?;
        self.basis = Some(sol.basis.clone());
        Ok(sol)
    }

    /// Pricing duals from an optimal solution: `α` from cover rows, `β = −y`
    /// from packing rows (clamped at 0).
    pub fn duals(&self, sol: &LpSolution, epsilon: f64) -> DualValues {
        let alpha = sol.dual[..self.n].to_vec();
        let beta = |rows: &[Option<usize>]| -> Vec<f64> {
            rows.iter().map(|r| r.map_or(0.0, |r| (-sol.dual[r]).max(0.0))).collect()
        };
        DualValues { alpha, beta1: beta(&self.pack1), beta2: beta(&self.pack2), epsilon }
    }

    /// Value of `b_x`.
    pub fn singleton_value(&self, sol: &LpSolution, x: usize) -> f64 {
        sol.primal[x]
    }

    pub fn column_value(&self, sol: &LpSolution, i: usize) -> f64 {
        sol.primal[self.columns[i].var]
    }

    pub fn is_integral(&self, sol: &LpSolution) -> bool {
        let near = |v: f64| v.abs() <= INT_TOL || (v - 1.0).abs() <= INT_TOL;
        (0..self.n).all(|x| near(self.singleton_value(sol, x)))
            && (0..self.columns.len()).all(|i| near(self.column_value(sol, i)))
    }

    /// Blocks at value 1 in an integral solution.
    pub fn selected_blocks(&self, sol: &LpSolution) -> Vec<Block> {
        let mut out: Vec<Block> = (0..self.columns.len())
            .filter(|&i| self.column_value(sol, i) > 0.5)
            .map(|i| self.columns[i].block.clone())
            .collect();
        out.extend((0..self.n).filter(|&x| self.singleton_value(sol, x) > 0.5).map(Block::singleton));
        out
    }
}
