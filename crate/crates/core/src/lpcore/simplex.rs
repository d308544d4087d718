use super::{Basis, BasisVar, LinearProgram, LpError, LpSolution, LpSolver, LpStatus, Relation, FEAS_TOL};

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Consecutive degenerate pivots before switching to the smallest-index rule.
    pub degenerate_limit: usize,
    /// Pivots between fresh basis inversions.
    pub refactor_every: usize,
    /// Hard cap on pivots; `None` derives one from the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { degenerate_limit: 50, refactor_every: 64, max_iterations: None }
    }
}

/// Bounded-variable revised simplex on a dense explicit basis inverse.
///
/// Phase one minimizes the sum of bound violations of the basic variables,
/// starting from either a slack basis or a crashed warm-start basis. Pricing
/// is Dantzig's rule; after `degenerate_limit` consecutive degenerate pivots
/// the smallest-index rule takes over until progress resumes.
#[derive(Debug, Clone, Default)]
pub struct DenseSimplex {
    pub options: SimplexOptions,
}

impl LpSolver for DenseSimplex {
    fn solve(&mut self, lp: &LinearProgram, warm_start: Option<&Basis>) -> Result<LpSolution, LpError> {
        let mut st = State::new(lp, &self.options);
        st.initialize(warm_start)?;
        st.run()
    }
}

struct State<'a> {
    lp: &'a LinearProgram,
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(lp: &'a LinearProgram, opts: &'a SimplexOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_columns();
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for c in lp.columns() {
            lower.push(c.lower);
            upper.push(c.upper);
            cost.push(c.cost);
        }
        for r in lp.rows() {
            let (l, u) = match r.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
            cost.push(0.0);
        }
        let x = (0..n + m)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();
        State {
            lp,
            opts,
            m,
            n,
            lower,
            upper,
            cost,
            x,
            basis: Vec::new(),
            is_basic: vec![false; n + m],
            binv: Vec::new(),
        }
    }

    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(r, a) in &self.lp.columns()[j].coeffs {
                f(r, a);
            }
        } else {
            f(j - self.n, 1.0);
        }
    }

    fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        self.for_each_entry(j, |r, a| v[r] += a);
        v
    }

    fn initialize(&mut self, warm: Option<&Basis>) -> Result<(), LpError> {
        let mut candidates = Vec::new();
        if let Some(b) = warm {
            for &j in &b.at_upper {
                if j < self.n && self.upper[j].is_finite() {
                    self.x[j] = self.upper[j];
                }
            }
            for bv in &b.basic {
                let j = match *bv {
                    BasisVar::Column(j) if j < self.n => j,
                    BasisVar::Slack(i) if i < self.m => self.n + i,
                    _ => continue,
                };
                if !candidates.contains(&j) {
                    candidates.push(j);
                }
            }
        }
        candidates.extend(self.n..self.n + self.m);
        self.basis = self.crash(&candidates);
        for &j in &self.basis {
            self.is_basic[j] = true;
        }
        self.refactor()
    }

    /// Greedily picks linearly independent columns in candidate order.
    fn crash(&self, candidates: &[usize]) -> Vec<usize> {
        let mut chosen = Vec::with_capacity(self.m);
        let mut pivots: Vec<(usize, Vec<f64>)> = Vec::with_capacity(self.m);
        let mut row_used = vec![false; self.m];
        for &j in candidates {
            if chosen.len() == self.m {
                break;
            }
            let mut v = self.dense_column(j);
            for (r, p) in &pivots {
                let f = v[*r] / p[*r];
                if f != 0.0 {
                    for (vk, pk) in v.iter_mut().zip(p) {
                        *vk -= f * pk;
                    }
                }
            }
            let best = (0..self.m)
                .filter(|&k| !row_used[k])
                .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
            if let Some(k) = best {
                if v[k].abs() > 1e-7 {
                    row_used[k] = true;
                    pivots.push((k, v));
                    chosen.push(j);
                }
            }
        }
        chosen
    }

    /// Inverts the basis from scratch and recomputes basic values.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.for_each_entry(j, |r, v| a[r * m + k] += v);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))
                .unwrap();
            if a[p * m + c].abs() < 1e-11 {
                return Err(LpError::Singular);
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        // `inv` now maps row space to basis positions.
        self.binv = inv;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut resid: Vec<f64> = self.lp.rows().iter().map(|r| r.rhs).collect();
        for j in 0..self.n + self.m {
            if !self.is_basic[j] && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_each_entry(j, |r, a| resid[r] -= a * xj);
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v = row.iter().zip(&resid).map(|(b, r)| b * r).sum();
            self.x[self.basis[i]] = v;
        }
    }

    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cj: f64, y: &[f64]) -> f64 {
        let mut d = cj;
        self.for_each_entry(j, |r, a| d -= y[r] * a);
        d
    }

    fn max_iterations(&self) -> usize {
        self.opts.max_iterations.unwrap_or(20_000 + 50 * (self.n + self.m))
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        let m = self.m;
        let nt = self.n + self.m;
        let mut iterations = 0;
        let mut since_refactor = 0;
        let mut degenerate_run = 0;
        let mut bland = false;
        let mut final_checks = 0;

        let status = loop {
            if since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                since_refactor = 0;
            }
            let infeasible: Vec<f64> = self
                .basis
                .iter()
                .map(|&j| {
                    if self.x[j] < self.lower[j] - FEAS_TOL {
                        -1.0
                    } else if self.x[j] > self.upper[j] + FEAS_TOL {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let phase_one = infeasible.iter().any(|&c| c != 0.0);
            let cb: Vec<f64> = if phase_one {
                infeasible
            } else {
                self.basis.iter().map(|&j| self.cost[j]).collect()
            };
            let y = self.duals(&cb);

            // Entering variable.
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..nt {
                if self.is_basic[j] || self.lower[j] == self.upper[j] {
                    continue;
                }
                let cj = if phase_one { 0.0 } else { self.cost[j] };
                let d = self.reduced_cost(j, cj, &y);
                let at_lower = self.lower[j].is_finite() && self.x[j] == self.lower[j];
                let at_upper = self.upper[j].is_finite() && self.x[j] == self.upper[j];
                let dir = if at_lower && d < -FEAS_TOL {
                    1.0
                } else if at_upper && d > FEAS_TOL {
                    -1.0
                } else if !at_lower && !at_upper && d.abs() > FEAS_TOL {
                    -d.signum()
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir, d.abs()));
                    break;
                }
                if entering.is_none_or(|(_, _, s)| d.abs() > s) {
                    entering = Some((j, dir, d.abs()));
                }
            }
            let Some((j, dir, _)) = entering else {
                if phase_one {
                    break LpStatus::Infeasible;
                }
                // Clean up drift before declaring optimality.
                if since_refactor > 0 && final_checks < 3 {
                    final_checks += 1;
                    self.refactor()?;
                    since_refactor = 0;
                    continue;
                }
                break LpStatus::Optimal;
            };

            iterations += 1;
            if iterations > self.max_iterations() {
                return Err(LpError::IterationLimit(self.max_iterations()));
            }

            let col = self.dense_column(j);
            let mut alpha = vec![0.0; m];
            for (i, ai) in alpha.iter_mut().enumerate() {
                let row = &self.binv[i * m..(i + 1) * m];
                *ai = row.iter().zip(&col).map(|(b, c)| b * c).sum();
            }

            // Ratio test. `None` leaving means a bound flip of the entering variable.
            let mut theta = self.upper[j] - self.lower[j];
            if !theta.is_finite() {
                theta = f64::INFINITY;
            }
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_key = (0.0f64, usize::MAX);
            for i in 0..m {
                let a = alpha[i];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let bj = self.basis[i];
                let xb = self.x[bj];
                let (lo, hi) = if phase_one && xb < self.lower[bj] - FEAS_TOL {
                    (f64::NEG_INFINITY, self.lower[bj])
                } else if phase_one && xb > self.upper[bj] + FEAS_TOL {
                    (self.upper[bj], f64::INFINITY)
                } else {
                    (self.lower[bj], self.upper[bj])
                };
                let rate = -dir * a;
                let (t, bound) = if rate > 0.0 {
                    ((hi - xb) / rate, hi)
                } else {
                    ((lo - xb) / rate, lo)
                };
                if !t.is_finite() {
                    continue;
                }
                let t = t.max(0.0);
                let better = if t < theta - DEGENERATE_STEP {
                    true
                } else if t <= theta + DEGENERATE_STEP && leave.is_some() {
                    if bland {
                        bj < leave_key.1
                    } else {
                        a.abs() > leave_key.0
                    }
                } else {
                    false
                };
                if better {
                    theta = t;
                    leave = Some((i, bound));
                    leave_key = (a.abs(), bj);
                }
            }
            if theta == f64::INFINITY {
                if phase_one {
                    return Err(LpError::Singular);
                }
                break LpStatus::Unbounded;
            }

            if theta <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run > self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            self.x[j] += dir * theta;
            for i in 0..m {
                let bj = self.basis[i];
                self.x[bj] -= dir * theta * alpha[i];
            }
            match leave {
                None => {
                    self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
                }
                Some((r, bound)) => {
                    let out = self.basis[r];
                    self.x[out] = bound;
                    self.is_basic[out] = false;
                    self.is_basic[j] = true;
                    self.basis[r] = j;
                    let piv = alpha[r];
                    let (head, rest) = self.binv.split_at_mut(r * m);
                    let (row_r, tail) = rest.split_at_mut(m);
                    row_r.iter_mut().for_each(|v| *v /= piv);
                    for (i, row) in head.chunks_mut(m).chain(tail.chunks_mut(m)).enumerate() {
                        let ai = if i < r { alpha[i] } else { alpha[i + 1] };
                        if ai != 0.0 {
                            for (v, rv) in row.iter_mut().zip(row_r.iter()) {
                                *v -= ai * rv;
                            }
                        }
                    }
                    since_refactor += 1;
                }
            }
        };

        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        let dual = self.duals(&cb);
        let reduced_costs = (0..self.n).map(|j| self.reduced_cost(j, self.cost[j], &dual)).collect();
        let primal: Vec<f64> = self.x[..self.n].to_vec();
        let objective = primal.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        let basis = Basis {
            basic: self
                .basis
                .iter()
                .map(|&j| if j < self.n { BasisVar::Column(j) } else { BasisVar::Slack(j - self.n) })
                .collect(),
            at_upper: (0..self.n)
                .filter(|&j| {
                    !self.is_basic[j]
                        && self.upper[j].is_finite()
                        && self.x[j] == self.upper[j]
                        && self.lower[j] != self.upper[j]
                })
                .collect(),
        };
        Ok(LpSolution { status, objective, primal, dual, reduced_costs, basis, iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_cover_row() {
        let mut lp = LinearProgram::new();
        let r = lp.add_row(Relation::Ge, 1.0);
        lp.add_column(1.0, vec![(r, 1.0)], 0.0, INF).unwrap();
        lp.add_column(1.0, vec![(r, 1.0)], 0.0, INF).unwrap();
        let sol = solve(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.dual[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_row_kkt() {
        // min 2x + 3y + z  s.t. x + y + z = 4, x - y >= 1, 0 <= z <= 1
        let mut lp = LinearProgram::new();
        let r0 = lp.add_row(Relation::Eq, 4.0);
        let r1 = lp.add_row(Relation::Ge, 1.0);
        lp.add_column(2.0, vec![(r0, 1.0), (r1, 1.0)], 0.0, INF).unwrap();
        lp.add_column(3.0, vec![(r0, 1.0), (r1, -1.0)], 0.0, INF).unwrap();
        lp.add_column(1.0, vec![(r0, 1.0)], 0.0, 1.0).unwrap();
        let sol = solve(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // x = 3, z = 1: objective 7.
        assert!((sol.objective - 7.0).abs() < 1e-9, "{sol:?}");
        // Complementary slackness on the slack row x - y >= 1 (activity 3).
        assert!(sol.dual[1].abs() < 1e-9);
        assert!((sol.dual[0] - 2.0).abs() < 1e-9);
        // z sits at its upper bound with negative reduced cost.
        assert!(sol.reduced_costs[2] < 0.0);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let r = lp.add_row(Relation::Ge, 2.0);
        lp.add_column(1.0, vec![(r, 1.0)], 0.0, 1.0).unwrap();
        assert_eq!(solve(&lp, None).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new();
        let r = lp.add_row(Relation::Ge, 1.0);
        lp.add_column(-1.0, vec![(r, 1.0)], 0.0, INF).unwrap();
        assert_eq!(solve(&lp, None).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_and_warm_start() {
        // min x + y, x free, x + y >= 1, x - y <= 3, y in [0, 5]
        let mut lp = LinearProgram::new();
        let r0 = lp.add_row(Relation::Ge, 1.0);
        let r1 = lp.add_row(Relation::Le, 3.0);
        lp.add_column(1.0, vec![(r0, 1.0), (r1, 1.0)], -INF, INF).unwrap();
        lp.add_column(1.0, vec![(r0, 1.0), (r1, -1.0)], 0.0, 5.0).unwrap();
        let cold = solve(&lp, None).unwrap();
        assert!((cold.objective - 1.0).abs() < 1e-9);
        let warm = solve(&lp, Some(&cold.basis)).unwrap();
        assert_eq!(warm.iterations, 0);
        assert!((warm.objective - 1.0).abs() < 1e-9);

        // Grow the LP and reuse the old basis.
        let r2 = lp.add_row(Relation::Ge, 0.5);
        lp.add_column(0.1, vec![(r2, 1.0), (r0, 1.0)], 0.0, INF).unwrap();
        let grown = solve(&lp, Some(&cold.basis)).unwrap();
        let fresh = solve(&lp, None).unwrap();
        assert!((grown.objective - fresh.objective).abs() < 1e-9);
    }

    #[test]
    fn deterministic_duals() {
        let mut lp = LinearProgram::new();
        for _ in 0..3 {
            lp.add_row(Relation::Ge, 1.0);
        }
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            lp.add_column(1.0, vec![(a, 1.0), (b, 1.0)], 0.0, INF).unwrap();
        }
        let s1 = solve(&lp, None).unwrap();
        let s2 = solve(&lp, None).unwrap();
        assert_eq!(s1, s2);
        assert!((s1.objective - 1.5).abs() < 1e-9);
    }
}
