//! Simplex against brute-force vertex enumeration on small random LPs, plus
//! KKT and strong-duality certificates on every optimal solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umaf::lpcore::{solve, LinearProgram, LpStatus, Relation};

/// Row-major dense form: `a x (rel) b`, `lo <= x <= hi`.
struct Dense {
    a: Vec<Vec<f64>>,
    rel: Vec<Relation>,
    b: Vec<f64>,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn random_lp(rng: &mut ChaCha8Rng) -> (LinearProgram, Dense) {
    let nv = rng.gen_range(1..=6);
    let nr = rng.gen_range(1..=5);
    let mut d = Dense { a: vec![vec![0.0; nv]; nr], rel: Vec::new(), b: Vec::new(), c: Vec::new(), lo: Vec::new(), hi: Vec::new() };
    let mut lp = LinearProgram::new();
    for i in 0..nr {
        let kinds = if rng.gen_bool(0.15) { 3 } else { 2 };
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..kinds)];
        let rhs = rng.gen_range(-3i32..=6) as f64;
        lp.add_row(rel, rhs);
        d.rel.push(rel);
        d.b.push(rhs);
        for j in 0..nv {
            if rng.gen_bool(0.7) {
                d.a[i][j] = rng.gen_range(-3i32..=4) as f64;
            }
        }
    }
    for j in 0..nv {
        // Finite boxes keep every LP bounded, so an optimum is a vertex.
        let lo = rng.gen_range(-2i32..=0) as f64;
        let hi = lo + rng.gen_range(1i32..=5) as f64;
        let cost = rng.gen_range(-4i32..=4) as f64;
        let coeffs = (0..nr).filter(|&i| d.a[i][j] != 0.0).map(|i| (i, d.a[i][j])).collect();
        lp.add_column(cost, coeffs, lo, hi).unwrap();
        d.c.push(cost);
        d.lo.push(lo);
        d.hi.push(hi);
    }
    (lp, d)
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn gauss(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[p][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, p);
        r.swap(col, p);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    Some((0..n).map(|i| r[i] / m[i][i]).collect())
}

fn feasible(d: &Dense, x: &[f64]) -> bool {
    let tol = 1e-7;
    let box_ok = x.iter().enumerate().all(|(j, &v)| v >= d.lo[j] - tol && v <= d.hi[j] + tol);
    box_ok
        && d.a.iter().zip(&d.rel).zip(&d.b).all(|((row, rel), &b)| {
            let act: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            match rel {
                Relation::Le => act <= b + tol,
                Relation::Ge => act >= b - tol,
                Relation::Eq => (act - b).abs() <= tol,
            }
        })
}

/// Minimum over all basic points: every choice of `nv` tight constraints
/// among rows and bounds.
fn brute_force(d: &Dense) -> Option<f64> {
    let nv = d.c.len();
    let mut tight: Vec<(Vec<f64>, f64)> = d.a.iter().cloned().zip(d.b.iter().copied()).collect();
    for j in 0..nv {
        let mut e = vec![0.0; nv];
        e[j] = 1.0;
        tight.push((e.clone(), d.lo[j]));
        tight.push((e, d.hi[j]));
    }
    let mut best: Option<f64> = None;
    let mut pick = Vec::new();
    choose(&tight, nv, 0, &mut pick, &mut |rows| {
        let m = rows.iter().map(|&i| tight[i].0.clone()).collect();
        let r = rows.iter().map(|&i| tight[i].1).collect();
        if let Some(x) = gauss(m, r) {
            if feasible(d, &x) {
                let obj: f64 = d.c.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.is_none_or(|b| obj < b) {
                    best = Some(obj);
                }
            }
        }
    });
    best
}

fn choose(all: &[(Vec<f64>, f64)], k: usize, from: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in from..all.len() {
        pick.push(i);
        choose(all, k, i + 1, pick, f);
        pick.pop();
    }
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..400 {
        let (lp, d) = random_lp(&mut rng);
        let sol = solve(&lp, None).unwrap();
        match brute_force(&d) {
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
                infeasible += 1;
            }
            Some(want) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!((sol.objective - want).abs() < 1e-6, "case {case}: {} vs {want}", sol.objective);
                certify(&d, &sol.primal, &sol.dual, sol.objective);
                optimal += 1;
            }
        }
    }
    assert!(optimal >= 150 && infeasible >= 20, "{optimal} optimal, {infeasible} infeasible");
}

/// Primal feasibility, dual sign feasibility, complementary slackness and a
/// zero duality gap, all recomputed from the raw data.
fn certify(d: &Dense, x: &[f64], y: &[f64], obj: f64) {
    assert!(feasible(d, x));
    let nv = d.c.len();
    for (i, rel) in d.rel.iter().enumerate() {
        let act: f64 = d.a[i].iter().zip(x).map(|(a, v)| a * v).sum();
        match rel {
            Relation::Ge => assert!(y[i] >= -1e-7),
            Relation::Le => assert!(y[i] <= 1e-7),
            Relation::Eq => {}
        }
        assert!((y[i] * (act - d.b[i])).abs() <= 1e-6, "row {i} slackness");
    }
    // Reduced costs decide which bound each column's dual term pays.
    let mut dual_obj: f64 = d.b.iter().zip(y).map(|(b, y)| b * y).sum();
    for j in 0..nv {
        let rc = d.c[j] - (0..d.rel.len()).map(|i| d.a[i][j] * y[i]).sum::<f64>();
        if rc > 1e-7 {
            assert!((x[j] - d.lo[j]).abs() <= 1e-6, "column {j} should sit at its lower bound");
        } else if rc < -1e-7 {
            assert!((x[j] - d.hi[j]).abs() <= 1e-6, "column {j} should sit at its upper bound");
        }
        dual_obj += if rc > 0.0 { rc * d.lo[j] } else { rc * d.hi[j] };
    }
    assert!((obj - dual_obj).abs() <= 1e-6, "duality gap {obj} vs {dual_obj}");
}

#[test]
fn nonnegative_cover_lps_close_with_plain_row_duals() {
    // With x >= 0 and no upper bounds, c'x = b'y exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let nv = rng.gen_range(2..=6);
        let nr = rng.gen_range(1..=4);
        let mut lp = LinearProgram::new();
        let b: Vec<f64> = (0..nr).map(|_| rng.gen_range(1i32..=3) as f64).collect();
        for &r in &b {
            lp.add_row(Relation::Ge, r);
        }
        for _ in 0..nv {
            let coeffs = (0..nr).filter(|_| rng.gen_bool(0.6)).map(|i| (i, 1.0)).collect();
            lp.add_column(rng.gen_range(1i32..=5) as f64, coeffs, 0.0, f64::INFINITY).unwrap();
        }
        let sol = solve(&lp, None).unwrap();
        if sol.status != LpStatus::Optimal {
            assert_eq!(sol.status, LpStatus::Infeasible);
            continue;
        }
        let by: f64 = b.iter().zip(&sol.dual).map(|(b, y)| b * y).sum();
        assert!(sol.objective - by <= 1e-6 && by - sol.objective <= 1e-6);
    }
}
