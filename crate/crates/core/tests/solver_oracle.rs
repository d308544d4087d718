//! Branch-and-price against partition enumeration.

use umaf::bnp::{solve, SolverConfig};
use umaf::gen::{generate_pair, GenSpec};
use umaf::oracle::{agreement_blocks, brute_umaf};
use umaf::wmast::WmastEngine;
use umaf::{BranchStrategy, PricingVariant};

fn spec(i: u64) -> GenSpec {
    GenSpec { t: 4 + (i % 5) as usize, s: if i.is_multiple_of(2) { 50 } else { 90 }, k: (i / 2 % 5) as usize, seed: i }
}

#[test]
fn solver_size_matches_oracle() {
    for i in 0..120 {
        let (t1, t2) = generate_pair(&spec(i)).unwrap();
        let want = brute_umaf(&t1, &t2).unwrap().size;
        for strategy in [BranchStrategy::Ratio, BranchStrategy::Size] {
            let cfg = SolverConfig { strategy, ..SolverConfig::default() };
            let out = solve(&t1, &t2, &cfg).unwrap();
            assert!(out.optimal);
            assert_eq!(out.forest.len(), want, "instance {i} {:?}", spec(i));
        }
    }
}

#[test]
fn perturbation_does_not_change_the_optimum() {
    for i in 200..260 {
        let (t1, t2) = generate_pair(&spec(i)).unwrap();
        let a = solve(&t1, &t2, &SolverConfig { epsilon: 0.0, ..SolverConfig::default() }).unwrap();
        let b = solve(&t1, &t2, &SolverConfig::default()).unwrap();
        assert_eq!(a.forest.len(), b.forest.len());
    }
}

#[test]
fn converged_root_duals_certify_the_lp() {
    for i in 300..360 {
        let (t1, t2) = generate_pair(&spec(i)).unwrap();
        let cfg = SolverConfig { early_stop: false, ..SolverConfig::default() };
        let out = solve(&t1, &t2, &cfg).unwrap();
        let mut duals = out.root_duals.expect("root converged");
        let engine = WmastEngine::new(&t1, &t2).unwrap();
        for eps in [0.0, 1e-3] {
            duals.epsilon = eps;
            for b in agreement_blocks(&t1, &t2).unwrap() {
                let s = engine.score_block(&duals, &b).unwrap().score;
                assert!(s <= 1.0 + 1e-6, "instance {i}: block {b} scores {s}");
            }
        }
        assert!(out.stats.root_lp_value <= out.forest.len() as f64 + 1e-6);
    }
}

#[test]
fn literal_variant_forests_are_valid_upper_bounds() {
    // The literal two-sided combine can miss violated blocks, so the forest may be
    // suboptimal, but it is always a validated agreement forest.
    for i in 400..440 {
        let (t1, t2) = generate_pair(&spec(i)).unwrap();
        let want = brute_umaf(&t1, &t2).unwrap().size;
        let cfg = SolverConfig { variant: PricingVariant::Paper, ..SolverConfig::default() };
        let out = solve(&t1, &t2, &cfg).unwrap();
        assert!(out.forest.len() >= want);
    }
}
