//! The pricing DP against subset enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umaf::gen::{generate_pair, GenSpec};
use umaf::oracle::{agreement_blocks, brute_price, brute_wmast};
use umaf::wmast::{evaluate_block, wmast, DualValues, PricingOptions, PricingVariant, WeightAssignment, WmastEngine};
use umaf::phylo::{is_agreement_block, PhyloTree};

fn instance(i: u64, max_t: usize) -> (PhyloTree, PhyloTree) {
    let mut rng = ChaCha8Rng::seed_from_u64(i);
    let t = rng.gen_range(4..=max_t);
    let s = [50, 70, 90][rng.gen_range(0..3)];
    let k = rng.gen_range(0..=4);
    generate_pair(&GenSpec { t, s, k, seed: i }).unwrap()
}

fn random_weights(t1: &PhyloTree, t2: &PhyloTree, rng: &mut ChaCha8Rng) -> WeightAssignment {
    let mut w = WeightAssignment::uniform(t1, t2, 0.0, 0.0);
    for x in &mut w.leaf {
        *x = rng.gen_range(0.0..=2.0);
    }
    for v in t1.internal_vertices() {
        w.internal1[v] = rng.gen_range(-2.0..=0.0);
    }
    for v in t2.internal_vertices() {
        w.internal2[v] = rng.gen_range(-2.0..=0.0);
    }
    w
}

#[test]
fn weighted_value_matches_subset_enumeration() {
    for i in 0..200 {
        let (t1, t2) = instance(i, 10);
        let w = random_weights(&t1, &t2, &mut ChaCha8Rng::seed_from_u64(i + 7_000));
        let dp = wmast(&t1, &t2, &w, PricingVariant::Pinned).unwrap();
        let brute = brute_wmast(&t1, &t2, &w).unwrap();
        assert!((dp.value - brute.value).abs() <= 1e-9, "instance {i}: dp {} brute {}", dp.value, brute.value);
        assert!(is_agreement_block(&t1, &t2, &dp.block));
        assert!((evaluate_block(&t1, &t2, &w, &dp.block).unwrap() - dp.value).abs() <= 1e-9);
    }
}

#[test]
fn unit_weights_give_mast_size() {
    for i in 0..60 {
        let (t1, t2) = instance(500 + i, 10);
        let w = WeightAssignment::uniform(&t1, &t2, 1.0, 0.0);
        let mast = agreement_blocks(&t1, &t2).unwrap().iter().map(|b| b.len()).max().unwrap();
        assert_eq!(wmast(&t1, &t2, &w, PricingVariant::Pinned).unwrap().value, mast as f64);
    }
}

fn random_duals(t1: &PhyloTree, t2: &PhyloTree, eps: f64, rng: &mut ChaCha8Rng) -> DualValues {
    let mut d = DualValues::unit(t1.num_vertices(), t2.num_vertices(), t1.num_taxa());
    d.epsilon = eps;
    for a in &mut d.alpha {
        *a = rng.gen_range(0.0..=2.0);
    }
    // Coarse values so that ties between thresholds actually occur.
    for v in t1.internal_vertices() {
        d.beta1[v] = f64::from(rng.gen_range(0..5)) * 0.25;
    }
    for v in t2.internal_vertices() {
        d.beta2[v] = f64::from(rng.gen_range(0..5)) * 0.25;
    }
    d
}

#[test]
fn perturbed_pricing_matches_enumeration() {
    for (j, eps) in [0.0, 1e-3, 1e-1].into_iter().enumerate() {
        for i in 0..200 {
            let (t1, t2) = instance(1_000 + i, 10);
            let d = random_duals(&t1, &t2, eps, &mut ChaCha8Rng::seed_from_u64(i * 3 + j as u64));
            let engine = WmastEngine::new(&t1, &t2).unwrap();
            let got = engine.price(&d, &[], &PricingOptions::default()).unwrap();
            let want = brute_price(&t1, &t2, &d, &[]).unwrap().unwrap();
            assert!((got[0].score - want.value).abs() <= 1e-9, "eps {eps} instance {i}: {} vs {}", got[0].score, want.value);
            for c in &got {
                assert!(is_agreement_block(&t1, &t2, &c.block));
            }
            assert!(got.windows(2).all(|p| p[0].score >= p[1].score));
        }
    }
}

#[test]
fn forbidden_blocks_are_excluded_exactly() {
    for i in 0..120 {
        let (t1, t2) = instance(2_000 + i, 8);
        let d = random_duals(&t1, &t2, 1e-3, &mut ChaCha8Rng::seed_from_u64(i));
        let engine = WmastEngine::new(&t1, &t2).unwrap();
        let mut forbidden = Vec::new();
        // Forbid the optimum repeatedly and re-check against enumeration.
        for _ in 0..3 {
            let got = engine.price(&d, &forbidden, &PricingOptions::default()).unwrap();
            let want = brute_price(&t1, &t2, &d, &forbidden).unwrap().unwrap();
            assert!((got[0].score - want.value).abs() <= 1e-9, "instance {i}");
            assert!(got.iter().all(|c| !forbidden.contains(&c.block)));
            forbidden.push(got[0].block.clone());
        }
    }
}

#[test]
fn lowering_a_dual_never_lowers_the_optimum() {
    for i in 0..60 {
        let (t1, t2) = instance(3_000 + i, 9);
        let mut d = random_duals(&t1, &t2, 1e-3, &mut ChaCha8Rng::seed_from_u64(i));
        let engine = WmastEngine::new(&t1, &t2).unwrap();
        let before = engine.price(&d, &[], &PricingOptions::default()).unwrap()[0].score;
        let v = t1.internal_vertices().start + (i as usize % (t1.num_taxa() - 2));
        d.beta1[v] = (d.beta1[v] - 0.5).max(0.0);
        let after = engine.price(&d, &[], &PricingOptions::default()).unwrap()[0].score;
        assert!(after >= before - 1e-12);
    }
}
