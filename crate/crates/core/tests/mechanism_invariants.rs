use dpdm::mechanisms::{outcome_for_winner, rec_aggregates, run_auction_in_market, sample_winner, winner_payment};
use dpdm::verification::generators::{random_digraph_instance, random_tree_instance};
use dpdm::verification::rec_closed_form_oracle;
use dpdm::{BuyerId, GammaSequence, GlobalProfile, Market, Mechanism, ScoreConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const V_MAX: f64 = 100.0;

fn reports(seed: u64, buyers: usize, digraph: bool) -> GlobalProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if digraph {
        random_digraph_instance(buyers, buyers / 2, V_MAX, &mut rng)
    } else {
        random_tree_instance(buyers, V_MAX, &mut rng)
    }
}

fn lay(a: f64) -> Mechanism {
    Mechanism::Lay(GammaSequence::geometric(a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rec_sums_to_one(seed in any::<u64>(), buyers in 1usize..120, digraph in any::<bool>(), eps in 0.0f64..0.5) {
        let p = reports(seed, buyers, digraph);
        let cfg = ScoreConfig::new(eps, V_MAX).unwrap();
        let d = Mechanism::Rec.distribution(&Market::from_reports(&p).unwrap(), &cfg).unwrap();
        prop_assert!((d.sale_probability() - 1.0).abs() <= 1e-9);
        prop_assert!(d.prob.values().all(|&x| x >= 0.0));
    }

    #[test]
    fn rec_residuals_are_nonnegative(seed in any::<u64>(), buyers in 1usize..80, eps in 0.0f64..0.5) {
        let p = reports(seed, buyers, true);
        let cfg = ScoreConfig::new(eps, V_MAX).unwrap();
        let market = Market::from_reports(&p).unwrap();
        for (id, agg) in rec_aggregates(&market, &cfg).unwrap() {
            if !id.is_seller() {
                prop_assert!(agg.prob <= agg.subtree_prob * (1.0 + 1e-12), "{id}");
            }
        }
    }

    #[test]
    fn rec_matches_the_ancestor_product(seed in any::<u64>(), buyers in 1usize..40, eps in 0.0f64..1.0) {
        let p = reports(seed, buyers, true);
        let cfg = ScoreConfig::new(eps, V_MAX).unwrap();
        let market = Market::from_reports(&p).unwrap();
        let d = Mechanism::Rec.distribution(&market, &cfg).unwrap();
        for (&id, &pr) in &d.prob {
            let want = rec_closed_form_oracle(market.tree(), &p, &cfg, id);
            prop_assert!((pr - want).abs() <= 1e-9, "{id}: {pr} vs {want}");
        }
    }

    #[test]
    fn rec_only_child_takes_its_subtree(vals in prop::collection::vec(0.0f64..V_MAX, 2..12), eps in 0.0f64..0.5) {
        // seller -> 1 -> 2 -> ... : a chain, so every buyer is an only child.
        let n = vals.len() as u32;
        let mut p = GlobalProfile::new([BuyerId(1)]);
        for (k, &v) in vals.iter().enumerate() {
            let id = k as u32 + 1;
            p = p.with_buyer(id, v, if id < n { vec![id + 1] } else { vec![] });
        }
        let cfg = ScoreConfig::new(eps, V_MAX).unwrap();
        let d = Mechanism::Rec.distribution(&Market::from_reports(&p).unwrap(), &cfg).unwrap();
        prop_assert_eq!(d.probability(BuyerId(1)), 1.0);
        for id in 2..=n {
            prop_assert_eq!(d.probability(BuyerId(id)), 0.0);
        }
    }

    #[test]
    fn lay_is_a_softmax_per_layer(seed in any::<u64>(), buyers in 1usize..120, a in 1.1f64..4.0, eps in 0.0f64..0.5) {
        let p = reports(seed, buyers, seed % 2 == 0);
        let cfg = ScoreConfig::new(eps, V_MAX).unwrap();
        let gamma = GammaSequence::geometric(a).unwrap();
        let market = Market::from_reports(&p).unwrap();
        let d = lay(a).distribution(&market, &cfg).unwrap();
        let tree = market.tree();
        let mass: f64 = (1..=tree.d_max()).map(|l| gamma.gamma(l)).sum();
        prop_assert!((d.sale_probability() - mass).abs() <= 1e-9);
        prop_assert!((d.total() - 1.0).abs() <= 1e-9);
        for (k, layer) in tree.layers().iter().enumerate() {
            let top = layer.iter().map(|&i| market.valuation(i).unwrap()).fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = layer.iter().map(|&i| (eps * (market.valuation(i).unwrap() - top)).exp()).sum();
            for &i in layer {
                let want = gamma.gamma(k as u32 + 1) * (eps * (market.valuation(i).unwrap() - top)).exp() / z;
                prop_assert!((d.probability(i) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn payments_lie_between_zero_and_value(seed in any::<u64>(), buyers in 1usize..25, eps in 0.001f64..0.3, pick in any::<prop::sample::Index>()) {
        let p = reports(seed, buyers, true);
        let cfg = ScoreConfig::new(eps, V_MAX).unwrap();
        let market = Market::from_reports(&p).unwrap();
        let ids: Vec<BuyerId> = market.tree().reachable().collect();
        let w = ids[pick.index(ids.len())];
        let v = market.valuation(w).unwrap();
        for mech in [Mechanism::Rec, lay(2.0), Mechanism::Emd, Mechanism::Emwd] {
            let d = mech.distribution(&market, &cfg).unwrap();
            if d.probability(w) > 0.0 {
                let pay = outcome_for_winner(&mech, &market, &cfg, Some(w)).unwrap().payment;
                prop_assert!(pay >= -1e-9 && pay <= v + 1e-9, "{} {w}: {pay} vs {v}", mech.tag());
            }
        }
        let idm = run_auction_in_market(&Mechanism::Idm, &market, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        if let Some(w) = idm.winner {
            prop_assert!(idm.payment >= 0.0 && idm.payment <= market.valuation(w).unwrap());
        }
    }

    #[test]
    fn zero_epsilon_payments_vanish(seed in any::<u64>(), buyers in 1usize..25) {
        let p = reports(seed, buyers, true);
        let cfg = ScoreConfig::new(0.0, V_MAX).unwrap();
        let market = Market::from_reports(&p).unwrap();
        for mech in [Mechanism::Rec, lay(2.0), Mechanism::Emd, Mechanism::Emwd] {
            let d = mech.distribution(&market, &cfg).unwrap();
            for (&w, &pr) in &d.prob {
                if pr > 0.0 {
                    prop_assert_eq!(winner_payment(&mech, &market, &cfg, w).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(seed in any::<u64>(), draw in any::<u64>(), buyers in 1usize..50) {
        let p = reports(seed, buyers, true);
        let cfg = ScoreConfig::new(0.1, V_MAX).unwrap();
        let d = lay(2.0).distribution(&Market::from_reports(&p).unwrap(), &cfg).unwrap();
        let a: Vec<_> = { let mut r = ChaCha8Rng::seed_from_u64(draw); (0..20).map(|_| sample_winner(&d, &mut r)).collect() };
        let b: Vec<_> = { let mut r = ChaCha8Rng::seed_from_u64(draw); (0..20).map(|_| sample_winner(&d, &mut r)).collect() };
        prop_assert_eq!(a, b);
    }
}
