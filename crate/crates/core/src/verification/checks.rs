//! Property checks on one instance at a time.

use std::collections::BTreeSet;

use crate::error::MechanismError;
use crate::graph::{BuyerId, CriticalTree, GlobalProfile};
use crate::instance::Instance;
use crate::mechanisms::{
    expected_social_welfare, GammaSequence, Market, Mechanism, ProbabilityCurve, NORMALIZATION_TOL,
};
use crate::quadrature::QuadratureOptions;
use crate::scoring::ScoreConfig;

use super::{
    NeighborPair, PropertyReport, DP_TOL, IR_TOL, MONOTONICITY_SLACK, NEIGHBOR_IC_TOL,
    NEIGHBOR_SUBSET_LIMIT, ORACLE_TOL, PAYMENT_IDENTITY_TOL, RIEMANN_PANELS, VALUATION_IC_TOL,
    WELFARE_TOL,
};

/// Fixed-step midpoint rule.
pub(crate) fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

fn instance(mech: &Mechanism, profiles: &GlobalProfile, cfg: &ScoreConfig) -> Instance {
    Instance::new(profiles.clone(), cfg).with_mechanism(mech)
}

/// Sale mass a mechanism must hand out on a tree.
pub(crate) fn expected_sale_mass(mech: &Mechanism, tree: &CriticalTree) -> f64 {
    if tree.is_empty() {
        return 0.0;
    }
    match mech {
        Mechanism::Lay(g) => 1.0 - g.remainder_after(tree.d_max()),
        _ => 1.0,
    }
}

/// `Σ prob + no_sale = 1`, and the sale mass is what the rule allots
/// (all of it, or `Σ_{ℓ ≤ d_max} γ_ℓ` for the layered rule).
pub fn check_normalization(
    mech: &Mechanism,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let d = mech.distribution(&market, cfg)?;
    let mut r = PropertyReport::new(format!("normalization/{}", mech.tag()), NORMALIZATION_TOL);
    let sale = expected_sale_mass(mech, market.tree());
    let negative = d.prob.values().chain([&d.no_sale]).fold(0.0f64, |m, &p| m.max(-p));
    let violation = (d.total() - 1.0)
        .abs()
        .max((d.sale_probability() - sale).abs())
        .max(negative);
    r.record(violation, || instance(mech, profiles, cfg));
    Ok(r)
}

/// `Pr_i(x)` is non-decreasing along `grid`, all other reports fixed.
pub fn check_valuation_monotonicity(
    mech: &Mechanism,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    i: BuyerId,
    grid: &[f64],
) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let mut r = PropertyReport::new(format!("monotonicity/{}", mech.tag()), MONOTONICITY_SLACK);
    let mut prev: Option<f64> = None;
    for &x in grid {
        let p = mech.distribution(&market.with_valuation(i, x)?, cfg)?.probability(i);
        if let Some(q) = prev {
            r.record(q - p, || {
                instance(mech, profiles, cfg)
                    .with_buyer(i)
                    .with_note(format!("Pr drops from {q} to {p} at x = {x}"))
            });
        }
        prev = Some(p);
    }
    Ok(r)
}

/// `|p_i·Pr_i − (v_i·Pr_i − ∫₀^{v_i} Pr_i)|` with the integral from a
/// 10⁴-panel midpoint rule over full recomputations of the distribution.
pub fn check_payment_identity(
    mech: &Mechanism,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    i: BuyerId,
) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let v = market.valuation(i).ok_or(MechanismError::Unreachable(i))?;
    let mut r = PropertyReport::new(format!("payment-identity/{}", mech.tag()), PAYMENT_IDENTITY_TOL);
    let oracle = ProbabilityCurve::generic(mech, &market, cfg, i)?;
    let pv = oracle.eval(v);
    let p = crate::mechanisms::winner_payment(mech, &market, cfg, i)?;
    let rhs = v * pv - riemann(|x| oracle.eval(x), 0.0, v, RIEMANN_PANELS);
    r.record((p * pv - rhs).abs(), || instance(mech, profiles, cfg).with_buyer(i));
    Ok(r)
}

/// Every buyer's expected utility `∫₀^{v_i} Pr_i` and realized utility as
/// winner `v_i − p_i` are non-negative.
pub fn check_ir(
    mech: &Mechanism,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let d = mech.distribution(&market, cfg)?;
    let mut r = PropertyReport::new(format!("ir/{}", mech.tag()), IR_TOL);
    let opts = QuadratureOptions::default();
    for (&id, &p) in &d.prob {
        let v = market.valuation(id).unwrap_or(0.0);
        let curve = ProbabilityCurve::new(mech, &market, cfg, id)?;
        let eu = curve.integral(v, &opts).value;
        let realized = if p > 0.0 { v - curve.payment(v, &opts)? } else { 0.0 };
        r.record((-eu).max(-realized), || instance(mech, profiles, cfg).with_buyer(id));
    }
    Ok(r)
}

/// Direct grid check of valuation IC: reporting `v'` never beats the truth.
pub fn check_valuation_ic(
    mech: &Mechanism,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    i: BuyerId,
    grid: &[f64],
) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let v = market.valuation(i).ok_or(MechanismError::Unreachable(i))?;
    let mut r = PropertyReport::new(format!("valuation-ic/{}", mech.tag()), VALUATION_IC_TOL);
    let curve = ProbabilityCurve::new(mech, &market, cfg, i)?;
    let opts = QuadratureOptions::default();
    // E[u | report x] = v·Pr(x) − E[p](x) = (v − x)·Pr(x) + ∫₀^x Pr.
    let utility = |x: f64| (v - x) * curve.eval(x) + curve.integral(x, &opts).value;
    let truthful = utility(v);
    for &x in grid {
        r.record(utility(x) - truthful, || {
            instance(mech, profiles, cfg)
                .with_buyer(i)
                .with_note(format!("misreport {x}"))
        });
    }
    Ok(r)
}

/// Hiding any subset of one's neighbors never raises the winning
/// probability under REC (and the other rules, for which this may fail);
/// under LAY it leaves the probability unchanged whenever the buyer's own
/// depth is unchanged.
pub fn check_neighbor_ic(
    mech: &Mechanism,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    i: BuyerId,
) -> Result<PropertyReport, MechanismError> {
    let mut r = PropertyReport::new(format!("neighbor-ic/{}", mech.tag()), NEIGHBOR_IC_TOL);
    let neighbors: Vec<BuyerId> = profiles
        .profiles
        .get(&i)
        .ok_or(MechanismError::Unreachable(i))?
        .neighbors
        .iter()
        .copied()
        .collect();
    if neighbors.len() > NEIGHBOR_SUBSET_LIMIT {
        r.refuse(format!(
            "instance too large: {} neighbors, limit {NEIGHBOR_SUBSET_LIMIT}",
            neighbors.len()
        ));
        return Ok(r);
    }
    let market = Market::from_reports(profiles)?;
    let full = mech.distribution(&market, cfg)?.probability(i);
    let depth = market.tree().depth(i);
    for mask in 0..(1u32 << neighbors.len()) - 1 {
        let kept: BTreeSet<BuyerId> = neighbors
            .iter()
            .enumerate()
            .filter(|&(k, _)| mask & (1 << k) != 0)
            .map(|(_, &n)| n)
            .collect();
        let deviated = profiles.with_neighbors(i, kept);
        let dev_market = Market::from_reports(&deviated)?;
        let p = mech.distribution(&dev_market, cfg)?.probability(i);
        let violation = match mech {
            Mechanism::Lay(_) if dev_market.tree().depth(i) == depth => (p - full).abs(),
            Mechanism::Lay(_) => continue,
            _ => p - full,
        };
        r.record(violation, || {
            instance(mech, profiles, cfg)
                .with_buyer(i)
                .with_deviated(deviated.clone())
                .with_note(format!("Pr_i {full} under the full report, {p} after hiding"))
        });
    }
    Ok(r)
}

/// Per-outcome probability ratios between the two profiles of `pair`
/// stay below `exp(ε·d_max·δ)` for REC and `exp(ε·δ)` otherwise. The
/// no-sale outcome is included.
pub fn check_dp_bound(
    mech: &Mechanism,
    pair: &NeighborPair,
    cfg: &ScoreConfig,
) -> Result<PropertyReport, MechanismError> {
    let a = Market::from_reports(&pair.base)?;
    let b = Market::from_reports(&pair.deviated)?;
    let mut r = PropertyReport::new(format!("dp/{}", mech.tag()), DP_TOL);
    if a.tree() != b.tree() {
        r.refuse("profiles induce different critical trees");
        return Ok(r);
    }
    let bound = dp_ratio_bound(mech, cfg, a.tree().d_max(), pair.delta_score);
    let da = mech.distribution(&a, cfg)?;
    let db = mech.distribution(&b, cfg)?;
    let outcomes = da
        .prob
        .iter()
        .map(|(&id, &p)| (Some(id), p, db.probability(id)))
        .chain([(None, da.no_sale, db.no_sale)]);
    for (o, p, q) in outcomes {
        r.record(ratio(p, q) - bound, || {
            Instance::new(pair.base.clone(), cfg)
                .with_mechanism(mech)
                .with_buyer(pair.deviator)
                .with_deviated(pair.deviated.clone())
                .with_note(match o {
                    Some(id) => format!("outcome {id}: {p} vs {q}, bound {bound}"),
                    None => format!("no sale: {p} vs {q}, bound {bound}"),
                })
        });
    }
    Ok(r)
}

pub(crate) fn dp_ratio_bound(mech: &Mechanism, cfg: &ScoreConfig, d_max: u32, delta: f64) -> f64 {
    let scale = match mech {
        Mechanism::Rec => d_max as f64,
        Mechanism::Idm => f64::INFINITY,
        _ => 1.0,
    };
    (cfg.epsilon * scale * delta).exp()
}

/// `max(p/q, q/p)`, 1 when both vanish and infinite when only one does.
pub(crate) fn ratio(p: f64, q: f64) -> f64 {
    match (p > 0.0, q > 0.0) {
        (false, false) => 1.0,
        (true, true) => (p / q).max(q / p),
        _ => f64::INFINITY,
    }
}

/// `E_LAY[sw] ≥ γ_{d_max} · E_EMD[sw]`.
pub fn check_welfare_bound(
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    gamma: &GammaSequence,
) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let lay = Mechanism::Lay(gamma.clone());
    let e_lay = expected_social_welfare(&lay.distribution(&market, cfg)?, profiles);
    let e_emd = expected_social_welfare(&Mechanism::Emd.distribution(&market, cfg)?, profiles);
    let bound = gamma.gamma(market.tree().d_max()) * e_emd;
    let mut r = PropertyReport::new("welfare-bound/LAY", WELFARE_TOL);
    r.record(bound - e_lay, || {
        instance(&lay, profiles, cfg).with_note(format!("E_LAY = {e_lay}, bound = {bound}"))
    });
    Ok(r)
}

/// Winning probability of `i` under REC from the ancestor-product formula
/// ```text
/// Pr_i = Exp(i)/Exp(T(a¹) \ T(i))
///        · Π_{ℓ=1}^{d_i−1} ( Exp(T[a^ℓ])/Exp(T(a^{ℓ+1}))
///                            − Exp(a^ℓ)/Exp(T(a^{ℓ+1}) \ T(a^ℓ)) )
/// ```
/// where `a^ℓ` is the ancestor `ℓ` levels up. Sums are plain (shifted)
/// exponentials over explicit node sets, sharing no code with the
/// mechanism itself.
pub fn rec_closed_form_oracle(
    tree: &CriticalTree,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    i: BuyerId,
) -> f64 {
    if !tree.contains(i) || i.is_seller() {
        return 0.0;
    }
    let nodes: Vec<BuyerId> = tree.reachable().collect();
    let score = |u: BuyerId| cfg.epsilon * profiles.valuation(u).unwrap_or(0.0);
    let shift = nodes.iter().map(|&u| score(u)).fold(f64::NEG_INFINITY, f64::max);
    let weight = |u: BuyerId| (score(u) - shift).exp();
    let in_subtree = |u: BuyerId, root: BuyerId| {
        root.is_seller() || u == root || tree.ancestors(u).contains(&root)
    };
    let exp_of = |pred: &dyn Fn(BuyerId) -> bool| -> f64 {
        nodes.iter().filter(|&&u| pred(u)).map(|&u| weight(u)).sum()
    };
    // T(x) \ T(y) for a child y of x: y itself plus y's siblings' subtrees.
    let below_minus = |x: BuyerId, y: BuyerId| {
        exp_of(&|u| u != x && in_subtree(u, x) && (u == y || !in_subtree(u, y)))
    };
    let descendants = |x: BuyerId| exp_of(&|u| u != x && in_subtree(u, x));
    let subtree = |x: BuyerId| exp_of(&|u| in_subtree(u, x));

    // a[0] = i, a[ℓ] = ℓ-th ancestor, last entry the seller.
    let mut chain = vec![i];
    chain.extend(tree.ancestors(i).into_iter().rev());
    chain.push(BuyerId::SELLER);
    let mut pr = weight(i) / below_minus(chain[1], i);
    for l in 1..chain.len() - 1 {
        let (al, up) = (chain[l], chain[l + 1]);
        pr *= subtree(al) / descendants(up) - weight(al) / below_minus(up, al);
    }
    pr
}

/// [`rec_closed_form_oracle`] against the mechanism for every buyer.
pub fn check_rec_oracle(profiles: &GlobalProfile, cfg: &ScoreConfig) -> Result<PropertyReport, MechanismError> {
    let market = Market::from_reports(profiles)?;
    let d = Mechanism::Rec.distribution(&market, cfg)?;
    let mut r = PropertyReport::new("rec-oracle", ORACLE_TOL);
    for (&id, &p) in &d.prob {
        let o = rec_closed_form_oracle(market.tree(), profiles, cfg, id);
        r.record((o - p).abs(), || {
            instance(&Mechanism::Rec, profiles, cfg)
                .with_buyer(id)
                .with_note(format!("oracle {o}, mechanism {p}"))
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven, seven_buyer, three_node};
    use crate::graph::{build_critical_tree, build_profile_digraph};

    fn lay(a: f64) -> Mechanism {
        Mechanism::Lay(GammaSequence::geometric(a).unwrap())
    }

    fn cfg(eps: f64, v_max: f64) -> ScoreConfig {
        ScoreConfig::new(eps, v_max).unwrap()
    }

    #[test]
    fn normalization_examples() {
        for eps in [0.01, 0.1, 0.3] {
            assert!(check_normalization(&Mechanism::Rec, &seven_buyer(11.0), &cfg(eps, 100.0)).unwrap().passed);
        }
        let r = check_normalization(&lay(2.0), &three_node(), &cfg(1.0, 10.0)).unwrap();
        assert!(r.passed);
        assert!(r.max_violation < 1e-15);
    }

    #[test]
    fn monotonicity_examples() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let r = check_valuation_monotonicity(&Mechanism::Rec, &three_node(), &cfg(1.0, 10.0), BuyerId(1), &grid)
            .unwrap();
        assert!(r.passed);
        assert_eq!(r.instances, 10);
        let flat = check_valuation_monotonicity(&Mechanism::Rec, &three_node(), &cfg(0.0, 10.0), BuyerId(1), &grid)
            .unwrap();
        assert_eq!(flat.max_violation, 0.0);
        // g is alone on layer 4.
        let r = check_valuation_monotonicity(&lay(2.0), &seven_buyer(11.0), &cfg(0.1, 100.0), seven::G, &grid).unwrap();
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn payment_identity_examples() {
        let r = check_payment_identity(&lay(2.0), &three_node(), &cfg(1.0, 10.0), BuyerId(3)).unwrap();
        assert!(r.passed, "{r}");
        let r = check_payment_identity(&Mechanism::Rec, &seven_buyer(11.0), &cfg(0.1, 100.0), seven::C).unwrap();
        assert!(r.passed, "{r}");
        let r = check_payment_identity(&Mechanism::Rec, &seven_buyer(11.0), &cfg(0.0, 100.0), seven::C).unwrap();
        assert!(r.max_violation < 1e-12);
    }

    #[test]
    fn ir_examples() {
        assert!(check_ir(&lay(2.0), &three_node(), &cfg(1.0, 10.0)).unwrap().passed);
        let zero = three_node().with_valuation(BuyerId(3), 0.0);
        assert!(check_ir(&Mechanism::Rec, &zero, &cfg(1.0, 10.0)).unwrap().passed);
        for eps in [0.01, 0.1, 0.3] {
            assert!(check_ir(&Mechanism::Rec, &seven_buyer(11.0), &cfg(eps, 100.0)).unwrap().passed);
        }
    }

    #[test]
    fn valuation_ic_on_a_grid() {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 5.0).collect();
        for mech in [Mechanism::Rec, lay(2.0), Mechanism::Emd] {
            for id in [seven::A, seven::C, seven::E] {
                let r = check_valuation_ic(&mech, &seven_buyer(11.0), &cfg(0.1, 100.0), id, &grid).unwrap();
                assert!(r.passed, "{r}");
            }
        }
    }

    #[test]
    fn hiding_f_does_not_help_b_under_rec_but_does_under_emd() {
        let c = cfg(0.1, 100.0);
        let p = seven_buyer(11.0);
        let r = check_neighbor_ic(&Mechanism::Rec, &p, &c, seven::B).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.instances, 1);
        assert!(check_neighbor_ic(&lay(2.0), &p, &c, seven::B).unwrap().passed);
        let emd = check_neighbor_ic(&Mechanism::Emd, &p, &c, seven::B).unwrap();
        assert!(!emd.passed);
        assert!(emd.worst.unwrap().deviated.is_some());
        let leaf = check_neighbor_ic(&Mechanism::Rec, &p, &c, seven::C).unwrap();
        assert_eq!(leaf.instances, 0);
        assert!(leaf.passed);
    }

    #[test]
    fn lay_neighbor_ic_fails_when_hiding_moves_a_layer_companion() {
        // s -> {1, 2}, 1 -> 3, 2 -> 3. Buyer 3 sits on layer 1 until 1
        // hides it, which leaves 1 with one fewer competitor on its layer.
        let p = GlobalProfile::new([BuyerId(1), BuyerId(2)])
            .with_buyer(1, 5.0, [3])
            .with_buyer(2, 5.0, [3])
            .with_buyer(3, 5.0, []);
        let c = cfg(0.1, 10.0);
        let r = check_neighbor_ic(&lay(2.0), &p, &c, BuyerId(1)).unwrap();
        assert!(!r.passed);
        assert!((r.max_violation - (0.25 - 1.0 / 6.0)).abs() < 1e-12);
        assert!(check_neighbor_ic(&Mechanism::Rec, &p, &c, BuyerId(1)).unwrap().passed);
    }

    #[test]
    fn neighbor_ic_refuses_huge_neighbor_sets() {
        let mut p = GlobalProfile::new([BuyerId(1)]);
        p = p.with_buyer(1, 1.0, 2..=14);
        for k in 2..=14 {
            p = p.with_buyer(k, 1.0, []);
        }
        let r = check_neighbor_ic(&Mechanism::Rec, &p, &cfg(0.1, 10.0), BuyerId(1)).unwrap();
        assert!(!r.passed);
        assert!(r.note.unwrap().contains("too large"));
    }

    #[test]
    fn dp_examples() {
        let c = cfg(1.0, 10.0);
        let pair = NeighborPair::new(three_node(), BuyerId(1), 2.0).unwrap();
        let r = check_dp_bound(&Mechanism::Rec, &pair, &c).unwrap();
        assert!(r.passed);
        // Largest ratio is buyer a's own, 2.2561… against e².
        assert!((r.max_violation - 0.0).abs() < 1e-15);
        let a = Market::from_reports(&pair.base).unwrap();
        let b = Market::from_reports(&pair.deviated).unwrap();
        let pa = Mechanism::Rec.distribution(&a, &c).unwrap().probability(BuyerId(1));
        let pb = Mechanism::Rec.distribution(&b, &c).unwrap().probability(BuyerId(1));
        assert!((ratio(pa, pb) - 2.256_164_671_199_035_5).abs() < 1e-12);
        // g alone on its layer: every LAY ratio for its valuation change is 1.
        let pair = NeighborPair::new(seven_buyer(11.0), seven::G, 90.0).unwrap();
        assert!(check_dp_bound(&lay(2.0), &pair, &cfg(0.3, 100.0)).unwrap().passed);
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert_eq!(ratio(0.0, 0.5), f64::INFINITY);
    }

    #[test]
    fn welfare_examples() {
        let r = check_welfare_bound(&three_node(), &cfg(1.0, 10.0), &GammaSequence::geometric(2.0).unwrap())
            .unwrap();
        assert!(r.passed);
        // Margin = 0.25·E_EMD − E_LAY.
        assert!((r.max_violation - 0.0).abs() < 1e-15);
        let star = GlobalProfile::new([BuyerId(1), BuyerId(2)])
            .with_buyer(1, 3.0, [])
            .with_buyer(2, 7.0, []);
        let r = check_welfare_bound(&star, &cfg(0.5, 10.0), &GammaSequence::geometric(2.0).unwrap()).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn oracle_matches_worked_examples() {
        let eps = 0.1;
        let c = cfg(eps, 100.0);
        let p = seven_buyer(11.0);
        let t = build_critical_tree(&build_profile_digraph(&p).unwrap());
        let e = |v: f64| (eps * v).exp();
        // Pr_d = (Pr_T[a] − Pr_a) · Exp(d) / (Exp(d) + Exp(e)).
        let top = e(10.0) + e(8.0) + e(14.0) + e(9.0) + e(12.0) + e(15.0) + e(11.0);
        let t_a = e(10.0) + e(9.0) + e(12.0);
        let pr_ta = t_a / top;
        let pr_a = e(10.0) / (top - e(9.0) - e(12.0));
        let pr_d = (pr_ta - pr_a) * e(9.0) / (e(9.0) + e(12.0));
        assert!((rec_closed_form_oracle(&t, &p, &c, seven::D) - pr_d).abs() < 1e-15);
        assert!((rec_closed_form_oracle(&t, &p, &c, seven::A) - pr_a).abs() < 1e-15);
        assert!(check_rec_oracle(&p, &c).unwrap().passed);
        assert!(check_rec_oracle(&three_node(), &cfg(1.0, 10.0)).unwrap().passed);
    }
}
