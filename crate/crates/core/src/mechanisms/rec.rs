//! Recursive market division over the critical tree.
//!
//! Starting from the seller with `Pr_T[0] = 1, Pr_0 = 0`, each node `i`
//! hands its residual `R_i = Pr_T[i] − Pr_i` to its children:
//!
//! ```text
//! Pr_T[j] = R_i · Exp(T[j]) / Exp(T(i))
//! Pr_j    = R_i · Exp(j) / Exp(T(i) \ T(j))
//! ```
//!
//! With `x = Exp(j)`, `y = Exp(T(j))` and `z` the weight of `j`'s siblings'
//! subtrees, the child's residual simplifies to
//! `R_j = R_i · y·z / ((x + y + z)(x + z))`, which is evaluated directly so
//! that it never goes negative through cancellation and is exactly zero when
//! `j` is a leaf or an only child.

use crate::error::{MechanismError, ScoringError};
use crate::graph::{BuyerId, CriticalTree, GlobalProfile};
use crate::scoring::{exp_ratio, lse2, lse_iter, ScoreConfig};

use super::{Market, Mechanism, WinDistribution};

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Per-node aggregates of the recursive rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubtreeAggregates {
    /// `log Exp(T[i])`.
    pub log_subtree: f64,
    /// `log Exp(T(i))`; `-inf` for leaves.
    pub log_descendants: f64,
    /// `Pr_T[i]`.
    pub subtree_prob: f64,
    /// `Pr_i`.
    pub prob: f64,
}

pub(crate) struct RecState {
    pub log_subtree: Vec<f64>,
    pub log_descendants: Vec<f64>,
    pub subtree_prob: Vec<f64>,
    pub prob: Vec<f64>,
}

pub(crate) fn rec_dense(tree: &CriticalTree, logs: &[f64]) -> Result<RecState, ScoringError> {
    let n = tree.len();
    let mut log_subtree = vec![NEG_INF; n];
    let mut log_desc = vec![NEG_INF; n];
    // Children follow their parents in tree order, so a reverse sweep is a
    // valid post-order.
    for i in (0..n).rev() {
        let kids = tree.children_indices(i);
        log_desc[i] = lse_iter(kids.iter().map(|&c| log_subtree[c]));
        log_subtree[i] = if i == 0 {
            log_desc[i]
        } else {
            lse2(logs[i], log_desc[i])
        };
    }

    let mut prob = vec![0.0; n];
    let mut subtree_prob = vec![0.0; n];
    let mut residual = vec![NEG_INF; n];
    subtree_prob[0] = 1.0;
    residual[0] = 0.0;

    let mut prefix: Vec<f64> = Vec::new();
    let mut suffix: Vec<f64> = Vec::new();
    for i in 0..n {
        let kids = tree.children_indices(i);
        if kids.is_empty() || residual[i] == NEG_INF {
            continue;
        }
        let m = kids.len();
        prefix.clear();
        prefix.push(NEG_INF);
        for &c in kids {
            let last = *prefix.last().unwrap();
            prefix.push(lse2(last, log_subtree[c]));
        }
        suffix.clear();
        suffix.resize(m + 1, NEG_INF);
        for k in (0..m).rev() {
            suffix[k] = lse2(suffix[k + 1], log_subtree[kids[k]]);
        }

        let r = residual[i];
        for (k, &j) in kids.iter().enumerate() {
            let x = logs[j];
            let y = log_desc[j];
            let z = lse2(prefix[k], suffix[k + 1]);
            let xz = lse2(x, z);
            prob[j] = exp_ratio(r + x, xz)?;
            subtree_prob[j] = exp_ratio(r + log_subtree[j], log_desc[i])?;
            residual[j] = if y == NEG_INF || z == NEG_INF {
                NEG_INF
            } else {
                r + y + z - lse2(xz, y) - xz
            };
            debug_assert!(
                prob[j] <= subtree_prob[j] * (1.0 + 1e-9) + 1e-300,
                "Pr_j exceeds Pr_T[j] at node {j}"
            );
        }
    }

    Ok(RecState {
        log_subtree,
        log_descendants: log_desc,
        subtree_prob,
        prob,
    })
}

/// Winning distribution of the recursive mechanism.
pub fn rec_distribution(
    tree: &CriticalTree,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
) -> Result<WinDistribution, MechanismError> {
    let market = Market::new(tree.clone(), profiles)?;
    Mechanism::Rec.distribution(&market, cfg)
}

/// `Exp` aggregates and probabilities for every tree node, seller included.
pub fn rec_aggregates(
    market: &Market,
    cfg: &ScoreConfig,
) -> Result<Vec<(BuyerId, SubtreeAggregates)>, MechanismError> {
    let tree = market.tree();
    let logs: Vec<f64> = market
        .valuations()
        .iter()
        .map(|&v| cfg.log_score(v).0)
        .collect();
    let st = rec_dense(tree, &logs)?;
    Ok((0..tree.len())
        .map(|i| {
            (
                tree.id_at(i),
                SubtreeAggregates {
                    log_subtree: st.log_subtree[i],
                    log_descendants: st.log_descendants[i],
                    subtree_prob: st.subtree_prob[i],
                    prob: st.prob[i],
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_critical_tree, build_profile_digraph};
    use crate::fixtures::{seven_buyer, three_node};

    #[test]
    fn three_node_instance() {
        // 40-digit reference values from direct evaluation of the recursion.
        let profiles = three_node();
        let cfg = ScoreConfig::new(1.0, 10.0).unwrap();
        let market = Market::from_reports(&profiles).unwrap();
        let d = Mechanism::Rec.distribution(&market, &cfg).unwrap();
        assert!((d.probability(BuyerId(1)) - 0.119_202_922_022_117_56).abs() < 1e-12);
        assert!((d.probability(BuyerId(2)) - 0.215_556_122_203_060_55).abs() < 1e-12);
        assert!((d.probability(BuyerId(3)) - 0.665_240_955_774_821_9).abs() < 1e-12);
        assert_eq!(d.no_sale, 0.0);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_buyer_wins_surely() {
        let p = GlobalProfile::new([BuyerId(4)]).with_buyer(4, 3.0, []);
        let cfg = ScoreConfig::new(0.7, 10.0).unwrap();
        let d = Mechanism::Rec.distribution(&Market::from_reports(&p).unwrap(), &cfg).unwrap();
        assert_eq!(d.probability(BuyerId(4)), 1.0);
    }

    #[test]
    fn only_child_collapse() {
        // s -> 1 -> 2 -> 3 chain: the lone child takes everything.
        let p = GlobalProfile::new([BuyerId(1)])
            .with_buyer(1, 1.0, [2])
            .with_buyer(2, 5.0, [3])
            .with_buyer(3, 9.0, []);
        let cfg = ScoreConfig::new(1.0, 10.0).unwrap();
        let d = Mechanism::Rec.distribution(&Market::from_reports(&p).unwrap(), &cfg).unwrap();
        assert_eq!(d.probability(BuyerId(1)), 1.0);
        assert_eq!(d.probability(BuyerId(2)), 0.0);
        assert_eq!(d.probability(BuyerId(3)), 0.0);
    }

    #[test]
    fn seven_buyer_subtree_formulas() {
        let eps = 0.1;
        let profiles = seven_buyer(11.0);
        let cfg = ScoreConfig::new(eps, 100.0).unwrap();
        let market = Market::from_reports(&profiles).unwrap();
        let agg = rec_aggregates(&market, &cfg).unwrap();
        let get = |id: u32| agg.iter().find(|(b, _)| b.0 == id).unwrap().1;
        let e = |v: f64| (eps * v).exp();
        let exp_t: f64 = [10.0, 8.0, 14.0, 9.0, 12.0, 15.0, 11.0].iter().map(|&v| e(v)).sum();
        let pr_ta = (e(10.0) + e(9.0) + e(12.0)) / exp_t;
        assert!((get(1).subtree_prob - pr_ta).abs() / pr_ta < 1e-12);
        assert!((get(0).log_subtree - exp_t.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_tree_never_sells() {
        let tree = build_critical_tree(&build_profile_digraph(&GlobalProfile::default()).unwrap());
        let d = rec_distribution(&tree, &GlobalProfile::default(), &ScoreConfig::new(1.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(d.no_sale, 1.0);
        assert!(d.prob.is_empty());
    }
}
