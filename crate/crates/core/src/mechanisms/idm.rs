//! Information diffusion mechanism: the deterministic, non-private baseline.
//!
//! Let `m` be the highest bidder and `(x_1, …, x_k, m)` its critical
//! sequence. The item goes to the first `x` in the sequence whose bid is the
//! highest once the subtree of the next node in the sequence is removed. The
//! winner pays the highest bid outside its own subtree; each critical
//! ancestor `x_i` of the winner is paid the increase
//! `v*(¬D_{x_{i+1}}) − v*(¬D_{x_i})`, where `v*(¬D_x)` is the highest bid
//! outside the subtree of `x`.

use std::collections::BTreeMap;

use crate::graph::{CriticalTree, GlobalProfile};

use super::{AuctionOutcome, DenseDistribution, MechanismTag};
use crate::error::MechanismError;

pub(crate) struct IdmResolution {
    pub winner: usize,
    pub payment: f64,
    /// `(tree index, reward)` for each strict critical ancestor of the winner.
    pub rewards: Vec<(usize, f64)>,
}

pub(crate) fn idm_resolve(tree: &CriticalTree, valuations: &[f64]) -> Option<IdmResolution> {
    let n = tree.len();
    if n <= 1 {
        return None;
    }
    let by_id = |i: usize| tree.id_at(i);
    let mut m = 1;
    for i in 2..n {
        let better = valuations[i] > valuations[m]
            || (valuations[i] == valuations[m] && by_id(i) < by_id(m));
        if better {
            m = i;
        }
    }

    let mut chain = vec![m];
    let mut u = m;
    while tree.parent_index(u) != 0 {
        u = tree.parent_index(u);
        chain.push(u);
    }
    chain.reverse();

    let iv = tree.subtree_intervals();
    let inside = |u: usize, root: usize| iv[root].0 <= iv[u].0 && iv[u].1 <= iv[root].1;
    let best_outside = |root: usize| -> f64 {
        (1..n)
            .filter(|&u| !inside(u, root))
            .map(|u| valuations[u])
            .fold(0.0, f64::max)
    };

    let mut winner_pos = chain.len() - 1;
    for (k, &x) in chain.iter().enumerate().take(chain.len() - 1) {
        if valuations[x] >= best_outside(chain[k + 1]) {
            winner_pos = k;
            break;
        }
    }
    let winner = chain[winner_pos];
    let rewards = (0..winner_pos)
        .map(|k| {
            (
                chain[k],
                best_outside(chain[k + 1]) - best_outside(chain[k]),
            )
        })
        .collect();
    Some(IdmResolution {
        winner,
        payment: best_outside(winner),
        rewards,
    })
}

pub(crate) fn idm_dense(tree: &CriticalTree, valuations: &[f64]) -> DenseDistribution {
    let mut prob = vec![0.0; tree.len()];
    match idm_resolve(tree, valuations) {
        Some(r) => {
            prob[r.winner] = 1.0;
            DenseDistribution { prob, no_sale: 0.0 }
        }
        None => DenseDistribution { prob, no_sale: 1.0 },
    }
}

/// Runs IDM on reported profiles and their critical tree.
pub fn idm_outcome(
    profiles: &GlobalProfile,
    tree: &CriticalTree,
) -> Result<AuctionOutcome, MechanismError> {
    let market = super::Market::new(tree.clone(), profiles)?;
    Ok(idm_market_outcome(&market))
}

pub(crate) fn idm_market_outcome(market: &super::Market) -> AuctionOutcome {
    let tree = market.tree();
    let vals = market.valuations();
    let mut outcome = AuctionOutcome::empty(MechanismTag::Idm, tree);
    let Some(res) = idm_resolve(tree, vals) else {
        return outcome;
    };
    let w = tree.id_at(res.winner);
    outcome.winner = Some(w);
    outcome.allocation.insert(w, 1);
    outcome.payment = res.payment;
    let mut payments = BTreeMap::new();
    payments.insert(w, res.payment);
    outcome.utilities.insert(w, vals[res.winner] - res.payment);
    let mut rewards_total = 0.0;
    for (idx, reward) in res.rewards {
        let id = tree.id_at(idx);
        payments.insert(id, -reward);
        outcome.utilities.insert(id, reward);
        rewards_total += reward;
    }
    outcome.transfers = payments;
    outcome.seller_revenue = res.payment - rewards_total;
    outcome.social_welfare = vals[res.winner];
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven, seven_buyer};
    use crate::graph::{build_critical_tree, build_profile_digraph, BuyerId};

    fn run(p: &GlobalProfile) -> AuctionOutcome {
        let tree = build_critical_tree(&build_profile_digraph(p).unwrap());
        idm_outcome(p, &tree).unwrap()
    }

    #[test]
    fn seven_buyer_winner_is_f() {
        let o = run(&seven_buyer(11.0));
        assert_eq!(o.winner, Some(seven::F));
        assert_eq!(o.payment, 14.0);
        assert_eq!(o.utilities[&seven::B], 0.0);
        assert_eq!(o.utilities[&seven::F], 1.0);
        assert_eq!(o.social_welfare, 15.0);
        assert_eq!(o.seller_revenue, 14.0);
    }

    #[test]
    fn intermediary_wins_when_outside_bids_are_lower() {
        // s -> 1 (v=9) -> 2 (v=10); s -> 3 (v=4). Without 2's subtree 1 is top.
        let p = GlobalProfile::new([BuyerId(1), BuyerId(3)])
            .with_buyer(1, 9.0, [2])
            .with_buyer(2, 10.0, [])
            .with_buyer(3, 4.0, []);
        let o = run(&p);
        assert_eq!(o.winner, Some(BuyerId(1)));
        assert_eq!(o.payment, 4.0);
        assert_eq!(o.social_welfare, 9.0);
    }

    #[test]
    fn reward_telescopes_along_chain() {
        // s -> 1 (v=5) -> 2 (v=1) -> 3 (v=20); s -> 4 (v=7); 2 -> 5 (v=8)
        let p = GlobalProfile::new([BuyerId(1), BuyerId(4)])
            .with_buyer(1, 5.0, [2])
            .with_buyer(2, 1.0, [3, 5])
            .with_buyer(3, 20.0, [])
            .with_buyer(4, 7.0, [])
            .with_buyer(5, 8.0, []);
        let o = run(&p);
        assert_eq!(o.winner, Some(BuyerId(3)));
        assert_eq!(o.payment, 8.0);
        // v*(¬D_2) − v*(¬D_1) = 7 − 7 and v*(¬D_3) − v*(¬D_2) = 8 − 7.
        assert_eq!(o.utilities[&BuyerId(1)], 0.0);
        assert_eq!(o.utilities[&BuyerId(2)], 1.0);
        assert_eq!(o.seller_revenue, 7.0);
    }

    #[test]
    fn single_buyer_pays_nothing() {
        let p = GlobalProfile::new([BuyerId(1)]).with_buyer(1, 3.0, []);
        let o = run(&p);
        assert_eq!(o.winner, Some(BuyerId(1)));
        assert_eq!(o.payment, 0.0);
    }

    #[test]
    fn no_buyers_no_sale() {
        let o = run(&GlobalProfile::default());
        assert_eq!(o.winner, None);
        assert_eq!(o.social_welfare, 0.0);
    }
}
