use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::MechanismError;
use crate::graph::{BuyerId, CriticalTree, GlobalProfile};
use crate::scoring::ScoreConfig;

use super::payment::winner_payment;
use super::{idm, Market, Mechanism, MechanismTag, WinDistribution};

/// Result of one auction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub mechanism: MechanismTag,
    pub winner: Option<BuyerId>,
    /// Allocation indicator for every reachable buyer.
    pub allocation: BTreeMap<BuyerId, u8>,
    /// The winner's payment (0 without a sale).
    pub payment: f64,
    /// Net transfers to the seller; negative entries are rewards paid out.
    pub transfers: BTreeMap<BuyerId, f64>,
    pub utilities: BTreeMap<BuyerId, f64>,
    pub seller_revenue: f64,
    pub social_welfare: f64,
}

impl AuctionOutcome {
    pub(crate) fn empty(mechanism: MechanismTag, tree: &CriticalTree) -> Self {
        AuctionOutcome {
            mechanism,
            winner: None,
            allocation: tree.reachable().map(|id| (id, 0)).collect(),
            payment: 0.0,
            transfers: BTreeMap::new(),
            utilities: tree.reachable().map(|id| (id, 0.0)).collect(),
            seller_revenue: 0.0,
            social_welfare: 0.0,
        }
    }

    /// Sum of all agents' utilities, seller included.
    pub fn total_utility(&self) -> f64 {
        self.seller_revenue + self.utilities.values().sum::<f64>()
    }
}

/// Inverse-CDF draw over buyers in ascending id order, no-sale last.
pub fn sample_winner<R: Rng + ?Sized>(dist: &WinDistribution, rng: &mut R) -> Option<BuyerId> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = None;
    for (&id, &p) in &dist.prob {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = Some(id);
        if u < acc {
            return Some(id);
        }
    }
    // Whatever is left belongs to the no-sale slot; if there is none, the
    // shortfall is rounding and goes to the last buyer with positive mass.
    if dist.no_sale > 0.0 {
        None
    } else {
        last_positive
    }
}

/// `Σ_i v_i · Pr_i`; the no-sale outcome contributes nothing.
pub fn expected_social_welfare(dist: &WinDistribution, valuations: &GlobalProfile) -> f64 {
    dist.prob
        .iter()
        .map(|(&id, &p)| p * valuations.valuation(id).unwrap_or(0.0))
        .sum()
}

/// Outcome of a randomized mechanism once the winner is fixed.
pub fn outcome_for_winner(
    mech: &Mechanism,
    market: &Market,
    cfg: &ScoreConfig,
    winner: Option<BuyerId>,
) -> Result<AuctionOutcome, MechanismError> {
    let mut outcome = AuctionOutcome::empty(mech.tag(), market.tree());
    let Some(w) = winner else {
        return Ok(outcome);
    };
    let v = market.valuation(w).ok_or(MechanismError::Unreachable(w))?;
    let p = winner_payment(mech, market, cfg, w)?;
    outcome.winner = Some(w);
    outcome.allocation.insert(w, 1);
    outcome.payment = p;
    outcome.transfers.insert(w, p);
    outcome.utilities.insert(w, v - p);
    outcome.seller_revenue = p;
    outcome.social_welfare = v;
    Ok(outcome)
}

pub fn run_auction_in_market<R: Rng + ?Sized>(
    mech: &Mechanism,
    market: &Market,
    cfg: &ScoreConfig,
    rng: &mut R,
) -> Result<AuctionOutcome, MechanismError> {
    if let Mechanism::Idm = mech {
        return Ok(idm::idm_market_outcome(market));
    }
    let dist = mech.distribution(market, cfg)?;
    let winner = sample_winner(&dist, rng);
    outcome_for_winner(mech, market, cfg, winner)
}

/// Full pipeline: reports → digraph → critical tree → distribution → draw →
/// payment.
pub fn run_auction<R: Rng + ?Sized>(
    mech: &Mechanism,
    reports: &GlobalProfile,
    cfg: &ScoreConfig,
    rng: &mut R,
) -> Result<AuctionOutcome, MechanismError> {
    let market = Market::from_reports(reports)?;
    run_auction_in_market(mech, &market, cfg, rng)
}
