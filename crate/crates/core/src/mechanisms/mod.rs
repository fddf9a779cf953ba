//! Allocation rules for single-item diffusion auctions.
//!
//! Every randomized mechanism here reduces to a [`WinDistribution`] over the
//! buyers reachable from the seller (plus, for the layered rule, an explicit
//! no-sale outcome). The winner is drawn from that distribution and pays
//! according to the integral payment rule in [`payment`], which makes each
//! rule truthful in expectation. IDM is the deterministic, non-private
//! baseline and is represented as a point-mass distribution.

mod exponential;
mod idm;
mod lay;
mod outcome;
pub mod payment;
mod rec;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::MechanismError;
use crate::graph::{build_critical_tree, build_profile_digraph, BuyerId, CriticalTree, GlobalProfile};
use crate::scoring::ScoreConfig;

pub use exponential::{emd_distribution, emwd_distribution};
pub use idm::idm_outcome;
pub use lay::lay_distribution;
pub use outcome::{
    expected_social_welfare, outcome_for_winner, run_auction, run_auction_in_market,
    sample_winner, AuctionOutcome,
};
pub use payment::{lay_payment_closed_form, winner_payment, ProbabilityCurve};
pub use rec::{rec_aggregates, rec_distribution, SubtreeAggregates};

/// Tolerance on `Σ prob + no_sale = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MechanismTag {
    Rec,
    Lay,
    Emd,
    Emwd,
    Idm,
}

impl MechanismTag {
    pub const ALL: [MechanismTag; 5] = [
        MechanismTag::Rec,
        MechanismTag::Lay,
        MechanismTag::Emd,
        MechanismTag::Emwd,
        MechanismTag::Idm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismTag::Rec => "REC",
            MechanismTag::Lay => "LAY",
            MechanismTag::Emd => "EMD",
            MechanismTag::Emwd => "EMWD",
            MechanismTag::Idm => "IDM",
        }
    }
}

impl fmt::Display for MechanismTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rec" => Ok(MechanismTag::Rec),
            "lay" => Ok(MechanismTag::Lay),
            "emd" => Ok(MechanismTag::Emd),
            "emwd" => Ok(MechanismTag::Emwd),
            "idm" => Ok(MechanismTag::Idm),
            other => Err(format!("unknown mechanism `{other}`")),
        }
    }
}

/// Layer probabilities `γ_1 > γ_2 > …` for the layered mechanism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GammaSequence {
    /// `γ_ℓ = (a − 1) / a^ℓ`, summing to 1 over all layers.
    Geometric { a: f64 },
    /// A finite strictly decreasing prefix; layers past its end get 0.
    Explicit(Vec<f64>),
}

impl GammaSequence {
    pub fn geometric(a: f64) -> Result<Self, MechanismError> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(MechanismError::InvalidGamma(format!(
                "geometric parameter must be finite and > 1, got {a}"
            )));
        }
        Ok(GammaSequence::Geometric { a })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self, MechanismError> {
        if values.is_empty() {
            return Err(MechanismError::InvalidGamma("empty sequence".into()));
        }
        if values.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
            return Err(MechanismError::InvalidGamma(
                "every entry must lie in (0, 1)".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(MechanismError::InvalidGamma(
                "sequence must be strictly decreasing".into(),
            ));
        }
        if values.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(MechanismError::InvalidGamma("entries sum above 1".into()));
        }
        Ok(GammaSequence::Explicit(values))
    }

    /// The geometric parameter, when there is one.
    pub fn a(&self) -> Option<f64> {
        match self {
            GammaSequence::Geometric { a } => Some(*a),
            GammaSequence::Explicit(_) => None,
        }
    }

    /// Probability of layer `layer` (1-based). Layer 0 gets nothing.
    pub fn gamma(&self, layer: u32) -> f64 {
        if layer == 0 {
            return 0.0;
        }
        match self {
            GammaSequence::Geometric { a } => (a - 1.0) / a.powi(layer as i32),
            GammaSequence::Explicit(v) => v.get(layer as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// `1 − Σ_{ℓ ≤ depth} γ_ℓ`: the mass no layer up to `depth` receives.
    pub fn remainder_after(&self, depth: u32) -> f64 {
        match self {
            GammaSequence::Geometric { a } => a.powi(-(depth as i32)),
            GammaSequence::Explicit(v) => {
                let used: f64 = v.iter().take(depth as usize).sum();
                (1.0 - used).max(0.0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    Rec,
    Lay(GammaSequence),
    Emd,
    Emwd,
    Idm,
}

impl Mechanism {
    pub fn tag(&self) -> MechanismTag {
        match self {
            Mechanism::Rec => MechanismTag::Rec,
            Mechanism::Lay(_) => MechanismTag::Lay,
            Mechanism::Emd => MechanismTag::Emd,
            Mechanism::Emwd => MechanismTag::Emwd,
            Mechanism::Idm => MechanismTag::Idm,
        }
    }

    /// Builds a mechanism from its tag; LAY needs a geometric parameter.
    pub fn from_tag(tag: MechanismTag, a: Option<f64>) -> Result<Self, MechanismError> {
        Ok(match tag {
            MechanismTag::Rec => Mechanism::Rec,
            MechanismTag::Lay => Mechanism::Lay(GammaSequence::geometric(a.unwrap_or(2.0))?),
            MechanismTag::Emd => Mechanism::Emd,
            MechanismTag::Emwd => Mechanism::Emwd,
            MechanismTag::Idm => Mechanism::Idm,
        })
    }

    /// Whether winners are drawn from an exponential-mechanism style
    /// distribution (everything except IDM).
    pub fn is_randomized(&self) -> bool {
        !matches!(self, Mechanism::Idm)
    }

    /// Privacy level actually guaranteed for a given market: `ε·d_max·Δσ`
    /// for REC, `ε·Δσ` for the other randomized rules, `∞` for IDM.
    pub fn dp_bound(&self, cfg: &ScoreConfig, d_max: u32) -> f64 {
        match self {
            Mechanism::Rec => cfg.epsilon * d_max as f64 * cfg.sensitivity(),
            Mechanism::Idm => f64::INFINITY,
            _ => cfg.epsilon * cfg.sensitivity(),
        }
    }

    pub fn distribution(
        &self,
        market: &Market,
        cfg: &ScoreConfig,
    ) -> Result<WinDistribution, MechanismError> {
        market.check_bound(cfg)?;
        let dense = self.dense(market.tree(), market.valuations(), cfg)?;
        Ok(WinDistribution::from_dense(self.tag(), market.tree(), &dense))
    }

    /// Winning probabilities indexed like the tree's nodes (entry 0, the
    /// seller, is always 0).
    pub(crate) fn dense(
        &self,
        tree: &CriticalTree,
        valuations: &[f64],
        cfg: &ScoreConfig,
    ) -> Result<DenseDistribution, MechanismError> {
        if tree.is_empty() {
            return Ok(DenseDistribution {
                prob: vec![0.0; tree.len()],
                no_sale: 1.0,
            });
        }
        let logs: Vec<f64> = valuations.iter().map(|&v| cfg.log_score(v).0).collect();
        Ok(match self {
            Mechanism::Rec => DenseDistribution {
                prob: rec::rec_dense(tree, &logs)?.prob,
                no_sale: 0.0,
            },
            Mechanism::Lay(gamma) => lay::lay_dense(tree, &logs, gamma),
            Mechanism::Emd => exponential::softmax_dense(tree, &logs, |_| true),
            Mechanism::Emwd => exponential::softmax_dense(tree, &logs, |i| tree.is_seller_neighbor_at(i)),
            Mechanism::Idm => idm::idm_dense(tree, valuations),
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct DenseDistribution {
    pub prob: Vec<f64>,
    pub no_sale: f64,
}

/// Reports reduced to what the mechanisms consume: the critical tree and
/// each reachable buyer's valuation.
#[derive(Clone, Debug)]
pub struct Market {
    tree: CriticalTree,
    valuations: Vec<f64>,
}

impl Market {
    pub fn from_reports(reports: &GlobalProfile) -> Result<Self, MechanismError> {
        let g = build_profile_digraph(reports)?;
        let tree = build_critical_tree(&g);
        Self::new(tree, reports)
    }

    pub fn new(tree: CriticalTree, profiles: &GlobalProfile) -> Result<Self, MechanismError> {
        profiles.validate()?;
        let mut valuations = vec![0.0; tree.len()];
        for (i, v) in valuations.iter_mut().enumerate().skip(1) {
            let id = tree.id_at(i);
            *v = profiles
                .valuation(id)
                .ok_or(MechanismError::Unreachable(id))?;
        }
        Ok(Market { tree, valuations })
    }

    pub fn tree(&self) -> &CriticalTree {
        &self.tree
    }

    /// Valuations indexed like the tree's nodes.
    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    pub fn valuation(&self, id: BuyerId) -> Option<f64> {
        self.tree.index_of(id).map(|i| self.valuations[i])
    }

    pub fn with_valuation(&self, id: BuyerId, valuation: f64) -> Result<Self, MechanismError> {
        let i = self.tree.index_of(id).ok_or(MechanismError::Unreachable(id))?;
        let mut out = self.clone();
        out.valuations[i] = valuation;
        Ok(out)
    }

    fn check_bound(&self, cfg: &ScoreConfig) -> Result<(), MechanismError> {
        for (i, &v) in self.valuations.iter().enumerate().skip(1) {
            if v > cfg.v_max {
                return Err(MechanismError::AboveBound {
                    buyer: self.tree.id_at(i),
                    valuation: v,
                    v_max: cfg.v_max,
                });
            }
        }
        Ok(())
    }
}

/// Winning probabilities of every reachable buyer plus the no-sale outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinDistribution {
    pub mechanism: MechanismTag,
    pub prob: BTreeMap<BuyerId, f64>,
    pub no_sale: f64,
}

impl WinDistribution {
    pub(crate) fn from_dense(
        mechanism: MechanismTag,
        tree: &CriticalTree,
        dense: &DenseDistribution,
    ) -> Self {
        let prob = (1..tree.len())
            .map(|i| (tree.id_at(i), dense.prob[i]))
            .collect();
        WinDistribution {
            mechanism,
            prob,
            no_sale: dense.no_sale,
        }
    }

    /// A distribution that never sells.
    pub fn no_sale(mechanism: MechanismTag) -> Self {
        WinDistribution {
            mechanism,
            prob: BTreeMap::new(),
            no_sale: 1.0,
        }
    }

    pub fn probability(&self, id: BuyerId) -> f64 {
        self.prob.get(&id).copied().unwrap_or(0.0)
    }

    /// `Σ prob + no_sale`.
    pub fn total(&self) -> f64 {
        self.prob.values().sum::<f64>() + self.no_sale
    }

    pub fn sale_probability(&self) -> f64 {
        self.prob.values().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOL
    }
}
