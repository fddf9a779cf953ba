//! Layered market division: layer `ℓ` of the critical tree receives `γ_ℓ`
//! and shares it by softmax of the scores on that layer. Mass left over
//! below `d_max` is the no-sale outcome.

use crate::error::MechanismError;
use crate::graph::{CriticalTree, GlobalProfile};
use crate::scoring::{lse_iter, ScoreConfig};

use super::{DenseDistribution, GammaSequence, Market, Mechanism, WinDistribution};

pub(crate) fn lay_dense(
    tree: &CriticalTree,
    logs: &[f64],
    gamma: &GammaSequence,
) -> DenseDistribution {
    let n = tree.len();
    let mut prob = vec![0.0; n];
    // Breadth-first storage keeps each layer contiguous.
    let mut start = 1;
    while start < n {
        let depth = tree.depth_at(start);
        let mut end = start;
        while end < n && tree.depth_at(end) == depth {
            end += 1;
        }
        let g = gamma.gamma(depth);
        let norm = lse_iter(logs[start..end].iter().copied());
        for i in start..end {
            prob[i] = g * (logs[i] - norm).exp();
        }
        start = end;
    }
    DenseDistribution {
        prob,
        no_sale: gamma.remainder_after(tree.d_max()),
    }
}

/// Winning distribution of the layered mechanism.
pub fn lay_distribution(
    tree: &CriticalTree,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
    gamma: &GammaSequence,
) -> Result<WinDistribution, MechanismError> {
    let market = Market::new(tree.clone(), profiles)?;
    Mechanism::Lay(gamma.clone()).distribution(&market, cfg)
}
