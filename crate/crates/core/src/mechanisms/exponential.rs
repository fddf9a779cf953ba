//! Plain exponential mechanism baselines: over every reachable buyer (EMD)
//! or only over the seller's own neighbors (EMWD).

use std::collections::BTreeSet;

use crate::error::MechanismError;
use crate::graph::{BuyerId, CriticalTree, GlobalProfile};
use crate::scoring::{lse_iter, ScoreConfig};

use super::{DenseDistribution, MechanismTag, WinDistribution};

/// Softmax over the tree nodes (by index) that pass `keep`.
pub(crate) fn softmax_dense(
    tree: &CriticalTree,
    logs: &[f64],
    keep: impl Fn(usize) -> bool,
) -> DenseDistribution {
    let n = tree.len();
    let members: Vec<usize> = (1..n).filter(|&i| keep(i)).collect();
    let mut prob = vec![0.0; n];
    if members.is_empty() {
        return DenseDistribution { prob, no_sale: 1.0 };
    }
    let norm = lse_iter(members.iter().map(|&i| logs[i]));
    for &i in &members {
        prob[i] = (logs[i] - norm).exp();
    }
    DenseDistribution { prob, no_sale: 0.0 }
}

fn softmax_over(
    tag: MechanismTag,
    buyers: &BTreeSet<BuyerId>,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
) -> Result<WinDistribution, MechanismError> {
    profiles.validate()?;
    let mut logs = Vec::with_capacity(buyers.len());
    for &id in buyers {
        let v = profiles
            .valuation(id)
            .ok_or(MechanismError::Unreachable(id))?;
        logs.push((id, cfg.log_score(v).0));
    }
    if logs.is_empty() {
        return Ok(WinDistribution::no_sale(tag));
    }
    let norm = lse_iter(logs.iter().map(|&(_, l)| l));
    Ok(WinDistribution {
        mechanism: tag,
        prob: logs
            .into_iter()
            .map(|(id, l)| (id, (l - norm).exp()))
            .collect(),
        no_sale: 0.0,
    })
}

/// Exponential mechanism over every buyer reachable from the seller.
pub fn emd_distribution(
    reachable: &BTreeSet<BuyerId>,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
) -> Result<WinDistribution, MechanismError> {
    softmax_over(MechanismTag::Emd, reachable, profiles, cfg)
}

/// Exponential mechanism restricted to the seller's reported neighbors.
/// Neighbors that submitted no profile are not part of the market.
pub fn emwd_distribution(
    seller_neighbors: &BTreeSet<BuyerId>,
    profiles: &GlobalProfile,
    cfg: &ScoreConfig,
) -> Result<WinDistribution, MechanismError> {
    let present: BTreeSet<BuyerId> = seller_neighbors
        .iter()
        .copied()
        .filter(|id| profiles.profiles.contains_key(id))
        .collect();
    softmax_over(MechanismTag::Emwd, &present, profiles, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven, seven_buyer, three_node};
    use crate::graph::{build_profile_digraph, reachable_from_seller};
    use crate::mechanisms::{Market, Mechanism};

    #[test]
    fn emd_three_node() {
        let p = three_node();
        let cfg = ScoreConfig::new(1.0, 10.0).unwrap();
        let reach = reachable_from_seller(&build_profile_digraph(&p).unwrap());
        let d = emd_distribution(&reach, &p, &cfg).unwrap();
        let want = [0.090_030_573_170_380_46, 0.244_728_471_054_797_65, 0.665_240_955_774_821_9];
        for (i, w) in want.iter().enumerate() {
            assert!((d.probability(BuyerId(i as u32 + 1)) - w).abs() < 1e-12);
        }
        // Tree-based path agrees with the set-based one.
        let via_tree = Mechanism::Emd.distribution(&Market::from_reports(&p).unwrap(), &cfg).unwrap();
        for (id, pr) in &d.prob {
            assert!((via_tree.probability(*id) - pr).abs() < 1e-15);
        }
    }

    #[test]
    fn emd_degenerate_cases() {
        let p = three_node();
        let reach = reachable_from_seller(&build_profile_digraph(&p).unwrap());
        let d = emd_distribution(&reach, &p, &ScoreConfig::new(0.0, 10.0).unwrap()).unwrap();
        assert!(d.prob.values().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        let single = GlobalProfile::new([BuyerId(1)]).with_buyer(1, 2.0, []);
        let d = emd_distribution(&[BuyerId(1)].into(), &single, &ScoreConfig::new(1.0, 10.0).unwrap())
            .unwrap();
        assert_eq!(d.probability(BuyerId(1)), 1.0);
        let d = emd_distribution(&BTreeSet::new(), &single, &ScoreConfig::new(1.0, 10.0).unwrap())
            .unwrap();
        assert_eq!(d.no_sale, 1.0);
    }

    #[test]
    fn emwd_restricts_to_seller_neighbors() {
        let p = three_node();
        let cfg = ScoreConfig::new(1.0, 10.0).unwrap();
        let d = emwd_distribution(&p.seller_neighbors, &p, &cfg).unwrap();
        assert_eq!(d.prob.len(), 2);
        assert!((d.probability(BuyerId(1)) - 0.119_202_922_022_117_56).abs() < 1e-12);
        assert!((d.probability(BuyerId(3)) - 0.880_797_077_977_882_4).abs() < 1e-12);

        let eps = 0.1;
        let f = seven_buyer(11.0);
        let d = emwd_distribution(&f.seller_neighbors, &f, &ScoreConfig::new(eps, 100.0).unwrap()).unwrap();
        let z = (10.0 * eps).exp() + (8.0 * eps).exp() + (14.0 * eps).exp();
        assert!((d.probability(seven::C) - (14.0 * eps).exp() / z).abs() < 1e-15);

        // Buyer 3 sits at depth 1 of the critical tree without being a
        // seller neighbor.
        let diamond = GlobalProfile::new([BuyerId(1), BuyerId(2)])
            .with_buyer(1, 1.0, [3])
            .with_buyer(2, 2.0, [3])
            .with_buyer(3, 9.0, []);
        let market = Market::from_reports(&diamond).unwrap();
        assert_eq!(market.tree().depth(BuyerId(3)), Some(1));
        let via_tree = Mechanism::Emwd.distribution(&market, &cfg).unwrap();
        let via_set = emwd_distribution(&diamond.seller_neighbors, &diamond, &cfg).unwrap();
        assert_eq!(via_tree.probability(BuyerId(3)), 0.0);
        for id in [BuyerId(1), BuyerId(2)] {
            assert!((via_tree.probability(id) - via_set.probability(id)).abs() < 1e-15);
        }

        let lonely = GlobalProfile::default().with_buyer(1, 1.0, []);
        let d = emwd_distribution(&lonely.seller_neighbors, &lonely, &cfg).unwrap();
        assert_eq!(d.no_sale, 1.0);
    }
}
