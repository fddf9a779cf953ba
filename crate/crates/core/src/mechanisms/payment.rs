//! Payments that make each randomized rule truthful in expectation:
//!
//! ```text
//! p_w = v_w − ∫₀^{v_w} Pr_w(x) dx / Pr_w(v_w)
//! ```
//!
//! where `Pr_w(x)` is `w`'s winning probability with its own report set to
//! `x` and every other report held fixed.

use crate::error::MechanismError;
use crate::graph::{BuyerId, CriticalTree};
use crate::quadrature::{integrate, Integral, QuadratureOptions};
use crate::scoring::{lse2, lse_iter, ScoreConfig};

use super::{GammaSequence, Market, Mechanism};

/// `x ↦ Pr_w(x)` for one buyer in one market.
#[derive(Clone, Debug)]
pub struct ProbabilityCurve {
    buyer: BuyerId,
    epsilon: f64,
    kind: CurveKind,
}

#[derive(Clone, Debug)]
enum CurveKind {
    /// `γ · e^{εx} / (e^{εx} + e^{rest})`.
    Softmax { gamma: f64, log_rest: f64 },
    /// Root-to-buyer path of the recursive rule; see [`rec_path_prob`].
    RecPath(RecPath),
    /// Recompute the whole distribution for each `x`.
    Generic {
        mech: Mechanism,
        market: Market,
        cfg: ScoreConfig,
        index: usize,
    },
}

/// Log-space parameters of a curve, for independent re-evaluation.
pub(crate) enum CurveParams {
    Softmax { gamma: f64, log_rest: f64 },
    /// `[log own, log siblings, log off-path]` per path node, seller's
    /// child first.
    RecPath(Vec<[f64; 3]>),
    Generic,
}

/// Path parameters plus a linear-space copy of them.
#[derive(Clone, Debug)]
struct RecPath {
    steps: Vec<PathStep>,
    /// Largest finite constant log weight on the path.
    shift: f64,
    /// `[own, siblings, off-path]` as `e^{l − shift}`; empty when some weight
    /// would underflow, in which case only the log-space form is used.
    linear: Vec<[f64; 3]>,
}

/// Largest `|l − shift|` handled in linear space.
const LINEAR_RANGE: f64 = 600.0;

impl RecPath {
    fn new(steps: Vec<PathStep>) -> Self {
        let logs = || steps.iter().flat_map(|s| [s.log_own, s.log_siblings, s.log_off_path]);
        let shift = logs().filter(|l| l.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let fits = logs().all(|l| l == f64::NEG_INFINITY || l - shift >= -LINEAR_RANGE);
        let linear = if fits {
            steps
                .iter()
                .map(|s| [s.log_own, s.log_siblings, s.log_off_path].map(|l| (l - shift).exp()))
                .collect()
        } else {
            Vec::new()
        };
        RecPath { steps, shift, linear }
    }

    fn eval(&self, lx: f64) -> f64 {
        let t = lx - self.shift;
        if self.linear.is_empty() || t.abs() > LINEAR_RANGE {
            rec_path_prob(&self.steps, lx)
        } else {
            rec_path_prob_linear(&self.linear, t.exp())
        }
    }
}

/// One node on the path from the seller's child down to the buyer.
#[derive(Clone, Copy, Debug)]
struct PathStep {
    log_own: f64,
    log_siblings: f64,
    /// Children's subtrees other than the next node on the path; for the
    /// buyer itself, all of its descendants.
    log_off_path: f64,
}

impl ProbabilityCurve {
    /// Fast evaluator specialised to the mechanism's structure.
    pub fn new(
        mech: &Mechanism,
        market: &Market,
        cfg: &ScoreConfig,
        buyer: BuyerId,
    ) -> Result<Self, MechanismError> {
        let w = market
            .tree()
            .index_of(buyer)
            .filter(|&i| i != 0)
            .ok_or(MechanismError::Unreachable(buyer))?;
        CurveBuilder::new(mech, market.tree(), market.valuations(), cfg)?.curve(w)
    }

    /// Evaluator that recomputes the full distribution at every point.
    pub fn generic(
        mech: &Mechanism,
        market: &Market,
        cfg: &ScoreConfig,
        buyer: BuyerId,
    ) -> Result<Self, MechanismError> {
        if !mech.is_randomized() {
            return Err(MechanismError::NotRandomized("IDM"));
        }
        let index = market
            .tree()
            .index_of(buyer)
            .filter(|&i| i != 0)
            .ok_or(MechanismError::Unreachable(buyer))?;
        Ok(ProbabilityCurve {
            buyer,
            epsilon: cfg.epsilon,
            kind: CurveKind::Generic {
                mech: mech.clone(),
                market: market.clone(),
                cfg: *cfg,
                index,
            },
        })
    }

    pub fn buyer(&self) -> BuyerId {
        self.buyer
    }

    pub(crate) fn params(&self) -> CurveParams {
        match &self.kind {
            CurveKind::Softmax { gamma, log_rest } => CurveParams::Softmax {
                gamma: *gamma,
                log_rest: *log_rest,
            },
            CurveKind::RecPath(path) => CurveParams::RecPath(
                path.steps
                    .iter()
                    .map(|s| [s.log_own, s.log_siblings, s.log_off_path])
                    .collect(),
            ),
            CurveKind::Generic { .. } => CurveParams::Generic,
        }
    }

    /// Bit pattern of the parameters; curves with equal keys are equal.
    pub(crate) fn key(&self) -> Vec<u64> {
        let q = |x: f64| x.to_bits();
        let mut key = vec![self.epsilon.to_bits()];
        match &self.kind {
            CurveKind::Softmax { gamma, log_rest } => {
                key.extend([0, q(*gamma), q(*log_rest)]);
            }
            CurveKind::RecPath(RecPath { steps, .. }) => {
                key.push(1);
                for s in &steps[..steps.len() - 1] {
                    key.extend([q(s.log_own), q(s.log_siblings), q(s.log_off_path)]);
                }
                let last = steps[steps.len() - 1];
                key.extend([q(last.log_siblings), q(last.log_off_path)]);
            }
            CurveKind::Generic { .. } => unreachable!("generic curves are not memoized"),
        }
        key
    }

    /// `Pr_w(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let lx = self.epsilon * x;
        match &self.kind {
            CurveKind::Softmax { gamma, log_rest } => gamma / (1.0 + (log_rest - lx).exp()),
            CurveKind::RecPath(path) => path.eval(lx),
            CurveKind::Generic {
                mech,
                market,
                cfg,
                index,
            } => {
                let mut vals = market.valuations().to_vec();
                vals[*index] = x;
                mech.dense(market.tree(), &vals, cfg)
                    .map(|d| d.prob[*index])
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// `∫₀^upper Pr_w(x) dx`.
    pub fn integral(&self, upper: f64, opts: &QuadratureOptions) -> Integral {
        integrate(|x| self.eval(x), 0.0, upper, opts)
    }

    /// Payment when the buyer wins with report `v`.
    pub fn payment(&self, v: f64, opts: &QuadratureOptions) -> Result<f64, MechanismError> {
        self.area_and_payment(v, opts).1
    }

    /// `∫₀^v Pr_w` together with the payment it implies.
    pub(crate) fn area_and_payment(
        &self,
        v: f64,
        opts: &QuadratureOptions,
    ) -> (f64, Result<f64, MechanismError>) {
        let pv = self.eval(v);
        let area = self.integral(v, opts).value;
        if !(pv > 0.0) {
            return (area, Err(MechanismError::UndefinedPayment(self.buyer)));
        }
        if v == 0.0 || self.epsilon == 0.0 {
            return (area, Ok(0.0));
        }
        (area, Ok((v - area / pv).clamp(0.0, v)))
    }
}

/// Shared per-market state for building the curves of many buyers.
pub(crate) struct CurveBuilder<'a> {
    mech: &'a Mechanism,
    tree: &'a CriticalTree,
    epsilon: f64,
    logs: Vec<f64>,
    /// `log Exp(T[u])`, filled for the recursive rule only.
    log_subtree: Vec<f64>,
}

impl<'a> CurveBuilder<'a> {
    pub(crate) fn new(
        mech: &'a Mechanism,
        tree: &'a CriticalTree,
        valuations: &[f64],
        cfg: &ScoreConfig,
    ) -> Result<Self, MechanismError> {
        if !mech.is_randomized() {
            return Err(MechanismError::NotRandomized("IDM"));
        }
        let logs: Vec<f64> = valuations.iter().map(|&v| cfg.log_score(v).0).collect();
        let mut log_subtree = Vec::new();
        if let Mechanism::Rec = mech {
            let n = tree.len();
            log_subtree = vec![f64::NEG_INFINITY; n];
            for i in (1..n).rev() {
                let desc = lse_iter(tree.children_indices(i).iter().map(|&c| log_subtree[c]));
                log_subtree[i] = lse2(logs[i], desc);
            }
        }
        Ok(CurveBuilder {
            mech,
            tree,
            epsilon: cfg.epsilon,
            logs,
            log_subtree,
        })
    }

    /// Curve of the buyer at tree index `w >= 1`.
    pub(crate) fn curve(&self, w: usize) -> Result<ProbabilityCurve, MechanismError> {
        let tree = self.tree;
        let logs = &self.logs;
        let depth = tree.depth_at(w);
        let companions = |keep: &dyn Fn(usize) -> bool| {
            lse_iter((1..tree.len()).filter(|&i| i != w && keep(i)).map(|i| logs[i]))
        };
        let kind = match self.mech {
            Mechanism::Idm => return Err(MechanismError::NotRandomized("IDM")),
            Mechanism::Emd => CurveKind::Softmax {
                gamma: 1.0,
                log_rest: companions(&|_| true),
            },
            Mechanism::Emwd => CurveKind::Softmax {
                gamma: if tree.is_seller_neighbor_at(w) { 1.0 } else { 0.0 },
                log_rest: companions(&|i| tree.is_seller_neighbor_at(i)),
            },
            Mechanism::Lay(gamma) => CurveKind::Softmax {
                gamma: gamma.gamma(depth),
                log_rest: companions(&|i| tree.depth_at(i) == depth),
            },
            Mechanism::Rec => CurveKind::RecPath(RecPath::new(self.rec_path(w))),
        };
        Ok(ProbabilityCurve {
            buyer: tree.id_at(w),
            epsilon: self.epsilon,
            kind,
        })
    }

    fn rec_path(&self, w: usize) -> Vec<PathStep> {
        let tree = self.tree;
        let mut path = vec![w];
        while tree.parent_index(*path.last().unwrap()) != 0 {
            path.push(tree.parent_index(*path.last().unwrap()));
        }
        path.reverse();
        let log_subtree = &self.log_subtree;
        path.iter()
            .enumerate()
            .map(|(k, &u)| {
                let parent = tree.parent_index(u);
                let next = path.get(k + 1).copied();
                PathStep {
                    log_own: self.logs[u],
                    log_siblings: lse_iter(
                        tree.children_indices(parent)
                            .iter()
                            .filter(|&&c| c != u)
                            .map(|&c| log_subtree[c]),
                    ),
                    log_off_path: lse_iter(
                        tree.children_indices(u)
                            .iter()
                            .filter(|&&c| Some(c) != next)
                            .map(|&c| log_subtree[c]),
                    ),
                }
            })
            .collect()
    }
}

/// Recursive-rule probability of the last node on the path when its log
/// score is `lx`. Only the path's subtree sums depend on `lx`, so each
/// evaluation is linear in the depth.
fn rec_path_prob(steps: &[PathStep], lx: f64) -> f64 {
    let k = steps.len();
    let last = steps[k - 1];
    // Walk bottom-up carrying log Exp of everything below the current node.
    let mut below = lse2(lx, last.log_off_path);
    let mut r = lx - lse2(lx, last.log_siblings);
    for s in steps[..k - 1].iter().rev() {
        if s.log_siblings == f64::NEG_INFINITY {
            return 0.0;
        }
        let desc = lse2(s.log_off_path, below);
        let xz = lse2(s.log_own, s.log_siblings);
        r += desc + s.log_siblings - lse2(xz, desc) - xz;
        below = lse2(s.log_own, desc);
    }
    r.exp().min(1.0)
}

/// [`rec_path_prob`] with plain weights; `x` is the buyer's own weight.
fn rec_path_prob_linear(steps: &[[f64; 3]], x: f64) -> f64 {
    let k = steps.len();
    let [_, z_w, off_w] = steps[k - 1];
    let mut below = x + off_w;
    let mut r = x / (x + z_w);
    for &[own, sib, off] in steps[..k - 1].iter().rev() {
        if sib == 0.0 {
            return 0.0;
        }
        let desc = off + below;
        r *= desc * sib / ((own + sib + desc) * (own + sib));
        below = own + desc;
    }
    r.min(1.0)
}

/// Expected-truthful payment of winner `w`, by quadrature.
pub fn winner_payment(
    mech: &Mechanism,
    market: &Market,
    cfg: &ScoreConfig,
    w: BuyerId,
) -> Result<f64, MechanismError> {
    market.check_bound(cfg)?;
    let v = market.valuation(w).ok_or(MechanismError::Unreachable(w))?;
    ProbabilityCurve::new(mech, market, cfg, w)?.payment(v, &QuadratureOptions::default())
}

/// Layered-rule payment in closed form. With `C` the `Exp` weight of `w`'s
/// layer companions, `∫₀^v Pr_w = γ/ε · ln((e^{εv} + C) / (1 + C))`.
pub fn lay_payment_closed_form(
    market: &Market,
    cfg: &ScoreConfig,
    gamma: &GammaSequence,
    w: BuyerId,
) -> Result<f64, MechanismError> {
    market.check_bound(cfg)?;
    let v = market.valuation(w).ok_or(MechanismError::Unreachable(w))?;
    let curve = ProbabilityCurve::new(&Mechanism::Lay(gamma.clone()), market, cfg, w)?;
    let CurveKind::Softmax { gamma: g, log_rest } = curve.kind else {
        unreachable!("layered curves are softmax curves")
    };
    let pv = curve.eval(v);
    if !(pv > 0.0) {
        return Err(MechanismError::UndefinedPayment(w));
    }
    let eps = cfg.epsilon;
    let area = if eps == 0.0 {
        g * v / (1.0 + log_rest.exp())
    } else {
        let inv_one_plus_c = (-lse2(0.0, log_rest)).exp();
        g / eps * ((eps * v).exp_m1() * inv_one_plus_c).ln_1p()
    };
    Ok((v - area / pv).clamp(0.0, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven, seven_buyer, three_node};
    use crate::graph::GlobalProfile;

    fn lay2() -> Mechanism {
        Mechanism::Lay(GammaSequence::geometric(2.0).unwrap())
    }

    #[test]
    fn lay_three_node_payment() {
        let cfg = ScoreConfig::new(1.0, 10.0).unwrap();
        let market = Market::from_reports(&three_node()).unwrap();
        let c = BuyerId(3);
        let curve = ProbabilityCurve::new(&lay2(), &market, &cfg, c).unwrap();
        let area = curve.integral(3.0, &QuadratureOptions::default()).value;
        assert!((area - 0.906_833_161_762_374_8).abs() < 1e-9);
        let p = winner_payment(&lay2(), &market, &cfg, c).unwrap();
        assert!((p - 0.940_880_630_884_322_3).abs() < 1e-8);
        let closed = lay_payment_closed_form(&market, &cfg, &GammaSequence::geometric(2.0).unwrap(), c)
            .unwrap();
        assert!((closed - 0.940_880_630_884_322_3).abs() < 1e-12);
    }

    #[test]
    fn three_node_payment_identities() {
        // p·Pr(v) = v·Pr(v) − ∫₀^v Pr.
        let cfg = ScoreConfig::new(1.0, 10.0).unwrap();
        let market = Market::from_reports(&three_node()).unwrap();
        let c = BuyerId(3);
        let curve = ProbabilityCurve::new(&lay2(), &market, &cfg, c).unwrap();
        let p = winner_payment(&lay2(), &market, &cfg, c).unwrap();
        assert!((p * curve.eval(3.0) - 0.414_362_455_204_448_83).abs() < 1e-9);

        let b = BuyerId(2);
        let curve = ProbabilityCurve::new(&Mechanism::Rec, &market, &cfg, b).unwrap();
        let p = winner_payment(&Mechanism::Rec, &market, &cfg, b).unwrap();
        assert!((p - 1.028_474_521_728_788_4).abs() < 1e-8);
        assert!((p * curve.eval(2.0) - 0.221_693_979_688_504_97).abs() < 1e-9);
    }

    #[test]
    fn fast_curves_match_full_recomputation() {
        let cfg = ScoreConfig::new(0.2, 100.0).unwrap();
        let market = Market::from_reports(&seven_buyer(11.0)).unwrap();
        let mechs = [Mechanism::Rec, lay2(), Mechanism::Emd, Mechanism::Emwd];
        for mech in &mechs {
            for id in 1..=7 {
                let fast = ProbabilityCurve::new(mech, &market, &cfg, BuyerId(id)).unwrap();
                let slow = ProbabilityCurve::generic(mech, &market, &cfg, BuyerId(id)).unwrap();
                for x in [0.0, 3.0, 9.5, 15.0, 40.0, 100.0] {
                    let (a, b) = (fast.eval(x), slow.eval(x));
                    assert!((a - b).abs() < 1e-13, "{} buyer {id} x={x}: {a} vs {b}", mech.tag());
                }
            }
        }
    }

    #[test]
    fn linear_and_log_path_forms_agree() {
        let market = Market::from_reports(&seven_buyer(11.0)).unwrap();
        for eps in [0.01, 0.3, 2.0] {
            let cfg = ScoreConfig::new(eps, 100.0).unwrap();
            for id in 1..=7 {
                let c = ProbabilityCurve::new(&Mechanism::Rec, &market, &cfg, BuyerId(id)).unwrap();
                let CurveKind::RecPath(path) = &c.kind else { unreachable!() };
                assert!(!path.linear.is_empty());
                for x in [0.0, 1.0, 11.0, 30.0, 100.0] {
                    let lx = eps * x;
                    let log = rec_path_prob(&path.steps, lx);
                    let lin = rec_path_prob_linear(&path.linear, (lx - path.shift).exp());
                    assert!((log - lin).abs() <= 1e-14 + 1e-12 * log, "{id} {x}: {log} vs {lin}");
                }
            }
        }
        // Weights 700 apart in log space only fit the log form.
        let cfg = ScoreConfig::new(7.0, 100.0).unwrap();
        let p = GlobalProfile::new([BuyerId(1), BuyerId(2)])
            .with_buyer(1, 0.0, [3])
            .with_buyer(2, 100.0, [])
            .with_buyer(3, 50.0, []);
        let market = Market::from_reports(&p).unwrap();
        let c = ProbabilityCurve::new(&Mechanism::Rec, &market, &cfg, BuyerId(3)).unwrap();
        let CurveKind::RecPath(path) = &c.kind else { unreachable!() };
        assert!(path.linear.is_empty());
        let slow = ProbabilityCurve::generic(&Mechanism::Rec, &market, &cfg, BuyerId(3)).unwrap();
        for x in [0.0, 50.0, 100.0] {
            let (a, b) = (c.eval(x), slow.eval(x));
            assert!((a - b).abs() <= 1e-300 + 1e-12 * b, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn softmax_closed_form_matches_quadrature() {
        let gamma = GammaSequence::geometric(3.0).unwrap();
        for eps in [0.0, 1e-9, 0.01, 0.3, 5.0] {
            let cfg = ScoreConfig::new(eps, 100.0).unwrap();
            let market = Market::from_reports(&seven_buyer(11.0)).unwrap();
            for id in 1..=7 {
                let w = BuyerId(id);
                let q = winner_payment(&Mechanism::Lay(gamma.clone()), &market, &cfg, w).unwrap();
                let c = lay_payment_closed_form(&market, &cfg, &gamma, w).unwrap();
                assert!((q - c).abs() < 1e-6 * c.max(1.0), "eps={eps} w={id}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn payments_within_zero_and_value() {
        let cfg = ScoreConfig::new(0.1, 100.0).unwrap();
        let market = Market::from_reports(&seven_buyer(11.0)).unwrap();
        for mech in [Mechanism::Rec, lay2(), Mechanism::Emd] {
            for (id, v) in [(seven::A, 10.0), (seven::F, 15.0), (seven::E, 12.0)] {
                let p = winner_payment(&mech, &market, &cfg, id).unwrap();
                assert!((0.0..=v).contains(&p));
            }
        }
    }

    #[test]
    fn degenerate_payments() {
        let cfg = ScoreConfig::new(0.5, 10.0).unwrap();
        // A lone buyer always wins, so it pays nothing.
        let single = Market::from_reports(&GlobalProfile::new([BuyerId(1)]).with_buyer(1, 4.0, [])).unwrap();
        assert_eq!(winner_payment(&Mechanism::Rec, &single, &cfg, BuyerId(1)).unwrap(), 0.0);
        assert_eq!(winner_payment(&Mechanism::Emd, &single, &cfg, BuyerId(1)).unwrap(), 0.0);

        let market = Market::from_reports(&three_node()).unwrap();
        assert!(matches!(
            winner_payment(&Mechanism::Emwd, &market, &cfg, BuyerId(2)),
            Err(MechanismError::UndefinedPayment(_))
        ));
        assert!(matches!(
            winner_payment(&Mechanism::Idm, &market, &cfg, BuyerId(3)),
            Err(MechanismError::NotRandomized(_))
        ));
        assert!(matches!(
            winner_payment(&Mechanism::Rec, &market, &cfg, BuyerId(9)),
            Err(MechanismError::Unreachable(_))
        ));
        let zero = market.with_valuation(BuyerId(3), 0.0).unwrap();
        assert_eq!(winner_payment(&Mechanism::Rec, &zero, &cfg, BuyerId(3)).unwrap(), 0.0);
    }

    #[test]
    fn zero_epsilon_payment_is_zero() {
        let cfg = ScoreConfig::new(0.0, 100.0).unwrap();
        let market = Market::from_reports(&seven_buyer(11.0)).unwrap();
        for mech in [Mechanism::Rec, lay2(), Mechanism::Emd] {
            let p = winner_payment(&mech, &market, &cfg, seven::E).unwrap();
            assert!(p.abs() < 1e-9);
        }
    }

    #[test]
    fn descendants_of_an_only_child_never_win_under_rec() {
        let cfg = ScoreConfig::new(0.1, 100.0).unwrap();
        let market = Market::from_reports(&seven_buyer(11.0)).unwrap();
        assert!(matches!(
            winner_payment(&Mechanism::Rec, &market, &cfg, seven::G),
            Err(MechanismError::UndefinedPayment(_))
        ));
    }
}
