//! Suites that run the checks over whole instance families.
//!
//! The small-instance family is every rooted tree shape with up to
//! `max_buyers` buyers, whose reports are exactly the tree edges, times
//! every assignment of grid valuations. Probability tables are computed
//! once per shape and valuation vector, so neighboring instances can be
//! compared by index arithmetic.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::fixtures::{seven, seven_buyer, SEVEN_BUYER_DEFAULT_VG};
use crate::graph::{BuyerId, CriticalTree, GlobalProfile};
use crate::instance::Instance;
use crate::mechanisms::payment::CurveBuilder;
use crate::mechanisms::{GammaSequence, Market, Mechanism, NORMALIZATION_TOL};
use crate::quadrature::QuadratureOptions;
use crate::scoring::ScoreConfig;

use super::checks::{
    check_neighbor_ic, check_normalization, check_rec_oracle, check_valuation_ic, check_welfare_bound,
    dp_ratio_bound, expected_sale_mass, ratio, riemann,
};
use super::riemann::{midpoint_integral, MidpointTable};
use super::generators::{
    for_each_grid_point, random_digraph_instance, random_tree_instance, tree_shapes_up_to, TreeShape,
};
use super::{
    PropertyReport, DP_TOL, IR_TOL, MONOTONICITY_SLACK, NEIGHBOR_IC_TOL, PAYMENT_IDENTITY_TOL,
    RIEMANN_PANELS,
};

/// Tree shapes × a valuation grid × a list of ε.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallFamily {
    pub max_buyers: usize,
    pub grid: Vec<f64>,
    pub epsilons: Vec<f64>,
}

impl SmallFamily {
    /// Valuations `{0, …, 4}`, `ε ∈ {0.1, 1.0}`.
    pub fn incentive(max_buyers: usize) -> Self {
        SmallFamily {
            max_buyers,
            grid: (0..=4).map(f64::from).collect(),
            epsilons: vec![0.1, 1.0],
        }
    }

    /// Valuations `{0, …, 5}`, `ε ∈ {0.1, 0.3}`.
    pub fn dp(max_buyers: usize) -> Self {
        SmallFamily {
            max_buyers,
            grid: (0..=5).map(f64::from).collect(),
            epsilons: vec![0.1, 0.3],
        }
    }

    fn v_max(&self) -> f64 {
        self.grid.iter().copied().fold(1.0, f64::max)
    }

    fn config(&self, eps: f64) -> ScoreConfig {
        ScoreConfig::new(eps, self.v_max()).expect("family configs are valid")
    }
}

/// One tree shape and the probabilities of every grid instance on it.
struct ShapeTable<'a> {
    shape: &'a TreeShape,
    tree: CriticalTree,
    /// Tree index of shape node `k + 1`.
    index: Vec<usize>,
    grid: &'a [f64],
    n: usize,
    /// Row `L` holds `Pr` of shape nodes `1..=n`, then the no-sale mass.
    probs: Vec<f64>,
}

impl<'a> ShapeTable<'a> {
    fn new(shape: &'a TreeShape, grid: &'a [f64]) -> Self {
        let n = shape.buyers();
        let market = Market::from_reports(&shape.to_profile(&vec![0.0; n])).expect("shapes are valid");
        let tree = market.tree().clone();
        let index = (1..=n).map(|k| tree.index_of(BuyerId(k as u32)).unwrap()).collect();
        ShapeTable {
            shape,
            tree,
            index,
            grid,
            n,
            probs: Vec::new(),
        }
    }

    fn rows(&self) -> usize {
        self.grid.len().pow(self.n as u32)
    }

    fn stride(&self, k: usize) -> usize {
        self.grid.len().pow(k as u32)
    }

    fn tree_valuations(&self, vals: &[f64]) -> Vec<f64> {
        let mut tv = vec![0.0; self.tree.len()];
        for (k, &v) in vals.iter().enumerate() {
            tv[self.index[k]] = v;
        }
        tv
    }

    fn valuations_of(&self, mut row: usize) -> Vec<f64> {
        (0..self.n)
            .map(|_| {
                let v = self.grid[row % self.grid.len()];
                row /= self.grid.len();
                v
            })
            .collect()
    }

    fn profile_of(&self, row: usize) -> GlobalProfile {
        self.shape.to_profile(&self.valuations_of(row))
    }

    fn fill(&mut self, mech: &Mechanism, cfg: &ScoreConfig) {
        let width = self.n + 1;
        let mut probs = Vec::with_capacity(self.rows() * width);
        for_each_grid_point(self.n, self.grid, |_, vals| {
            let d = mech
                .dense(&self.tree, &self.tree_valuations(vals), cfg)
                .expect("grid instances are valid");
            probs.extend(self.index.iter().map(|&i| d.prob[i]));
            probs.push(d.no_sale);
        });
        self.probs = probs;
    }

    fn pr(&self, row: usize, k: usize) -> f64 {
        self.probs[row * (self.n + 1) + k]
    }

    fn no_sale(&self, row: usize) -> f64 {
        self.probs[row * (self.n + 1) + self.n]
    }
}

fn family_instance(t: &ShapeTable, row: usize, mech: &Mechanism, cfg: &ScoreConfig) -> Instance {
    Instance::new(t.profile_of(row), cfg).with_mechanism(mech)
}

#[derive(Clone, Copy)]
struct PaymentFacts {
    identity: f64,
    expected_utility: f64,
    realized_utility: f64,
}

/// Normalization, valuation monotonicity, the payment identity and IR on
/// every instance of the family.
pub fn incentive_suite(family: &SmallFamily, mechs: &[Mechanism]) -> Vec<PropertyReport> {
    let shapes = tree_shapes_up_to(family.max_buyers);
    let jobs: Vec<(&Mechanism, f64)> = mechs
        .iter()
        .flat_map(|m| family.epsilons.iter().map(move |&e| (m, e)))
        .collect();
    let parts: Vec<Vec<PropertyReport>> = jobs
        .par_iter()
        .map(|&(mech, eps)| incentive_job(family, &shapes, mech, eps))
        .collect();
    merge_all(parts)
}

fn incentive_job(family: &SmallFamily, shapes: &[TreeShape], mech: &Mechanism, eps: f64) -> Vec<PropertyReport> {
    let cfg = family.config(eps);
    let tag = mech.tag();
    let mut norm = PropertyReport::new(format!("normalization/{tag}"), NORMALIZATION_TOL);
    let mut mono = PropertyReport::new(format!("monotonicity/{tag}"), MONOTONICITY_SLACK);
    let mut ident = PropertyReport::new(format!("payment-identity/{tag}"), PAYMENT_IDENTITY_TOL);
    let mut ir = PropertyReport::new(format!("ir/{tag}"), IR_TOL);
    let opts = QuadratureOptions::default();
    let mut memo: HashMap<(Vec<u64>, u64), PaymentFacts> = HashMap::new();
    let tables: Vec<MidpointTable> = family
        .grid
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| MidpointTable::new(eps, v, eps * family.v_max(), RIEMANN_PANELS))
        .collect();

    for shape in shapes {
        let mut t = ShapeTable::new(shape, &family.grid);
        t.fill(mech, &cfg);
        let sale = expected_sale_mass(mech, &t.tree);
        let g = family.grid.len();
        for row in 0..t.rows() {
            let vals = t.valuations_of(row);
            let total: f64 = (0..t.n).map(|k| t.pr(row, k)).sum::<f64>();
            let violation = (total + t.no_sale(row) - 1.0).abs().max((total - sale).abs());
            norm.record(violation, || family_instance(&t, row, mech, &cfg));

            let tv = t.tree_valuations(&vals);
            let builder = CurveBuilder::new(mech, &t.tree, &tv, &cfg).expect("randomized mechanism");
            for k in 0..t.n {
                let step = (row / t.stride(k)) % g;
                let here = t.pr(row, k);
                if step + 1 < g {
                    let up = t.pr(row + t.stride(k), k);
                    mono.record(here - up, || {
                        family_instance(&t, row, mech, &cfg).with_buyer(BuyerId(k as u32 + 1))
                    });
                }

                let v = vals[k];
                let curve = builder.curve(t.index[k]).expect("reachable");
                let consistency = (curve.eval(v) - here).abs();
                let facts = *memo.entry((curve.key(), v.to_bits())).or_insert_with(|| {
                    let pv = curve.eval(v);
                    let (eu, payment) = curve.area_and_payment(v, &opts);
                    if pv > 0.0 {
                        let p = payment.expect("positive probability");
                        let sum = tables
                            .iter()
                            .find(|t| t.upper == v)
                            .and_then(|t| midpoint_integral(&curve, t))
                            .unwrap_or_else(|| riemann(|x| curve.eval(x), 0.0, v, RIEMANN_PANELS));
                        let rhs = v * pv - sum;
                        PaymentFacts {
                            identity: (p * pv - rhs).abs(),
                            expected_utility: eu,
                            realized_utility: v - p,
                        }
                    } else {
                        PaymentFacts {
                            identity: 0.0,
                            expected_utility: eu,
                            realized_utility: 0.0,
                        }
                    }
                });
                let buyer = BuyerId(k as u32 + 1);
                if here > 0.0 {
                    ident.record(facts.identity.max(consistency), || {
                        family_instance(&t, row, mech, &cfg).with_buyer(buyer)
                    });
                }
                ir.record((-facts.expected_utility).max(-facts.realized_utility), || {
                    family_instance(&t, row, mech, &cfg).with_buyer(buyer)
                });
            }
        }
    }
    vec![norm, mono, ident, ir]
}

/// Neighbor hiding on the small family (every proper subset of every
/// buyer's children) plus the hiding scenario of the seven-buyer example
/// network and random digraphs where hiding can also reshuffle nodes
/// outside the hider's subtree.
pub fn neighbor_ic_suite(
    family: &SmallFamily,
    mechs: &[Mechanism],
    random_digraphs: usize,
    seed: u64,
) -> Vec<PropertyReport> {
    let shapes = tree_shapes_up_to(family.max_buyers);
    let jobs: Vec<(&Mechanism, f64)> = mechs
        .iter()
        .flat_map(|m| family.epsilons.iter().map(move |&e| (m, e)))
        .collect();
    let mut parts: Vec<Vec<PropertyReport>> = jobs
        .par_iter()
        .map(|&(mech, eps)| vec![neighbor_ic_job(family, &shapes, mech, eps)])
        .collect();

    for mech in mechs {
        let mut fig = PropertyReport::new(format!("neighbor-ic-example/{}", mech.tag()), NEIGHBOR_IC_TOL);
        for eps in [0.01, 0.1, 0.3] {
            let cfg = ScoreConfig::new(eps, 100.0).expect("valid");
            let p = seven_buyer(SEVEN_BUYER_DEFAULT_VG);
            for id in [seven::A, seven::B, seven::F] {
                fig.merge(check_neighbor_ic(mech, &p, &cfg, id).expect("valid instance"));
            }
        }
        parts.push(vec![fig]);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dig = PropertyReport::new(format!("neighbor-ic-digraph/{}", mech.tag()), NEIGHBOR_IC_TOL);
        for _ in 0..random_digraphs {
            let p = random_digraph_instance(8, 6, 10.0, &mut rng);
            let cfg = ScoreConfig::new(rng.random_range(0.05..1.0), 10.0).expect("valid");
            for id in p.profiles.keys().copied().collect::<Vec<_>>() {
                dig.merge(check_neighbor_ic(mech, &p, &cfg, id).expect("valid instance"));
            }
        }
        parts.push(vec![dig]);
    }
    merge_all(parts)
}

fn neighbor_ic_job(family: &SmallFamily, shapes: &[TreeShape], mech: &Mechanism, eps: f64) -> PropertyReport {
    let cfg = family.config(eps);
    let mut report = PropertyReport::new(format!("neighbor-ic/{}", mech.tag()), NEIGHBOR_IC_TOL);
    for shape in shapes {
        let mut t = ShapeTable::new(shape, &family.grid);
        t.fill(mech, &cfg);
        let n = t.n;
        let base = shape.to_profile(&vec![0.0; n]);
        for k in 1..=n {
            let kids = shape.children(k);
            let hider = BuyerId(k as u32);
            let depth = t.tree.depth(hider);
            for mask in 0..(1u32 << kids.len()) - 1 {
                let kept: BTreeSet<BuyerId> = kids
                    .iter()
                    .enumerate()
                    .filter(|&(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &c)| BuyerId(c as u32))
                    .collect();
                // The misreport's tree does not depend on valuations.
                let deviated = base.with_neighbors(hider, kept.clone());
                let dm = Market::from_reports(&deviated).expect("valid");
                let dtree = dm.tree();
                let same_depth = dtree.depth(hider) == depth;
                if matches!(mech, Mechanism::Lay(_)) && !same_depth {
                    continue;
                }
                let hider_idx = dtree.index_of(hider).expect("hider stays reachable");
                for_each_grid_point(n, &family.grid, |idx, vals| {
                    let row: usize = idx.iter().enumerate().map(|(b, &i)| i * t.stride(b)).sum();
                    let mut dv = vec![0.0; dtree.len()];
                    for i in 1..dtree.len() {
                        dv[i] = vals[dtree.id_at(i).0 as usize - 1];
                    }
                    let p = mech.dense(dtree, &dv, &cfg).expect("valid").prob[hider_idx];
                    let full = t.pr(row, k - 1);
                    let violation = match mech {
                        Mechanism::Lay(_) => (p - full).abs(),
                        _ => p - full,
                    };
                    report.record(violation, || {
                        let profile = t.profile_of(row);
                        let dev = profile.with_neighbors(hider, kept.clone());
                        Instance::new(profile, &cfg)
                            .with_mechanism(mech)
                            .with_buyer(hider)
                            .with_deviated(dev)
                            .with_note(format!("Pr {full} under the full report, {p} after hiding"))
                    });
                });
            }
        }
    }
    report
}

/// Probability ratios for every pair of family instances that differ in
/// exactly one buyer's valuation.
pub fn dp_suite(family: &SmallFamily, mechs: &[Mechanism]) -> Vec<PropertyReport> {
    let shapes = tree_shapes_up_to(family.max_buyers);
    let jobs: Vec<(&Mechanism, f64)> = mechs
        .iter()
        .flat_map(|m| family.epsilons.iter().map(move |&e| (m, e)))
        .collect();
    let parts: Vec<Vec<PropertyReport>> = jobs
        .par_iter()
        .map(|&(mech, eps)| vec![dp_job(family, &shapes, mech, eps)])
        .collect();
    merge_all(parts)
}

fn dp_job(family: &SmallFamily, shapes: &[TreeShape], mech: &Mechanism, eps: f64) -> PropertyReport {
    let cfg = family.config(eps);
    let mut report = PropertyReport::new(format!("dp/{}", mech.tag()), DP_TOL);
    let g = family.grid.len();
    for shape in shapes {
        let mut t = ShapeTable::new(shape, &family.grid);
        t.fill(mech, &cfg);
        let d_max = t.tree.d_max();
        for row in 0..t.rows() {
            for k in 0..t.n {
                let step = (row / t.stride(k)) % g;
                for up in step + 1..g {
                    let other = row + (up - step) * t.stride(k);
                    let delta = family.grid[up] - family.grid[step];
                    let bound = dp_ratio_bound(mech, &cfg, d_max, delta);
                    let worst = (0..=t.n)
                        .map(|o| ratio(t.probs[row * (t.n + 1) + o], t.probs[other * (t.n + 1) + o]))
                        .fold(1.0, f64::max);
                    report.record(worst - bound, || {
                        Instance::new(t.profile_of(row), &cfg)
                            .with_mechanism(mech)
                            .with_buyer(BuyerId(k as u32 + 1))
                            .with_deviated(t.profile_of(other))
                            .with_note(format!("max ratio {worst}, bound {bound}"))
                    });
                }
            }
        }
    }
    report
}

const EPSILON_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.3];

/// Layered welfare bound on random digraph instances for each `a`.
pub fn welfare_suite(instances: usize, a_values: &[f64], seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    for (j, &a) in a_values.iter().enumerate() {
        let gamma = GammaSequence::geometric(a).expect("a > 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let mut r = PropertyReport::new(format!("welfare-bound/LAY a={a}"), super::WELFARE_TOL);
        for k in 0..instances {
            let buyers = rng.random_range(1..=40);
            let p = random_digraph_instance(buyers, buyers / 2, 100.0, &mut rng);
            let cfg = ScoreConfig::new(EPSILON_GRID[k % EPSILON_GRID.len()], 100.0).expect("valid");
            r.merge(check_welfare_bound(&p, &cfg, &gamma).expect("valid instance"));
        }
        out.push(r);
    }
    out
}

/// REC against its closed-form ancestor product on random instances.
pub fn rec_oracle_suite(instances: usize, max_buyers: usize, seed: u64) -> PropertyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = PropertyReport::new("rec-oracle", super::ORACLE_TOL);
    for k in 0..instances {
        let buyers = rng.random_range(1..=max_buyers);
        let p = random_digraph_instance(buyers, buyers / 3, 100.0, &mut rng);
        let cfg = ScoreConfig::new(EPSILON_GRID[k % EPSILON_GRID.len()], 100.0).expect("valid");
        r.merge(check_rec_oracle(&p, &cfg).expect("valid instance"));
    }
    r
}

/// Normalization on random trees with up to `max_nodes` nodes.
pub fn normalization_suite(trees: usize, max_nodes: usize, seed: u64, mechs: &[Mechanism]) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports: Vec<PropertyReport> = mechs
        .iter()
        .map(|m| PropertyReport::new(format!("normalization-random/{}", m.tag()), NORMALIZATION_TOL))
        .collect();
    for k in 0..trees {
        let buyers = rng.random_range(1..max_nodes.max(2));
        let p = random_tree_instance(buyers, 100.0, &mut rng);
        let cfg = ScoreConfig::new(EPSILON_GRID[k % EPSILON_GRID.len()], 100.0).expect("valid");
        for (m, r) in mechs.iter().zip(&mut reports) {
            r.merge(check_normalization(m, &p, &cfg).expect("valid instance"));
        }
    }
    reports
}

/// Direct valuation-IC check over a 21-point grid on the example network
/// and random digraphs.
pub fn valuation_ic_suite(instances: usize, seed: u64, mechs: &[Mechanism]) -> Vec<PropertyReport> {
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 5.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profiles = vec![seven_buyer(SEVEN_BUYER_DEFAULT_VG)];
    profiles.extend((0..instances).map(|_| random_digraph_instance(8, 4, 100.0, &mut rng)));
    mechs
        .iter()
        .map(|mech| {
            let mut r = PropertyReport::new(format!("valuation-ic/{}", mech.tag()), super::VALUATION_IC_TOL);
            for (k, p) in profiles.iter().enumerate() {
                let cfg = ScoreConfig::new(EPSILON_GRID[k % EPSILON_GRID.len()], 100.0).expect("valid");
                let market = Market::from_reports(p).expect("valid");
                for id in market.tree().reachable().collect::<Vec<_>>() {
                    r.merge(check_valuation_ic(mech, p, &cfg, id, &grid).expect("reachable"));
                }
            }
            r
        })
        .collect()
}

/// Merges reports with the same property name, keeping first-seen order,
/// then sorts by name.
fn merge_all(parts: Vec<Vec<PropertyReport>>) -> Vec<PropertyReport> {
    let mut out: Vec<PropertyReport> = Vec::new();
    for r in parts.into_iter().flatten() {
        match out.iter_mut().find(|o| o.property == r.property) {
            Some(o) => o.merge(r),
            None => out.push(r),
        }
    }
    out.sort_by(|a, b| a.property.cmp(&b.property));
    out
}

/// Suites selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SuiteName {
    Norm,
    Monotone,
    NeighborIc,
    Ir,
    Dp,
    Welfare,
    Oracle,
    All,
}

impl SuiteName {
    pub const NAMES: [&'static str; 8] = ["norm", "monotone", "neighbor-ic", "ir", "dp", "welfare", "oracle", "all"];
}

impl FromStr for SuiteName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "norm" => SuiteName::Norm,
            "monotone" => SuiteName::Monotone,
            "neighbor-ic" => SuiteName::NeighborIc,
            "ir" => SuiteName::Ir,
            "dp" => SuiteName::Dp,
            "welfare" => SuiteName::Welfare,
            "oracle" => SuiteName::Oracle,
            "all" => SuiteName::All,
            other => {
                return Err(format!(
                    "unknown suite `{other}`; expected one of {}",
                    SuiteName::NAMES.join(", ")
                ))
            }
        })
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(SuiteName::NAMES[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Largest number of buyers in the exhaustive tree family.
    pub max_buyers: usize,
    pub seed: u64,
    /// Size of each random-instance family.
    pub random_instances: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_buyers: 5,
            seed: 0,
            random_instances: 200,
        }
    }
}

/// The two private market-division rules.
pub fn dpdm_mechanisms() -> Vec<Mechanism> {
    vec![Mechanism::Rec, Mechanism::Lay(GammaSequence::geometric(2.0).expect("a > 1"))]
}

/// Every randomized rule.
pub fn randomized_mechanisms() -> Vec<Mechanism> {
    let mut m = dpdm_mechanisms();
    m.extend([Mechanism::Emd, Mechanism::Emwd]);
    m
}

/// Runs a named suite; reports come back sorted by property name.
pub fn run_suite(name: SuiteName, opts: &SuiteOptions) -> Vec<PropertyReport> {
    let n = opts.random_instances;
    let dpdm = dpdm_mechanisms();
    let all = randomized_mechanisms();
    let parts: Vec<Vec<PropertyReport>> = match name {
        SuiteName::Norm => vec![normalization_suite(n, 200, opts.seed, &all)],
        SuiteName::Monotone => {
            let mut r = incentive_suite(&SmallFamily::incentive(opts.max_buyers), &dpdm);
            r.retain(|p| p.property.starts_with("monotonicity") || p.property.starts_with("payment"));
            r.extend(valuation_ic_suite(n / 10, opts.seed, &dpdm));
            vec![r]
        }
        SuiteName::Ir => {
            let mut r = incentive_suite(&SmallFamily::incentive(opts.max_buyers), &dpdm);
            r.retain(|p| p.property.starts_with("ir/"));
            vec![r]
        }
        SuiteName::NeighborIc => vec![neighbor_ic_suite(
            &SmallFamily::incentive(opts.max_buyers),
            &dpdm,
            n / 4,
            opts.seed,
        )],
        SuiteName::Dp => vec![dp_suite(&SmallFamily::dp(opts.max_buyers), &all)],
        SuiteName::Welfare => vec![welfare_suite(n, &[1.25, 1.5, 2.0, 3.0], opts.seed)],
        SuiteName::Oracle => vec![vec![rec_oracle_suite(n, 60, opts.seed)]],
        SuiteName::All => vec![
            normalization_suite(n, 200, opts.seed, &all),
            incentive_suite(&SmallFamily::incentive(opts.max_buyers), &dpdm),
            valuation_ic_suite(n / 10, opts.seed, &dpdm),
            neighbor_ic_suite(&SmallFamily::incentive(opts.max_buyers), &dpdm, n / 4, opts.seed),
            dp_suite(&SmallFamily::dp(opts.max_buyers), &all),
            welfare_suite(n, &[1.25, 1.5, 2.0, 3.0], opts.seed),
            vec![rec_oracle_suite(n, 60, opts.seed)],
        ],
    };
    merge_all(parts)
}
