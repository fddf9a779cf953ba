//! Social-welfare sweeps over (mechanism, ε, a, valuation law) cells.
//!
//! Every run draws valuations (and the seller, unless fixed) from its own
//! ChaCha stream keyed by (law, run), builds the critical tree once and
//! evaluates every cell on it, so cells share their random draws and the
//! rows do not depend on how runs are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;
use crate::mechanisms::{GammaSequence, Market, Mechanism, MechanismTag};
use crate::scoring::ScoreConfig;

use super::config::{sample_valuations, DpAlignment, GraphSource, SellerChoice, SweepConfig, SweepMode, ValuationLaw};
use super::network::{load_edge_list, preferential_attachment, gnm, Network};

/// Stream reserved for generating a synthetic graph.
const GRAPH_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub mechanism: MechanismTag,
    /// The ε of the sweep grid, before any alignment scaling.
    pub epsilon: f64,
    /// Largest privacy level guaranteed in any run; empty for IDM.
    pub dp_bound: Option<f64>,
    pub a: Option<f64>,
    pub law: ValuationLaw,
    pub mean_sw: f64,
    pub stderr: f64,
    pub runs: usize,
    pub seed: u64,
}

/// One column of the sweep: a mechanism at one grid ε.
#[derive(Clone, Debug)]
struct Cell {
    mech: Mechanism,
    a: Option<f64>,
    epsilon: f64,
}

fn cells(cfg: &SweepConfig) -> Result<Vec<Cell>, ExperimentError> {
    let mut out = Vec::new();
    for &tag in &cfg.mechanisms {
        let variants: Vec<(Mechanism, Option<f64>)> = if tag == MechanismTag::Lay {
            cfg.a_values
                .iter()
                .map(|&a| Ok((Mechanism::Lay(GammaSequence::geometric(a)?), Some(a))))
                .collect::<Result<_, ExperimentError>>()?
        } else {
            vec![(Mechanism::from_tag(tag, None)?, None)]
        };
        for (mech, a) in variants {
            for &epsilon in &cfg.epsilons {
                out.push(Cell {
                    mech: mech.clone(),
                    a,
                    epsilon,
                });
            }
        }
    }
    Ok(out)
}

/// The sweep's network: generated from the master seed or read from disk.
pub fn build_network(cfg: &SweepConfig) -> Result<Network, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(GRAPH_STREAM);
    Ok(match &cfg.graph {
        GraphSource::PreferentialAttachment { nodes, m } => preferential_attachment(*nodes, *m, &mut rng),
        GraphSource::Gnm { nodes, edges } => gnm(*nodes, *edges, &mut rng),
        GraphSource::File(path) => load_edge_list(path, cfg.directed)?,
    })
}

struct RunResult {
    sw: Vec<f64>,
    dp: Vec<f64>,
}

fn aligned_epsilon(alignment: DpAlignment, mech: &Mechanism, epsilon: f64, d_max: u32) -> f64 {
    match (alignment, mech) {
        (DpAlignment::Raw, _) | (_, Mechanism::Rec) | (_, Mechanism::Idm) => epsilon,
        (DpAlignment::SameRealized, _) => epsilon * d_max.max(1) as f64,
    }
}

fn run_once(
    cfg: &SweepConfig,
    network: &Network,
    seller: Option<usize>,
    cells: &[Cell],
    law_index: usize,
    law: ValuationLaw,
    run: usize,
) -> Result<RunResult, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(((law_index as u64) << 32) | run as u64);
    let n = network.node_count();
    let valuations = sample_valuations(n, law, cfg.v_max, &mut rng);
    let seller = seller.unwrap_or_else(|| rng.random_range(0..n));
    let market = Market::from_reports(&network.profiles(seller, &valuations))?;
    let tree = market.tree();
    let vals = market.valuations();
    let d_max = tree.d_max();

    let mut sw = Vec::with_capacity(cells.len());
    let mut dp = Vec::with_capacity(cells.len());
    for cell in cells {
        let eps = aligned_epsilon(cfg.alignment, &cell.mech, cell.epsilon, d_max);
        let score = ScoreConfig::new(eps, cfg.v_max).map_err(crate::error::MechanismError::from)?;
        let dense = cell.mech.dense(tree, vals, &score)?;
        let welfare = match cfg.mode {
            SweepMode::Exact => dense.prob.iter().zip(vals).map(|(p, v)| p * v).sum(),
            SweepMode::Simulation => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut won = 0.0;
                for (p, v) in dense.prob.iter().zip(vals) {
                    acc += p;
                    if u < acc {
                        won = *v;
                        break;
                    }
                }
                won
            }
        };
        sw.push(welfare);
        dp.push(cell.mech.dp_bound(&score, d_max));
    }
    Ok(RunResult { sw, dp })
}

/// Runs every cell of the sweep; rows come out grouped by law, then in the
/// configured mechanism order (LAY once per `a`), then by ε.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    cfg.validate()?;
    let network = build_network(cfg)?;
    run_sweep_on(cfg, &network)
}

/// [`run_sweep`] on an already-built network.
pub fn run_sweep_on(cfg: &SweepConfig, network: &Network) -> Result<Vec<ResultRow>, ExperimentError> {
    cfg.validate()?;
    let seller = match cfg.seller {
        SellerChoice::Random => None,
        SellerChoice::Fixed(label) => Some(network.node_of(label).ok_or_else(|| {
            ExperimentError::Config(format!("seller {label} is not a node of the graph"))
        })?),
    };
    let cells = cells(cfg)?;
    let mut rows = Vec::new();
    for (law_index, &law) in cfg.laws.iter().enumerate() {
        let results: Vec<RunResult> = (0..cfg.runs)
            .into_par_iter()
            .map(|run| run_once(cfg, network, seller, &cells, law_index, law, run))
            .collect::<Result<_, _>>()?;
        for (c, cell) in cells.iter().enumerate() {
            let n = cfg.runs as f64;
            let mean = results.iter().map(|r| r.sw[c]).sum::<f64>() / n;
            let var = if cfg.runs > 1 {
                results.iter().map(|r| (r.sw[c] - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let dp_bound = cell
                .mech
                .is_randomized()
                .then(|| results.iter().map(|r| r.dp[c]).fold(0.0, f64::max));
            rows.push(ResultRow {
                dataset: cfg.dataset.clone(),
                mechanism: cell.mech.tag(),
                epsilon: cell.epsilon,
                dp_bound,
                a: cell.a,
                law,
                mean_sw: mean,
                stderr: (var / n).sqrt(),
                runs: cfg.runs,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}
