//! `dpdm`: inspect critical trees, compute winning distributions, run single
//! auctions, verification suites and welfare sweeps.
//!
//! Exit status is 2 for usage errors, 1 for I/O errors and failed
//! properties, 0 otherwise.

mod input;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dpdm::experiments::{emit_outputs, run_sweep, SweepConfig};
use dpdm::mechanisms::run_auction;
use dpdm::verification::{run_suite, SuiteName, SuiteOptions};
use dpdm::{
    build_critical_tree, build_profile_digraph, Instance, Market, Mechanism, MechanismTag,
    ScoreConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use input::Source;

/// Bad flags or flag combinations; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "dpdm", version, about = "Differentially private diffusion auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the critical tree: parent and depth of every reachable buyer.
    Tree {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the winning distribution of one mechanism.
    Dist {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run one seeded auction.
    Auction {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a property suite over built-in instance families.
    Verify {
        /// norm, monotone, neighbor-ic, ir, dp, welfare, oracle or all.
        suite: SuiteName,
        /// Largest number of buyers in the exhaustive families.
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
        /// Size of each random family.
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for counterexample instances of failed properties.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run welfare sweeps described by configuration files.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Directory for results.csv and the plots.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the seed of every configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Edge list, one "u v" pair per line. Without it the built-in
    /// seven-buyer example is used.
    #[arg(long, requires = "values", conflicts_with = "instance")]
    graph: Option<PathBuf>,
    /// Valuations, one "id valuation" pair per line.
    #[arg(long, requires = "graph")]
    values: Option<PathBuf>,
    /// Node label of the seller in --graph.
    #[arg(long, default_value_t = 0, requires = "graph")]
    seller: u64,
    /// Read every edge in both directions.
    #[arg(long, requires = "graph")]
    undirected: bool,
    /// Instance file, e.g. a saved counterexample.
    #[arg(long)]
    instance: Option<PathBuf>,
}

impl InputArgs {
    fn source(&self) -> Result<Source> {
        if let Some(path) = &self.instance {
            return Ok(Source::Instance(Instance::load(path)?));
        }
        Ok(match (&self.graph, &self.values) {
            (Some(graph), Some(values)) => Source::Files {
                graph: graph.clone(),
                values: values.clone(),
                seller: self.seller,
                undirected: self.undirected,
            },
            _ => Source::SevenBuyer,
        })
    }
}

#[derive(Args)]
struct MechArgs {
    /// rec, lay, emd, emwd or idm [default: rec].
    #[arg(long)]
    mech: Option<MechanismTag>,
    /// Privacy parameter [default: 0.1].
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// Geometric parameter of lay [default: 2].
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Upper bound on valuations [default: 100].
    #[arg(long)]
    v_max: Option<f64>,
}

struct Resolved {
    mech: Mechanism,
    cfg: ScoreConfig,
}

impl MechArgs {
    /// Flags win over the instance file, which wins over the defaults.
    fn resolve(&self, inst: Option<&Instance>) -> Result<Resolved> {
        let tag = self.mech.or(inst.and_then(|i| i.mechanism)).unwrap_or(MechanismTag::Rec);
        if self.a.is_some() && tag != MechanismTag::Lay {
            return Err(usage("--a only applies to --mech lay"));
        }
        let eps = self.eps.or(inst.map(|i| i.epsilon)).unwrap_or(0.1);
        let v_max = self.v_max.or(inst.map(|i| i.v_max)).unwrap_or(100.0);
        let a = self.a.or(inst.and_then(|i| i.a)).unwrap_or(2.0);
        let cfg = ScoreConfig::new(eps, v_max).map_err(|e| usage(e.to_string()))?;
        let mech = Mechanism::from_tag(tag, Some(a)).map_err(|e| usage(e.to_string()))?;
        Ok(Resolved { mech, cfg })
    }
}

fn run(cli: Cli) -> Result<(String, bool)> {
    match cli.command {
        Command::Tree { input, format } => {
            let reports = input.source()?.reports()?;
            let g = build_profile_digraph(&reports)?;
            let tree = build_critical_tree(&g);
            let unreachable: BTreeSet<_> = reports.profiles.keys().copied().filter(|id| !tree.contains(*id)).collect();
            Ok((render::tree(&tree, &unreachable, format), true))
        }
        Command::Dist { input, mech, format } => {
            let source = input.source()?;
            let r = mech.resolve(source.instance())?;
            let market = Market::from_reports(&source.reports()?)?;
            let d = r.mech.distribution(&market, &r.cfg)?;
            let a = match &r.mech {
                Mechanism::Lay(g) => g.a(),
                _ => None,
            };
            Ok((render::dist(&d, r.cfg.epsilon, a, format), true))
        }
        Command::Auction { input, mech, seed, format } => {
            let source = input.source()?;
            let r = mech.resolve(source.instance())?;
            let reports = source.reports()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let outcome = run_auction(&r.mech, &reports, &r.cfg, &mut rng)?;
            Ok((render::auction(&outcome, seed, format), true))
        }
        Command::Verify { suite, max_nodes, instances, seed, out, format } => {
            if max_nodes == 0 {
                return Err(usage("--max-nodes must be at least 1"));
            }
            let opts = SuiteOptions { max_buyers: max_nodes, seed, random_instances: instances };
            let reports = run_suite(suite, &opts);
            if let Some(dir) = &out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for r in reports.iter().filter(|r| !r.passed) {
                    if let Some(worst) = &r.worst {
                        let name: String = r
                            .property
                            .chars()
                            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
                            .collect();
                        worst.save(&dir.join(format!("{name}.json")))?;
                    }
                }
            }
            let ok = reports.iter().all(|r| r.passed);
            Ok((render::reports(&reports, format), ok))
        }
        Command::Sweep { configs, out, seed, format } => {
            let mut rows = Vec::new();
            for path in &configs {
                let mut cfg = SweepConfig::load(path)?;
                if let Some(seed) = seed {
                    cfg.seed = seed;
                }
                rows.extend(run_sweep(&cfg)?);
            }
            if let Some(dir) = &out {
                emit_outputs(&rows, dir)?;
            }
            Ok((render::rows(&rows, format), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok((text, ok)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
