//! Sweep configuration and its `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! dataset    = pa200
//! graph      = pa:200:2          # or gnm:200:400, or file:edges.txt
//! directed   = false
//! seller     = random            # or a node label from the graph
//! laws       = normal, uniform
//! epsilons   = 0.01, 0.05, 0.1
//! alignment  = raw               # or same-realized
//! a          = 2
//! mechanisms = emd, rec, lay, emwd, idm
//! runs       = 500
//! seed       = 1
//! mode       = exact             # or simulation
//! v_max      = 100
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;
use crate::mechanisms::MechanismTag;

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    PreferentialAttachment { nodes: usize, m: usize },
    Gnm { nodes: usize, edges: usize },
    File(PathBuf),
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::PreferentialAttachment { nodes, m } => write!(f, "pa:{nodes}:{m}"),
            GraphSource::Gnm { nodes, edges } => write!(f, "gnm:{nodes}:{edges}"),
            GraphSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for GraphSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GraphSource::File(PathBuf::from(path)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| x.parse::<usize>().map_err(|_| format!("invalid number {x:?} in {s:?}"));
        match parts.as_slice() {
            ["pa", n, m] => {
                let (nodes, m) = (num(n)?, num(m)?);
                if m == 0 || nodes <= m {
                    return Err(format!("{s:?}: need nodes > m >= 1"));
                }
                Ok(GraphSource::PreferentialAttachment { nodes, m })
            }
            ["gnm", n, e] => {
                let (nodes, edges) = (num(n)?, num(e)?);
                if edges > nodes * nodes.saturating_sub(1) / 2 {
                    return Err(format!("{s:?}: too many edges"));
                }
                Ok(GraphSource::Gnm { nodes, edges })
            }
            _ => Err(format!("unknown graph source {s:?}; expected pa:N:M, gnm:N:E or file:PATH")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SellerChoice {
    /// A fresh uniformly random node every run.
    Random,
    /// The node with this label in the graph.
    Fixed(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuationLaw {
    /// Normal with mean 50 and standard deviation 10.
    Normal,
    /// Uniform on `[0, 100]`.
    Uniform,
}

impl ValuationLaw {
    pub fn as_str(self) -> &'static str {
        match self {
            ValuationLaw::Normal => "normal",
            ValuationLaw::Uniform => "uniform",
        }
    }
}

impl fmt::Display for ValuationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValuationLaw {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "normal" => Ok(ValuationLaw::Normal),
            "uniform" => Ok(ValuationLaw::Uniform),
            _ => Err(format!("unknown valuation law {s:?}; expected normal or uniform")),
        }
    }
}

/// One draw per node, clamped to `[0, v_max]`.
pub fn sample_valuations<R: Rng + ?Sized>(nodes: usize, law: ValuationLaw, v_max: f64, rng: &mut R) -> Vec<f64> {
    let clamp = |x: f64| x.clamp(0.0, v_max);
    match law {
        ValuationLaw::Normal => {
            let d = Normal::new(50.0, 10.0).expect("valid normal");
            (0..nodes).map(|_| clamp(d.sample(rng))).collect()
        }
        ValuationLaw::Uniform => {
            let d = Uniform::new_inclusive(0.0, 100.0).expect("valid uniform");
            (0..nodes).map(|_| clamp(d.sample(rng))).collect()
        }
    }
}

/// How ε is handed to each mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpAlignment {
    /// Every mechanism gets the same ε.
    Raw,
    /// REC gets ε and the others ε·d_max, so all guarantee the same level.
    SameRealized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Accumulate `Σ v_i·Pr_i` per run.
    Exact,
    /// Draw one winner per run and accumulate its valuation.
    Simulation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub dataset: String,
    pub graph: GraphSource,
    pub directed: bool,
    pub seller: SellerChoice,
    pub laws: Vec<ValuationLaw>,
    pub epsilons: Vec<f64>,
    pub alignment: DpAlignment,
    pub a_values: Vec<f64>,
    pub mechanisms: Vec<MechanismTag>,
    pub runs: usize,
    pub seed: u64,
    pub mode: SweepMode,
    pub v_max: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dataset: "pa200".into(),
            graph: GraphSource::PreferentialAttachment { nodes: 200, m: 2 },
            directed: false,
            seller: SellerChoice::Random,
            laws: vec![ValuationLaw::Normal, ValuationLaw::Uniform],
            epsilons: vec![0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            alignment: DpAlignment::Raw,
            a_values: vec![2.0],
            mechanisms: vec![
                MechanismTag::Emd,
                MechanismTag::Rec,
                MechanismTag::Lay,
                MechanismTag::Emwd,
                MechanismTag::Idm,
            ],
            runs: 500,
            seed: 0,
            mode: SweepMode::Exact,
            v_max: 100.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if let Some(e) = self.epsilons.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
            return bad(format!("epsilon values must be > 0, got {e}"));
        }
        if self.epsilons.is_empty() || self.laws.is_empty() || self.mechanisms.is_empty() {
            return bad("epsilons, laws and mechanisms must be non-empty".into());
        }
        if self.mechanisms.contains(&MechanismTag::Lay) {
            if self.a_values.is_empty() {
                return bad("LAY needs at least one value of a".into());
            }
            if let Some(a) = self.a_values.iter().find(|&&a| !(a > 1.0 && a.is_finite())) {
                return bad(format!("a must be > 1, got {a}"));
            }
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad(format!("v_max must be > 0, got {}", self.v_max));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text, path)?;
        // Relative edge-list paths are taken from the config's directory.
        if let GraphSource::File(p) = &cfg.graph {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.graph = GraphSource::File(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ExperimentError> {
        let mut cfg = SweepConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ExperimentError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            apply(&mut cfg, key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

fn one<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("{value:?}: {e}"))
}

fn apply(cfg: &mut SweepConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "dataset" => cfg.dataset = value.to_string(),
        "graph" => cfg.graph = one(value)?,
        "directed" => cfg.directed = one(value)?,
        "seller" => {
            cfg.seller = match value {
                "random" => SellerChoice::Random,
                _ => SellerChoice::Fixed(one(value)?),
            }
        }
        "laws" | "law" => cfg.laws = list(value)?,
        "epsilons" | "epsilon" | "eps" => cfg.epsilons = list(value)?,
        "alignment" | "dp_alignment" => {
            cfg.alignment = match value {
                "raw" => DpAlignment::Raw,
                "same-realized" => DpAlignment::SameRealized,
                _ => return Err(format!("unknown alignment {value:?}; expected raw or same-realized")),
            }
        }
        "a" => cfg.a_values = list(value)?,
        "mechanisms" | "mechanism" => cfg.mechanisms = list(value)?,
        "runs" => cfg.runs = one(value)?,
        "seed" => cfg.seed = one(value)?,
        "mode" => {
            cfg.mode = match value {
                "exact" | "exact-expectation" => SweepMode::Exact,
                "simulation" | "full-simulation" => SweepMode::Simulation,
                _ => return Err(format!("unknown mode {value:?}; expected exact or simulation")),
            }
        }
        "v_max" => cfg.v_max = one(value)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_every_key() {
        let text = "# sweep\n dataset = email \ngraph=file:email.txt\ndirected = true\nseller = 12\n\
                    laws = uniform\nepsilons = 0.1, 0.2 # two\nalignment = same-realized\na = 1.5, 3\n\
                    mechanisms = rec, lay\nruns = 7\nseed = 99\nmode = simulation\nv_max = 80\n";
        let cfg = SweepConfig::parse(text, Path::new("s.cfg")).unwrap();
        assert_eq!(cfg.dataset, "email");
        assert_eq!(cfg.graph, GraphSource::File("email.txt".into()));
        assert!(cfg.directed);
        assert_eq!(cfg.seller, SellerChoice::Fixed(12));
        assert_eq!(cfg.laws, vec![ValuationLaw::Uniform]);
        assert_eq!(cfg.epsilons, vec![0.1, 0.2]);
        assert_eq!(cfg.alignment, DpAlignment::SameRealized);
        assert_eq!(cfg.a_values, vec![1.5, 3.0]);
        assert_eq!(cfg.mechanisms, vec![MechanismTag::Rec, MechanismTag::Lay]);
        assert_eq!((cfg.runs, cfg.seed, cfg.mode, cfg.v_max), (7, 99, SweepMode::Simulation, 80.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match SweepConfig::parse(text, Path::new("s.cfg")) {
            Err(ExperimentError::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of("runs = 3\ncolour = red\n"), 2);
        assert_eq!(line_of("graph = pa:10\n"), 1);
        assert_eq!(line_of("\n\nruns 3\n"), 3);
        assert_eq!(line_of("epsilons = 0.1, x\n"), 1);
        assert!(matches!(
            SweepConfig::parse("runs = 0\n", Path::new("s.cfg")),
            Err(ExperimentError::Config(_))
        ));
        assert!(matches!(
            SweepConfig::parse("epsilons = 0.1, 0\n", Path::new("s.cfg")),
            Err(ExperimentError::Config(_))
        ));
    }

    #[test]
    fn graph_sources_round_trip() {
        for s in ["pa:200:2", "gnm:200:400", "file:/tmp/x.txt"] {
            assert_eq!(s.parse::<GraphSource>().unwrap().to_string(), s);
        }
        assert!("pa:2:2".parse::<GraphSource>().is_err());
        assert!("gnm:3:4".parse::<GraphSource>().is_err());
    }

    #[test]
    fn uniform_mean_is_fifty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = sample_valuations(100_000, ValuationLaw::Uniform, 100.0, &mut rng);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 50.0).abs() < 1.0, "{mean}");
        assert!(v.iter().all(|&x| (0.0..=100.0).contains(&x)));
    }

    #[test]
    fn normal_rarely_clamps_and_is_seeded() {
        let draw = |seed| sample_valuations(100_000, ValuationLaw::Normal, 100.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let v = draw(4);
        assert_eq!(v, draw(4));
        assert_ne!(v, draw(5));
        let clamped = v.iter().filter(|&&x| x == 0.0 || x == 100.0).count();
        assert!((clamped as f64) < 1e-4 * v.len() as f64);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 50.0).abs() < 0.2);
    }
}
