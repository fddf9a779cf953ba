//! Turning `--graph`, `--values`, `--seller` and `--instance` into reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dpdm::experiments::parse_edge_list;
use dpdm::fixtures::{seven_buyer, SEVEN_BUYER_DEFAULT_VG};
use dpdm::{BuyerId, GlobalProfile, Instance, Profile};

use crate::UsageError;

/// Reads "id valuation" lines; `#` starts a comment line.
pub fn parse_values(text: &str, path: &Path) -> Result<BTreeMap<u64, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{}:{}", path.display(), i + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, v] = fields.as_slice() else {
            anyhow::bail!("{}: expected \"id valuation\", got {line:?}", at());
        };
        let id: u64 = id.parse().with_context(|| format!("{}: invalid id {id:?}", at()))?;
        let v: f64 = v.parse().with_context(|| format!("{}: invalid valuation {v:?}", at()))?;
        if out.insert(id, v).is_some() {
            anyhow::bail!("{}: duplicate valuation for {id}", at());
        }
    }
    Ok(out)
}

/// Reports built from an edge list and a valuation file. Node labels become
/// buyer ids; the seller's label becomes id 0.
pub fn reports_from_files(graph: &Path, values: &Path, seller: u64, undirected: bool) -> Result<GlobalProfile> {
    let text = fs::read_to_string(graph).with_context(|| format!("reading {}", graph.display()))?;
    let net = parse_edge_list(&text, !undirected, graph)?;
    let text = fs::read_to_string(values).with_context(|| format!("reading {}", values.display()))?;
    let vals = parse_values(&text, values)?;

    let seller_node = net
        .node_of(seller)
        .ok_or_else(|| UsageError(format!("seller {seller} is not a node of {}", graph.display())))?;
    let id_of = |k: usize| -> Result<BuyerId> {
        let label = net.labels[k];
        if k == seller_node {
            return Ok(BuyerId::SELLER);
        }
        if label == 0 {
            anyhow::bail!("node 0 is reserved for the seller; relabel it or pass --seller 0");
        }
        let id = u32::try_from(label).with_context(|| format!("node label {label} does not fit in 32 bits"))?;
        Ok(BuyerId(id))
    };
    let neighbors = |k: usize| -> Result<Vec<BuyerId>> {
        net.adj[k]
            .iter()
            .filter(|&&j| j as usize != seller_node)
            .map(|&j| id_of(j as usize))
            .collect()
    };

    let mut reports = GlobalProfile::new(neighbors(seller_node)?);
    for k in 0..net.node_count() {
        if k == seller_node {
            continue;
        }
        let label = net.labels[k];
        let v = *vals
            .get(&label)
            .ok_or_else(|| anyhow::anyhow!("{}: no valuation for node {label}", values.display()))?;
        reports.profiles.insert(id_of(k)?, Profile::new(v, neighbors(k)?));
    }
    if let Some(extra) = vals.keys().find(|&&id| net.node_of(id).is_none()) {
        anyhow::bail!("{}: node {extra} does not appear in {}", values.display(), graph.display());
    }
    if vals.contains_key(&seller) {
        anyhow::bail!("{}: the seller {seller} cannot have a valuation", values.display());
    }
    Ok(reports)
}

/// Where the reports come from.
pub enum Source {
    /// The built-in seven-buyer example.
    SevenBuyer,
    Files { graph: std::path::PathBuf, values: std::path::PathBuf, seller: u64, undirected: bool },
    Instance(Instance),
}

impl Source {
    pub fn reports(&self) -> Result<GlobalProfile> {
        match self {
            Source::SevenBuyer => Ok(seven_buyer(SEVEN_BUYER_DEFAULT_VG)),
            Source::Files { graph, values, seller, undirected } => {
                reports_from_files(graph, values, *seller, *undirected)
            }
            Source::Instance(inst) => Ok(inst.profiles.clone()),
        }
    }

    pub fn instance(&self) -> Option<&Instance> {
        match self {
            Source::Instance(i) => Some(i),
            _ => None,
        }
    }
}
