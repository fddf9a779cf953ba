//! Plain social networks: edge-list loading and synthetic generators.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::ExperimentError;
use crate::graph::{BuyerId, GlobalProfile, Profile};

/// Directed graph over nodes `0..n`; node labels from the source file are
/// kept for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    /// Original label of each node, ascending.
    pub labels: Vec<u64>,
    /// Sorted out-neighbors of each node, without self-loops.
    pub adj: Vec<Vec<u32>>,
    /// Distinct directed pairs in the input after symmetrization,
    /// self-loops included.
    pub edge_count: usize,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Node with the given source label.
    pub fn node_of(&self, label: u64) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    /// Buyer id of node `k`; id 0 belongs to the seller.
    pub fn buyer_id(node: usize) -> BuyerId {
        BuyerId(node as u32 + 1)
    }

    /// Reports of every node except `seller`, each telling the truth about
    /// its valuation and out-neighbors. Edges into the seller are dropped.
    pub fn profiles(&self, seller: usize, valuations: &[f64]) -> GlobalProfile {
        let ids = |out: &[u32]| -> Vec<BuyerId> {
            out.iter()
                .filter(|&&j| j as usize != seller)
                .map(|&j| Self::buyer_id(j as usize))
                .collect()
        };
        let mut p = GlobalProfile::new(ids(&self.adj[seller]));
        for (k, out) in self.adj.iter().enumerate() {
            if k != seller {
                p.profiles
                    .insert(Self::buyer_id(k), Profile::new(valuations[k], ids(out)));
            }
        }
        p
    }

    fn from_pairs(pairs: &BTreeSet<(u64, u64)>) -> Self {
        let labels: Vec<u64> = pairs
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<u64, u32> = labels.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
        let mut adj = vec![Vec::new(); labels.len()];
        for &(a, b) in pairs {
            if a != b {
                adj[index[&a] as usize].push(index[&b]);
            }
        }
        Network {
            labels,
            adj,
            edge_count: pairs.len(),
        }
    }

    fn from_undirected(n: usize, edges: &BTreeSet<(u32, u32)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for out in &mut adj {
            out.sort_unstable();
        }
        Network {
            labels: (0..n as u64).collect(),
            adj,
            edge_count: 2 * edges.len(),
        }
    }
}

/// Reads whitespace-separated integer pairs, one edge per line; blank lines
/// and lines starting with `#` are skipped. Undirected inputs get both
/// directions of every edge.
pub fn load_edge_list(path: &Path, directed: bool) -> Result<Network, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text, directed, path)
}

pub fn parse_edge_list(text: &str, directed: bool, path: &Path) -> Result<Network, ExperimentError> {
    let mut pairs = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ExperimentError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let mut node = || -> Result<u64, ExperimentError> {
            let f = fields.next().ok_or_else(|| err(format!("expected two node ids, got {line:?}")))?;
            f.parse().map_err(|_| err(format!("invalid node id {f:?}")))
        };
        let (a, b) = (node()?, node()?);
        pairs.insert((a, b));
        if !directed {
            pairs.insert((b, a));
        }
    }
    if pairs.is_empty() {
        return Err(ExperimentError::EmptyGraph(path.to_path_buf()));
    }
    Ok(Network::from_pairs(&pairs))
}

/// Undirected preferential attachment: a clique on `m + 1` nodes, then each
/// new node links to `m` distinct earlier nodes chosen proportionally to
/// their degree.
pub fn preferential_attachment<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Network {
    assert!(m >= 1 && n > m, "need n > m >= 1");
    let mut edges = BTreeSet::new();
    // Every edge endpoint, so a uniform pick is a degree-weighted pick.
    let mut ends: Vec<u32> = Vec::new();
    for a in 0..=m as u32 {
        for b in a + 1..=m as u32 {
            edges.insert((a, b));
            ends.extend([a, b]);
        }
    }
    for v in m as u32 + 1..n as u32 {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(*ends.choose(rng).expect("clique is non-empty"));
        }
        for t in targets {
            edges.insert((t, v));
            ends.extend([t, v]);
        }
    }
    Network::from_undirected(n, &edges)
}

/// Uniform random undirected graph with `n` nodes and `m` distinct edges.
pub fn gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Network {
    assert!(m <= n * n.saturating_sub(1) / 2, "too many edges for {n} nodes");
    let mut edges = BTreeSet::new();
    while edges.len() < m {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Network::from_undirected(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_critical_tree, build_profile_digraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn parse(text: &str, directed: bool) -> Result<Network, ExperimentError> {
        parse_edge_list(text, directed, Path::new("test.txt"))
    }

    #[test]
    fn undirected_path_is_symmetrized() {
        let g = parse("0 1\n1 2", false).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count, 4);
        assert_eq!(g.adj, vec![vec![1], vec![0, 2], vec![1]]);
    }

    #[test]
    fn comments_duplicates_and_labels() {
        let g = parse("# header\n\n10 30\n10 30\n30 10\n7 7\n", true).unwrap();
        assert_eq!(g.labels, vec![7, 10, 30]);
        assert_eq!(g.edge_count, 3);
        assert_eq!(g.adj, vec![vec![], vec![2], vec![1]]);
        assert_eq!(g.node_of(30), Some(2));
        assert_eq!(g.node_of(8), None);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        match parse("a b", false) {
            Err(ExperimentError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse("0 1\n# ok\n2", false) {
            Err(ExperimentError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("# nothing\n", false), Err(ExperimentError::EmptyGraph(_))));
        assert!(matches!(
            load_edge_list(Path::new("/nonexistent/edges.txt"), false),
            Err(ExperimentError::Io { .. })
        ));
    }

    #[test]
    fn generators_have_the_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = preferential_attachment(200, 2, &mut rng);
        assert_eq!(g.node_count(), 200);
        assert_eq!(g.edge_count, 2 * (3 + 2 * 197));
        assert!(g.adj.iter().all(|out| out.len() >= 2));
        let h = gnm(50, 120, &mut rng);
        assert_eq!(h.edge_count, 240);
        let again = preferential_attachment(200, 2, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(g, again);
    }

    #[test]
    fn profiles_reach_the_whole_connected_graph() {
        let g = preferential_attachment(60, 2, &mut ChaCha8Rng::seed_from_u64(1));
        let vals = vec![1.0; 60];
        let p = g.profiles(7, &vals);
        assert!(!p.profiles.contains_key(&Network::buyer_id(7)));
        let tree = build_critical_tree(&build_profile_digraph(&p).unwrap());
        assert_eq!(tree.buyer_count(), 59);
    }
}
