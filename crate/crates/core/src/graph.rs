//! Report digraphs and diffusion critical trees.
//!
//! Buyers report a valuation and a set of neighbors. The reports induce a
//! directed graph rooted at the seller, and the dominator tree of that graph
//! (the *critical tree*) drives every diffusion mechanism in this crate: node
//! `i` is critical to `j` when every path from the seller to `j` passes
//! through `i`, and a buyer's parent is its immediate dominator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Identifier of a participant. `BuyerId(0)` is reserved for the seller.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct BuyerId(pub u32);

impl BuyerId {
    pub const SELLER: BuyerId = BuyerId(0);

    pub fn is_seller(self) -> bool {
        self == Self::SELLER
    }
}

impl fmt::Display for BuyerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for BuyerId {
    fn from(id: u32) -> Self {
        BuyerId(id)
    }
}

/// A buyer's reported valuation and neighbor set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub valuation: f64,
    pub neighbors: BTreeSet<BuyerId>,
}

impl Profile {
    pub fn new(valuation: f64, neighbors: impl IntoIterator<Item = BuyerId>) -> Self {
        Profile {
            valuation,
            neighbors: neighbors.into_iter().collect(),
        }
    }
}

/// The reported state of the whole market: who the seller knows, and every
/// participating buyer's profile.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalProfile {
    pub seller_neighbors: BTreeSet<BuyerId>,
    pub profiles: BTreeMap<BuyerId, Profile>,
}

impl GlobalProfile {
    pub fn new(seller_neighbors: impl IntoIterator<Item = BuyerId>) -> Self {
        GlobalProfile {
            seller_neighbors: seller_neighbors.into_iter().collect(),
            profiles: BTreeMap::new(),
        }
    }

    /// Builder-style insertion of a buyer profile.
    pub fn with_buyer(
        mut self,
        id: impl Into<BuyerId>,
        valuation: f64,
        neighbors: impl IntoIterator<Item = u32>,
    ) -> Self {
        self.profiles.insert(
            id.into(),
            Profile::new(valuation, neighbors.into_iter().map(BuyerId)),
        );
        self
    }

    pub fn valuation(&self, id: BuyerId) -> Option<f64> {
        self.profiles.get(&id).map(|p| p.valuation)
    }

    /// Copy of `self` with one buyer's valuation replaced.
    pub fn with_valuation(&self, id: BuyerId, valuation: f64) -> Self {
        let mut out = self.clone();
        if let Some(p) = out.profiles.get_mut(&id) {
            p.valuation = valuation;
        }
        out
    }

    /// Copy of `self` with one buyer's neighbor report replaced.
    pub fn with_neighbors(&self, id: BuyerId, neighbors: BTreeSet<BuyerId>) -> Self {
        let mut out = self.clone();
        if id.is_seller() {
            out.seller_neighbors = neighbors;
        } else if let Some(p) = out.profiles.get_mut(&id) {
            p.neighbors = neighbors;
        }
        out
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.profiles.contains_key(&BuyerId::SELLER) {
            return Err(GraphError::SellerProfile);
        }
        for (&id, p) in &self.profiles {
            if !(p.valuation >= 0.0) || !p.valuation.is_finite() {
                return Err(GraphError::InvalidValuation {
                    buyer: id,
                    valuation: p.valuation,
                });
            }
        }
        Ok(())
    }
}

/// Something dropped while turning reports into a digraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DigraphWarning {
    /// `from` named `to`, but `to` submitted no profile.
    UnknownNeighbor { from: BuyerId, to: BuyerId },
    /// A buyer listed itself.
    SelfLoop(BuyerId),
}

impl fmt::Display for DigraphWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigraphWarning::UnknownNeighbor { from, to } => {
                write!(f, "{from} reported neighbor {to} which has no profile; edge dropped")
            }
            DigraphWarning::SelfLoop(id) => write!(f, "{id} reported itself; edge dropped"),
        }
    }
}

/// Directed report graph. Node 0 of the dense indexing is always the seller.
#[derive(Clone, Debug)]
pub struct ProfileDigraph {
    nodes: Vec<BuyerId>,
    succ: Vec<Vec<usize>>,
    warnings: Vec<DigraphWarning>,
}

impl ProfileDigraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> &[BuyerId] {
        &self.nodes
    }

    pub fn contains(&self, id: BuyerId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn has_edge(&self, from: BuyerId, to: BuyerId) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(f), Some(t)) => self.succ[f].binary_search(&t).is_ok(),
            _ => false,
        }
    }

    /// All edges as `(from, to)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (BuyerId, BuyerId)> + '_ {
        self.succ.iter().enumerate().flat_map(move |(f, ts)| {
            ts.iter().map(move |&t| (self.nodes[f], self.nodes[t]))
        })
    }

    pub fn warnings(&self) -> &[DigraphWarning] {
        &self.warnings
    }

    fn index_of(&self, id: BuyerId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    /// Reachability from the seller with the node at `blocked` removed.
    fn reach_mask(&self, blocked: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        if blocked == Some(0) {
            return seen;
        }
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.succ[u] {
                if !seen[v] && Some(v) != blocked {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Turns reported profiles into the report digraph.
///
/// Edges to ids without a profile and self-loops are dropped and recorded as
/// warnings; a negative or non-finite valuation rejects the whole input.
pub fn build_profile_digraph(reports: &GlobalProfile) -> Result<ProfileDigraph, GraphError> {
    reports.validate()?;

    let mut nodes = Vec::with_capacity(reports.profiles.len() + 1);
    nodes.push(BuyerId::SELLER);
    nodes.extend(reports.profiles.keys().copied());

    let index = |id: BuyerId| nodes.binary_search(&id).ok();
    let mut warnings = Vec::new();
    let mut succ = vec![Vec::new(); nodes.len()];

    let owners = std::iter::once((BuyerId::SELLER, &reports.seller_neighbors))
        .chain(reports.profiles.iter().map(|(&id, p)| (id, &p.neighbors)));
    for (from_pos, (from, neighbors)) in owners.enumerate() {
        for &to in neighbors {
            if to == from {
                warnings.push(DigraphWarning::SelfLoop(from));
                continue;
            }
            match index(to) {
                Some(t) if t != 0 => succ[from_pos].push(t),
                // Edges into the seller carry no information for the auction.
                Some(_) => {}
                None => warnings.push(DigraphWarning::UnknownNeighbor { from, to }),
            }
        }
    }
    // BTreeSet iteration already yields ascending ids, hence ascending indices.
    Ok(ProfileDigraph {
        nodes,
        succ,
        warnings,
    })
}

/// Buyers with a directed path from the seller.
pub fn reachable_from_seller(g: &ProfileDigraph) -> BTreeSet<BuyerId> {
    g.reach_mask(None)
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &r)| r)
        .map(|(i, _)| g.nodes[i])
        .collect()
}

/// Brute-force criticality: `i` is critical to `j` iff removing `i` cuts
/// every path from the seller to `j`. Every node is critical to itself.
pub fn is_critical(g: &ProfileDigraph, i: BuyerId, j: BuyerId) -> bool {
    if i == j {
        return true;
    }
    let (Some(bi), Some(bj)) = (g.index_of(i), g.index_of(j)) else {
        return false;
    };
    !g.reach_mask(Some(bi))[bj]
}

/// Dominator tree of a report digraph restricted to the buyers reachable
/// from the seller.
///
/// Nodes are stored in breadth-first order from the seller (children in
/// ascending id order), so every parent precedes its children and each
/// depth layer occupies a contiguous run of indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalTree {
    nodes: Vec<BuyerId>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<u32>,
    d_max: u32,
    position: BTreeMap<BuyerId, usize>,
    /// Whether the seller reported an edge to the node. Such nodes always
    /// sit at depth 1, but depth 1 can also hold nodes reachable along
    /// several disjoint paths.
    seller_adjacent: Vec<bool>,
}

impl CriticalTree {
    /// Tree with only the seller.
    pub fn empty() -> Self {
        Self::from_parent_links(vec![BuyerId::SELLER], vec![0])
    }

    /// Number of nodes including the seller.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when no buyer is reachable.
    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn buyer_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn contains(&self, id: BuyerId) -> bool {
        self.position.contains_key(&id)
    }

    /// Reachable buyers in ascending id order.
    pub fn reachable(&self) -> impl Iterator<Item = BuyerId> + '_ {
        self.position.keys().copied().filter(|id| !id.is_seller())
    }

    pub fn parent(&self, id: BuyerId) -> Option<BuyerId> {
        let i = self.index_of(id)?;
        (i != 0).then(|| self.nodes[self.parent[i]])
    }

    pub fn depth(&self, id: BuyerId) -> Option<u32> {
        self.index_of(id).map(|i| self.depth[i])
    }

    pub fn children(&self, id: BuyerId) -> Vec<BuyerId> {
        self.index_of(id)
            .map(|i| self.children[i].iter().map(|&c| self.nodes[c]).collect())
            .unwrap_or_default()
    }

    /// Strict ancestors of `id` ordered from the seller's child down to the
    /// parent of `id`. The seller itself is omitted.
    pub fn ancestors(&self, id: BuyerId) -> Vec<BuyerId> {
        let Some(mut i) = self.index_of(id) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        while i != 0 {
            i = self.parent[i];
            if i != 0 {
                out.push(self.nodes[i]);
            }
        }
        out.reverse();
        out
    }

    /// Buyers grouped by depth; entry `k` holds layer `k + 1`.
    pub fn layers(&self) -> Vec<Vec<BuyerId>> {
        let mut out = vec![Vec::new(); self.d_max as usize];
        for i in 1..self.nodes.len() {
            out[self.depth[i] as usize - 1].push(self.nodes[i]);
        }
        for layer in &mut out {
            layer.sort_unstable();
        }
        out
    }

    // Dense-index accessors used by the mechanisms.

    pub fn index_of(&self, id: BuyerId) -> Option<usize> {
        self.position.get(&id).copied()
    }

    pub fn id_at(&self, index: usize) -> BuyerId {
        self.nodes[index]
    }

    pub fn parent_index(&self, index: usize) -> usize {
        self.parent[index]
    }

    pub fn children_indices(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub fn depth_at(&self, index: usize) -> u32 {
        self.depth[index]
    }

    /// Whether the node at `index` is one of the seller's own neighbors.
    pub fn is_seller_neighbor_at(&self, index: usize) -> bool {
        self.seller_adjacent[index]
    }

    /// `(pre, post)` DFS interval per node; `u` is in the subtree of `v` iff
    /// `pre[v] <= pre[u] && post[u] <= post[v]`.
    pub fn subtree_intervals(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0); self.nodes.len()];
        let mut clock = 0;
        let mut stack = vec![(0usize, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                out[u].1 = clock;
                clock += 1;
                continue;
            }
            out[u].0 = clock;
            clock += 1;
            stack.push((u, true));
            for &c in self.children[u].iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    /// Builds a tree from `(node, parent)` links where `links[0]` is the seller.
    /// Nodes are re-sorted into breadth-first order.
    fn from_parent_links(ids: Vec<BuyerId>, parents: Vec<usize>) -> Self {
        let n = ids.len();
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 1..n {
            kids[parents[v]].push(v);
        }
        for k in &mut kids {
            k.sort_unstable_by_key(|&c| ids[c]);
        }

        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            queue.extend(kids[u].iter().copied());
        }
        let mut new_index = vec![0usize; n];
        for (pos, &old) in order.iter().enumerate() {
            new_index[old] = pos;
        }

        let nodes: Vec<BuyerId> = order.iter().map(|&o| ids[o]).collect();
        let parent: Vec<usize> = order.iter().map(|&o| new_index[parents[o]]).collect();
        let children: Vec<Vec<usize>> = order
            .iter()
            .map(|&o| kids[o].iter().map(|&c| new_index[c]).collect())
            .collect();
        let mut depth = vec![0u32; n];
        for i in 1..n {
            depth[i] = depth[parent[i]] + 1;
        }
        let d_max = depth.iter().copied().max().unwrap_or(0);
        let position = nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let seller_adjacent = depth.iter().map(|&d| d == 1).collect();
        CriticalTree {
            nodes,
            parent,
            children,
            depth,
            d_max,
            position,
            seller_adjacent,
        }
    }
}

/// Computes the diffusion critical tree (immediate dominators w.r.t. the
/// seller) with the iterative data-flow method over reverse post-order.
pub fn build_critical_tree(g: &ProfileDigraph) -> CriticalTree {
    let n = g.nodes.len();

    // Iterative DFS for post-order over the reachable part.
    let mut post = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    visited[0] = true;
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if let Some(&v) = g.succ[u].get(*next) {
            *next += 1;
            if !visited[v] {
                visited[v] = true;
                stack.push((v, 0));
            }
        } else {
            post.push(u);
            stack.pop();
        }
    }

    let rpo: Vec<usize> = post.iter().rev().copied().collect();
    let mut rpo_num = vec![usize::MAX; n];
    for (k, &u) in rpo.iter().enumerate() {
        rpo_num[u] = k;
    }

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &u in &rpo {
        for &v in &g.succ[u] {
            preds[v].push(u);
        }
    }

    const UNDEF: usize = usize::MAX;
    let mut idom = vec![UNDEF; n];
    idom[0] = 0;
    let intersect = |idom: &[usize], mut a: usize, mut b: usize| {
        while a != b {
            while rpo_num[a] > rpo_num[b] {
                a = idom[a];
            }
            while rpo_num[b] > rpo_num[a] {
                b = idom[b];
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &b in rpo.iter().skip(1) {
            let mut new_idom = UNDEF;
            for &p in &preds[b] {
                if idom[p] == UNDEF {
                    continue;
                }
                new_idom = if new_idom == UNDEF {
                    p
                } else {
                    intersect(&idom, p, new_idom)
                };
            }
            if idom[b] != new_idom {
                idom[b] = new_idom;
                changed = true;
            }
        }
    }

    // Re-index the reachable nodes densely (ascending id) before building.
    let mut reach: Vec<usize> = rpo.clone();
    reach.sort_unstable();
    let mut dense = vec![UNDEF; n];
    for (k, &u) in reach.iter().enumerate() {
        dense[u] = k;
    }
    let ids = reach.iter().map(|&u| g.nodes[u]).collect();
    let parents = reach.iter().map(|&u| dense[idom[u]]).collect();
    let mut tree = CriticalTree::from_parent_links(ids, parents);
    let adjacent: BTreeSet<BuyerId> = g.succ[0].iter().map(|&v| g.nodes[v]).collect();
    for (i, flag) in tree.seller_adjacent.iter_mut().enumerate() {
        *flag = adjacent.contains(&tree.nodes[i]);
    }
    tree
}
