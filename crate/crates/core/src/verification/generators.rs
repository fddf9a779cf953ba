//! Instance families for the property suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{BuyerId, GlobalProfile};

/// Rooted tree on `0..=n` given by parent links, node 0 being the seller.
/// Every node's parent has a smaller index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeShape {
    parents: Vec<usize>,
}

impl TreeShape {
    /// `parents[k]` is the parent of node `k + 1`.
    pub fn new(parents: Vec<usize>) -> Self {
        for (k, &p) in parents.iter().enumerate() {
            assert!(p <= k, "parent of node {} must precede it", k + 1);
        }
        let mut all = vec![0];
        all.extend(parents);
        TreeShape { parents: all }
    }

    pub fn buyers(&self) -> usize {
        self.parents.len() - 1
    }

    /// Parent of node `k >= 1`.
    pub fn parent(&self, k: usize) -> usize {
        self.parents[k]
    }

    pub fn children(&self, k: usize) -> Vec<usize> {
        (1..self.parents.len()).filter(|&c| self.parents[c] == k).collect()
    }

    /// Profile whose report digraph is exactly this tree: buyer `k` has id
    /// `k`, valuation `valuations[k - 1]`, and reports its children.
    pub fn to_profile(&self, valuations: &[f64]) -> GlobalProfile {
        assert_eq!(valuations.len(), self.buyers());
        let mut p = GlobalProfile::new(self.children(0).into_iter().map(|c| BuyerId(c as u32)));
        for k in 1..self.parents.len() {
            p = p.with_buyer(
                k as u32,
                valuations[k - 1],
                self.children(k).into_iter().map(|c| c as u32),
            );
        }
        p
    }

    /// AHU encoding: equal for isomorphic rooted trees.
    pub fn canonical(&self) -> String {
        fn enc(t: &TreeShape, u: usize) -> String {
            let mut kids: Vec<String> = t.children(u).into_iter().map(|c| enc(t, c)).collect();
            kids.sort();
            format!("({})", kids.concat())
        }
        enc(self, 0)
    }
}

/// Every rooted tree shape with exactly `buyers` non-root nodes, one per
/// isomorphism class, in a fixed order.
pub fn tree_shapes(buyers: usize) -> Vec<TreeShape> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut parents = vec![0usize; buyers];
    loop {
        let shape = TreeShape::new(parents.clone());
        if seen.insert(shape.canonical()) {
            out.push(shape);
        }
        // Odometer over parents[k] ∈ 0..=k.
        let mut k = buyers;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if parents[k] < k {
                parents[k] += 1;
                break;
            }
            parents[k] = 0;
        }
    }
}

/// All shapes with `1..=max_buyers` buyers.
pub fn tree_shapes_up_to(max_buyers: usize) -> Vec<TreeShape> {
    (1..=max_buyers).flat_map(tree_shapes).collect()
}

/// Random shape. Each node attaches to one of the last `w` nodes for a
/// random window `w`, so both bushy and deep trees come up.
pub fn random_tree_shape<R: Rng + ?Sized>(buyers: usize, rng: &mut R) -> TreeShape {
    let window = rng.random_range(1..=buyers.max(1));
    let parents = (0..buyers)
        .map(|k| rng.random_range(k.saturating_sub(window)..=k))
        .collect();
    TreeShape::new(parents)
}

pub fn random_valuations<R: Rng + ?Sized>(n: usize, v_max: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..=v_max)).collect()
}

/// Tree-shaped report profile with uniform valuations.
pub fn random_tree_instance<R: Rng + ?Sized>(buyers: usize, v_max: f64, rng: &mut R) -> GlobalProfile {
    let shape = random_tree_shape(buyers, rng);
    shape.to_profile(&random_valuations(buyers, v_max, rng))
}

/// A random tree plus `extra_edges` random additional reports (including
/// back edges and cross edges), with ids shuffled so that the critical
/// tree differs from the spanning tree in general.
pub fn random_digraph_instance<R: Rng + ?Sized>(
    buyers: usize,
    extra_edges: usize,
    v_max: f64,
    rng: &mut R,
) -> GlobalProfile {
    let shape = random_tree_shape(buyers, rng);
    let mut ids: Vec<u32> = (1..=buyers as u32).collect();
    ids.shuffle(rng);
    let id = |k: usize| if k == 0 { 0 } else { ids[k - 1] };
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); buyers + 1];
    for k in 1..=buyers {
        adj[shape.parent(k)].insert(id(k));
    }
    for _ in 0..extra_edges {
        let from = rng.random_range(0..=buyers);
        let to = rng.random_range(1..=buyers);
        if id(from) != id(to) {
            adj[from].insert(id(to));
        }
    }
    let mut p = GlobalProfile::new(adj[0].iter().map(|&c| BuyerId(c)));
    for k in 1..=buyers {
        p = p.with_buyer(id(k), rng.random_range(0.0..=v_max), adj[k].iter().copied());
    }
    p
}

/// Odometer over `grid^n`, first coordinate fastest.
pub(crate) fn for_each_grid_point(n: usize, grid: &[f64], mut f: impl FnMut(&[usize], &[f64])) {
    let mut idx = vec![0usize; n];
    let mut vals = vec![grid[0]; n];
    loop {
        f(&idx, &vals);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            idx[k] += 1;
            if idx[k] < grid.len() {
                vals[k] = grid[idx[k]];
                break;
            }
            idx[k] = 0;
            vals[k] = grid[0];
            k += 1;
        }
    }
}
