//! Undirected simple graphs and the three-node rewiring operation.
//!
//! Graphs are immutable values: every mutation-like operation returns a new
//! graph, which keeps episode states trivially shareable.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::DenseMatrix;

/// Undirected simple graph with frozen node features and an optional label.
///
/// Node ids are dense 0-based integers. The feature matrix is computed once
/// from the clean graph and never recomputed: attacks perturb structure only.
#[derive(Clone, Debug)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,     // canonical (u < v), sorted
    neighbors: Vec<Vec<usize>>,     // sorted adjacency lists
    features: DenseMatrix,          // num_nodes x d
    label: Option<usize>,
}

/// One rewiring move: delete edge (fir, sec), add edge (fir, thi).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewiringAction {
    pub fir: usize,
    pub sec: usize,
    pub thi: usize,
}

/// Where the third node may come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThirdNodeMode {
    /// Exactly the 2-hop neighbors of `fir` (the default operation).
    TwoHop,
    /// Any node outside {fir} and the direct neighborhood of `fir`.
    AnyNode,
}

impl Graph {
    pub fn new(
        num_nodes: usize,
        edges: &[(usize, usize)],
        features: DenseMatrix,
        label: Option<usize>,
    ) -> Result<Self> {
        if features.rows() != num_nodes {
            return Err(Error::invalid(format!(
                "feature matrix has {} rows for {} nodes",
                features.rows(),
                num_nodes
            )));
        }
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::invalid(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();
        if canon.len() != edges.len() {
            return Err(Error::invalid("duplicate edges"));
        }
        let mut neighbors = vec![Vec::new(); num_nodes];
        for &(u, v) in &canon {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            num_nodes,
            edges: canon,
            neighbors,
            features,
            label,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, (u, v) with u < v, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    /// Replace the feature matrix (used by loaders that synthesize features
    /// after construction).
    pub fn with_features(mut self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.num_nodes {
            return Err(Error::invalid("feature row count must match node count"));
        }
        self.features = features;
        Ok(self)
    }

    /// Symmetric 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.num_nodes, self.num_nodes);
        for &(u, v) in &self.edges {
            a.set(u, v, 1.0);
            a.set(v, u, 1.0);
        }
        a
    }

    /// D^{-1/2} (A + optional I) D^{-1/2}. Zero-degree rows normalize to zero.
    pub fn normalized_adjacency(&self, self_loops: bool) -> DenseMatrix {
        let n = self.num_nodes;
        let mut a = self.adjacency_matrix();
        if self_loops {
            for i in 0..n {
                a.set(i, i, 1.0);
            }
        }
        let mut dinv_sqrt = vec![0.0; n];
        for (i, d) in dinv_sqrt.iter_mut().enumerate() {
            let deg: f64 = (0..n).map(|j| a.get(i, j)).sum();
            if deg > 0.0 {
                *d = 1.0 / deg.sqrt();
            }
        }
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = a.get(i, j);
                if v != 0.0 {
                    out.set(i, j, v * dinv_sqrt[i] * dinv_sqrt[j]);
                }
            }
        }
        out
    }

    /// BFS distances from `v`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, v: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_nodes];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.neighbors[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Nodes at shortest-path distance exactly `k` from `v`. The node itself is
/// never included, and sets for different `k` are disjoint by construction.
pub fn k_hop_neighbors(g: &Graph, v: usize, k: usize) -> Result<Vec<usize>> {
    if v >= g.num_nodes() {
        return Err(Error::invalid(format!("node {v} out of range")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let dist = g.bfs_distances(v);
    Ok((0..g.num_nodes()).filter(|&u| dist[u] == k).collect())
}

/// Definition of a valid rewiring: (fir, sec) is an existing edge and thi is
/// at shortest-path distance exactly 2 from fir, all evaluated on `g` before
/// any modification.
pub fn is_valid_rewiring(g: &Graph, a: &RewiringAction) -> bool {
    let n = g.num_nodes();
    if a.fir >= n || a.sec >= n || a.thi >= n {
        return false;
    }
    if a.fir == a.sec || a.fir == a.thi || a.sec == a.thi {
        return false;
    }
    if !g.has_edge(a.fir, a.sec) {
        return false;
    }
    let dist = g.bfs_distances(a.fir);
    dist[a.thi] == 2
}

/// Validity under a third-node mode. `TwoHop` is [`is_valid_rewiring`];
/// `AnyNode` only requires thi outside {fir} and N^1(fir), which is exactly
/// what keeps the result a simple graph with |E| preserved.
pub fn is_valid_rewiring_mode(g: &Graph, a: &RewiringAction, mode: ThirdNodeMode) -> bool {
    match mode {
        ThirdNodeMode::TwoHop => is_valid_rewiring(g, a),
        ThirdNodeMode::AnyNode => {
            let n = g.num_nodes();
            a.fir < n
                && a.sec < n
                && a.thi < n
                && a.fir != a.sec
                && a.fir != a.thi
                && a.sec != a.thi
                && g.has_edge(a.fir, a.sec)
                && !g.has_edge(a.fir, a.thi)
        }
    }
}

/// Every valid rewiring of `g`, sorted by (fir, sec, thi).
pub fn rewiring_candidates(g: &Graph) -> Vec<RewiringAction> {
    rewiring_candidates_mode(g, ThirdNodeMode::TwoHop)
}

pub fn rewiring_candidates_mode(g: &Graph, mode: ThirdNodeMode) -> Vec<RewiringAction> {
    let mut out = Vec::new();
    for fir in 0..g.num_nodes() {
        if g.degree(fir) == 0 {
            continue;
        }
        let thirds = third_candidates(g, fir, mode);
        if thirds.is_empty() {
            continue;
        }
        for &sec in g.neighbors(fir) {
            for &thi in &thirds {
                out.push(RewiringAction { fir, sec, thi });
            }
        }
    }
    out
}

/// Third-node candidates for a fixed first node, sorted ascending.
pub fn third_candidates(g: &Graph, fir: usize, mode: ThirdNodeMode) -> Vec<usize> {
    match mode {
        ThirdNodeMode::TwoHop => {
            let dist = g.bfs_distances(fir);
            (0..g.num_nodes()).filter(|&u| dist[u] == 2).collect()
        }
        ThirdNodeMode::AnyNode => (0..g.num_nodes())
            .filter(|&u| u != fir && !g.has_edge(fir, u))
            .collect(),
    }
}

/// Apply a rewiring, returning the new graph. Accepts any action that keeps
/// the result a simple graph (the structural superset of Definition-style
/// validity, so `AnyNode` actions are applicable too); callers enforce the
/// mode-specific rule before stepping.
pub fn apply_rewiring(g: &Graph, a: &RewiringAction) -> Result<Graph> {
    let n = g.num_nodes();
    if a.fir >= n || a.sec >= n || a.thi >= n {
        return Err(Error::RejectedAction(format!(
            "action ({},{},{}) out of range",
            a.fir, a.sec, a.thi
        )));
    }
    if a.fir == a.sec || a.fir == a.thi || a.sec == a.thi {
        return Err(Error::RejectedAction("action nodes must be distinct".into()));
    }
    if !g.has_edge(a.fir, a.sec) {
        return Err(Error::RejectedAction(format!(
            "edge ({},{}) does not exist",
            a.fir, a.sec
        )));
    }
    if g.has_edge(a.fir, a.thi) {
        return Err(Error::RejectedAction(format!(
            "edge ({},{}) already present",
            a.fir, a.thi
        )));
    }
    let removed = (a.fir.min(a.sec), a.fir.max(a.sec));
    let added = (a.fir.min(a.thi), a.fir.max(a.thi));
    let mut edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .copied()
        .filter(|e| *e != removed)
        .collect();
    edges.push(added);
    Graph::new(n, &edges, g.features.clone(), g.label)
}

/// Connected components: (count, node -> component id). Component ids are
/// assigned in order of the smallest node they contain.
pub fn connected_components(g: &Graph) -> (usize, Vec<usize>) {
    let n = g.num_nodes();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = count;
        count += 1;
        let mut queue = VecDeque::from([start]);
        comp[start] = id;
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    queue.push_back(w);
                }
            }
        }
    }
    (count, comp)
}

/// `count` uniform add-or-delete edge edits, the comparison operator for the
/// rewiring-subtlety study. Each step flips a fair coin between deleting a
/// uniformly random existing edge and adding a uniformly random absent pair;
/// when the drawn move is impossible the other is used, and when neither is
/// possible the walk stops early. Returns the edited graph and the number of
/// edits actually applied.
pub fn random_add_delete<R: Rng>(g: &Graph, count: usize, rng: &mut R) -> (Graph, usize) {
    let n = g.num_nodes();
    let total_pairs = n * (n - 1) / 2;
    let mut edges: Vec<(usize, usize)> = g.edges.to_vec();
    let mut applied = 0;
    for _ in 0..count {
        let can_delete = !edges.is_empty();
        let can_add = edges.len() < total_pairs;
        let delete = match (can_delete, can_add) {
            (false, false) => break,
            (true, false) => true,
            (false, true) => false,
            (true, true) => rng.gen_bool(0.5),
        };
        if delete {
            let i = rng.gen_range(0..edges.len());
            edges.swap_remove(i);
        } else {
            // rejection-sample an absent pair; dense graphs are small here
            loop {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u == v {
                    continue;
                }
                let e = (u.min(v), u.max(v));
                if !edges.contains(&e) {
                    edges.push(e);
                    break;
                }
            }
        }
        applied += 1;
    }
    let g2 = Graph::new(n, &edges, g.features.clone(), g.label)
        .expect("add/delete edits preserve simple-graph invariants");
    (g2, applied)
}

/// `count` uniform random valid rewirings applied in sequence; stops early if
/// the candidate set empties. Returns the rewired graph and the applied count.
pub fn random_rewirings<R: Rng>(g: &Graph, count: usize, rng: &mut R) -> (Graph, usize) {
    let mut cur = g.clone();
    let mut applied = 0;
    for _ in 0..count {
        let cands = rewiring_candidates(&cur);
        if cands.is_empty() {
            break;
        }
        let a = cands[rng.gen_range(0..cands.len())];
        cur = apply_rewiring(&cur, &a).expect("candidate actions are applicable");
        applied += 1;
    }
    (cur, applied)
}
