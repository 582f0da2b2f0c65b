//! Time-varying undirected communication graphs.
//!
//! A [`GraphSequence`] yields an edge set for every step `t`. Assumptions on
//! connectivity quantify over infinite time; here they are checked on a
//! finite horizon with [`validate_window_connectivity`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Undirected edge set. Edges are stored once as `(min, max)` and sorted;
/// membership queries are symmetric.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSet {
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at {a}")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { edges: out })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Canonical `(min, max)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Both orientations of every edge.
    pub fn directed(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)])
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Adjacency lists for agents `0..n`.
    pub fn adjacency(&self, n: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        edges.sort_unstable();
        edges.dedup();
        EdgeSet { edges }
    }
}

/// Whether `edges` connects all of `0..n`.
pub fn is_connected(n: usize, edges: &EdgeSet) -> bool {
    if n <= 1 {
        return true;
    }
    let adj = edges.adjacency(n);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Ring,
    /// Star centered on agent 0.
    Star,
    Complete,
    Explicit(Vec<(usize, usize)>),
}

impl Topology {
    /// Base edges in lexicographic `(min, max)` order.
    pub fn edges(&self, n: usize) -> Result<EdgeSet> {
        let raw: Vec<(usize, usize)> = match self {
            Topology::Ring => (0..n).map(|i| (i, (i + 1) % n)).filter(|(a, b)| a != b).collect(),
            Topology::Star => (1..n).map(|i| (0, i)).collect(),
            Topology::Complete => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            Topology::Explicit(list) => list.clone(),
        };
        if let Some(&(a, b)) = raw.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::AgentOutOfRange { agent: a.max(b), n });
        }
        EdgeSet::new(raw)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GraphKind {
    /// The base graph at every step.
    Static,
    /// One base edge per step, cycling through the base in lexicographic order.
    EdgeCycle,
    /// Each base edge active independently with probability `p` per step.
    SeededRandom { p: f64 },
    /// Each base edge gets a seeded phase in `[0, window)` and is active on
    /// steps congruent to it, plus independent extra activations with
    /// probability `p`. Every base edge appears in every `window` steps.
    Windowed { window: usize, p: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSequence {
    n: usize,
    kind: GraphKind,
    base: Topology,
    seed: u64,
    horizon: Option<usize>,
    base_edges: EdgeSet,
    phases: Vec<usize>,
}

impl GraphSequence {
    pub fn new(n: usize, kind: GraphKind, base: Topology, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "graph needs at least 2 agents, got {n}"
            )));
        }
        let base_edges = base.edges(n)?;
        let phases = match kind {
            GraphKind::SeededRandom { p } | GraphKind::Windowed { p, .. }
                if !(0.0..=1.0).contains(&p) =>
            {
                return Err(Error::InvalidParameter(format!(
                    "activation probability {p} outside [0, 1]"
                )))
            }
            GraphKind::Windowed { window: 0, .. } => {
                return Err(Error::InvalidParameter("window must be >= 1".into()))
            }
            GraphKind::Windowed { window, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[u64::MAX]));
                (0..base_edges.len()).map(|_| rng.gen_range(0..window)).collect()
            }
            _ => Vec::new(),
        };
        if matches!(kind, GraphKind::EdgeCycle) && base_edges.is_empty() {
            return Err(Error::InvalidParameter(
                "edge-cycle needs a non-empty base".into(),
            ));
        }
        Ok(Self {
            n,
            kind,
            base,
            seed,
            horizon: None,
            base_edges,
            phases,
        })
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn base(&self) -> &Topology {
        &self.base
    }

    pub fn base_edges(&self) -> &EdgeSet {
        &self.base_edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    /// The edge set E(t).
    pub fn edges_at(&self, t: usize) -> EdgeSet {
        match &self.kind {
            GraphKind::Static => self.base_edges.clone(),
            GraphKind::EdgeCycle => {
                let m = self.base_edges.len();
                EdgeSet {
                    edges: vec![self.base_edges.edges[t % m]],
                }
            }
            GraphKind::SeededRandom { p } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.seed, &[t as u64]));
                EdgeSet {
                    edges: self
                        .base_edges
                        .iter()
                        .filter(|_| rng.gen_bool(*p))
                        .collect(),
                }
            }
            GraphKind::Windowed { window, p } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.seed, &[t as u64]));
                EdgeSet {
                    edges: self
                        .base_edges
                        .iter()
                        .zip(&self.phases)
                        .filter(|(_, &phase)| {
                            // draw unconditionally so the stream layout is fixed
                            let extra = rng.gen_bool(*p);
                            t % window == phase || extra
                        })
                        .map(|(e, _)| e)
                        .collect(),
                }
            }
        }
    }

    /// 𝒩(i, t), excluding `i` itself.
    pub fn neighbors(&self, i: usize, t: usize) -> Result<Vec<usize>> {
        if i >= self.n {
            return Err(Error::AgentOutOfRange { agent: i, n: self.n });
        }
        Ok(self.edges_at(t).neighbors(i))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConnectivityReport {
    pub window: usize,
    pub t_start: usize,
    pub t_end: usize,
    pub connected: bool,
    pub first_failure: Option<usize>,
}

/// Checks that the union graph over every `[t, t + window - 1]` inside
/// `[t_start, t_end]` is connected.
pub fn validate_window_connectivity(
    seq: &GraphSequence,
    window: usize,
    t_start: usize,
    t_end: usize,
) -> Result<WindowConnectivityReport> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    if t_end + 1 < t_start + window {
        return Err(Error::InvalidParameter(format!(
            "range [{t_start}, {t_end}] shorter than window {window}"
        )));
    }
    let sets: Vec<EdgeSet> = (t_start..=t_end).map(|t| seq.edges_at(t)).collect();
    let mut first_failure = None;
    for start in 0..=(sets.len() - window) {
        let union = sets[start..start + window]
            .iter()
            .fold(EdgeSet::empty(), |acc, e| acc.union(e));
        if !is_connected(seq.n(), &union) {
            first_failure = Some(t_start + start);
            break;
        }
    }
    Ok(WindowConnectivityReport {
        window,
        t_start,
        t_end,
        connected: first_failure.is_none(),
        first_failure,
    })
}
