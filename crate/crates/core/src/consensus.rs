//! Row-stochastic weighted averaging with a stubborn tracked agent.
//!
//! Agent `j`'s empirical frequency is tracked with a weight matrix `W_j(t)`
//! whose row `j` is the basis row `e_jᵀ`: the tracked agent only listens to
//! itself, so backward products `Φ(t,s) = W(t)···W(s)` converge to `𝟙e_jᵀ`
//! and every other agent's estimate follows agent `j`.
//!
//! Besides the dynamics this module carries checkable forms of the product
//! bounds (diagonal positivity, last-column positivity, geometric decay).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EdgeSet;

/// Tolerance for a single matrix operation.
pub const SINGLE_OP_TOL: f64 = 1e-12;
/// Tolerance for long products (up to 10^4 factors).
pub const PRODUCT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// Uniform weight over the closed neighborhood 𝒩(i,t) ∪ {i}.
    UniformClosedNeighborhood,
    /// Neighbors of the tracked agent copy its value; everyone else keeps
    /// their own. Self-weights drop to zero, so the diagonal bounds do not
    /// apply to products of these matrices.
    DirectSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    eta: f64,
    rule: WeightRule,
}

impl WeightScheme {
    pub fn new(eta: f64, rule: WeightRule) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside (0, 1)")));
        }
        Ok(Self { eta, rule })
    }

    /// Uniform closed-neighborhood weights with η = 1/n.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("need n >= 2".into()));
        }
        Self::new(1.0 / n as f64, WeightRule::UniformClosedNeighborhood)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rule(&self) -> WeightRule {
        self.rule
    }

    /// Uniform weights are at least 1/n, so η must not exceed it.
    pub fn check_for(&self, n: usize) -> Result<()> {
        if self.eta > 1.0 / n as f64 + SINGLE_OP_TOL {
            return Err(Error::InvalidParameter(format!(
                "eta {} exceeds 1/n = {} for n = {n}",
                self.eta,
                1.0 / n as f64
            )));
        }
        Ok(())
    }
}

/// `W_j(t)`: row `i` holds the weights agent `i` puts on each agent's
/// estimate of the tracked agent `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    tracked: usize,
    entries: Vec<Vec<f64>>,
}

fn is_basis_row(row: &[f64], j: usize) -> bool {
    row.iter()
        .enumerate()
        .all(|(k, &x)| if k == j { x == 1.0 } else { x == 0.0 })
}

fn check_square(entries: &[Vec<f64>]) -> Result<usize> {
    let n = entries.len();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if let Some(r) = entries.iter().position(|row| row.len() != n) {
        return Err(Error::Dimension(format!(
            "row {r} has {} entries, expected {n}",
            entries[r].len()
        )));
    }
    Ok(n)
}

impl WeightMatrix {
    /// Validates row-stochasticity, nonnegativity and the stubborn row.
    pub fn new(tracked: usize, entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&entries)?;
        if tracked >= n {
            return Err(Error::AgentOutOfRange { agent: tracked, n });
        }
        for (i, row) in entries.iter().enumerate() {
            if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::Precondition(format!("row {i} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > SINGLE_OP_TOL {
                return Err(Error::Precondition(format!("row {i} sums to {s}")));
            }
        }
        if !is_basis_row(&entries[tracked], tracked) {
            return Err(Error::Precondition(format!(
                "row {tracked} of the tracked agent is not a basis row"
            )));
        }
        Ok(Self { tracked, entries })
    }

    pub fn identity(n: usize, tracked: usize) -> Self {
        Self {
            tracked,
            entries: identity(n),
        }
    }

    pub fn tracked(&self) -> usize {
        self.tracked
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i][k]
    }

    /// `W·x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "vector of length {} for a {}x{} matrix",
                x.len(),
                self.n(),
                self.n()
            )));
        }
        Ok(self.entries.iter().map(|row| dot(row, x)).collect())
    }

    /// Every nonzero entry is at least η, and when `adjacency` is given,
    /// nonzero entries sit only on closed neighborhoods.
    pub fn check_support(&self, eta: f64, adjacency: Option<&[Vec<usize>]>) -> Result<()> {
        for (i, row) in self.entries.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                if w < eta - SINGLE_OP_TOL {
                    return Err(Error::Precondition(format!(
                        "entry ({i},{k}) = {w} below eta = {eta}"
                    )));
                }
                if let Some(adj) = adjacency {
                    if k != i && !adj[i].contains(&k) {
                        return Err(Error::Precondition(format!(
                            "entry ({i},{k}) is positive but {k} is not a neighbor of {i}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a·b` for square matrices.
fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for (i, row) in a.iter().enumerate() {
        for (m, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &x) in out[i].iter_mut().zip(&b[m]) {
                *o += w * x;
            }
        }
    }
    out
}

/// Builds `W_j(t)` from the neighbor lists of the graph at time `t`.
pub fn build_weight_matrix(
    scheme: &WeightScheme,
    tracked: usize,
    neighbors: &[Vec<usize>],
) -> Result<WeightMatrix> {
    let n = neighbors.len();
    if tracked >= n {
        return Err(Error::AgentOutOfRange { agent: tracked, n });
    }
    for (i, list) in neighbors.iter().enumerate() {
        for &k in list {
            if k >= n {
                return Err(Error::AgentOutOfRange { agent: k, n });
            }
            if k == i {
                return Err(Error::Precondition(format!("agent {i} lists itself")));
            }
            if !neighbors[k].contains(&i) {
                return Err(Error::Precondition(format!(
                    "neighborhoods are not symmetric: {k} in N({i}) but not {i} in N({k})"
                )));
            }
        }
    }

    let mut entries = vec![vec![0.0; n]; n];
    for (i, row) in entries.iter_mut().enumerate() {
        if i == tracked {
            row[i] = 1.0;
            continue;
        }
        match scheme.rule {
            WeightRule::UniformClosedNeighborhood => {
                let mut closed: Vec<usize> = neighbors[i].clone();
                closed.push(i);
                closed.sort_unstable();
                closed.dedup();
                let w = 1.0 / closed.len() as f64;
                for k in closed {
                    row[k] = w;
                }
            }
            WeightRule::DirectSource => {
                if neighbors[i].contains(&tracked) {
                    row[tracked] = 1.0;
                } else {
                    row[i] = 1.0;
                }
            }
        }
    }
    Ok(WeightMatrix { tracked, entries })
}

/// `Φ(to, from) = W(to)·W(to−1)···W(from)`, together with the smallest
/// positive factor entry and smallest non-tracked factor diagonal seen while
/// building it (used to validate η against the factors).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixProduct {
    tracked: usize,
    from: usize,
    to: usize,
    entries: Vec<Vec<f64>>,
    min_positive_factor_entry: f64,
    min_factor_diagonal: f64,
}

impl MatrixProduct {
    pub fn start(w: &WeightMatrix, from: usize) -> Self {
        let mut p = Self {
            tracked: w.tracked,
            from,
            to: from,
            entries: w.entries.clone(),
            min_positive_factor_entry: f64::INFINITY,
            min_factor_diagonal: f64::INFINITY,
        };
        p.absorb_stats(w);
        p
    }

    fn absorb_stats(&mut self, w: &WeightMatrix) {
        for (i, row) in w.entries.iter().enumerate() {
            for &x in row {
                if x > 0.0 {
                    self.min_positive_factor_entry = self.min_positive_factor_entry.min(x);
                }
            }
            if i != w.tracked {
                self.min_factor_diagonal = self.min_factor_diagonal.min(row[i]);
            }
        }
    }

    /// Left-multiplies the next factor `W(to + 1)`.
    pub fn push(&mut self, w: &WeightMatrix) -> Result<()> {
        if w.tracked != self.tracked {
            return Err(Error::TrackedMismatch {
                expected: self.tracked,
                found: w.tracked,
            });
        }
        if w.n() != self.n() {
            return Err(Error::Dimension(format!(
                "factor is {}x{}, product is {}x{}",
                w.n(),
                w.n(),
                self.n(),
                self.n()
            )));
        }
        self.entries = matmul(&w.entries, &self.entries);
        self.to += 1;
        self.absorb_stats(w);
        Ok(())
    }

    pub fn tracked(&self) -> usize {
        self.tracked
    }

    pub fn from(&self) -> usize {
        self.from
    }

    pub fn to(&self) -> usize {
        self.to
    }

    /// Number of factors, `to − from + 1`.
    pub fn len(&self) -> usize {
        self.to - self.from + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i][k]
    }

    /// max |Φ − 𝟙e_jᵀ| over entries.
    pub fn max_deviation_from_limit(&self) -> f64 {
        let j = self.tracked;
        self.entries
            .iter()
            .flat_map(|row| {
                row.iter()
                    .enumerate()
                    .map(move |(k, &x)| (x - if k == j { 1.0 } else { 0.0 }).abs())
            })
            .fold(0.0, f64::max)
    }

    fn check_eta(&self, eta: f64) -> Result<()> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside (0, 1)")));
        }
        if self.min_positive_factor_entry < eta - SINGLE_OP_TOL {
            return Err(Error::Precondition(format!(
                "a factor has a positive entry {} below eta = {eta}",
                self.min_positive_factor_entry
            )));
        }
        if self.min_factor_diagonal < eta - SINGLE_OP_TOL {
            return Err(Error::Precondition(format!(
                "a factor has a self-weight {} below eta = {eta}",
                self.min_factor_diagonal
            )));
        }
        Ok(())
    }
}

/// Backward product of `matrices`, which hold `W(from), W(from+1), …` in
/// time order.
pub fn product_phi(matrices: &[WeightMatrix], from: usize) -> Result<MatrixProduct> {
    let (first, rest) = matrices
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty matrix sequence".into()))?;
    let mut p = MatrixProduct::start(first, from);
    for w in rest {
        p.push(w)?;
    }
    Ok(p)
}

/// Estimates of one coordinate of the tracked agent's frequency, one entry
/// per agent. Entry `tracked` is the true value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingState {
    pub x: Vec<f64>,
    pub t: usize,
    pub tracked: usize,
}

impl TrackingState {
    /// All agents start at the tracked value.
    pub fn agreed(n: usize, tracked: usize, value: f64) -> Self {
        Self {
            x: vec![value; n],
            t: 0,
            tracked,
        }
    }

    /// max_i |x_i − x_tracked|.
    pub fn max_error(&self) -> f64 {
        let v = self.x[self.tracked];
        self.x.iter().map(|&xi| (xi - v).abs()).fold(0.0, f64::max)
    }
}

/// `x(t+1) = W·(x(t) + (new_value − x_j(t))·e_j)`.
pub fn step_tracking(
    state: &TrackingState,
    w: &WeightMatrix,
    new_value: f64,
) -> Result<TrackingState> {
    if w.tracked != state.tracked {
        return Err(Error::TrackedMismatch {
            expected: state.tracked,
            found: w.tracked,
        });
    }
    let mut shifted = state.x.clone();
    if state.tracked >= shifted.len() {
        return Err(Error::Dimension("tracked index outside state".into()));
    }
    shifted[state.tracked] = new_value;
    let mut x = w.apply(&shifted)?;
    // the stubborn row reproduces new_value exactly; keep it bit-identical
    x[state.tracked] = new_value;
    Ok(TrackingState {
        x,
        t: state.t + 1,
        tracked: state.tracked,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Bound {
    pub kappa: f64,
    pub rho: f64,
    pub bound: f64,
}

/// Entrywise bound `|[Φ(t,s)]_{i,k} − [e_j]_k| ≤ κρ^{t−s}` with
/// `κ = (n−1)/(1−η^{(n−1)T})`, `ρ = (1−η^{(n−1)T})^{1/(dT)}`, `d = (n−1)T`.
pub fn lemma1_bound(n: usize, eta: f64, window: usize, t: usize, s: usize) -> Result<Lemma1Bound> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta {eta} outside (0, 1)")));
    }
    if window == 0 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    if t < s {
        return Err(Error::InvalidParameter(format!("t = {t} < s = {s}")));
    }
    let d = (n - 1) * window;
    let gap = 1.0 - eta.powi(d as i32);
    let kappa = (n - 1) as f64 / gap;
    let rho = gap.powf(1.0 / (d * window) as f64);
    Ok(Lemma1Bound {
        kappa,
        rho,
        bound: kappa * rho.powi((t - s) as i32),
    })
}

/// Edge sets `E(from), …, E(to)` backing a product, for the path-based
/// positivity checks.
#[derive(Clone, Copy, Debug)]
pub struct PathInfo<'a> {
    pub edges: &'a [EdgeSet],
    /// Also check two-hop paths.
    pub two_hop: bool,
}

fn union_range(edges: &[EdgeSet], lo: usize, hi: usize) -> EdgeSet {
    edges[lo..hi]
        .iter()
        .fold(EdgeSet::empty(), |acc, e| acc.union(e))
}

/// Diagonal and path positivity of `Φ(t,s)`: every diagonal entry, and
/// every entry `(i,k)` with `i` not tracked joined by an edge inside the
/// window, is at least `η^{t−s+1}`.
///
/// The two-hop check uses the orientation matching `Φ(t,s) = W(t)···W(s)`:
/// `k` reaches `v` by an edge in `[s, r]`, then `v` reaches `i` by an edge
/// in `[r+1, t]`.
pub fn check_lemma_diagonal(
    phi: &MatrixProduct,
    eta: f64,
    paths: Option<PathInfo<'_>>,
) -> Result<bool> {
    phi.check_eta(eta)?;
    let bound = eta.powi(phi.len() as i32) - SINGLE_OP_TOL;
    let n = phi.n();
    if (0..n).any(|i| phi.get(i, i) < bound) {
        return Ok(false);
    }
    let Some(paths) = paths else {
        return Ok(true);
    };
    if paths.edges.len() != phi.len() {
        return Err(Error::WindowLength {
            expected: phi.len(),
            got: paths.edges.len(),
        });
    }
    let j = phi.tracked();
    let all = union_range(paths.edges, 0, paths.edges.len());
    for (i, k) in all.directed() {
        if i != j && phi.get(i, k) < bound {
            return Ok(false);
        }
    }
    if paths.two_hop {
        let len = paths.edges.len();
        for split in 0..len - 1 {
            let early = union_range(paths.edges, 0, split + 1);
            let late = union_range(paths.edges, split + 1, len);
            for (i, v) in late.directed() {
                if i == j || v == j {
                    continue;
                }
                for k in early.neighbors(v) {
                    if phi.get(i, k) < bound {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Last-column positivity over a window of exactly `(n−1)·window` factors:
/// every entry of the tracked column is at least `η^{(n−1)T}`.
pub fn check_lemma_lastcol(phi: &MatrixProduct, eta: f64, window: usize) -> Result<bool> {
    phi.check_eta(eta)?;
    let n = phi.n();
    let expected = (n - 1) * window;
    if phi.len() != expected {
        return Err(Error::WindowLength {
            expected,
            got: phi.len(),
        });
    }
    let bound = eta.powi(expected as i32) - SINGLE_OP_TOL;
    let j = phi.tracked();
    Ok((0..n).all(|i| phi.get(i, j) >= bound))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `x_0, x_1, …, x_K`.
    pub iterates: Vec<Vec<f64>>,
    /// `max_{i≠j} [x_k]_i ≤ (1−ζ)^{k−1}‖x_0‖∞` for every `k ≥ 1`.
    pub holds: bool,
    /// The one-step-sharper `max_{i≠j} [x_k]_i ≤ (1−ζ)^k‖x_0‖∞`.
    pub sharp_holds: bool,
}

/// Iterates `x_{k+1} = D_k x_k` and checks geometric decay of the
/// non-tracked entries. Each `D_k` must be row-stochastic with tracked row
/// `e_jᵀ` (enforced by [`WeightMatrix`]) and tracked column `≥ ζ`.
pub fn contraction_step(x0: &[f64], ds: &[WeightMatrix], zeta: f64) -> Result<ContractionReport> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::InvalidParameter(format!("zeta {zeta} outside (0, 1]")));
    }
    let Some(first) = ds.first() else {
        return Err(Error::InvalidParameter("empty matrix sequence".into()));
    };
    let j = first.tracked();
    if x0.len() != first.n() {
        return Err(Error::Dimension(format!(
            "x0 has length {}, matrices are {}x{}",
            x0.len(),
            first.n(),
            first.n()
        )));
    }
    if x0[j] != 0.0 {
        return Err(Error::Precondition(format!("x0[{j}] must be 0")));
    }
    for (k, d) in ds.iter().enumerate() {
        if d.tracked() != j {
            return Err(Error::TrackedMismatch {
                expected: j,
                found: d.tracked(),
            });
        }
        if (0..d.n()).any(|i| d.get(i, j) < zeta - SINGLE_OP_TOL) {
            return Err(Error::Precondition(format!(
                "D_{k} has a tracked-column entry below zeta = {zeta}"
            )));
        }
    }

    let norm0 = x0.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut iterates = vec![x0.to_vec()];
    let mut holds = true;
    let mut sharp_holds = true;
    for (k, d) in ds.iter().enumerate() {
        let next = d.apply(iterates.last().unwrap())?;
        let steps = k + 1;
        let top = next
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &x)| x)
            .fold(f64::NEG_INFINITY, f64::max);
        if top > (1.0 - zeta).powi(steps as i32 - 1) * norm0 + SINGLE_OP_TOL {
            holds = false;
        }
        if top > (1.0 - zeta).powi(steps as i32) * norm0 + SINGLE_OP_TOL {
            sharp_holds = false;
        }
        iterates.push(next);
    }
    Ok(ContractionReport {
        iterates,
        holds,
        sharp_holds,
    })
}
