//! The decentralized fictitious play loop.
//!
//! Every agent keeps its own empirical frequency `f_i`, an estimate table
//! `v^i_j` of every agent's frequency (with `v^i_i = f_i`), and a belief over
//! the environment state. One step is a barrier-synchronized sequence of
//! phases: best responses from the pre-step snapshot, frequency updates, one
//! round of weighted averaging over the current edges, then state learning.
//!
//! Indexing convention: initial actions are drawn at `t = 0`, frequencies
//! exist from `t = 1`, and step `t` applies the recursion with divisor `t`.
//! For `t ≥ 2`, `f_i(t)` is the mean of `onehot(a_i(1..t−1))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::consensus::{build_weight_matrix, WeightRule, WeightScheme};
use crate::error::{Error, Result};
use crate::game::{self, GameSpec, JointAction, MixedStrategy, StateBelief};
use crate::graph::{validate_window_connectivity, EdgeSet, GraphSequence, WindowConnectivityReport};
use crate::metrics;
use crate::seed;

const INIT_STREAM: u64 = 0x1417;
const SIGNAL_STREAM: u64 = 0x516A;

/// Running statistics of an agent's private signals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalAccumulator {
    pub mean: Vec<f64>,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    /// `f_i(t)`.
    pub freq: Vec<f64>,
    /// `v^i_j(t)` for every `j`; entry `id` equals `freq`.
    pub estimates: Vec<Vec<f64>>,
    pub belief: StateBelief,
    pub signals: SignalAccumulator,
}

impl AgentState {
    /// The agent's model of the joint play: its estimates of everyone.
    pub fn profile(&self) -> MixedStrategy {
        MixedStrategy::from_vecs_unchecked(self.estimates.clone())
    }
}

/// How agents learn the environment state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum StateLearning {
    /// Isotropic Gaussian signals around the true state; each agent believes
    /// the point mass at the running mean of its signals.
    RunningMean { noise_scale: f64 },
    /// Every agent holds the true belief from the start.
    Known,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub game: GameSpec,
    pub graph: GraphSequence,
    pub scheme: WeightScheme,
    pub horizon: usize,
    pub seed: u64,
    pub learning: StateLearning,
    /// The common limit belief μ; a point mass for running-mean learning.
    pub true_state: StateBelief,
    /// Record every `cadence` steps (and always at the horizon).
    pub cadence: usize,
    /// Run a second exchange round per step in which neighbors of each
    /// tracked agent copy its reported frequency.
    pub extra_exchange: bool,
    /// Window used for the connectivity report attached to the trace.
    pub window: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.game.n();
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidParameter("cadence must be >= 1".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidParameter("window must be >= 1".into()));
        }
        if self.graph.n() != n {
            return Err(Error::Dimension(format!(
                "graph has {} agents, game has {n}",
                self.graph.n()
            )));
        }
        self.scheme.check_for(n)?;
        self.game.check_belief(&self.true_state)?;
        if let StateLearning::RunningMean { noise_scale } = self.learning {
            if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "noise scale {noise_scale} must be finite and >= 0"
                )));
            }
            if !matches!(self.true_state, StateBelief::PointMass(_)) {
                return Err(Error::Representation(
                    "running-mean learning needs a point-mass true state".into(),
                ));
            }
        }
        Ok(())
    }
}

/// All agents at one instant. `t` is the next step to execute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub agents: Vec<AgentState>,
    pub t: usize,
}

impl World {
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// The true frequency profile `f(t)`.
    pub fn frequencies(&self) -> MixedStrategy {
        MixedStrategy::from_vecs_unchecked(self.agents.iter().map(|a| a.freq.clone()).collect())
    }
}

/// `f + (1/t)·(onehot(action) − f)`.
pub fn update_frequency(freq: &[f64], t: usize, action: usize) -> Result<Vec<f64>> {
    if action >= freq.len() {
        return Err(Error::ActionOutOfRange {
            agent: 0,
            action,
            size: freq.len(),
        });
    }
    if t == 0 {
        return Err(Error::InvalidParameter("frequency step needs t >= 1".into()));
    }
    let step = 1.0 / t as f64;
    Ok(freq
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let target = if k == action { 1.0 } else { 0.0 };
            f + step * (target - f)
        })
        .collect())
}

/// One round of weighted averaging: for every tracked agent `j`, each agent
/// replaces `v^i_j` by `Σ_k [W_j]_{i,k} v^k_j`. Returns the new tables,
/// indexed `[i][j]`.
pub fn exchange_estimates(
    agents: &[AgentState],
    edges: &EdgeSet,
    scheme: &WeightScheme,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = agents.len();
    for a in agents {
        if a.estimates.len() != n {
            return Err(Error::Dimension(format!(
                "agent {} tracks {} agents, expected {n}",
                a.id,
                a.estimates.len()
            )));
        }
    }
    let adjacency = edges.adjacency(n);
    let mut out: Vec<Vec<Vec<f64>>> = agents.iter().map(|a| a.estimates.clone()).collect();
    for j in 0..n {
        let dim = agents[j].freq.len();
        if let Some(bad) = agents.iter().find(|a| a.estimates[j].len() != dim) {
            return Err(Error::Dimension(format!(
                "agent {} estimates agent {j} over {} actions, expected {dim}",
                bad.id,
                bad.estimates[j].len()
            )));
        }
        let w = build_weight_matrix(scheme, j, &adjacency)?;
        for (i, row) in w.entries().iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![0.0; dim];
            for (k, &weight) in row.iter().enumerate() {
                if weight == 0.0 {
                    continue;
                }
                for (o, &x) in next.iter_mut().zip(&agents[k].estimates[j]) {
                    *o += weight * x;
                }
            }
            out[i][j] = next;
        }
        out[j][j] = agents[j].freq.clone();
    }
    Ok(out)
}

/// Folds `signal` into the running mean and returns the new point-mass
/// belief.
pub fn learn_state(state: &mut AgentState, signal: &[f64]) -> Result<StateBelief> {
    let acc = &mut state.signals;
    if acc.count > 0 && acc.mean.len() != signal.len() {
        return Err(Error::Dimension(format!(
            "signal has dimension {}, state has {}",
            signal.len(),
            acc.mean.len()
        )));
    }
    acc.count += 1;
    if acc.count == 1 {
        acc.mean = signal.to_vec();
    } else {
        let c = acc.count as f64;
        for (m, &s) in acc.mean.iter_mut().zip(signal) {
            *m += (s - *m) / c;
        }
    }
    state.belief = StateBelief::PointMass(acc.mean.clone());
    Ok(state.belief.clone())
}

/// Agent `agent`'s private signal at step `t`.
pub fn signal(config: &SimConfig, agent: usize, t: usize) -> Result<Vec<f64>> {
    let StateBelief::PointMass(theta) = &config.true_state else {
        return Err(Error::Representation("signals need a point-mass state".into()));
    };
    let scale = match config.learning {
        StateLearning::RunningMean { noise_scale } => noise_scale,
        StateLearning::Known => 0.0,
    };
    if scale == 0.0 {
        return Ok(theta.clone());
    }
    let normal = Normal::new(0.0, scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(
        config.seed,
        &[SIGNAL_STREAM, agent as u64, t as u64],
    ));
    Ok(theta.iter().map(|&x| x + normal.sample(&mut rng)).collect())
}

/// Draws initial actions, broadcasts them so every estimate equals the true
/// initial frequency, and seeds beliefs with the first private signal.
pub fn initialize(config: &SimConfig) -> Result<World> {
    config.validate()?;
    let space = config.game.action_space();
    let n = space.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(config.seed, &[INIT_STREAM]));
    let initial: Vec<usize> = space.sizes().iter().map(|&s| rng.gen_range(0..s)).collect();
    let freqs: Vec<Vec<f64>> = initial
        .iter()
        .zip(space.sizes())
        .map(|(&a, &s)| game::one_hot(s, a))
        .collect();

    let mut agents = Vec::with_capacity(n);
    for id in 0..n {
        let mut agent = AgentState {
            id,
            freq: freqs[id].clone(),
            estimates: freqs.clone(),
            belief: config.true_state.clone(),
            signals: SignalAccumulator {
                mean: Vec::new(),
                count: 0,
            },
        };
        if let StateLearning::RunningMean { .. } = config.learning {
            learn_state(&mut agent, &signal(config, id, 0)?)?;
        }
        agents.push(agent);
    }
    Ok(World { agents, t: 1 })
}

/// Executes step `t` on `world`: best responses, frequency updates, estimate
/// exchange over `E(t)`, state learning.
pub fn step(world: &World, config: &SimConfig, t: usize) -> Result<(JointAction, World)> {
    if t == 0 {
        return Err(Error::InvalidParameter("steps start at t = 1".into()));
    }
    let game = &config.game;

    // (ii) simultaneous best responses against the time-t snapshot
    let mut actions = Vec::with_capacity(world.n());
    for agent in &world.agents {
        actions.push(game::best_response(game, agent.id, &agent.profile(), &agent.belief)?);
    }
    let actions = JointAction::new(game.action_space(), actions)?;

    // (iii) own frequencies
    let mut agents = world.agents.clone();
    for (agent, &a) in agents.iter_mut().zip(actions.as_slice()) {
        agent.freq = update_frequency(&agent.freq, t, a)?;
        agent.estimates[agent.id] = agent.freq.clone();
    }

    // (iv) one round of averaging over the current edges
    let edges = config.graph.edges_at(t);
    let tables = exchange_estimates(&agents, &edges, &config.scheme)?;
    for (agent, table) in agents.iter_mut().zip(tables) {
        agent.estimates = table;
    }
    if config.extra_exchange {
        let direct = WeightScheme::new(config.scheme.eta(), WeightRule::DirectSource)?;
        let tables = exchange_estimates(&agents, &edges, &direct)?;
        for (agent, table) in agents.iter_mut().zip(tables) {
            agent.estimates = table;
        }
    }

    // (v) state learning
    if let StateLearning::RunningMean { .. } = config.learning {
        for agent in agents.iter_mut() {
            let s = signal(config, agent.id, t)?;
            learn_state(agent, &s)?;
        }
    }

    Ok((actions, World { agents, t: t + 1 }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub actions: JointAction,
    pub estimate_error: f64,
    /// Absent when no equilibrium set was supplied.
    pub ne_distance: Option<f64>,
    pub tv_disagreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub records: Vec<TraceRecord>,
    pub connectivity: WindowConnectivityReport,
}

/// A run in progress.
#[derive(Clone, Debug)]
pub struct Simulation<'a> {
    config: &'a SimConfig,
    world: World,
}

impl<'a> Simulation<'a> {
    pub fn new(config: &'a SimConfig) -> Result<Self> {
        Ok(Self {
            world: initialize(config)?,
            config,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    /// Executes the next step, or returns `None` past the horizon.
    pub fn advance(&mut self) -> Result<Option<JointAction>> {
        let t = self.world.t;
        if t > self.config.horizon {
            return Ok(None);
        }
        let (actions, next) = step(&self.world, self.config, t)?;
        self.world = next;
        Ok(Some(actions))
    }
}

/// Runs `initialize` and every step up to the horizon, recording metrics
/// after each cadence tick. `ne_set` may be empty, in which case NE
/// distances are not recorded.
pub fn run(config: &SimConfig, ne_set: &[JointAction]) -> Result<SimTrace> {
    let end = config.horizon.max(config.window);
    let connectivity = validate_window_connectivity(&config.graph, config.window, 1, end)?;
    let mut sim = Simulation::new(config)?;
    let mut records = Vec::new();
    while let Some(actions) = sim.advance()? {
        let t = sim.world().t - 1;
        if t % config.cadence != 0 && t != config.horizon {
            continue;
        }
        let world = sim.world();
        let ne_distance = if ne_set.is_empty() {
            None
        } else {
            Some(metrics::ne_distance(world, ne_set)?)
        };
        records.push(TraceRecord {
            t,
            actions,
            estimate_error: metrics::estimate_error(world),
            ne_distance,
            tv_disagreement: metrics::tv_disagreement(world, &config.true_state)?,
        });
    }
    Ok(SimTrace {
        records,
        connectivity,
    })
}
