//! JSON experiment configuration.
//!
//! A config has five sections: `game`, `graph`, `weights`, `learning` and
//! `run`. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "game": { "kind": "target-assignment", "n": 5, "world_seed": 2019 },
//!   "graph": { "kind": "edge-cycle", "base": "star", "T": 5 },
//!   "weights": { "rule": "uniform" },
//!   "learning": { "kind": "running-mean", "noise_scale": 0.05 },
//!   "run": { "horizon": 10000, "seed": 1 }
//! }
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::consensus::{WeightRule, WeightScheme};
use crate::engine::{SimConfig, StateLearning};
use crate::error::{Error, Result};
use crate::game::{self, ActionSpace, GameSpec, JointAction, StateBelief, StateSpace};
use crate::graph::{GraphKind, GraphSequence, Topology};
use crate::target::{self, Point, TargetWorld};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSection,
    pub graph: GraphSection,
    #[serde(default)]
    pub weights: WeightsSection,
    pub learning: StateLearning,
    pub run: RunSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GameSection {
    /// Seeded benchmark geometry, or explicit positions.
    TargetAssignment {
        #[serde(default = "default_agents")]
        n: usize,
        #[serde(default)]
        world_seed: Option<u64>,
        #[serde(default)]
        agents: Option<Vec<Point>>,
        #[serde(default)]
        targets: Option<Vec<Point>>,
    },
    /// Payoff 1 when every agent picks the same action index, else 0.
    Coordination { sizes: Vec<usize> },
    /// Common payoff drawn uniformly from [0, 1) per joint action.
    RandomIdentical { sizes: Vec<usize>, payoff_seed: u64 },
}

fn default_agents() -> usize {
    target::BENCHMARK_AGENTS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKindName {
    Static,
    EdgeCycle,
    SeededRandom,
    Windowed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub kind: GraphKindName,
    pub base: Topology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Connectivity window; defaults to the base edge count for edge-cycle
    /// graphs and 1 otherwise.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    #[default]
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    #[serde(default)]
    pub rule: RuleName,
    /// Defaults to 1/n.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: usize,
    pub seed: u64,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default)]
    pub extra_exchange: bool,
}

fn default_cadence() -> usize {
    1
}

/// A config resolved into runnable parts.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub sim: SimConfig,
    pub world: Option<TargetWorld>,
    /// Pure equilibria under the true state; empty when too large to
    /// enumerate.
    pub ne_set: Vec<JointAction>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn agent_count(&self) -> usize {
        match &self.game {
            GameSection::TargetAssignment { n, agents, .. } => {
                agents.as_ref().map_or(*n, |a| a.len())
            }
            GameSection::Coordination { sizes } | GameSection::RandomIdentical { sizes, .. } => {
                sizes.len()
            }
        }
    }

    /// Replaces the graph by a named topology such as `cycle-star` or
    /// `static-ring`. Edge-cycle topologies get a window equal to their base
    /// edge count.
    pub fn with_topology(&self, name: &str) -> Result<Self> {
        let (kind, base) = name
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("bad topology name {name:?}")))?;
        let kind = match kind {
            "static" => GraphKindName::Static,
            "cycle" => GraphKindName::EdgeCycle,
            "random" => GraphKindName::SeededRandom,
            "windowed" => GraphKindName::Windowed,
            other => return Err(Error::Config(format!("unknown graph kind {other:?}"))),
        };
        let base = match base {
            "ring" => Topology::Ring,
            "star" => Topology::Star,
            "complete" => Topology::Complete,
            other => return Err(Error::Config(format!("unknown base topology {other:?}"))),
        };
        let mut out = self.clone();
        out.graph.kind = kind;
        out.graph.window = match kind {
            GraphKindName::EdgeCycle => {
                Some(base.edges(self.agent_count())?.len().max(1))
            }
            _ => self.graph.window,
        };
        if kind == GraphKindName::SeededRandom && out.graph.p.is_none() {
            out.graph.p = Some(0.5);
        }
        out.graph.base = base;
        Ok(out)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.run.seed = seed;
        out
    }

    pub fn build(&self) -> Result<Experiment> {
        let (game, world, true_state) = self.build_game()?;
        let n = game.n();
        if let Some(gn) = self.graph.n {
            if gn != n {
                return Err(Error::Config(format!(
                    "graph.n = {gn} but the game has {n} agents"
                )));
            }
        }
        let kind = match self.graph.kind {
            GraphKindName::Static => GraphKind::Static,
            GraphKindName::EdgeCycle => GraphKind::EdgeCycle,
            GraphKindName::SeededRandom => GraphKind::SeededRandom {
                p: self
                    .graph
                    .p
                    .ok_or_else(|| Error::Config("seeded-random graphs need p".into()))?,
            },
            GraphKindName::Windowed => GraphKind::Windowed {
                window: self
                    .graph
                    .window
                    .ok_or_else(|| Error::Config("windowed graphs need T".into()))?,
                p: self.graph.p.unwrap_or(0.0),
            },
        };
        let graph = GraphSequence::new(n, kind, self.graph.base.clone(), self.graph.seed)?
            .with_horizon(self.run.horizon);
        let window = match self.graph.window {
            Some(w) => w,
            None if self.graph.kind == GraphKindName::EdgeCycle => graph.base_edges().len(),
            None => 1,
        };

        let eta = self.weights.eta.unwrap_or(1.0 / n as f64);
        let scheme = match self.weights.rule {
            RuleName::Uniform => WeightScheme::new(eta, WeightRule::UniformClosedNeighborhood)?,
        };

        let sim = SimConfig {
            game,
            graph,
            scheme,
            horizon: self.run.horizon,
            seed: self.run.seed,
            learning: self.learning.clone(),
            true_state,
            cadence: self.run.cadence,
            extra_exchange: self.run.extra_exchange,
            window,
        };
        sim.validate()?;

        let ne_set = match &world {
            Some(w) if w.n() <= target::ENUMERATION_MAX_AGENTS => {
                target::enumerate_pure_ne(w, &w.theta())?
            }
            Some(_) => Vec::new(),
            None => match game::pure_nash_profiles(&sim.game, &sim.true_state) {
                Ok(set) => set,
                Err(Error::Capacity { .. }) => Vec::new(),
                Err(e) => return Err(e),
            },
        };

        Ok(Experiment { sim, world, ne_set })
    }

    fn build_game(&self) -> Result<(GameSpec, Option<TargetWorld>, StateBelief)> {
        let noise = match self.learning {
            StateLearning::RunningMean { noise_scale } => noise_scale,
            StateLearning::Known => 0.0,
        };
        match &self.game {
            GameSection::TargetAssignment {
                n,
                world_seed,
                agents,
                targets,
            } => {
                let world = match (agents, targets) {
                    (Some(a), Some(t)) => TargetWorld::new(a.clone(), t.clone(), noise)?,
                    (None, None) => {
                        target::make_world(*n, world_seed.unwrap_or(target::BENCHMARK_SEED), noise)?
                    }
                    _ => {
                        return Err(Error::Config(
                            "give both agents and targets, or neither".into(),
                        ))
                    }
                };
                if world.n() < 2 {
                    return Err(Error::Config("need at least 2 agents".into()));
                }
                let game = world.game()?;
                let theta = StateBelief::point(world.theta());
                Ok((game, Some(world), theta))
            }
            GameSection::Coordination { sizes } => {
                let space = ActionSpace::new(sizes.clone())?;
                let game = GameSpec::new(
                    space,
                    StateSpace::Parametric { dim: 0 },
                    |a: &[usize], _: &[f64]| {
                        if a.iter().all(|&x| x == a[0]) {
                            1.0
                        } else {
                            0.0
                        }
                    },
                );
                Ok((game, None, StateBelief::point(vec![])))
            }
            GameSection::RandomIdentical { sizes, payoff_seed } => {
                let game = random_identical_game(sizes.clone(), *payoff_seed)?;
                Ok((game, None, StateBelief::point(vec![])))
            }
        }
    }
}

/// Identical-interest game with payoffs drawn uniformly from [0, 1), stored
/// as a row-major table (agent 0 slowest).
pub fn random_identical_game(sizes: Vec<usize>, seed: u64) -> Result<GameSpec> {
    let space = ActionSpace::new(sizes)?;
    let count = space.joint_count();
    if count > game::DEFAULT_ENUMERATION_CAP as u128 {
        return Err(Error::Config(format!(
            "payoff table with {count} entries is too large"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table: Vec<f64> = (0..count).map(|_| rng.gen::<f64>()).collect();
    let sizes = space.sizes().to_vec();
    Ok(GameSpec::new(
        space,
        StateSpace::Parametric { dim: 0 },
        move |a: &[usize], _: &[f64]| {
            let idx = a.iter().zip(&sizes).fold(0usize, |acc, (&x, &s)| acc * s + x);
            table[idx]
        },
    ))
}
