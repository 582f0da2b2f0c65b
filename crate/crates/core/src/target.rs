//! Target assignment: `n` agents cover `n` targets. An agent earns the
//! inverse squared distance to its target unless another agent picked the
//! same target, in which case it earns nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, ActionSpace, GameSpec, JointAction, MixedStrategy, StateBelief, StateSpace, Utility};

/// Agents in the benchmark world.
pub const BENCHMARK_AGENTS: usize = 5;
/// Minimum agent–target separation enforced by the generator.
pub const MIN_SEPARATION: f64 = 0.05;
/// Default per-step signal noise of the benchmark.
pub const BENCHMARK_NOISE: f64 = 0.05;
/// Seed of the published benchmark world.
pub const BENCHMARK_SEED: u64 = 2019;
/// Largest `n` for which the equilibrium set is enumerated (7^7 profiles).
pub const ENUMERATION_MAX_AGENTS: usize = 7;

const MAX_PLACEMENT_TRIES: usize = 10_000;

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetWorld {
    pub agents: Vec<Point>,
    pub targets: Vec<Point>,
    pub noise_scale: f64,
    /// Generator seed, when the world came from [`make_world`].
    pub seed: Option<u64>,
}

impl TargetWorld {
    pub fn new(agents: Vec<Point>, targets: Vec<Point>, noise_scale: f64) -> Result<Self> {
        if agents.is_empty() || agents.len() != targets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} agents and {} targets; need equal positive counts",
                agents.len(),
                targets.len()
            )));
        }
        for (i, a) in agents.iter().enumerate() {
            for (k, t) in targets.iter().enumerate() {
                if sq_dist(a, t) == 0.0 {
                    return Err(Error::Singular {
                        agent: i,
                        target: k,
                    });
                }
            }
        }
        Ok(Self {
            agents,
            targets,
            noise_scale,
            seed: None,
        })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// θ: target coordinates flattened as `[x_0, y_0, x_1, y_1, …]`.
    pub fn theta(&self) -> Vec<f64> {
        self.targets.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        ActionSpace::with_any_agents(vec![self.n(); self.n()])
    }

    /// The common-payoff game with Θ parameterized by target positions.
    pub fn game(&self) -> Result<GameSpec> {
        Ok(GameSpec::new(
            self.action_space()?,
            StateSpace::Parametric { dim: 2 * self.n() },
            TargetUtility {
                agents: self.agents.clone(),
            },
        ))
    }
}

fn sq_dist(a: &Point, b: &[f64]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// The payoff as a [`Utility`], with target positions supplied as the state.
#[derive(Clone, Debug)]
pub struct TargetUtility {
    agents: Vec<Point>,
}

impl TargetUtility {
    fn target<'a>(&self, theta: &'a [f64], k: usize) -> &'a [f64] {
        &theta[2 * k..2 * k + 2]
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != 2 * self.agents.len() {
            return Err(Error::Dimension(format!(
                "theta has {} coordinates, expected {}",
                theta.len(),
                2 * self.agents.len()
            )));
        }
        Ok(())
    }

    fn inv_sq(&self, agent: usize, theta: &[f64], k: usize) -> Result<f64> {
        let d2 = sq_dist(&self.agents[agent], self.target(theta, k));
        if d2 == 0.0 {
            return Err(Error::Singular { agent, target: k });
        }
        Ok(1.0 / d2)
    }
}

impl Utility for TargetUtility {
    fn payoff(&self, actions: &[usize], theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        let n = self.agents.len();
        let mut takers = vec![0usize; n];
        for &a in actions {
            takers[a] += 1;
        }
        let mut total = 0.0;
        for (i, &a) in actions.iter().enumerate() {
            let value = self.inv_sq(i, theta, a)?;
            if takers[a] == 1 {
                total += value;
            }
        }
        Ok(total)
    }

    /// Σ_i Σ_k σ_i(k)·‖x_i − θ_k‖⁻²·Π_{j≠i}(1 − σ_j(k)).
    fn expected(&self, sigma: &MixedStrategy, theta: &[f64]) -> Option<Result<f64>> {
        Some(self.expected_closed_form(sigma, theta))
    }
}

impl TargetUtility {
    fn expected_closed_form(&self, sigma: &MixedStrategy, theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        let n = self.agents.len();
        let mut total = 0.0;
        for i in 0..n {
            for (k, &p) in sigma.agent(i).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let free: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| 1.0 - sigma.agent(j)[k])
                    .product();
                total += p * self.inv_sq(i, theta, k)? * free;
            }
        }
        Ok(total)
    }
}

/// u(a, θ) for the world's agents and target positions `theta`.
pub fn task_utility(world: &TargetWorld, a: &JointAction, theta: &[f64]) -> Result<f64> {
    let a = JointAction::new(&world.action_space()?, a.as_slice().to_vec())?;
    TargetUtility {
        agents: world.agents.clone(),
    }
    .payoff(a.as_slice(), theta)
}

/// Every pure equilibrium under the point belief at `theta`, by exhaustive
/// deviation scan.
pub fn enumerate_pure_ne(world: &TargetWorld, theta: &[f64]) -> Result<Vec<JointAction>> {
    let n = world.n();
    if n > ENUMERATION_MAX_AGENTS {
        return Err(Error::Capacity {
            needed: (n as u128).pow(n as u32),
            cap: (ENUMERATION_MAX_AGENTS as u64).pow(ENUMERATION_MAX_AGENTS as u32),
        });
    }
    let game = world.game()?;
    game::pure_nash_profiles(&game, &StateBelief::point(theta.to_vec()))
}

/// `n` agents and targets drawn uniformly in the unit square, redrawn until
/// every agent–target distance is at least [`MIN_SEPARATION`].
pub fn make_world(n: usize, seed: u64, noise_scale: f64) -> Result<TargetWorld> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one agent".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Point> {
        (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
    };
    let min_sq = MIN_SEPARATION * MIN_SEPARATION;
    for _ in 0..MAX_PLACEMENT_TRIES {
        let agents = draw(&mut rng);
        let targets = draw(&mut rng);
        let separated = agents
            .iter()
            .all(|a| targets.iter().all(|t| sq_dist(a, t) >= min_sq));
        if separated {
            return Ok(TargetWorld {
                agents,
                targets,
                noise_scale,
                seed: Some(seed),
            });
        }
    }
    Err(Error::Config(format!(
        "no separated placement for n = {n} after {MAX_PLACEMENT_TRIES} draws"
    )))
}

/// The five-agent benchmark world and its game.
pub fn make_benchmark(seed: u64) -> Result<(TargetWorld, GameSpec)> {
    let world = make_world(BENCHMARK_AGENTS, seed, BENCHMARK_NOISE)?;
    let game = world.game()?;
    Ok((world, game))
}
