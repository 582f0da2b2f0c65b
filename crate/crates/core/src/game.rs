//! Finite identical-interest games with a state-dependent common payoff.
//!
//! A [`GameSpec`] couples an [`ActionSpace`] with a [`Utility`] evaluated at
//! a joint action and a state point. Agents hold a [`StateBelief`] over the
//! state and evaluate mixed profiles by exact enumeration (or a seeded Monte
//! Carlo estimate once the enumeration cap is exceeded).

use std::fmt;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability vectors summing to one.
pub const PROB_TOL: f64 = 1e-9;
/// Slack allowed when comparing payoffs for profitable deviations.
pub const PAYOFF_TOL: f64 = 1e-12;
/// Default cap on joint-action/state pairs enumerated exactly.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    sizes: Vec<usize>,
}

impl ActionSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 agents, got {}",
                sizes.len()
            )));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!(
                "agent {i} has an empty action set"
            )));
        }
        Ok(Self { sizes })
    }

    /// Same as [`ActionSpace::new`] but also admits a single agent. Used by
    /// the degenerate cases of the target-assignment benchmark and metrics.
    pub fn with_any_agents(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidParameter("no agents".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("empty action set".into()));
        }
        Ok(Self { sizes })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, agent: usize) -> usize {
        self.sizes[agent]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// |A|, the number of joint action profiles.
    pub fn joint_count(&self) -> u128 {
        self.sizes.iter().map(|&s| s as u128).product()
    }

    pub fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.n() {
            return Err(Error::AgentOutOfRange { agent, n: self.n() });
        }
        Ok(())
    }

    /// Iterates every joint action in lexicographic order (agent 0 slowest).
    pub fn profiles(&self) -> Profiles<'_> {
        Profiles {
            sizes: &self.sizes,
            next: Some(vec![0; self.sizes.len()]),
        }
    }
}

pub struct Profiles<'a> {
    sizes: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for Profiles<'_> {
    type Item = JointAction;

    fn next(&mut self) -> Option<JointAction> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for k in (0..succ.len()).rev() {
            succ[k] += 1;
            if succ[k] < self.sizes[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(JointAction(current))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointAction(Vec<usize>);

impl JointAction {
    pub fn new(space: &ActionSpace, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != space.n() {
            return Err(Error::Dimension(format!(
                "joint action has {} entries for {} agents",
                actions.len(),
                space.n()
            )));
        }
        for (agent, (&action, &size)) in actions.iter().zip(space.sizes()).enumerate() {
            if action >= size {
                return Err(Error::ActionOutOfRange {
                    agent,
                    action,
                    size,
                });
            }
        }
        Ok(Self(actions))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// One probability vector per agent; the joint profile is their product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    probs: Vec<Vec<f64>>,
}

pub(crate) fn check_prob_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter("empty probability vector".into()));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "probability vector has a negative or non-finite entry: {p:?}"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidParameter(format!(
            "probability vector sums to {s}"
        )));
    }
    Ok(())
}

pub(crate) fn one_hot(size: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; size];
    v[index] = 1.0;
    v
}

impl MixedStrategy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for p in &probs {
            check_prob_vector(p)?;
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_vecs_unchecked(probs: Vec<Vec<f64>>) -> Self {
        Self { probs }
    }

    pub fn uniform(space: &ActionSpace) -> Self {
        Self {
            probs: space
                .sizes()
                .iter()
                .map(|&s| vec![1.0 / s as f64; s])
                .collect(),
        }
    }

    /// The degenerate profile putting all mass on `a`.
    pub fn pure(space: &ActionSpace, a: &JointAction) -> Self {
        Self {
            probs: space
                .sizes()
                .iter()
                .zip(a.as_slice())
                .map(|(&s, &k)| one_hot(s, k))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn agent(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn as_vecs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Replaces agent `i`'s strategy by the pure action `action`.
    pub fn with_pure(&self, i: usize, action: usize) -> Self {
        let mut probs = self.probs.clone();
        probs[i] = one_hot(probs[i].len(), action);
        Self { probs }
    }

    pub fn check_against(&self, space: &ActionSpace) -> Result<()> {
        if self.n() != space.n() {
            return Err(Error::Dimension(format!(
                "strategy has {} agents, game has {}",
                self.n(),
                space.n()
            )));
        }
        for (i, (p, &s)) in self.probs.iter().zip(space.sizes()).enumerate() {
            if p.len() != s {
                return Err(Error::Dimension(format!(
                    "agent {i} strategy has {} entries, action set has {s}",
                    p.len()
                )));
            }
        }
        Ok(())
    }
}

/// Description of the state space Θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateSpace {
    /// Finitely many enumerated state points.
    Finite(Vec<Vec<f64>>),
    /// Parameter vectors of fixed dimension; beliefs are point masses.
    Parametric { dim: usize },
}

/// An agent's belief over Θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateBelief {
    /// Probability vector over the points of a [`StateSpace::Finite`].
    Finite(Vec<f64>),
    /// Point mass at a parameter vector.
    PointMass(Vec<f64>),
}

impl StateBelief {
    pub fn finite(probs: Vec<f64>) -> Result<Self> {
        check_prob_vector(&probs)?;
        Ok(Self::Finite(probs))
    }

    pub fn point(theta: Vec<f64>) -> Self {
        Self::PointMass(theta)
    }
}

/// Common payoff u(a, θ).
pub trait Utility: Send + Sync {
    fn payoff(&self, actions: &[usize], state: &[f64]) -> Result<f64>;

    /// Exact expected payoff under a product profile at a fixed state, when
    /// the utility admits a closed form. `None` falls back to enumeration.
    fn expected(&self, _sigma: &MixedStrategy, _state: &[f64]) -> Option<Result<f64>> {
        None
    }
}

impl<F> Utility for F
where
    F: Fn(&[usize], &[f64]) -> f64 + Send + Sync,
{
    fn payoff(&self, actions: &[usize], state: &[f64]) -> Result<f64> {
        Ok(self(actions, state))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub enumeration_cap: u64,
    pub sampler: Option<MonteCarlo>,
}

impl Default for Evaluation {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            sampler: None,
        }
    }
}

#[derive(Clone)]
pub struct GameSpec {
    action_space: ActionSpace,
    state_space: StateSpace,
    utility: Arc<dyn Utility>,
    evaluation: Evaluation,
}

impl fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameSpec")
            .field("action_space", &self.action_space)
            .field("state_space", &self.state_space)
            .field("evaluation", &self.evaluation)
            .finish_non_exhaustive()
    }
}

impl GameSpec {
    pub fn new(
        action_space: ActionSpace,
        state_space: StateSpace,
        utility: impl Utility + 'static,
    ) -> Self {
        Self {
            action_space,
            state_space,
            utility: Arc::new(utility),
            evaluation: Evaluation::default(),
        }
    }

    pub fn with_evaluation(mut self, evaluation: Evaluation) -> Self {
        self.evaluation = evaluation;
        self
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.action_space
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn evaluation(&self) -> Evaluation {
        self.evaluation
    }

    pub fn utility(&self) -> &dyn Utility {
        self.utility.as_ref()
    }

    pub fn n(&self) -> usize {
        self.action_space.n()
    }

    pub fn check_belief(&self, belief: &StateBelief) -> Result<()> {
        match (&self.state_space, belief) {
            (StateSpace::Finite(points), StateBelief::Finite(p)) => {
                if p.len() != points.len() {
                    return Err(Error::Dimension(format!(
                        "belief over {} points, state space has {}",
                        p.len(),
                        points.len()
                    )));
                }
                Ok(())
            }
            (StateSpace::Parametric { dim }, StateBelief::PointMass(theta)) => {
                if theta.len() != *dim {
                    return Err(Error::Dimension(format!(
                        "state point has dimension {}, expected {dim}",
                        theta.len()
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Representation(
                "belief form does not match the state space".into(),
            )),
        }
    }

    /// (state point, probability) pairs with positive probability.
    fn support<'a>(&'a self, belief: &'a StateBelief) -> Vec<(&'a [f64], f64)> {
        match (&self.state_space, belief) {
            (StateSpace::Finite(points), StateBelief::Finite(p)) => points
                .iter()
                .zip(p)
                .filter(|(_, &w)| w > 0.0)
                .map(|(x, &w)| (x.as_slice(), w))
                .collect(),
            (_, StateBelief::PointMass(theta)) => vec![(theta.as_slice(), 1.0)],
            // check_belief rejects every other combination
            _ => Vec::new(),
        }
    }

    fn state_count(&self) -> u128 {
        match &self.state_space {
            StateSpace::Finite(points) => points.len() as u128,
            StateSpace::Parametric { .. } => 1,
        }
    }
}

/// Σ_θ Σ_a u(a, θ) σ(a) μ(θ).
pub fn expected_utility(
    game: &GameSpec,
    sigma: &MixedStrategy,
    belief: &StateBelief,
) -> Result<f64> {
    sigma.check_against(game.action_space())?;
    game.check_belief(belief)?;
    expected_unchecked(game, sigma, belief)
}

fn expected_unchecked(game: &GameSpec, sigma: &MixedStrategy, belief: &StateBelief) -> Result<f64> {
    let support = game.support(belief);

    // closed forms skip enumeration entirely
    let mut closed = 0.0;
    let mut has_closed = true;
    for &(theta, w) in &support {
        match game.utility.expected(sigma, theta) {
            Some(v) => closed += w * v?,
            None => {
                has_closed = false;
                break;
            }
        }
    }
    if has_closed {
        return Ok(closed);
    }

    let needed = game.action_space.joint_count() * game.state_count();
    let eval = game.evaluation;
    if needed > eval.enumeration_cap as u128 {
        return match eval.sampler {
            Some(mc) => monte_carlo(game, sigma, &support, mc),
            None => Err(Error::Capacity {
                needed,
                cap: eval.enumeration_cap,
            }),
        };
    }

    let mut total = 0.0;
    for &(theta, w) in &support {
        total += w * enumerate_profile(game.utility(), sigma, theta)?;
    }
    Ok(total)
}

/// Exact Σ_a u(a, θ) σ(a), skipping zero-probability branches.
fn enumerate_profile(utility: &dyn Utility, sigma: &MixedStrategy, theta: &[f64]) -> Result<f64> {
    let supports: Vec<Vec<(usize, f64)>> = sigma
        .as_vecs()
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(k, &x)| (k, x))
                .collect()
        })
        .collect();
    if supports.iter().any(|s| s.is_empty()) {
        return Ok(0.0);
    }
    let n = supports.len();
    let mut idx = vec![0usize; n];
    let mut actions: Vec<usize> = supports.iter().map(|s| s[0].0).collect();
    let mut total = 0.0;
    loop {
        let prob: f64 = (0..n).map(|i| supports[i][idx[i]].1).product();
        total += prob * utility.payoff(&actions, theta)?;

        let mut k = n;
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < supports[k].len() {
                actions[k] = supports[k][idx[k]].0;
                break;
            }
            idx[k] = 0;
            actions[k] = supports[k][0].0;
        }
    }
}

fn monte_carlo(
    game: &GameSpec,
    sigma: &MixedStrategy,
    support: &[(&[f64], f64)],
    mc: MonteCarlo,
) -> Result<f64> {
    if mc.samples == 0 {
        return Err(Error::InvalidParameter("Monte Carlo needs samples > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let agent_dists = sigma
        .as_vecs()
        .iter()
        .map(|p| WeightedIndex::new(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let state_dist = WeightedIndex::new(support.iter().map(|(_, w)| *w))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut actions = vec![0; sigma.n()];
    let mut total = 0.0;
    for _ in 0..mc.samples {
        let theta = support[state_dist.sample(&mut rng)].0;
        for (a, d) in actions.iter_mut().zip(&agent_dists) {
            *a = d.sample(&mut rng);
        }
        total += game.utility.payoff(&actions, theta)?;
    }
    Ok(total / mc.samples as f64)
}

/// Agent `agent`'s best pure reply. Only the other agents' entries of
/// `profile` are read; ties go to the lowest action index.
pub fn best_response(
    game: &GameSpec,
    agent: usize,
    profile: &MixedStrategy,
    belief: &StateBelief,
) -> Result<usize> {
    game.action_space.check_agent(agent)?;
    profile.check_against(game.action_space())?;
    game.check_belief(belief)?;

    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for action in 0..game.action_space.size(agent) {
        let value = expected_unchecked(game, &profile.with_pure(agent, action), belief)?;
        if value > best_value {
            best = action;
            best_value = value;
        }
    }
    Ok(best)
}

/// u(a; μ) for a pure profile.
pub fn pure_payoff(game: &GameSpec, a: &JointAction, belief: &StateBelief) -> Result<f64> {
    game.check_belief(belief)?;
    let mut total = 0.0;
    for (theta, w) in game.support(belief) {
        total += w * game.utility.payoff(a.as_slice(), theta)?;
    }
    Ok(total)
}

/// No agent gains more than [`PAYOFF_TOL`] by a unilateral pure deviation.
pub fn is_pure_nash(game: &GameSpec, a: &JointAction, belief: &StateBelief) -> Result<bool> {
    let a = JointAction::new(game.action_space(), a.as_slice().to_vec())?;
    let base = pure_payoff(game, &a, belief)?;
    let mut deviation = a.as_slice().to_vec();
    for agent in 0..game.n() {
        let own = deviation[agent];
        for alt in 0..game.action_space.size(agent) {
            if alt == own {
                continue;
            }
            deviation[agent] = alt;
            let value = pure_payoff(game, &JointAction(deviation.clone()), belief)?;
            if value > base + PAYOFF_TOL {
                return Ok(false);
            }
        }
        deviation[agent] = own;
    }
    Ok(true)
}

/// Exhaustive scan for pure Nash equilibria, subject to the enumeration cap.
pub fn pure_nash_profiles(game: &GameSpec, belief: &StateBelief) -> Result<Vec<JointAction>> {
    game.check_belief(belief)?;
    let needed = game.action_space.joint_count() * game.state_count();
    let cap = game.evaluation.enumeration_cap;
    if needed > cap as u128 {
        return Err(Error::Capacity { needed, cap });
    }
    let mut out = Vec::new();
    for a in game.action_space.profiles() {
        if is_pure_nash(game, &a, belief)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// Σ_i ‖f_i − σ_i‖₂.
pub fn strategy_distance(f: &MixedStrategy, sigma: &MixedStrategy) -> Result<f64> {
    if f.n() != sigma.n() {
        return Err(Error::Dimension(format!(
            "{} vs {} agents",
            f.n(),
            sigma.n()
        )));
    }
    let mut total = 0.0;
    for (i, (p, q)) in f.as_vecs().iter().zip(sigma.as_vecs()).enumerate() {
        if p.len() != q.len() {
            return Err(Error::Dimension(format!(
                "agent {i}: {} vs {} actions",
                p.len(),
                q.len()
            )));
        }
        total += l2_distance(p, q);
    }
    Ok(total)
}

pub(crate) fn l2_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Total variation distance. Half the L1 distance on finite spaces; point
/// masses are either identical (0) or disjoint (1).
pub fn tv_distance(p: &StateBelief, q: &StateBelief) -> Result<f64> {
    match (p, q) {
        (StateBelief::Finite(p), StateBelief::Finite(q)) => {
            if p.len() != q.len() {
                return Err(Error::Dimension(format!(
                    "beliefs over {} and {} points",
                    p.len(),
                    q.len()
                )));
            }
            Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
        }
        (StateBelief::PointMass(x), StateBelief::PointMass(y)) => {
            if x.len() != y.len() {
                return Err(Error::Dimension(format!(
                    "state points of dimension {} and {}",
                    x.len(),
                    y.len()
                )));
            }
            Ok(if x == y { 0.0 } else { 1.0 })
        }
        _ => Err(Error::Representation(
            "cannot compare a finite belief with a point mass".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coordination() -> GameSpec {
        GameSpec::new(
            ActionSpace::new(vec![2, 2]).unwrap(),
            StateSpace::Parametric { dim: 1 },
            |a: &[usize], _: &[f64]| if a[0] == a[1] { 1.0 } else { 0.0 },
        )
    }

    fn point() -> StateBelief {
        StateBelief::point(vec![0.0])
    }

    #[test]
    fn action_space_rejects_bad_sizes() {
        assert!(ActionSpace::new(vec![3]).is_err());
        assert!(ActionSpace::new(vec![2, 0]).is_err());
        assert_eq!(ActionSpace::new(vec![2, 3, 4]).unwrap().joint_count(), 24);
    }

    #[test]
    fn profiles_enumerate_in_order() {
        let space = ActionSpace::new(vec![2, 3]).unwrap();
        let all: Vec<_> = space.profiles().map(|a| a.into_inner()).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
    }

    #[test]
    fn expected_utility_degenerate_game() {
        let game = GameSpec::new(
            ActionSpace::new(vec![1, 1]).unwrap(),
            StateSpace::Finite(vec![vec![0.0], vec![1.0]]),
            |_: &[usize], _: &[f64]| 4.25,
        );
        let sigma = MixedStrategy::uniform(game.action_space());
        let belief = StateBelief::finite(vec![0.3, 0.7]).unwrap();
        let v = expected_utility(&game, &sigma, &belief).unwrap();
        assert!((v - 4.25).abs() < 1e-12);
    }

    #[test]
    fn expected_utility_uniform_coordination_is_half() {
        let game = coordination();
        let sigma = MixedStrategy::uniform(game.action_space());
        assert_eq!(expected_utility(&game, &sigma, &point()).unwrap(), 0.5);
    }

    #[test]
    fn expected_utility_pure_profile_is_payoff() {
        let game = GameSpec::new(
            ActionSpace::new(vec![2, 3]).unwrap(),
            StateSpace::Parametric { dim: 1 },
            |a: &[usize], th: &[f64]| a[0] as f64 * 10.0 + a[1] as f64 + th[0],
        );
        let a = JointAction::new(game.action_space(), vec![1, 2]).unwrap();
        let sigma = MixedStrategy::pure(game.action_space(), &a);
        let v = expected_utility(&game, &sigma, &StateBelief::point(vec![0.5])).unwrap();
        assert_eq!(v, 12.5);
    }

    #[test]
    fn expected_utility_dimension_errors() {
        let game = coordination();
        let bad = MixedStrategy::new(vec![vec![1.0], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            expected_utility(&game, &bad, &point()),
            Err(Error::Dimension(_))
        ));
        let wrong_form = StateBelief::finite(vec![1.0]).unwrap();
        let sigma = MixedStrategy::uniform(game.action_space());
        assert!(matches!(
            expected_utility(&game, &sigma, &wrong_form),
            Err(Error::Representation(_))
        ));
    }

    #[test]
    fn capacity_error_and_monte_carlo_fallback() {
        let space = ActionSpace::new(vec![10, 10, 10]).unwrap();
        let game = GameSpec::new(
            space,
            StateSpace::Parametric { dim: 1 },
            |a: &[usize], _: &[f64]| (a[0] + a[1] + a[2]) as f64,
        )
        .with_evaluation(Evaluation {
            enumeration_cap: 100,
            sampler: None,
        });
        let sigma = MixedStrategy::uniform(game.action_space());
        assert!(matches!(
            expected_utility(&game, &sigma, &point()),
            Err(Error::Capacity { needed: 1000, cap: 100 })
        ));

        let game = game.with_evaluation(Evaluation {
            enumeration_cap: 100,
            sampler: Some(MonteCarlo {
                samples: 200_000,
                seed: 3,
            }),
        });
        let v = expected_utility(&game, &sigma, &point()).unwrap();
        // exact value is 13.5, sampling std error is about 0.01
        assert!((v - 13.5).abs() < 0.1, "{v}");
        let again = expected_utility(&game, &sigma, &point()).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn best_response_single_action() {
        let game = GameSpec::new(
            ActionSpace::new(vec![1, 3]).unwrap(),
            StateSpace::Parametric { dim: 1 },
            |a: &[usize], _: &[f64]| a[1] as f64,
        );
        let sigma = MixedStrategy::uniform(game.action_space());
        assert_eq!(best_response(&game, 0, &sigma, &point()).unwrap(), 0);
    }

    #[test]
    fn best_response_coordination() {
        let game = coordination();
        let profile = MixedStrategy::new(vec![vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        assert_eq!(best_response(&game, 0, &profile, &point()).unwrap(), 0);
        let profile = MixedStrategy::new(vec![vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        assert_eq!(best_response(&game, 1, &profile, &point()).unwrap(), 1);
    }

    #[test]
    fn best_response_ties_pick_lowest() {
        let game = GameSpec::new(
            ActionSpace::new(vec![4, 2]).unwrap(),
            StateSpace::Parametric { dim: 1 },
            |_: &[usize], _: &[f64]| 1.0,
        );
        let sigma = MixedStrategy::uniform(game.action_space());
        assert_eq!(best_response(&game, 0, &sigma, &point()).unwrap(), 0);
        assert!(matches!(
            best_response(&game, 2, &sigma, &point()),
            Err(Error::AgentOutOfRange { agent: 2, n: 2 })
        ));
    }

    #[test]
    fn pure_nash_in_coordination() {
        let game = coordination();
        let s = game.action_space().clone();
        let eq = JointAction::new(&s, vec![0, 0]).unwrap();
        let anti = JointAction::new(&s, vec![0, 1]).unwrap();
        assert!(is_pure_nash(&game, &eq, &point()).unwrap());
        assert!(!is_pure_nash(&game, &anti, &point()).unwrap());

        let all = pure_nash_profiles(&game, &point()).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn constant_game_every_profile_is_nash() {
        let game = GameSpec::new(
            ActionSpace::new(vec![3, 2]).unwrap(),
            StateSpace::Parametric { dim: 1 },
            |_: &[usize], _: &[f64]| -2.0,
        );
        assert_eq!(pure_nash_profiles(&game, &point()).unwrap().len(), 6);
    }

    #[test]
    fn joint_action_validation() {
        let s = ActionSpace::new(vec![2, 2]).unwrap();
        assert!(matches!(
            JointAction::new(&s, vec![0, 2]),
            Err(Error::ActionOutOfRange { agent: 1, .. })
        ));
        assert!(JointAction::new(&s, vec![0]).is_err());
    }

    #[test]
    fn strategy_distance_examples() {
        let f = MixedStrategy::new(vec![vec![1.0, 0.0]]).unwrap();
        let g = MixedStrategy::new(vec![vec![0.0, 1.0]]).unwrap();
        assert!((strategy_distance(&f, &g).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(strategy_distance(&f, &f).unwrap(), 0.0);

        let f = MixedStrategy::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let g = MixedStrategy::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let expected = 2.0 * 0.5f64.sqrt();
        assert!((strategy_distance(&f, &g).unwrap() - expected).abs() < 1e-15);

        let h = MixedStrategy::new(vec![vec![1.0]]).unwrap();
        assert!(strategy_distance(&f, &h).is_err());
    }

    #[test]
    fn tv_distance_examples() {
        let p = StateBelief::finite(vec![0.7, 0.3]).unwrap();
        let q = StateBelief::finite(vec![0.5, 0.5]).unwrap();
        assert!((tv_distance(&p, &q).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        let a = StateBelief::finite(vec![1.0, 0.0]).unwrap();
        let b = StateBelief::finite(vec![0.0, 1.0]).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);

        let x = StateBelief::point(vec![1.0, 2.0]);
        let y = StateBelief::point(vec![1.0, 2.5]);
        assert_eq!(tv_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(tv_distance(&x, &y).unwrap(), 1.0);
        assert!(matches!(tv_distance(&p, &x), Err(Error::Representation(_))));
    }

    #[test]
    fn mixed_strategy_rejects_non_distributions() {
        assert!(MixedStrategy::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(MixedStrategy::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(StateBelief::finite(vec![0.2, 0.2]).is_err());
    }
}
