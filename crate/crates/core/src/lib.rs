//! Decentralized fictitious play for networked agents that disagree about
//! the state of their environment.
//!
//! Agents repeatedly best-respond to their estimates of everyone's empirical
//! action frequencies. Estimates are maintained by row-stochastic averaging
//! with neighbors over a time-varying graph, where each agent is stubborn
//! about its own frequency.
//!
//! - [`game`]: finite identical-interest games, best responses, equilibria.
//! - [`graph`]: time-varying communication graphs and window connectivity.
//! - [`consensus`]: weight matrices, backward products, tracking dynamics.
//! - [`engine`]: the D-FP loop.
//! - [`target`]: the target-assignment benchmark.
//! - [`metrics`]: estimate error, NE distance, rate fitting.
//! - [`config`], [`trace`]: experiment configuration and persistence.

pub mod config;
pub mod consensus;
pub mod engine;
pub mod error;
pub mod game;
pub mod graph;
pub mod metrics;
pub mod seed;
pub mod target;
pub mod trace;

pub use consensus::{MatrixProduct, TrackingState, WeightMatrix, WeightRule, WeightScheme};
pub use engine::{AgentState, SimConfig, SimTrace, Simulation, StateLearning, TraceRecord, World};
pub use error::{Error, Result};
pub use game::{ActionSpace, GameSpec, JointAction, MixedStrategy, StateBelief, StateSpace, Utility};
pub use graph::{EdgeSet, GraphKind, GraphSequence, Topology, WindowConnectivityReport};
pub use metrics::RateFit;
pub use target::TargetWorld;
