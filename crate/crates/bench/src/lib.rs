//! Shared fixtures for the criterion benches.

use dfp_core::config::{Experiment, ExperimentConfig};

/// The five-agent target-assignment benchmark on an edge-cycle star.
pub fn benchmark_experiment(horizon: usize) -> Experiment {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "game": {{ "kind": "target-assignment", "n": 5, "world_seed": 2019 }},
            "graph": {{ "kind": "edge-cycle", "base": "star", "T": 5 }},
            "learning": {{ "kind": "running-mean", "noise_scale": 0.05 }},
            "run": {{ "horizon": {horizon}, "seed": 1 }}
        }}"#
    ))
    .and_then(|c| c.build())
    .expect("benchmark config is valid")
}
