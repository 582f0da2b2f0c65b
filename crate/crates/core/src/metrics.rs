//! Convergence diagnostics over worlds and traces.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::engine::{TraceRecord, World};
use crate::error::{Error, Result};
use crate::game::{l2_distance, tv_distance, JointAction, StateBelief};

/// Default tolerance on the regression slope of `error·t/log t`, per step.
pub const DEFAULT_SLOPE_TOL: f64 = 1e-7;
/// Smallest admissible lower end of a rate-fit window.
pub const MIN_FIT_T: f64 = 10.0;
/// Fewest points accepted by [`fit_rate`].
pub const MIN_FIT_POINTS: usize = 20;

/// Σ_j Σ_i ‖v^i_j − f_j‖₂.
pub fn estimate_error(world: &World) -> f64 {
    let mut total = 0.0;
    for agent in &world.agents {
        for (v, truth) in agent.estimates.iter().zip(&world.agents) {
            total += l2_distance(v, &truth.freq);
        }
    }
    total
}

/// min over `ne_set` of Σ_i ‖f_i − onehot(a*_i)‖₂.
pub fn ne_distance(world: &World, ne_set: &[JointAction]) -> Result<f64> {
    if ne_set.is_empty() {
        return Err(Error::EmptyEquilibriumSet);
    }
    let mut best = f64::INFINITY;
    for profile in ne_set {
        if profile.len() != world.n() {
            return Err(Error::Dimension(format!(
                "profile has {} agents, world has {}",
                profile.len(),
                world.n()
            )));
        }
        let mut d = 0.0;
        for (agent, &a) in world.agents.iter().zip(profile.as_slice()) {
            if a >= agent.freq.len() {
                return Err(Error::ActionOutOfRange {
                    agent: agent.id,
                    action: a,
                    size: agent.freq.len(),
                });
            }
            let sq: f64 = agent
                .freq
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let e = if k == a { 1.0 } else { 0.0 };
                    (x - e) * (x - e)
                })
                .sum();
            d += sq.sqrt();
        }
        best = best.min(d);
    }
    Ok(best)
}

/// max_i TV(μ_i, μ_ref).
pub fn tv_disagreement(world: &World, reference: &StateBelief) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for agent in &world.agents {
        worst = worst.max(tv_distance(&agent.belief, reference)?);
    }
    Ok(worst)
}

/// Fit of `error(t) ≈ C·log(t)/t` over `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// max of `error·t/log t` over the window.
    pub c: f64,
    /// Least-squares slope of `error·t/log t` against `t`.
    pub slope: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl RateFit {
    pub fn passes(&self) -> bool {
        self.passes_with(DEFAULT_SLOPE_TOL)
    }

    /// The normalized error shows no upward trend beyond `tol` per step.
    pub fn passes_with(&self, tol: f64) -> bool {
        self.slope <= tol
    }
}

/// Fits `series` of `(t, error)` pairs using points with `t ≥ t_min`.
pub fn fit_rate(series: &[(f64, f64)], t_min: f64) -> Result<RateFit> {
    if !(t_min >= MIN_FIT_T) {
        return Err(Error::InvalidParameter(format!(
            "t_min = {t_min} below {MIN_FIT_T}"
        )));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= t_min)
        .map(|&(t, e)| (t, e * t / t.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all points share one t".into()));
    }
    Ok(RateFit {
        c: pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        slope: sxy / sxx,
        t_min: pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        t_max: pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        points: pts.len(),
    })
}

/// Smallest recorded `t` from which every recorded action profile lies in
/// `ne_set`; `None` if the last record is off the set.
pub fn ne_hit_time(records: &[TraceRecord], ne_set: &[JointAction]) -> Option<usize> {
    let set: HashSet<&JointAction> = ne_set.iter().collect();
    let mut hit = None;
    for r in records.iter().rev() {
        if !set.contains(&r.actions) {
            break;
        }
        hit = Some(r.t);
    }
    hit
}
