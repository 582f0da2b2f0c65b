//! Trace persistence: per-tick CSV, gnuplot data and the JSON run summary.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::engine::SimTrace;
use crate::game::JointAction;
use crate::graph::WindowConnectivityReport;
use crate::metrics::{self, RateFit};
use crate::target::TargetWorld;

pub const TRACE_HEADER: &str = "t,estimate_error,ne_distance,tv_disagreement,actions";

/// Lower end of the window used for the estimate-error rate fit.
pub const RATE_FIT_T_MIN: f64 = 100.0;

/// One row per record; `ne_distance` is empty when not tracked.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let ne = r.ne_distance.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.t, r.estimate_error, ne, r.tv_disagreement, r.actions
        )?;
    }
    Ok(())
}

/// Whitespace-separated `t estimate_error ne_distance` rows with a `#`
/// header, readable by gnuplot.
pub fn write_gnuplot<W: Write>(trace: &SimTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "# t estimate_error ne_distance")?;
    for r in &trace.records {
        let ne = r.ne_distance.map(|d| d.to_string()).unwrap_or_else(|| "NaN".into());
        writeln!(out, "{} {} {}", r.t, r.estimate_error, ne)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub t: usize,
    pub estimate_error: f64,
    pub ne_distance: Option<f64>,
    pub tv_disagreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: serde_json::Value,
    pub seed: u64,
    pub horizon: usize,
    pub final_metrics: Option<FinalMetrics>,
    pub ne_hit_time: Option<usize>,
    pub ne_set_size: usize,
    /// Estimate-error rate fit, when the trace has enough points past
    /// [`RATE_FIT_T_MIN`].
    pub rate_fit: Option<RateFit>,
    pub rate_fit_passes: Option<bool>,
    pub connectivity: WindowConnectivityReport,
    pub world: Option<TargetWorld>,
    pub files: Vec<String>,
}

impl RunSummary {
    pub fn from_trace(
        trace: &SimTrace,
        config: serde_json::Value,
        seed: u64,
        horizon: usize,
        ne_set: &[JointAction],
        world: Option<TargetWorld>,
    ) -> Self {
        let final_metrics = trace.records.last().map(|r| FinalMetrics {
            t: r.t,
            estimate_error: r.estimate_error,
            ne_distance: r.ne_distance,
            tv_disagreement: r.tv_disagreement,
        });
        let series: Vec<(f64, f64)> = trace
            .records
            .iter()
            .map(|r| (r.t as f64, r.estimate_error))
            .collect();
        let rate_fit = metrics::fit_rate(&series, RATE_FIT_T_MIN).ok();
        Self {
            config,
            seed,
            horizon,
            final_metrics,
            ne_hit_time: if ne_set.is_empty() {
                None
            } else {
                metrics::ne_hit_time(&trace.records, ne_set)
            },
            ne_set_size: ne_set.len(),
            rate_fit_passes: rate_fit.map(|f| f.passes()),
            rate_fit,
            connectivity: trace.connectivity.clone(),
            world,
            files: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::TraceRecord;
    use crate::game::ActionSpace;

    #[test]
    fn csv_layout() {
        let space = ActionSpace::new(vec![3, 3]).unwrap();
        let trace = SimTrace {
            records: vec![
                TraceRecord {
                    t: 1,
                    actions: JointAction::new(&space, vec![2, 0]).unwrap(),
                    estimate_error: 0.5,
                    ne_distance: Some(0.25),
                    tv_disagreement: 1.0,
                },
                TraceRecord {
                    t: 2,
                    actions: JointAction::new(&space, vec![1, 1]).unwrap(),
                    estimate_error: 0.0,
                    ne_distance: None,
                    tv_disagreement: 0.0,
                },
            ],
            connectivity: WindowConnectivityReport {
                window: 1,
                t_start: 1,
                t_end: 2,
                connected: true,
                first_failure: None,
            },
        };
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,estimate_error,ne_distance,tv_disagreement,actions\n1,0.5,0.25,1,2;0\n2,0,,0,1;1\n"
        );
        let mut buf = Vec::new();
        write_gnuplot(&trace, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("# t estimate_error ne_distance\n1 0.5 0.25\n"));
    }
}
