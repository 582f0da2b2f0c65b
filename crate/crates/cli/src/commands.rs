use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dfp_core::config::ExperimentConfig;
use dfp_core::engine;
use dfp_core::graph::{validate_window_connectivity, GraphKind, Topology, WindowConnectivityReport};
use dfp_core::trace::{write_gnuplot, write_trace_csv, RunSummary};
use dfp_core::{SimTrace, StateLearning};
use rayon::prelude::*;
use serde::Serialize;

use crate::svg::{self, Series};
use crate::{CliError, SweepArgs};

const DEFAULT_OUT: &str = "dfp-out";

/// The resolved parameters a run actually used.
#[derive(Debug, Serialize)]
pub struct ResolvedConfig {
    pub n: usize,
    pub eta: f64,
    pub window: usize,
    pub horizon: usize,
    pub seed: u64,
    pub cadence: usize,
    pub extra_exchange: bool,
    pub graph_kind: GraphKind,
    pub graph_base: Topology,
    pub graph_seed: u64,
    pub learning: StateLearning,
    pub ne_set_size: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub resolved: ResolvedConfig,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub exit_status: u8,
}

struct RunOutput {
    manifest: RunManifest,
    summary: RunSummary,
    trace: SimTrace,
}

/// `--out` if given, else `$DFP_OUT/<name>`, else `./dfp-out/<name>`.
fn output_dir(out: Option<PathBuf>, config: &Path, suffix: &str) -> PathBuf {
    if let Some(dir) = out {
        return dir;
    }
    let root = std::env::var_os("DFP_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    root.join(format!("{stem}{suffix}"))
}

/// Prints to stdout, ignoring a closed pipe.
fn stdout_line(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    ExperimentConfig::from_path(path).map_err(|e| CliError::Config(e.to_string()))
}

fn connectivity(
    exp: &dfp_core::config::Experiment,
) -> Result<WindowConnectivityReport, CliError> {
    let sim = &exp.sim;
    validate_window_connectivity(&sim.graph, sim.window, 1, sim.horizon.max(sim.window))
        .map_err(|e| CliError::Config(e.to_string()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn execute(
    cfg: &ExperimentConfig,
    config_path: &Path,
    dir: &Path,
    strict: bool,
    svg: bool,
) -> Result<RunOutput, CliError> {
    let exp = cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
    let report = connectivity(&exp)?;
    if !report.connected {
        let msg = format!(
            "graph is not {}-window connected (first failing window starts at t = {})",
            report.window,
            report.first_failure.unwrap_or(0)
        );
        if strict {
            return Err(CliError::Connectivity(msg));
        }
        eprintln!("dfp: warning: {msg}");
    }

    let trace = engine::run(&exp.sim, &exp.ne_set).map_err(|e| CliError::Runtime(e.to_string()))?;

    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    {
        let mut w = BufWriter::new(File::create(dir.join("trace.csv"))?);
        write_trace_csv(&trace, &mut w)?;
        w.flush()?;
        files.push("trace.csv".to_string());
    }
    {
        let mut w = BufWriter::new(File::create(dir.join("trace.dat"))?);
        write_gnuplot(&trace, &mut w)?;
        w.flush()?;
        files.push("trace.dat".to_string());
    }
    if svg {
        let err = Series {
            label: "estimate error",
            points: trace.records.iter().map(|r| (r.t as f64, r.estimate_error)).collect(),
        };
        fs::write(dir.join("estimate_error.svg"), svg::line_chart("Estimate error", "error", &[err]))?;
        files.push("estimate_error.svg".to_string());
        if !exp.ne_set.is_empty() {
            let ne = Series {
                label: "NE distance",
                points: trace
                    .records
                    .iter()
                    .filter_map(|r| r.ne_distance.map(|d| (r.t as f64, d)))
                    .collect(),
            };
            fs::write(dir.join("ne_distance.svg"), svg::line_chart("Distance to NE", "distance", &[ne]))?;
            files.push("ne_distance.svg".to_string());
        }
    }
    files.push("summary.json".to_string());
    files.push("manifest.json".to_string());

    let mut summary = RunSummary::from_trace(
        &trace,
        cfg.to_value(),
        exp.sim.seed,
        exp.sim.horizon,
        &exp.ne_set,
        exp.world.clone(),
    );
    summary.files = files.clone();
    write_json(&dir.join("summary.json"), &summary)?;

    let sim = &exp.sim;
    let manifest = RunManifest {
        config_path: config_path.to_path_buf(),
        resolved: ResolvedConfig {
            n: sim.game.n(),
            eta: sim.scheme.eta(),
            window: sim.window,
            horizon: sim.horizon,
            seed: sim.seed,
            cadence: sim.cadence,
            extra_exchange: sim.extra_exchange,
            graph_kind: sim.graph.kind().clone(),
            graph_base: sim.graph.base().clone(),
            graph_seed: sim.graph.seed(),
            learning: sim.learning.clone(),
            ne_set_size: exp.ne_set.len(),
        },
        output_dir: dir.to_path_buf(),
        files,
        exit_status: 0,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(RunOutput {
        manifest,
        summary,
        trace,
    })
}

pub fn cmd_run(
    config: &Path,
    out: Option<PathBuf>,
    strict: bool,
    svg: bool,
) -> Result<RunManifest, CliError> {
    let cfg = load(config)?;
    let dir = output_dir(out, config, "");
    let output = execute(&cfg, config, &dir, strict, svg)?;
    stdout_line(&dir.join("summary.json").display().to_string());
    Ok(output.manifest)
}

#[derive(Serialize)]
struct WeightReport {
    eta: f64,
    max_eta: f64,
    ok: bool,
}

#[derive(Serialize)]
struct ValidateReport {
    n: usize,
    connectivity: WindowConnectivityReport,
    weights: WeightReport,
    ne_set_size: usize,
}

pub fn cmd_validate(config: &Path) -> Result<(), CliError> {
    let cfg = load(config)?;
    let n = cfg.agent_count();
    let max_eta = 1.0 / n.max(1) as f64;
    let eta = cfg.weights.eta.unwrap_or(max_eta);
    let ok = eta > 0.0 && eta < 1.0 && eta <= max_eta + 1e-15;

    // the weight bound is reported rather than rejected, so build with the default
    let mut relaxed = cfg.clone();
    relaxed.weights.eta = None;
    let exp = relaxed.build().map_err(|e| CliError::Config(e.to_string()))?;
    let report = ValidateReport {
        n,
        connectivity: connectivity(&exp)?,
        weights: WeightReport { eta, max_eta, ok },
        ne_set_size: exp.ne_set.len(),
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    stdout_line(&text);
    if !report.connectivity.connected {
        return Err(CliError::Connectivity(format!(
            "not {}-window connected",
            report.connectivity.window
        )));
    }
    if !ok {
        return Err(CliError::Check(format!("eta = {eta} exceeds 1/n = {max_eta}")));
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("empty {what} list")));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

#[derive(Serialize)]
struct ChildStatus {
    topology: String,
    seed: u64,
    status: &'static str,
    exit_code: u8,
    error: Option<String>,
    output_dir: PathBuf,
    ne_hit_time: Option<usize>,
    final_estimate_error: Option<f64>,
    final_ne_distance: Option<f64>,
}

#[derive(Serialize)]
struct TopologyAggregate {
    topology: String,
    runs: usize,
    succeeded: usize,
    /// Runs whose trace ends inside the equilibrium set.
    hits: usize,
    /// Median over runs with a hit time.
    median_ne_hit_time: Option<f64>,
    median_final_estimate_error: Option<f64>,
    median_final_ne_distance: Option<f64>,
}

#[derive(Serialize)]
struct SweepSummary {
    config_path: PathBuf,
    seeds: Vec<u64>,
    topologies: Vec<String>,
    runs: Vec<ChildStatus>,
    aggregates: Vec<TopologyAggregate>,
    files: Vec<String>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = load(&args.config)?;
    let seeds: Vec<u64> = parse_list(&args.seeds, "seeds")?;
    let topologies: Vec<String> = parse_list(&args.topologies, "topologies")?;
    let root = output_dir(args.out.clone(), &args.config, "-sweep");

    // every child config must be valid before anything runs
    let mut jobs = Vec::new();
    for topo in &topologies {
        let base = cfg
            .with_topology(topo)
            .map_err(|e| CliError::Config(format!("{topo}: {e}")))?;
        for &seed in &seeds {
            let child = base.with_seed(seed);
            child
                .build()
                .map_err(|e| CliError::Config(format!("{topo}, seed {seed}: {e}")))?;
            let dir = root.join(topo).join(format!("seed-{seed}"));
            jobs.push((topo.clone(), seed, child, dir));
        }
    }

    let results: Vec<_> = jobs
        .par_iter()
        .map(|(topo, seed, child, dir)| {
            (
                topo.clone(),
                *seed,
                dir.clone(),
                execute(child, &args.config, dir, args.strict, args.svg),
            )
        })
        .collect();

    fs::create_dir_all(&root)?;
    let mut statuses = Vec::new();
    let mut worst_code = 0u8;
    // per topology: t -> (sum error, count, sum ne distance, count)
    let mut curves: BTreeMap<&str, BTreeMap<usize, (f64, usize, f64, usize)>> = BTreeMap::new();
    for (topo, seed, dir, result) in &results {
        match result {
            Ok(out) => {
                let curve = curves.entry(topo.as_str()).or_default();
                for r in &out.trace.records {
                    let e = curve.entry(r.t).or_insert((0.0, 0, 0.0, 0));
                    e.0 += r.estimate_error;
                    e.1 += 1;
                    if let Some(d) = r.ne_distance {
                        e.2 += d;
                        e.3 += 1;
                    }
                }
                let last = out.summary.final_metrics.as_ref();
                statuses.push(ChildStatus {
                    topology: topo.clone(),
                    seed: *seed,
                    status: "ok",
                    exit_code: 0,
                    error: None,
                    output_dir: dir.clone(),
                    ne_hit_time: out.summary.ne_hit_time,
                    final_estimate_error: last.map(|m| m.estimate_error),
                    final_ne_distance: last.and_then(|m| m.ne_distance),
                });
            }
            Err(e) => {
                worst_code = worst_code.max(e.code());
                statuses.push(ChildStatus {
                    topology: topo.clone(),
                    seed: *seed,
                    status: "failed",
                    exit_code: e.code(),
                    error: Some(e.message().to_string()),
                    output_dir: dir.clone(),
                    ne_hit_time: None,
                    final_estimate_error: None,
                    final_ne_distance: None,
                });
            }
        }
    }

    let aggregates: Vec<TopologyAggregate> = topologies
        .iter()
        .map(|topo| {
            let runs: Vec<&ChildStatus> = statuses.iter().filter(|s| &s.topology == topo).collect();
            let ok: Vec<&&ChildStatus> = runs.iter().filter(|s| s.exit_code == 0).collect();
            let mut hits: Vec<f64> = ok.iter().filter_map(|s| s.ne_hit_time.map(|h| h as f64)).collect();
            let mut errs: Vec<f64> = ok.iter().filter_map(|s| s.final_estimate_error).collect();
            let mut dists: Vec<f64> = ok.iter().filter_map(|s| s.final_ne_distance).collect();
            TopologyAggregate {
                topology: topo.clone(),
                runs: runs.len(),
                succeeded: ok.len(),
                hits: hits.len(),
                median_ne_hit_time: median(&mut hits),
                median_final_estimate_error: median(&mut errs),
                median_final_ne_distance: median(&mut dists),
            }
        })
        .collect();

    let mut files = vec!["comparison.csv".to_string()];
    {
        let mut w = BufWriter::new(File::create(root.join("comparison.csv"))?);
        write!(w, "t")?;
        for topo in &topologies {
            write!(w, ",{topo}:estimate_error,{topo}:ne_distance")?;
        }
        writeln!(w)?;
        let ts: std::collections::BTreeSet<usize> =
            curves.values().flat_map(|c| c.keys().copied()).collect();
        for t in ts {
            write!(w, "{t}")?;
            for topo in &topologies {
                match curves.get(topo.as_str()).and_then(|c| c.get(&t)) {
                    Some(&(e, ne, d, nd)) => {
                        write!(w, ",{}", e / ne as f64)?;
                        if nd > 0 {
                            write!(w, ",{}", d / nd as f64)?;
                        } else {
                            write!(w, ",")?;
                        }
                    }
                    None => write!(w, ",,")?,
                }
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    if args.svg {
        let series: Vec<Series> = topologies
            .iter()
            .filter_map(|topo| {
                curves.get(topo.as_str()).map(|c| Series {
                    label: topo,
                    points: c.iter().map(|(&t, &(e, n, _, _))| (t as f64, e / n as f64)).collect(),
                })
            })
            .collect();
        fs::write(
            root.join("comparison.svg"),
            svg::line_chart("Mean estimate error by topology", "error", &series),
        )?;
        files.push("comparison.svg".to_string());
    }
    files.push("sweep.json".to_string());

    let summary = SweepSummary {
        config_path: args.config.clone(),
        seeds,
        topologies,
        runs: statuses,
        aggregates,
        files,
    };
    write_json(&root.join("sweep.json"), &summary)?;
    stdout_line(&root.join("sweep.json").display().to_string());

    if worst_code != 0 {
        let failed = summary.runs.iter().filter(|s| s.exit_code != 0).count();
        let msg = format!("{failed} of {} runs failed", summary.runs.len());
        return Err(match worst_code {
            2 => CliError::Config(msg),
            3 => CliError::Connectivity(msg),
            4 => CliError::Runtime(msg),
            _ => CliError::Io(msg),
        });
    }
    Ok(())
}
