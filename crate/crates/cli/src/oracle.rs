use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dfp_core::consensus::{
    build_weight_matrix, lemma1_bound, step_tracking, MatrixProduct, TrackingState, WeightRule,
    WeightScheme,
};
use dfp_core::graph::{GraphKind, GraphSequence, Topology};
use dfp_core::metrics::fit_rate;
use dfp_core::seed;

use crate::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Static,
    EdgeCycle,
    SeededRandom,
    Windowed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BaseArg {
    Ring,
    Star,
    Complete,
}

/// Graph and weight parameters shared by both oracles.
#[derive(Args, Debug)]
pub struct NetworkArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "edge-cycle")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "ring")]
    pub base: BaseArg,
    /// Edge probability for seeded-random and windowed graphs.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Connectivity window T (default: the base edge count for edge-cycle, else 1).
    #[arg(long = "window", short = 'T')]
    pub window: Option<usize>,
    /// Weight lower bound (default 1/n).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub graph_seed: u64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Lemma1Args {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Start of the product.
    #[arg(long, default_value_t = 0)]
    pub s: usize,
    /// Number of factors after the first.
    #[arg(long, default_value_t = 500)]
    pub horizon: usize,
}

#[derive(Args, Debug)]
pub struct TrackingArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: usize,
    /// Seed of the Bernoulli stream driving the stubborn value.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Success probability of the Bernoulli stream.
    #[arg(long, default_value_t = 0.3)]
    pub prob: f64,
    /// Emit every `cadence` steps.
    #[arg(long, default_value_t = 1)]
    pub cadence: usize,
    /// Lower end of the rate-fit window.
    #[arg(long, default_value_t = 100.0)]
    pub t_min: f64,
}

struct Network {
    seq: GraphSequence,
    scheme: WeightScheme,
    window: usize,
}

fn network(args: &NetworkArgs) -> Result<Network, CliError> {
    let bad = |e: dfp_core::Error| CliError::Config(e.to_string());
    let base = match args.base {
        BaseArg::Ring => Topology::Ring,
        BaseArg::Star => Topology::Star,
        BaseArg::Complete => Topology::Complete,
    };
    let edges = base.edges(args.n).map_err(bad)?.len();
    let window = args.window.unwrap_or(match args.kind {
        KindArg::EdgeCycle => edges.max(1),
        _ => 1,
    });
    let kind = match args.kind {
        KindArg::Static => GraphKind::Static,
        KindArg::EdgeCycle => GraphKind::EdgeCycle,
        KindArg::SeededRandom => GraphKind::SeededRandom { p: args.p },
        KindArg::Windowed => GraphKind::Windowed { window, p: args.p },
    };
    let seq = GraphSequence::new(args.n, kind, base, args.graph_seed).map_err(bad)?;
    let eta = args.eta.unwrap_or(1.0 / args.n as f64);
    let scheme = WeightScheme::new(eta, WeightRule::UniformClosedNeighborhood).map_err(bad)?;
    scheme.check_for(args.n).map_err(bad)?;
    Ok(Network {
        seq,
        scheme,
        window,
    })
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn runtime(e: dfp_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Tabulates the entrywise deviation of Φ(t, s) from its limit against the
/// bound κρ^{t−s}, tracking the last agent.
pub fn lemma1(args: &Lemma1Args) -> Result<(), CliError> {
    let net = network(&args.net)?;
    let n = args.net.n;
    let tracked = n - 1;
    let weights = |t: usize| {
        build_weight_matrix(&net.scheme, tracked, &net.seq.edges_at(t).adjacency(n)).map_err(runtime)
    };
    let mut out = sink(&args.net.out)?;
    writeln!(out, "t,s,actual_maxdev,kappa_rho_bound")?;
    let mut phi = MatrixProduct::start(&weights(args.s)?, args.s);
    for t in args.s..=args.s + args.horizon {
        if t > args.s {
            phi.push(&weights(t)?).map_err(runtime)?;
        }
        let bound = lemma1_bound(n, net.scheme.eta(), net.window, t, args.s)
            .map_err(|e| CliError::Config(e.to_string()))?;
        writeln!(out, "{t},{},{},{}", args.s, phi.max_deviation_from_limit(), bound.bound)?;
    }
    out.flush()?;
    Ok(())
}

/// Drives `x(t+1) = W(t)(x(t) + (v(t+1) − x_n(t))e_n)` where `v` is the
/// running mean of a seeded Bernoulli stream, so `|v(t+1) − v(t)| ≤ 1/t`.
pub fn tracking(args: &TrackingArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.prob) {
        return Err(CliError::Config(format!("prob {} outside [0, 1]", args.prob)));
    }
    if args.cadence == 0 {
        return Err(CliError::Config("cadence must be >= 1".into()));
    }
    let net = network(&args.net)?;
    let n = args.net.n;
    let tracked = n - 1;
    let draw = |t: usize| {
        let u = (seed::derive(args.seed, &[t as u64]) >> 11) as f64 / (1u64 << 53) as f64;
        if u < args.prob {
            1.0
        } else {
            0.0
        }
    };
    let mut value = draw(0);
    let mut state = TrackingState::agreed(n, tracked, value);
    let mut out = sink(&args.net.out)?;
    writeln!(out, "t,max_error,normalized_error")?;
    let mut series = Vec::with_capacity(args.horizon);
    for t in 1..args.horizon {
        value += (draw(t) - value) / t as f64;
        let w = build_weight_matrix(&net.scheme, tracked, &net.seq.edges_at(t + 1).adjacency(n))
            .map_err(runtime)?;
        state = step_tracking(&state, &w, value).map_err(runtime)?;
        let tt = (t + 1) as f64;
        let err = state.max_error();
        series.push((tt, err));
        if (t + 1) % args.cadence == 0 {
            let normalized = if tt > 1.0 { err * tt / tt.ln() } else { f64::NAN };
            writeln!(out, "{},{err},{normalized}", t + 1)?;
        }
    }
    out.flush()?;
    match fit_rate(&series, args.t_min) {
        Ok(fit) => eprintln!(
            "fit over [{}, {}]: C = {:.6}, slope = {:.3e}, {}",
            fit.t_min,
            fit.t_max,
            fit.c,
            fit.slope,
            if fit.passes() { "pass" } else { "fail" }
        ),
        Err(e) => eprintln!("fit skipped: {e}"),
    }
    Ok(())
}
