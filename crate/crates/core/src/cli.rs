//! `netctl` command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{best_mu_for_size, sym_bound_for_size, DEFAULT_MU_GRID};
use crate::decoupled::{
    gain_matrices, decoupled_energy_bound, simulate_decoupled, synthesize_decoupled, PlanHorizon,
};
use crate::error::{Error, Result};
use crate::gramian::{
    gramian, gramian_infinite_tol, min_energy_input, ControlSet, Horizon, NodeGramians,
    CONTROLLABILITY_TOL,
};
use crate::netmodel::{
    asymmetric_line_network, circulant_network, line_network, load_network, random_symmetric_network,
    spectral_facts, Network, NetworkFormat, DIAGONALIZABLE_TOL,
};
use crate::partition::{
    brute_force_select, median, modal_select, random_control_set, select_control_nodes_alg1,
    spectral_partition, trace_optimal_select, Alg1Options, BruteForceOptions, Metric, Partition,
    DEFAULT_BRUTE_FORCE_CAP,
};

/// Controllability analysis and control synthesis for linear networks.
///
/// Generator specs for --gen:
///   line:N                 directed line, weight 1/2 on every edge
///   circulant:N:RHO        ring with weights RHO/3 on self and both neighbors
///   asymline:N             asymmetric line network
///   randsym:N:RHO:P:SEED   random connected symmetric network, spectral radius RHO
#[derive(Debug, Parser)]
#[command(name = "netctl", version, verbatim_doc_comment)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Controllability Gramian report (JSON).
    Gramian(GramianArgs),
    /// λmin and bounds against the number of control nodes (CSV).
    Sweep(SweepArgs),
    /// Minimum-energy or decoupled control to a target state.
    Control(ControlArgs),
    /// Circulant scaling study: boundary vs random control nodes (CSV).
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct NetworkSource {
    /// Built-in generator, e.g. `circulant:20:0.75`.
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: Option<String>,
    /// Network file (edge-list CSV, Matrix Market, or dense JSON).
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub source: NetworkSource,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct GramianArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Control nodes, 1-based, e.g. `1,3,5-8`. Defaults to all nodes.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Horizon: a positive integer or `inf`.
    #[arg(long, default_value = "inf")]
    pub horizon: String,
    /// Deflate the consensus direction when A is row stochastic (infinite horizon).
    #[arg(long)]
    pub deflate: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethod {
    Brute,
    Alg1,
    Trace,
    Modal,
    Random,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_enum)]
    pub method: SweepMethod,
    /// Inclusive range of control-set sizes, `a..b`. Defaults to `1..n`.
    #[arg(long = "m-range", value_name = "A..B")]
    pub m_range: Option<String>,
    /// A single control-set size (alternative to --m-range).
    #[arg(long, conflicts_with = "m_range")]
    pub m: Option<usize>,
    #[arg(long, default_value = "inf")]
    pub horizon: String,
    /// Brute-force objective: lambda_min, trace, trace_inv, log_det.
    #[arg(long, default_value = "lambda_min")]
    pub metric: String,
    /// Maximum subsets per brute-force search.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
    pub cap: u128,
    /// Draws per size for the random method.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControlMode {
    MinEnergy,
    Decoupled,
}

#[derive(Debug, Args)]
pub struct ControlArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_enum, default_value = "min-energy")]
    pub mode: ControlMode,
    /// Target state: a file of n numbers, or `eK` for the K-th unit vector.
    #[arg(long)]
    pub target: String,
    /// Control nodes, 1-based. Decoupled mode defaults to all boundary nodes.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Positive integer; decoupled mode also accepts `auto` (the default there).
    #[arg(long)]
    pub horizon: Option<String>,
    /// Partition blocks, 1-based, separated by `;`, e.g. `1-4;5-8`.
    #[arg(long, conflicts_with = "auto_partition")]
    pub blocks: Option<String>,
    /// Spectral partition into N blocks: `blocks=N`.
    #[arg(long = "auto-partition", value_name = "blocks=N")]
    pub auto_partition: Option<String>,
    /// Plan JSON output path.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Trajectory CSV output path.
    #[arg(long, value_name = "PATH")]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Cluster size n_b: a value or a range `a..b`.
    #[arg(long)]
    pub nb: String,
    /// Number of clusters N: a value or a range `a..b`.
    #[arg(long)]
    pub clusters: String,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value = "inf")]
    pub horizon: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command, and returns the process exit code:
/// 0 on success, 1 on I/O failure, 2 on any other error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("netctl: error: {e}");
        return 2;
    }
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("netctl: error: {e}");
            if e.is_io() {
                1
            } else {
                2
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("NETCTL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("NETCTL_THREADS must be a positive integer, got '{raw}'")))?;
    // A second call in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Gramian(a) => cmd_gramian(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Control(a) => cmd_control(a),
        Command::Scaling(a) => cmd_scaling(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("JSON serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses a `name:arg:...` generator spec.
pub fn generate(spec: &str) -> Result<Network> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || Error::InvalidArgument(format!("malformed generator spec '{spec}'"));
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        ["line", n] => line_network(int(n)?),
        ["circulant", n, rho] => circulant_network(int(n)?, real(rho)?),
        ["asymline", n] => asymmetric_line_network(int(n)?),
        ["randsym", n, rho, p, seed] => {
            random_symmetric_network(int(n)?, real(rho)?, real(p)?, seed.parse().map_err(|_| bad())?)
        }
        _ => Err(Error::InvalidArgument(format!(
            "unknown generator spec '{spec}' (expected line:N, circulant:N:RHO, asymline:N, randsym:N:RHO:P:SEED)"
        ))),
    }
}

fn load(args: &NetworkArgs) -> Result<Network> {
    match (&args.source.generator, &args.source.input) {
        (Some(spec), None) => generate(spec),
        (None, Some(path)) => {
            let format = match &args.format {
                Some(f) => NetworkFormat::from_str(f)?,
                None => NetworkFormat::from_path(path).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "cannot infer the format of {}; pass --format",
                        path.display()
                    ))
                })?,
            };
            load_network(path, format)
        }
        _ => Err(Error::InvalidArgument("give exactly one of --gen and --input".into())),
    }
}

/// Parses a 1-based node list such as `1,3,5-8` into sorted 0-based indices.
pub fn parse_nodes(spec: &str, n: usize) -> Result<Vec<usize>> {
    let mut nodes = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::InvalidArgument(format!("malformed node list item '{item}'"));
        let (lo, hi) = match item.split_once('-') {
            Some((a, b)) => (a.trim().parse::<usize>().map_err(|_| bad())?, b.trim().parse::<usize>().map_err(|_| bad())?),
            None => {
                let v = item.parse::<usize>().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo == 0 || hi < lo || hi > n {
            return Err(Error::InvalidArgument(format!(
                "node list item '{item}' outside 1..={n}"
            )));
        }
        nodes.extend(lo - 1..hi);
    }
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("empty node list".into()));
    }
    Ok(nodes)
}

fn parse_set(spec: &str, n: usize) -> Result<ControlSet> {
    ControlSet::new(parse_nodes(spec, n)?, n)
}

/// Parses `a..b` (inclusive) or a single integer.
pub fn parse_range(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("malformed range '{spec}' (expected a..b)"));
    let (lo, hi) = match spec.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let v = spec.trim().parse::<usize>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_gramian(args: &GramianArgs) -> Result<()> {
    let net = load(&args.network)?;
    let k = match &args.nodes {
        Some(s) => parse_set(s, net.n())?,
        None => ControlSet::all(net.n()),
    };
    let horizon = Horizon::from_str(&args.horizon)?;
    let report = match horizon {
        Horizon::Infinite if args.deflate => {
            gramian_infinite_tol(&net, &k, true, CONTROLLABILITY_TOL)?
        }
        h => gramian(&net, &k, h, CONTROLLABILITY_TOL)?,
    };
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn nodes_field(k: &ControlSet) -> String {
    k.one_based().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub const SWEEP_HEADER: &str = "m,method,lambda_min,thm1_bound,thm1_mu,eq7_term1,eq7_term2,eq7_min,nodes";

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let net = load(&args.network)?;
    let n = net.n();
    let (lo, hi) = match (&args.m_range, args.m) {
        (Some(r), _) => parse_range(r)?,
        (None, Some(m)) => (m, m),
        (None, None) => (1, n),
    };
    if lo == 0 || hi > n {
        return Err(Error::InvalidArgument(format!("m range {lo}..{hi} outside 1..{n}")));
    }
    if args.method == SweepMethod::Random && args.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let horizon = Horizon::from_str(&args.horizon)?;
    let metric = Metric::from_str(&args.metric)?;
    let grams = NodeGramians::new(&net, horizon)?;
    let facts = spectral_facts(&net, DIAGONALIZABLE_TOL)?;
    let brute_opts = BruteForceOptions {
        cap: args.cap,
        ..Default::default()
    };
    let alg1_opts = Alg1Options {
        horizon,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let method_name = format!("{:?}", args.method).to_ascii_lowercase();

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for m in lo..=hi {
        let (lmin, nodes) = match args.method {
            SweepMethod::Random => {
                let mut samples = Vec::with_capacity(args.trials);
                for _ in 0..args.trials {
                    let k = random_control_set(n, m, &mut rng)?;
                    samples.push(grams.lambda_min(k.nodes()));
                }
                (median(&samples), String::new())
            }
            method => {
                let sel = match method {
                    SweepMethod::Brute => brute_force_select(&net, m, horizon, metric, &brute_opts)?,
                    SweepMethod::Alg1 => select_control_nodes_alg1(&net, m, &alg1_opts)?,
                    SweepMethod::Trace => trace_optimal_select(&net, m, horizon)?,
                    SweepMethod::Modal => modal_select(&net, m)?,
                    SweepMethod::Random => unreachable!(),
                };
                (grams.lambda_min(sel.k.nodes()), nodes_field(&sel.k))
            }
        };
        let thm1 = best_mu_for_size(&facts, m, DEFAULT_MU_GRID).ok();
        let sym = sym_bound_for_size(&facts, m, horizon).ok();
        writeln!(
            csv,
            "{m},{method_name},{lmin},{},{},{},{},{},{nodes}",
            fmt_opt(thm1.as_ref().map(|b| b.value)),
            fmt_opt(thm1.as_ref().map(|b| b.mu)),
            fmt_opt(sym.as_ref().map(|b| b.term1.value)),
            fmt_opt(sym.as_ref().map(|b| b.term2.value)),
            fmt_opt(sym.as_ref().map(|b| b.min.value)),
        )
        .expect("writing to a String");
    }
    emit(args.out.as_deref(), &csv)
}

/// Reads a target vector from a file (numbers separated by commas,
/// whitespace, or JSON brackets) or builds `e_k` from `eK`.
pub fn read_target(spec: &str, n: usize) -> Result<DVector<f64>> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(k) = spec.strip_prefix('e').and_then(|s| s.parse::<usize>().ok()) {
            if k == 0 || k > n {
                return Err(Error::InvalidArgument(format!("unit target e{k} outside 1..={n}")));
            }
            let mut x = DVector::zeros(n);
            x[k - 1] = 1.0;
            return Ok(x);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ']')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse { line: 0, message: format!("not a number: '{s}'") })
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != n {
        return Err(Error::Dimension(format!(
            "target has {} entries for {n} nodes",
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}

/// Parses `1-4;5-8` into 0-based blocks.
pub fn parse_blocks(spec: &str, n: usize) -> Result<Vec<Vec<usize>>> {
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|b| parse_nodes(b, n))
        .collect()
}

#[derive(Serialize)]
struct MinEnergyPlan<'a> {
    mode: &'static str,
    #[serde(rename = "K")]
    k: &'a ControlSet,
    #[serde(rename = "T")]
    horizon: usize,
    x_f: Vec<f64>,
    energy: f64,
    final_error: f64,
    #[serde(serialize_with = "crate::gramian::vector_rows")]
    inputs: &'a [DVector<f64>],
}

fn cmd_control(args: &ControlArgs) -> Result<()> {
    let net = load(&args.network)?;
    let n = net.n();
    let x_f = read_target(&args.target, n)?;
    match args.mode {
        ControlMode::MinEnergy => {
            let k = parse_set(
                args.nodes
                    .as_deref()
                    .ok_or_else(|| Error::InvalidArgument("min-energy mode needs --nodes".into()))?,
                n,
            )?;
            let t = match args.horizon.as_deref().map(Horizon::from_str).transpose()? {
                Some(Horizon::Finite(t)) => t,
                _ => {
                    return Err(Error::InvalidArgument(
                        "min-energy mode needs a finite --horizon".into(),
                    ))
                }
            };
            let traj = min_energy_input(&net, &k, t, &x_f)?;
            let final_error = (traj.final_state() - &x_f).norm();
            let plan = MinEnergyPlan {
                mode: "min-energy",
                k: &k,
                horizon: t,
                x_f: x_f.iter().copied().collect(),
                energy: traj.energy,
                final_error,
                inputs: &traj.inputs,
            };
            write_outputs(args, &to_json(&plan)?, &traj.to_csv())?;
            emit(None, &format!("energy = {}\nfinal_error = {final_error}\n", traj.energy))
        }
        ControlMode::Decoupled => {
            let partition = match (&args.blocks, &args.auto_partition) {
                (Some(b), _) => Partition::new(&net, parse_blocks(b, n)?)?,
                (None, Some(spec)) => {
                    let count = spec
                        .trim()
                        .strip_prefix("blocks=")
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| {
                            Error::InvalidArgument(format!("malformed --auto-partition '{spec}' (expected blocks=N)"))
                        })?;
                    spectral_partition(&net, count)?
                }
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "decoupled mode needs --blocks or --auto-partition".into(),
                    ))
                }
            };
            let k = match &args.nodes {
                Some(s) => parse_set(s, n)?,
                None => ControlSet::new(partition.all_boundary(), n).map_err(|_| {
                    Error::InvalidArgument("partition has no boundary nodes; pass --nodes".into())
                })?,
            };
            let horizon = match args.horizon.as_deref() {
                Some(h) => PlanHorizon::from_str(h)?,
                None => PlanHorizon::Auto,
            };
            let plan = synthesize_decoupled(&net, &partition, &k, &x_f, horizon)?;
            let sim = simulate_decoupled(&net, &plan)?;
            write_outputs(args, &to_json(&plan)?, &sim.coupled.to_csv())?;
            emit(
                None,
                &format!(
                    "energy = {}\ncertificate = {}\npartition_bound = {}\nhorizon = {}\nfinal_error = {}\n",
                    sim.energy(),
                    plan.predicted_energy_bound,
                    plan.partition_energy_bound,
                    plan.horizon,
                    sim.final_error
                ),
            )
        }
    }
}

fn write_outputs(args: &ControlArgs, plan: &str, trajectory: &str) -> Result<()> {
    if let Some(p) = &args.out {
        emit(Some(p), plan)?;
    }
    if let Some(p) = &args.trajectory {
        emit(Some(p), trajectory)?;
    }
    Ok(())
}

/// One point of the circulant scaling study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub clusters: usize,
    pub nb: usize,
    pub n: usize,
    /// Number of control nodes (the boundary set size).
    pub m: usize,
    pub lambda_min_boundary: f64,
    /// `1/‖ΓΛ^{1/2}‖₂²`.
    pub eq15_lower_bound: f64,
    pub lambda_min_random_median: f64,
}

pub const SCALING_HEADER: &str =
    "N,n_b,n,m,lambda_min_boundary,eq15_lower_bound,lambda_min_random_median";

/// Circulant network of `clusters · nb` nodes split into contiguous blocks
/// of `nb`, controlled from all boundary nodes, against the median of
/// `trials` uniform random sets of the same size.
pub fn scaling_row(clusters: usize, nb: usize, rho: f64, horizon: Horizon, trials: usize, seed: u64) -> Result<ScalingRow> {
    if clusters < 2 || nb < 2 {
        return Err(Error::InvalidArgument("scaling needs N >= 2 and n_b >= 2".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let n = clusters * nb;
    let net = circulant_network(n, rho)?;
    let partition = Partition::contiguous(&net, &vec![nb; clusters])?;
    let k = ControlSet::new(partition.all_boundary(), n)?;
    let grams = NodeGramians::new(&net, horizon)?;
    let lambda_min_boundary = grams.lambda_min(k.nodes());
    let certificate = gain_matrices(&net, &partition, &k, horizon)?;
    let eq15_lower_bound = 1.0 / decoupled_energy_bound(&certificate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..trials)
        .map(|_| random_control_set(n, k.len(), &mut rng).map(|r| grams.lambda_min(r.nodes())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingRow {
        clusters,
        nb,
        n,
        m: k.len(),
        lambda_min_boundary,
        eq15_lower_bound,
        lambda_min_random_median: median(&samples),
    })
}

fn cmd_scaling(args: &ScalingArgs) -> Result<()> {
    let nb = parse_range(&args.nb)?;
    let cl = parse_range(&args.clusters)?;
    if nb.0 != nb.1 && cl.0 != cl.1 {
        return Err(Error::InvalidArgument("sweep either --nb or --clusters, not both".into()));
    }
    let horizon = Horizon::from_str(&args.horizon)?;
    let mut csv = String::from(SCALING_HEADER);
    csv.push('\n');
    for clusters in cl.0..=cl.1 {
        for size in nb.0..=nb.1 {
            let r = scaling_row(clusters, size, args.rho, horizon, args.trials, args.seed)?;
            writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                r.clusters, r.nb, r.n, r.m, r.lambda_min_boundary, r.eq15_lower_bound, r.lambda_min_random_median
            )
            .expect("writing to a String");
        }
    }
    emit(args.out.as_deref(), &csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(generate("line:4").unwrap().n(), 4);
        assert_eq!(generate("circulant:6:0.5").unwrap().n(), 6);
        assert_eq!(generate("asymline:5").unwrap().n(), 5);
        assert_eq!(generate("randsym:10:0.9:0.2:7").unwrap().n(), 10);
        assert!(generate("ring:4").is_err());
        assert!(generate("line:x").is_err());
    }

    #[test]
    fn node_lists() {
        assert_eq!(parse_nodes("1,3,5-7", 8).unwrap(), vec![0, 2, 4, 5, 6]);
        assert!(parse_nodes("0", 8).is_err());
        assert!(parse_nodes("9", 8).is_err());
        assert!(parse_nodes("", 8).is_err());
        assert_eq!(parse_blocks("1-2; 3-4", 4).unwrap(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..20").unwrap(), (1, 20));
        assert_eq!(parse_range("1..=3").unwrap(), (1, 3));
        assert_eq!(parse_range("4").unwrap(), (4, 4));
        assert!(parse_range("5..2").is_err());
    }

    #[test]
    fn unit_targets() {
        let x = read_target("e3", 3).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 0.0, 1.0]);
        assert!(read_target("e4", 3).is_err());
        assert!(read_target("/nonexistent/target.txt", 3).unwrap_err().is_io());
    }

    #[test]
    fn scaling_row_is_sound() {
        let r = scaling_row(3, 4, 0.5, Horizon::Infinite, 5, 0).unwrap();
        assert_eq!((r.n, r.m), (12, 6));
        assert!(r.eq15_lower_bound <= r.lambda_min_boundary + 1e-9);
    }
}
