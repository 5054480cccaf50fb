//! Command-line entry point.
//!
//! Option precedence: built-in defaults, then `--config <file.json>`, then
//! individual flags.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use icon_core::bench::{run_benchmark, summarize, BenchConfig, ScaledRates};
use icon_core::config::RunConfig;
use icon_core::generators::GraphKind;
use icon_core::runner::{format_oracle_table, run_oracle_check, run_simulate, run_sweep, OracleCheckConfig, SweepTriple};
use icon_core::{io, Algorithm, Params, SizeLimits};

#[derive(Debug, Parser)]
#[command(name = "icon", version, about = "Adaptive-network SIS simulation by rejection sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run independent replicas and write the trajectory CSV.
    Simulate(RunArgs),
    /// Run one batch per (beta_prime, a_prime, b) triple and summarize wave counts.
    Sweep(SweepArgs),
    /// Time per accepted step across algorithms, graph kinds and sizes.
    Bench(BenchArgs),
    /// Compare every simulator's mean prevalence with the exact solution.
    OracleCheck(OracleArgs),
    /// Generate a graph and write it as an edge list.
    GenGraph(GenGraphArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file; flags given on the command line override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<GraphKind>,
    #[arg(long)]
    n: Option<usize>,
    /// Erdős–Rényi edge probability (default 5/(n-1)).
    #[arg(long)]
    p: Option<f64>,
    /// Barabási–Albert edges per new node.
    #[arg(long)]
    m: Option<usize>,
    /// Geometric graph target mean degree.
    #[arg(long)]
    target_mean_degree: Option<f64>,
    /// Load the initial graph from an edge-list file.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Node-state file (`v S|I` per line) replacing the random infection.
    #[arg(long)]
    states_file: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Scaled infection rate; beta = beta_prime / measured mean degree.
    #[arg(long)]
    beta_prime: Option<f64>,
    /// Scaled association rate; a = a_prime / n.
    #[arg(long)]
    a_prime: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Absolute infection rate (overrides --beta-prime).
    #[arg(long)]
    beta: Option<f64>,
    /// Absolute association rate (overrides --a-prime).
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    infected_frac: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Number of grid points on [0, horizon].
    #[arg(long)]
    grid: Option<usize>,
    /// Trajectory CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Event CSV path.
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Per-replica wall-clock limit.
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Stop a replica early once no further event is possible.
    #[arg(long)]
    stop_when_absorbing: bool,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

impl RunArgs {
    fn to_config(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path).with_context(|| format!("reading config {}", path.display()))?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = &self.$field { c.$field = v.clone(); } )* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $( if self.$field.is_some() { c.$field = self.$field.clone(); } )* };
        }
        set!(graph, n, m, target_mean_degree, alpha, beta_prime, a_prime, b, horizon, infected_frac, replicas, seed, algorithm, grid);
        set_opt!(p, graph_file, states_file, beta, a, out, events_out, timeout_secs);
        if self.stop_when_absorbing {
            c.stop_when_absorbing = true;
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// A `beta_prime,a_prime,b` triple; repeat for several.
    #[arg(long = "triple", allow_hyphen_values = true)]
    triples: Vec<SweepTriple>,
    /// Directory for per-triple trajectory CSVs.
    #[arg(long)]
    traj_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "icon,fast,naive")]
    algorithms: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "er,ba,geom")]
    graphs: Vec<GraphKind>,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    beta_prime: f64,
    #[arg(long, default_value_t = 2.0)]
    a_prime: f64,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    infected_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit per cell.
    #[arg(long, default_value_t = 300.0)]
    timeout_secs: f64,
    #[arg(long, default_value_t = 1_000)]
    naive_max_nodes: usize,
    #[arg(long, default_value_t = 10_000)]
    fast_max_nodes: usize,
    #[arg(long)]
    no_warmup: bool,
    /// Bench CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    replicas: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "icon,fast,naive")]
    algorithms: Vec<Algorithm>,
    /// Allowed deviation in standard errors.
    #[arg(long, default_value_t = 3.0)]
    max_z: f64,
}

#[derive(Debug, Args)]
struct GenGraphArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Node-state file for replica 0's initial infection.
    #[arg(long)]
    states_out: Option<PathBuf>,
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn simulate(args: RunArgs) -> anyhow::Result<()> {
    let config = args.to_config()?;
    if args.print_config {
        println!("{}", config.to_json_pretty());
        return Ok(());
    }
    run_simulate(&config)?;
    Ok(())
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let config = args.run.to_config()?;
    let mut out = output(config.out.as_deref())?;
    run_sweep(&config, &args.triples, args.traj_dir.as_deref(), &mut out)?;
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        algorithms: args.algorithms,
        graphs: args.graphs,
        sizes: args.sizes,
        runs: args.runs,
        rates: ScaledRates { alpha: args.alpha, beta_prime: args.beta_prime, a_prime: args.a_prime, b: args.b },
        horizon: args.horizon.unwrap_or(defaults.horizon),
        infected_fraction: args.infected_frac,
        seed: args.seed,
        timeout: Duration::try_from_secs_f64(args.timeout_secs).context("invalid --timeout-secs")?,
        limits: SizeLimits { naive_max_nodes: args.naive_max_nodes, fast_max_nodes: args.fast_max_nodes },
        warmup: !args.no_warmup,
    };
    let mut out = output(args.out.as_deref())?;
    io::write_comments(
        &mut out,
        &[
            format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            format!("config: {}", serde_json::to_string(&config)?),
            format!("seed: {}", config.seed),
        ],
    )?;
    writeln!(out, "{}", io::BENCH_HEADER)?;
    let mut write_err = None;
    let results = run_benchmark(&config, |r| {
        if write_err.is_none() {
            if let Err(e) = writeln!(out, "{}", r.csv_row()).and_then(|_| out.flush()) {
                write_err = Some(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    let mut err = std::io::stderr().lock();
    writeln!(err, "{:<6} {:<5} {:>7} {:>5} {:>16} {:>14}", "algo", "graph", "n", "runs", "mean_ns/step", "sd_ns")?;
    for c in summarize(&results) {
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.1}"));
        writeln!(
            err,
            "{:<6} {:<5} {:>7} {:>5} {:>16} {:>14}",
            c.algorithm.as_str(),
            c.graph.as_str(),
            c.n,
            c.completed_runs,
            fmt(c.mean_ns),
            fmt(c.std_ns)
        )?;
    }
    Ok(())
}

fn oracle_check(args: OracleArgs) -> anyhow::Result<bool> {
    let cfg = OracleCheckConfig {
        n: args.n,
        params: Params::new(args.alpha, args.beta, args.a, args.b, args.horizon)?,
        replicas: args.replicas,
        seed: args.seed,
        algorithms: args.algorithms,
        max_z: args.max_z,
    };
    let rows = run_oracle_check(&cfg)?;
    print!("{}", format_oracle_table(&rows));
    Ok(rows.iter().all(|r| r.pass))
}

fn gen_graph(args: GenGraphArgs) -> anyhow::Result<()> {
    let config = args.run.to_config()?;
    if config.graph_file.is_some() {
        bail!("gen-graph builds a new graph; --graph-file is not accepted");
    }
    config.validate()?;
    let graph = config.graph_spec().generate(&mut config.graph_rng())?;
    let mut out = output(config.out.as_deref())?;
    io::write_comments(
        &mut out,
        &[
            format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            format!("config: {}", config.to_json()),
            format!("seed: {}", config.seed),
            format!("graph: {} edges={} measured_mean_degree={}", config.graph_spec(), graph.edge_count(), graph.mean_degree()),
        ],
    )?;
    io::write_edge_list(&mut out, &graph)?;
    out.flush()?;
    if let Some(path) = &args.states_out {
        let mut state = graph.clone();
        icon_core::generators::init_infected(&mut state, config.infected_frac, &mut config.replica_rng(0))?;
        let mut w = create(path)?;
        io::write_node_states(&mut w, &state)?;
        w.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Bench(a) => bench(a).map(|_| true),
        Command::OracleCheck(a) => oracle_check(a),
        Command::GenGraph(a) => gen_graph(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: oracle check failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
