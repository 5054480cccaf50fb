//! Runtime-per-accepted-step benchmark over algorithms, graph kinds and sizes.
//!
//! Cells run strictly one after another on the calling thread. Only the
//! stepping loop is timed; graph generation, index construction and output
//! are excluded.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, AnySimulator, SizeLimits};
use crate::error::{usage, Result};
use crate::generators::{init_infected, GraphKind};
use crate::model::{run, NullRecorder, Params, RunOptions, Termination};
use crate::stats::mean_estimate;

/// Rates before scaling to a graph: `beta = beta_prime / <d>`, `a = a_prime / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledRates {
    pub alpha: f64,
    pub beta_prime: f64,
    pub a_prime: f64,
    pub b: f64,
}

impl Default for ScaledRates {
    fn default() -> Self {
        ScaledRates { alpha: 1.0, beta_prime: 3.0, a_prime: 2.0, b: 2.0 }
    }
}

impl ScaledRates {
    pub fn resolve(&self, mean_degree: f64, n: usize, horizon: f64) -> Result<Params> {
        Params::scaled(self.alpha, self.beta_prime, self.a_prime, self.b, horizon, mean_degree, n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub graphs: Vec<GraphKind>,
    pub sizes: Vec<usize>,
    pub runs: usize,
    pub rates: ScaledRates,
    pub horizon: f64,
    pub infected_fraction: f64,
    pub seed: u64,
    /// Wall-clock budget per cell, warm-up included.
    pub timeout: Duration,
    pub limits: SizeLimits,
    pub warmup: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            graphs: GraphKind::ALL.to_vec(),
            sizes: vec![100, 1_000, 10_000, 100_000],
            runs: 5,
            rates: ScaledRates::default(),
            horizon: 2.0,
            infected_fraction: 0.1,
            seed: 0,
            timeout: Duration::from_secs(300),
            limits: SizeLimits { naive_max_nodes: 1_000, fast_max_nodes: 10_000 },
            warmup: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    SizeLimit,
    Timeout,
    NoSteps,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::SizeLimit => "size_limit",
            SkipReason::Timeout => "timeout",
            SkipReason::NoSteps => "no_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub algorithm: Algorithm,
    pub graph: GraphKind,
    pub n: usize,
    pub run: usize,
    pub accepted_steps: u64,
    pub wall_time: Duration,
    pub skipped: Option<SkipReason>,
}

impl BenchResult {
    /// Nanoseconds per accepted step; `None` for skipped rows.
    pub fn time_per_step_ns(&self) -> Option<f64> {
        if self.skipped.is_some() || self.accepted_steps == 0 {
            None
        } else {
            Some(self.wall_time.as_nanos() as f64 / self.accepted_steps as f64)
        }
    }

    pub fn csv_row(&self) -> String {
        match self.time_per_step_ns() {
            Some(tps) => format!(
                "{},{},{},{},{},{},{:.3},",
                self.algorithm,
                self.graph,
                self.n,
                self.run,
                self.accepted_steps,
                self.wall_time.as_nanos(),
                tps
            ),
            None => format!(
                "{},{},{},{},{},{},,{}",
                self.algorithm,
                self.graph,
                self.n,
                self.run,
                self.accepted_steps,
                self.wall_time.as_nanos(),
                self.skipped.map_or("", SkipReason::as_str)
            ),
        }
    }
}

fn cell_stream(graph: GraphKind, n: usize) -> u64 {
    (graph as u64) << 40 | n as u64
}

/// Deterministic initial state for `(graph, n, run)`, shared by all algorithms.
fn initial_state(config: &BenchConfig, graph: GraphKind, n: usize, run: u64) -> Result<crate::graph::SimState> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(run));
    rng.set_stream(cell_stream(graph, n));
    let mut state = graph.default_spec(n).generate(&mut rng)?;
    init_infected(&mut state, config.infected_fraction, &mut rng)?;
    Ok(state)
}

struct Timed {
    accepted: u64,
    wall: Duration,
    timed_out: bool,
}

fn timed_run(config: &BenchConfig, algorithm: Algorithm, graph: GraphKind, n: usize, run_id: u64, deadline: Instant) -> Result<Timed> {
    let mut state = initial_state(config, graph, n, run_id)?;
    let params = config.rates.resolve(state.mean_degree(), n, config.horizon)?;
    let mut sim = AnySimulator::new(algorithm, params, &state, config.limits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(run_id));
    rng.set_stream(cell_stream(graph, n) | 1 << 63);
    let summary = run(&mut sim, &mut state, &mut rng, &mut NullRecorder, RunOptions { deadline: Some(deadline), ..Default::default() });
    Ok(Timed {
        accepted: summary.stats.accepted,
        wall: summary.stats.wall_time,
        timed_out: summary.termination == Termination::Deadline,
    })
}

/// Runs the full matrix, calling `on_result` as each row is produced.
pub fn run_benchmark(config: &BenchConfig, mut on_result: impl FnMut(&BenchResult)) -> Result<Vec<BenchResult>> {
    if config.runs == 0 {
        return usage("benchmark needs at least one run per cell");
    }
    if config.horizon.is_nan() || config.horizon <= 0.0 {
        return usage("benchmark horizon must be positive");
    }
    let mut results = Vec::new();
    let mut emit = |r: BenchResult, results: &mut Vec<BenchResult>| {
        on_result(&r);
        results.push(r);
    };
    for &graph in &config.graphs {
        for &n in &config.sizes {
            for &algorithm in &config.algorithms {
                let skip_row = |run: usize, reason: SkipReason| BenchResult {
                    algorithm,
                    graph,
                    n,
                    run,
                    accepted_steps: 0,
                    wall_time: Duration::ZERO,
                    skipped: Some(reason),
                };
                if !config.limits.allows(algorithm, n) {
                    for run in 0..config.runs {
                        emit(skip_row(run, SkipReason::SizeLimit), &mut results);
                    }
                    continue;
                }
                let deadline = Instant::now() + config.timeout;
                let mut timed_out = false;
                if config.warmup {
                    // distinct seed from the measured runs, result discarded
                    timed_out = timed_run(config, algorithm, graph, n, config.runs as u64, deadline)?.timed_out;
                }
                for run in 0..config.runs {
                    if timed_out {
                        emit(skip_row(run, SkipReason::Timeout), &mut results);
                        continue;
                    }
                    let t = timed_run(config, algorithm, graph, n, run as u64, deadline)?;
                    timed_out = t.timed_out;
                    let skipped = if t.timed_out {
                        Some(SkipReason::Timeout)
                    } else if t.accepted == 0 {
                        Some(SkipReason::NoSteps)
                    } else {
                        None
                    };
                    emit(BenchResult { algorithm, graph, n, run, accepted_steps: t.accepted, wall_time: t.wall, skipped }, &mut results);
                }
            }
        }
    }
    Ok(results)
}

/// Mean and standard deviation of time per step over completed runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub graph: GraphKind,
    pub n: usize,
    pub completed_runs: usize,
    pub mean_ns: Option<f64>,
    pub std_ns: Option<f64>,
}

pub fn summarize(results: &[BenchResult]) -> Vec<CellSummary> {
    let mut cells: Vec<(Algorithm, GraphKind, usize)> = results.iter().map(|r| (r.algorithm, r.graph, r.n)).collect();
    cells.dedup();
    let mut seen = Vec::new();
    for c in cells {
        if !seen.contains(&c) {
            seen.push(c);
        }
    }
    seen.into_iter()
        .map(|(algorithm, graph, n)| {
            let times: Vec<f64> = results
                .iter()
                .filter(|r| r.algorithm == algorithm && r.graph == graph && r.n == n)
                .filter_map(BenchResult::time_per_step_ns)
                .collect();
            let (mean_ns, std_ns) = match times.len() {
                0 => (None, None),
                k => {
                    let m = mean_estimate(&times);
                    (Some(m.mean), Some(m.std_error * (k as f64).sqrt()))
                }
            };
            CellSummary { algorithm, graph, n, completed_runs: times.len(), mean_ns, std_ns }
        })
        .collect()
}

pub fn cell_mean(summaries: &[CellSummary], algorithm: Algorithm, graph: GraphKind, n: usize) -> Option<f64> {
    summaries.iter().find(|c| c.algorithm == algorithm && c.graph == graph && c.n == n).and_then(|c| c.mean_ns)
}
