//! Batch drivers behind the CLI subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algorithm::{Algorithm, AnySimulator, SizeLimits};
use crate::config::{ResolvedRun, RunConfig};
use crate::error::{usage, Error, Result};
use crate::generators::init_infected;
use crate::graph::{NodeState, SimState};
use crate::io;
use crate::model::{run, EventRecord, NullRecorder, Params, Recorder, RunOptions, Termination};
use crate::observables::{count_waves, uniform_grid, GridRecorder, Trajectory};
use crate::oracle;
use crate::stats::{mean_estimate, MeanEstimate};

/// Initial state of replica `r`: the shared graph with either the state
/// file applied or a fresh random infection.
pub fn replica_initial_state(resolved: &ResolvedRun, rng: &mut ChaCha8Rng) -> Result<SimState> {
    let mut state = resolved.graph.clone();
    state.reset_time();
    match &resolved.config.states_file {
        Some(path) => {
            state.clear_infections();
            io::read_node_states(std::io::BufReader::new(File::open(path)?), &mut state)?;
        }
        None => init_infected(&mut state, resolved.config.infected_frac, rng)?,
    }
    Ok(state)
}

/// Runs one replica, sampling on `grid` and forwarding events to `events`.
pub fn run_replica(
    resolved: &ResolvedRun,
    replica: usize,
    grid: &[f64],
    events: &mut dyn Recorder,
) -> Result<(Trajectory, Termination)> {
    let cfg = &resolved.config;
    let mut rng = cfg.replica_rng(replica);
    let mut state = replica_initial_state(resolved, &mut rng)?;
    let mut sim = AnySimulator::new(cfg.algorithm, resolved.params, &state, cfg.limits())?;
    let mut grid_rec = GridRecorder::new(&state, grid.to_vec())?;
    let opts = RunOptions {
        stop_when_absorbing: cfg.stop_when_absorbing,
        deadline: cfg.timeout_secs.map(|s| Instant::now() + Duration::from_secs_f64(s)),
    };
    let mut both = |ev: &EventRecord| {
        grid_rec.record(ev);
        events.record(ev);
    };
    let summary = run(&mut sim, &mut state, &mut rng, &mut both, opts);
    if summary.termination == Termination::Deadline {
        return Err(Error::Usage(format!("replica {replica} exceeded the {}s timeout", cfg.timeout_secs.unwrap_or_default())));
    }
    Ok((grid_rec.finish(replica)?, summary.termination))
}

/// Writes events as CSV rows, remembering the first I/O error.
struct EventCsv<'a> {
    out: &'a mut dyn Write,
    replica: usize,
    error: Option<std::io::Error>,
}

impl Recorder for EventCsv<'_> {
    fn record(&mut self, ev: &EventRecord) {
        if self.error.is_none() {
            if let Err(e) = io::write_event_row(&mut self.out, self.replica, ev) {
                self.error = Some(e);
            }
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Usage(format!("cannot create {}: {e}", path.display())))
}

/// All replicas of one configuration. Trajectory CSV goes to `traj_out`,
/// event CSV (if requested) to `events_out`.
pub fn simulate_batch(
    resolved: &ResolvedRun,
    traj_out: &mut dyn Write,
    mut events_out: Option<&mut dyn Write>,
) -> Result<Vec<Trajectory>> {
    let cfg = &resolved.config;
    let grid = uniform_grid(cfg.horizon, cfg.grid);
    let header = resolved.header_lines();
    io::write_comments(traj_out, &header)?;
    writeln!(traj_out, "{}", io::TRAJECTORY_HEADER)?;
    if let Some(ev) = events_out.as_deref_mut() {
        io::write_comments(ev, &header)?;
        writeln!(ev, "{}", io::EVENT_HEADER)?;
    }
    let mut trajectories = Vec::with_capacity(cfg.replicas);
    for replica in 0..cfg.replicas {
        let tr = match events_out.as_deref_mut() {
            Some(out) => {
                let mut rec = EventCsv { out, replica, error: None };
                let tr = run_replica(resolved, replica, &grid, &mut rec)?.0;
                if let Some(e) = rec.error {
                    return Err(e.into());
                }
                tr
            }
            None => run_replica(resolved, replica, &grid, &mut NullRecorder)?.0,
        };
        io::write_trajectory_rows(traj_out, &tr)?;
        trajectories.push(tr);
    }
    traj_out.flush()?;
    if let Some(ev) = events_out {
        ev.flush()?;
    }
    Ok(trajectories)
}

/// `simulate` subcommand: trajectory CSV to `config.out` (stdout if unset).
pub fn run_simulate(config: &RunConfig) -> Result<Vec<Trajectory>> {
    let resolved = config.resolve()?;
    let mut events_file = config.events_out.as_deref().map(create).transpose()?;
    let events: Option<&mut dyn Write> = events_file.as_mut().map(|w| w as &mut dyn Write);
    match &config.out {
        Some(path) => simulate_batch(&resolved, &mut create(path)?, events),
        None => simulate_batch(&resolved, &mut std::io::stdout().lock(), events),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTriple {
    pub beta_prime: f64,
    pub a_prime: f64,
    pub b: f64,
}

impl std::str::FromStr for SweepTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Usage(format!("triple '{s}' must be three numbers 'beta_prime,a_prime,b'")))?;
        match parts[..] {
            [beta_prime, a_prime, b] => Ok(SweepTriple { beta_prime, a_prime, b }),
            _ => usage(format!("triple '{s}' must be three numbers 'beta_prime,a_prime,b'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub triple: SweepTriple,
    pub replica: usize,
    pub wave_count: usize,
}

/// Trajectory file name for one triple inside the sweep directory.
pub fn sweep_file_name(t: &SweepTriple) -> String {
    format!("traj_bp{}_ap{}_b{}.csv", t.beta_prime, t.a_prime, t.b)
}

/// `sweep` subcommand: one batch per triple (absolute `beta`/`a` in the
/// base config are ignored). Trajectory files go to `traj_dir` when given;
/// the wave summary is written to `summary_out`.
pub fn run_sweep(base: &RunConfig, triples: &[SweepTriple], traj_dir: Option<&Path>, summary_out: &mut dyn Write) -> Result<Vec<SweepRow>> {
    if triples.is_empty() {
        return usage("sweep needs at least one (beta_prime, a_prime, b) triple");
    }
    if let Some(dir) = traj_dir {
        std::fs::create_dir_all(dir)?;
    }
    let base_resolved = RunConfig { beta: None, a: None, ..base.clone() }.resolve()?;
    io::write_comments(summary_out, &base_resolved.header_lines())?;
    writeln!(summary_out, "{}", io::SWEEP_HEADER)?;
    let mut rows = Vec::new();
    for triple in triples {
        let cfg = RunConfig { beta: None, a: None, beta_prime: triple.beta_prime, a_prime: triple.a_prime, b: triple.b, ..base.clone() };
        let resolved = cfg.resolve()?;
        let trajectories = match traj_dir {
            Some(dir) => {
                let path: PathBuf = dir.join(sweep_file_name(triple));
                simulate_batch(&resolved, &mut create(&path)?, None)?
            }
            None => simulate_batch(&resolved, &mut std::io::sink(), None)?,
        };
        for tr in trajectories {
            let wave_count = count_waves(&tr, cfg.wave_window, cfg.wave_prominence);
            writeln!(summary_out, "{},{},{},{},{}", triple.beta_prime, triple.a_prime, triple.b, tr.replica, wave_count)?;
            rows.push(SweepRow { triple: *triple, replica: tr.replica, wave_count });
        }
    }
    summary_out.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct OracleCheckConfig {
    pub n: usize,
    pub params: Params,
    pub replicas: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Deviation threshold in standard errors.
    pub max_z: f64,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        OracleCheckConfig {
            n: 3,
            params: Params { alpha: 1.0, beta: 1.0, a: 1.0, b: 1.0, horizon: 1.0 },
            replicas: 100_000,
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            max_z: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub algorithm: Algorithm,
    pub exact: f64,
    pub estimate: MeanEstimate,
    pub z: f64,
    pub pass: bool,
}

/// Complete graph on `n` nodes with node 0 infected.
pub fn oracle_initial_state(n: usize) -> Result<SimState> {
    let mut states = vec![NodeState::Susceptible; n];
    if n > 0 {
        states[0] = NodeState::Infected;
    }
    let edges = (0..n as u32).flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)));
    SimState::from_parts(states, edges)
}

/// Final prevalence of `replicas` independent runs to `params.horizon`.
pub fn prevalence_samples(algorithm: Algorithm, initial: &SimState, params: &Params, replicas: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(algorithm as u64 + 10);
    let limits = SizeLimits::default();
    let mut out = Vec::with_capacity(replicas);
    for _ in 0..replicas {
        let mut state = initial.clone();
        let mut sim = AnySimulator::new(algorithm, *params, &state, limits)?;
        run(&mut sim, &mut state, &mut rng, &mut NullRecorder, RunOptions::default());
        out.push(state.prevalence());
    }
    Ok(out)
}

/// Compares each simulator's mean prevalence at the horizon with the exact
/// transient solution from the complete graph with one infected node.
pub fn run_oracle_check(cfg: &OracleCheckConfig) -> Result<Vec<OracleRow>> {
    if cfg.replicas < 2 {
        return usage("oracle check needs at least 2 replicas");
    }
    let initial = oracle_initial_state(cfg.n)?;
    let exact = oracle::transient_expectations(&cfg.params, &initial, cfg.params.horizon)?.prevalence;
    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let samples = prevalence_samples(algorithm, &initial, &cfg.params, cfg.replicas, cfg.seed)?;
            let estimate = mean_estimate(&samples);
            let z = estimate.z_score(exact);
            Ok(OracleRow { algorithm, exact, estimate, z, pass: z.abs() <= cfg.max_z })
        })
        .collect()
}

pub fn format_oracle_table(rows: &[OracleRow]) -> String {
    let mut s = format!("{:<8} {:>12} {:>12} {:>10} {:>8}  {}\n", "algo", "exact", "mc_mean", "mc_se", "z", "result");
    for r in rows {
        s.push_str(&format!(
            "{:<8} {:>12.6} {:>12.6} {:>10.6} {:>8.3}  {}\n",
            r.algorithm.as_str(),
            r.exact,
            r.estimate.mean,
            r.estimate.std_error,
            r.z,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RunConfig {
        RunConfig { n: 60, horizon: 3.0, replicas: 2, grid: 20, seed: 9, ..Default::default() }
    }

    #[test]
    fn batch_is_deterministic() {
        let resolved = small_config().resolve().unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        simulate_batch(&resolved, &mut a, None).unwrap();
        simulate_batch(&resolved, &mut b, None).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# icon-core"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 20);
    }

    #[test]
    fn events_replay_to_trajectory() {
        let resolved = small_config().resolve().unwrap();
        let grid = uniform_grid(3.0, 20);
        let mut log: Vec<EventRecord> = Vec::new();
        let (tr, _) = run_replica(&resolved, 1, &grid, &mut log).unwrap();
        let mut rng = resolved.config.replica_rng(1);
        let initial = replica_initial_state(&resolved, &mut rng).unwrap();
        let replayed = crate::observables::record_on_grid(&log, &initial, &grid).unwrap();
        assert_eq!(replayed.prevalence, tr.prevalence);
        assert_eq!(replayed.mean_degree, tr.mean_degree);
    }

    #[test]
    fn sweep_static_network_keeps_degree() {
        let rows = run_sweep(&small_config(), &[SweepTriple { beta_prime: 3.0, a_prime: 0.0, b: 0.0 }], None, &mut Vec::new()).unwrap();
        assert_eq!(rows.len(), 2);
        let resolved = RunConfig { a_prime: 0.0, b: 0.0, ..small_config() }.resolve().unwrap();
        let trs = simulate_batch(&resolved, &mut std::io::sink(), None).unwrap();
        for tr in trs {
            assert!(tr.mean_degree.iter().all(|&d| d == tr.mean_degree[0]));
        }
    }

    #[test]
    fn sweep_requires_triples() {
        assert!(run_sweep(&small_config(), &[], None, &mut Vec::new()).is_err());
        assert!("3,2".parse::<SweepTriple>().is_err());
        assert!("3,x,2".parse::<SweepTriple>().is_err());
        assert_eq!("3, 2, 2".parse::<SweepTriple>().unwrap(), SweepTriple { beta_prime: 3.0, a_prime: 2.0, b: 2.0 });
    }

    #[test]
    fn oracle_check_small_run() {
        let cfg = OracleCheckConfig { replicas: 4000, ..Default::default() };
        let rows = run_oracle_check(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.pass), "{}", format_oracle_table(&rows));
    }
}
