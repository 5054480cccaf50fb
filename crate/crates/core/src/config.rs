//! Run configuration: a flat JSON object whose keys mirror the CLI flags.
//!
//! Precedence is defaults < config file < command-line flags.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, SizeLimits};
use crate::error::{usage, Error, Result};
use crate::generators::{GraphKind, GraphParam, GraphSpec};
use crate::graph::SimState;
use crate::io;
use crate::model::Params;
use crate::observables::{DEFAULT_GRID_POINTS, DEFAULT_WAVE_PROMINENCE, DEFAULT_WAVE_WINDOW};

pub const DEFAULT_HORIZON: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphKind,
    pub n: usize,
    /// Erdős–Rényi edge probability; defaults to `5/(n-1)`.
    pub p: Option<f64>,
    /// Barabási–Albert attachment count.
    pub m: usize,
    /// Geometric graph target mean degree.
    pub target_mean_degree: f64,
    /// Load the initial graph from an edge-list file instead of generating it.
    pub graph_file: Option<PathBuf>,
    /// Node-state file overriding the random initial infection.
    pub states_file: Option<PathBuf>,
    pub alpha: f64,
    /// Absolute infection rate; overrides `beta_prime` when set.
    pub beta: Option<f64>,
    pub beta_prime: f64,
    /// Absolute association rate; overrides `a_prime` when set.
    pub a: Option<f64>,
    pub a_prime: f64,
    pub b: f64,
    pub horizon: f64,
    pub infected_frac: f64,
    pub replicas: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub events_out: Option<PathBuf>,
    pub timeout_secs: Option<f64>,
    pub wave_window: usize,
    pub wave_prominence: f64,
    pub stop_when_absorbing: bool,
    pub naive_max_nodes: usize,
    pub fast_max_nodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let limits = SizeLimits::default();
        RunConfig {
            graph: GraphKind::ErdosRenyi,
            n: 1000,
            p: None,
            m: 5,
            target_mean_degree: 5.0,
            graph_file: None,
            states_file: None,
            alpha: 1.0,
            beta: None,
            beta_prime: 3.0,
            a: None,
            a_prime: 2.0,
            b: 2.0,
            horizon: DEFAULT_HORIZON,
            infected_frac: 0.1,
            replicas: 3,
            seed: 0,
            algorithm: Algorithm::Icon,
            grid: DEFAULT_GRID_POINTS,
            out: None,
            events_out: None,
            timeout_secs: None,
            wave_window: DEFAULT_WAVE_WINDOW,
            wave_prominence: DEFAULT_WAVE_PROMINENCE,
            stop_when_absorbing: false,
            naive_max_nodes: limits.naive_max_nodes,
            fast_max_nodes: limits.fast_max_nodes,
        }
    }
}

/// Config with the graph built and the rates resolved against it.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: RunConfig,
    /// Initial graph; node states are assigned per replica unless a state file is given.
    pub graph: SimState,
    pub measured_mean_degree: f64,
    pub params: Params,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn limits(&self) -> SizeLimits {
        SizeLimits { naive_max_nodes: self.naive_max_nodes, fast_max_nodes: self.fast_max_nodes }
    }

    pub fn graph_spec(&self) -> GraphSpec {
        let param = match self.graph {
            GraphKind::ErdosRenyi => GraphParam::Probability(self.p.unwrap_or(5.0 / (self.n as f64 - 1.0))),
            GraphKind::BarabasiAlbert => GraphParam::Attachment(self.m),
            GraphKind::Geometric => GraphParam::TargetMeanDegree(self.target_mean_degree),
        };
        GraphSpec { n: self.n, param }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return usage("replicas must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.infected_frac) {
            return usage(format!("infected fraction {} not in [0, 1]", self.infected_frac));
        }
        if self.wave_window == 0 {
            return usage("wave window must be at least 1");
        }
        if !(self.wave_prominence > 0.0 && self.wave_prominence < 1.0) {
            return usage(format!("wave prominence {} not in (0, 1)", self.wave_prominence));
        }
        if let Some(t) = self.timeout_secs {
            if t.is_nan() || t <= 0.0 {
                return usage("timeout must be positive");
            }
        }
        if self.graph_file.is_none() {
            self.graph_spec().validate()?;
        }
        Ok(())
    }

    /// RNG for graph construction; disjoint from every replica stream.
    pub fn graph_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(0);
        rng
    }

    /// RNG for replica `r` (initial infection and dynamics), seeded `seed + r`.
    pub fn replica_rng(&self, replica: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(replica as u64));
        rng.set_stream(1);
        rng
    }

    /// Builds (or loads) the initial graph and resolves the rates. Scaled
    /// rates use the measured mean degree of the actual graph.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        self.validate()?;
        let graph = match &self.graph_file {
            Some(path) => {
                let file = std::fs::File::open(path)?;
                io::read_edge_list(std::io::BufReader::new(file))?
            }
            None => self.graph_spec().generate(&mut self.graph_rng())?,
        };
        let measured_mean_degree = graph.mean_degree();
        let n = graph.n();
        let beta = match self.beta {
            Some(beta) => beta,
            None if measured_mean_degree > 0.0 => self.beta_prime / measured_mean_degree,
            None => return usage("graph has no edges; give an absolute --beta instead of --beta-prime"),
        };
        let a = self.a.unwrap_or(self.a_prime / n as f64);
        let params = Params::new(self.alpha, beta, a, self.b, self.horizon)?;
        let mut config = self.clone();
        config.n = n;
        Ok(ResolvedRun { config, graph, measured_mean_degree, params })
    }
}

impl ResolvedRun {
    /// Header comment lines embedding everything needed to reproduce a run.
    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            format!("config: {}", self.config.to_json()),
            format!("seed: {}", self.config.seed),
            format!(
                "resolved: n={} edges={} measured_mean_degree={} alpha={} beta={} a={} b={} horizon={}",
                self.graph.n(),
                self.graph.edge_count(),
                self.measured_mean_degree,
                self.params.alpha,
                self.params.beta,
                self.params.a,
                self.params.b,
                self.params.horizon
            ),
        ]
    }
}
