use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::fast::{self, FastSimulator};
use crate::graph::SimState;
use crate::icon::IconSimulator;
use crate::model::{Params, Simulator, StepOutcome};
use crate::naive::{self, NaiveSimulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Icon,
    Fast,
    Naive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Icon, Algorithm::Fast, Algorithm::Naive];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Icon => "icon",
            Algorithm::Fast => "fast",
            Algorithm::Naive => "naive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "icon" => Ok(Algorithm::Icon),
            "fast" => Ok(Algorithm::Fast),
            "naive" => Ok(Algorithm::Naive),
            other => usage(format!("unknown algorithm '{other}' (expected icon, fast or naive)")),
        }
    }
}

/// Size guards for the quadratic baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeLimits {
    pub naive_max_nodes: usize,
    pub fast_max_nodes: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        SizeLimits { naive_max_nodes: naive::DEFAULT_MAX_NODES, fast_max_nodes: fast::DEFAULT_MAX_NODES }
    }
}

impl SizeLimits {
    pub fn allows(&self, algorithm: Algorithm, n: usize) -> bool {
        match algorithm {
            Algorithm::Icon => true,
            Algorithm::Fast => n <= self.fast_max_nodes,
            Algorithm::Naive => n <= self.naive_max_nodes,
        }
    }
}

/// Any of the three simulators behind one type.
#[derive(Debug, Clone)]
pub enum AnySimulator {
    Icon(IconSimulator),
    Fast(Box<FastSimulator>),
    Naive(NaiveSimulator),
}

impl AnySimulator {
    /// Prepares `algorithm` for a run starting from `state`.
    pub fn new(algorithm: Algorithm, params: Params, state: &SimState, limits: SizeLimits) -> Result<Self> {
        params.validate()?;
        Ok(match algorithm {
            Algorithm::Icon => AnySimulator::Icon(IconSimulator::new(params)),
            Algorithm::Fast => AnySimulator::Fast(Box::new(FastSimulator::checked(params, state, limits.fast_max_nodes)?)),
            Algorithm::Naive => AnySimulator::Naive(NaiveSimulator::checked(params, state, limits.naive_max_nodes)?),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            AnySimulator::Icon(_) => Algorithm::Icon,
            AnySimulator::Fast(_) => Algorithm::Fast,
            AnySimulator::Naive(_) => Algorithm::Naive,
        }
    }
}

impl Simulator for AnySimulator {
    fn params(&self) -> &Params {
        match self {
            AnySimulator::Icon(s) => s.params(),
            AnySimulator::Fast(s) => s.params(),
            AnySimulator::Naive(s) => s.params(),
        }
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&mut self, state: &mut SimState, rng: &mut R) -> StepOutcome {
        match self {
            AnySimulator::Icon(s) => s.step(state, rng),
            AnySimulator::Fast(s) => s.step(state, rng),
            AnySimulator::Naive(s) => s.step(state, rng),
        }
    }
}
