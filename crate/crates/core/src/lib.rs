//! Stochastic simulation of SIS epidemics on coevolving contact networks.
//!
//! Infected nodes infect susceptible neighbors (rate `beta`) and recover
//! (rate `alpha`); edges between two infected nodes dissolve (rate `b`) and
//! unconnected susceptible pairs form edges (rate `a`). Three simulators
//! produce statistically identical trajectories of this CTMC:
//!
//! * [`icon`]: rejection-based, O(1) work per iteration;
//! * [`fast`]: rejection-free with per-class event lists;
//! * [`naive`]: races a clock for every possible reaction.
//!
//! [`oracle`] solves the CTMC exactly for graphs of up to five nodes.

pub mod algorithm;
pub mod bench;
pub mod config;
pub mod error;
pub mod fast;
pub mod generators;
pub mod graph;
pub mod icon;
pub mod io;
pub mod model;
pub mod naive;
pub mod observables;
pub mod oracle;
pub mod runner;
pub mod stats;

pub use algorithm::{Algorithm, AnySimulator, SizeLimits};
pub use error::{Error, Result};
pub use graph::{Edge, IndexedEdgeList, NodeId, NodeState, SimState};
pub use model::{run, EventKind, EventRecord, Params, Recorder, RunOptions, Simulator, StepOutcome, StepStats};
