//! Model parameters, event records and the driver shared by all simulators.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::graph::{NodeId, NodeState, SimState};

/// Rates of the four reaction rules plus the time horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Recovery rate per infected node.
    pub alpha: f64,
    /// Infection rate per SI edge.
    pub beta: f64,
    /// Association rate per non-adjacent SS pair.
    pub a: f64,
    /// Dissociation rate per II edge.
    pub b: f64,
    pub horizon: f64,
}

impl Params {
    pub fn new(alpha: f64, beta: f64, a: f64, b: f64, horizon: f64) -> Result<Self> {
        let p = Params { alpha, beta, a, b, horizon };
        p.validate()?;
        Ok(p)
    }

    /// Rates must be finite and non-negative; the horizon positive.
    ///
    /// Zero recovery or infection rates are accepted so that the pure decay
    /// regimes (only recoveries, only dissociations) can be simulated.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("a", self.a), ("b", self.b)] {
            if !(v >= 0.0 && v.is_finite()) {
                return usage(format!("rate {name}={v} must be finite and non-negative"));
            }
        }
        if self.horizon.is_nan() || self.horizon <= 0.0 {
            return usage(format!("horizon {} must be positive", self.horizon));
        }
        Ok(())
    }

    pub fn with_horizon(self, horizon: f64) -> Self {
        Params { horizon, ..self }
    }

    /// Rates scaled to a graph: `beta = beta_prime / mean_degree`, `a = a_prime / n`.
    pub fn scaled(alpha: f64, beta_prime: f64, a_prime: f64, b: f64, horizon: f64, mean_degree: f64, n: usize) -> Result<Self> {
        if mean_degree.is_nan() || mean_degree <= 0.0 {
            return usage(format!("cannot scale beta by mean degree {mean_degree}"));
        }
        Params::new(alpha, beta_prime / mean_degree, a_prime / n as f64, b, horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    Recovery,
    Transmission,
    Disconnect,
    Connect,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [EventKind::Recovery, EventKind::Transmission, EventKind::Disconnect, EventKind::Connect];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Recovery => "recovery",
            EventKind::Transmission => "transmission",
            EventKind::Disconnect => "disconnect",
            EventKind::Connect => "connect",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown event kind '{s}'")))
    }
}

/// An accepted state change.
///
/// `node_a` is the recovering node, the newly infected node (with the
/// infector in `node_b`), or the smaller endpoint of a created/removed edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub t: f64,
    pub kind: EventKind,
    pub node_a: NodeId,
    pub node_b: Option<NodeId>,
}

impl EventRecord {
    pub fn recovery(t: f64, v: NodeId) -> Self {
        EventRecord { t, kind: EventKind::Recovery, node_a: v, node_b: None }
    }

    pub fn transmission(t: f64, infected: NodeId, infector: NodeId) -> Self {
        EventRecord { t, kind: EventKind::Transmission, node_a: infected, node_b: Some(infector) }
    }

    pub fn disconnect(t: f64, u: NodeId, v: NodeId) -> Self {
        EventRecord { t, kind: EventKind::Disconnect, node_a: u.min(v), node_b: Some(u.max(v)) }
    }

    pub fn connect(t: f64, u: NodeId, v: NodeId) -> Self {
        EventRecord { t, kind: EventKind::Connect, node_a: u.min(v), node_b: Some(u.max(v)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Accepted(EventRecord),
    Rejected,
    /// The next event would fall beyond the horizon; the clock now sits at it.
    HorizonReached,
}

/// Receives accepted events in time order. Sees events only, never the state.
pub trait Recorder {
    fn record(&mut self, event: &EventRecord);
}

impl Recorder for Vec<EventRecord> {
    fn record(&mut self, event: &EventRecord) {
        self.push(*event);
    }
}

/// Discards events.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullRecorder;

impl Recorder for NullRecorder {
    fn record(&mut self, _event: &EventRecord) {}
}

impl<F: FnMut(&EventRecord)> Recorder for F {
    fn record(&mut self, event: &EventRecord) {
        self(event)
    }
}

/// One simulation algorithm bound to its parameters.
pub trait Simulator {
    fn params(&self) -> &Params;

    /// Advances `state` by one iteration of the algorithm.
    fn step<R: Rng + ?Sized>(&mut self, state: &mut SimState, rng: &mut R) -> StepOutcome;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub wall_time: Duration,
}

impl StepStats {
    pub fn iterations(&self) -> u64 {
        self.accepted + self.rejected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Horizon,
    /// No infected nodes and a complete graph; nothing can ever happen again.
    Absorbed,
    Deadline,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Stop early in the absorbing state (clock is moved to the horizon).
    pub stop_when_absorbing: bool,
    /// Abort once this instant passes; checked at most every 256 iterations.
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunSummary {
    pub stats: StepStats,
    pub termination: Termination,
}

/// Steps `sim` until the horizon, streaming accepted events to `recorder`.
///
/// `accepted + rejected` counts loop iterations that drew an event before
/// the horizon; the final draw that overshoots the horizon is not counted.
pub fn run<S, R, Rec>(sim: &mut S, state: &mut SimState, rng: &mut R, recorder: &mut Rec, opts: RunOptions) -> RunSummary
where
    S: Simulator + ?Sized,
    R: Rng + ?Sized,
    Rec: Recorder + ?Sized,
{
    const MAX_CHECK_INTERVAL: u64 = 256;
    let start = Instant::now();
    let mut stats = StepStats::default();
    let (mut next_check, mut interval) = (1u64, 1u64);
    let horizon = sim.params().horizon;
    let termination = loop {
        if opts.stop_when_absorbing && is_absorbing(state) {
            state.set_time(horizon.max(state.time()));
            break Termination::Absorbed;
        }
        match sim.step(state, rng) {
            StepOutcome::Accepted(ev) => {
                stats.accepted += 1;
                recorder.record(&ev);
            }
            StepOutcome::Rejected => stats.rejected += 1,
            StepOutcome::HorizonReached => break Termination::Horizon,
        }
        if let Some(deadline) = opts.deadline {
            if stats.iterations() >= next_check {
                if Instant::now() >= deadline {
                    break Termination::Deadline;
                }
                next_check = stats.iterations() + interval;
                interval = (interval * 2).min(MAX_CHECK_INTERVAL);
            }
        }
    };
    stats.wall_time = start.elapsed();
    RunSummary { stats, termination }
}

pub fn is_absorbing(state: &SimState) -> bool {
    state.infected_count() == 0 && state.edge_count() as u64 == state.pair_count()
}

/// Exact total rate of each reaction class in a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassRates {
    pub recovery: f64,
    pub transmission: f64,
    pub disconnect: f64,
    pub connect: f64,
}

/// Counts of the reactant configurations in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StateCounts {
    pub infected: u64,
    pub si_edges: u64,
    pub ii_edges: u64,
    pub ss_edges: u64,
    pub ss_nonadjacent_pairs: u64,
}

impl StateCounts {
    /// O(n + |E|) recount from scratch.
    pub fn of(state: &SimState) -> Self {
        let mut c = StateCounts { infected: state.infected_count() as u64, ..Default::default() };
        for e in state.edges().iter() {
            match (state.state(e.a()), state.state(e.b())) {
                (NodeState::Infected, NodeState::Infected) => c.ii_edges += 1,
                (NodeState::Susceptible, NodeState::Susceptible) => c.ss_edges += 1,
                _ => c.si_edges += 1,
            }
        }
        let s = state.n() as u64 - c.infected;
        c.ss_nonadjacent_pairs = s * s.saturating_sub(1) / 2 - c.ss_edges;
        c
    }

    pub fn rates(&self, params: &Params) -> ClassRates {
        ClassRates {
            recovery: params.alpha * self.infected as f64,
            transmission: params.beta * self.si_edges as f64,
            disconnect: params.b * self.ii_edges as f64,
            connect: params.a * self.ss_nonadjacent_pairs as f64,
        }
    }
}

impl ClassRates {
    pub fn total(&self) -> f64 {
        self.recovery + self.transmission + self.disconnect + self.connect
    }

    pub fn get(&self, kind: EventKind) -> f64 {
        match kind {
            EventKind::Recovery => self.recovery,
            EventKind::Transmission => self.transmission,
            EventKind::Disconnect => self.disconnect,
            EventKind::Connect => self.connect,
        }
    }
}

/// Exponential variate by inversion, `-ln(U)/rate` with `U` in (0, 1].
/// A zero rate yields `+inf`.
#[inline]
pub fn sample_exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}

/// Applies an accepted event to the state without any bookkeeping beyond
/// the state itself.
pub fn apply_event(state: &mut SimState, event: &EventRecord) -> Result<()> {
    let other = || event.node_b.ok_or_else(|| Error::Integrity(format!("{} event without second node", event.kind)));
    match event.kind {
        EventKind::Recovery => {
            if !state.set_node_state(event.node_a, NodeState::Susceptible)? {
                return Err(Error::Integrity(format!("recovery of susceptible node {}", event.node_a)));
            }
        }
        EventKind::Transmission => {
            if !state.set_node_state(event.node_a, NodeState::Infected)? {
                return Err(Error::Integrity(format!("transmission to infected node {}", event.node_a)));
            }
        }
        EventKind::Disconnect => {
            if !state.remove_edge(event.node_a, other()?) {
                return Err(Error::Integrity(format!("disconnect of absent edge ({}, {:?})", event.node_a, event.node_b)));
            }
        }
        EventKind::Connect => {
            if !state.add_edge(event.node_a, other()?)? {
                return Err(Error::Integrity(format!("connect of present edge ({}, {:?})", event.node_a, event.node_b)));
            }
        }
    }
    Ok(())
}
