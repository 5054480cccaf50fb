//! Rejection-based simulation of the coevolving SIS process.
//!
//! Each iteration over-approximates the total rate of three event classes
//! using only `n` and `|E|`:
//!
//! * node events (recovery): every node assumed infected, `alpha * n`;
//! * edge events (transmission, dissociation): every edge assumed to carry
//!   the faster of the two reactions, `max(b, beta) * |E|`;
//! * pair events (association): every pair assumed susceptible and
//!   unconnected, `a * n(n-1)/2`.
//!
//! A candidate is drawn from the chosen class in O(1) and accepted with the
//! ratio of its true rate to the bound. Rejected candidates still advance
//! the clock, which is exactly what thinning requires.

use rand::Rng;

use crate::graph::{Edge, NodeId, NodeState, SimState};
use crate::model::{run, sample_exp, EventRecord, NullRecorder, Params, Recorder, RunOptions, Simulator, StepOutcome, StepStats};

/// Upper bounds on the total rate of each event class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub node: f64,
    pub edge: f64,
    pub pair: f64,
}

impl RateBounds {
    pub fn total(&self) -> f64 {
        self.node + self.edge + self.pair
    }
}

pub fn compute_rate_bounds(state: &SimState, params: &Params) -> RateBounds {
    let n = state.n() as f64;
    RateBounds {
        node: params.alpha * n,
        edge: params.b.max(params.beta) * state.edge_count() as f64,
        pair: params.a * state.pair_count() as f64,
    }
}

/// How the holding time and event class are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockMode {
    /// One exponential at the summed bound, then a categorical class draw.
    #[default]
    Summed,
    /// Three exponentials, one per class; the minimum wins.
    Race,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Node,
    Edge,
    Pair,
}

#[derive(Debug, Clone)]
pub struct IconSimulator {
    params: Params,
    mode: ClockMode,
    accept_ii: f64,
    accept_si: f64,
}

impl IconSimulator {
    pub fn new(params: Params) -> Self {
        Self::with_mode(params, ClockMode::Summed)
    }

    pub fn with_mode(params: Params, mode: ClockMode) -> Self {
        let edge_bound = params.b.max(params.beta);
        let (accept_ii, accept_si) = if edge_bound > 0.0 { (params.b / edge_bound, params.beta / edge_bound) } else { (0.0, 0.0) };
        IconSimulator { params, mode, accept_ii, accept_si }
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    fn draw_class<R: Rng + ?Sized>(&self, bounds: &RateBounds, rng: &mut R) -> (f64, Class) {
        match self.mode {
            ClockMode::Summed => {
                let total = bounds.total();
                let dt = sample_exp(rng, total);
                let u = rng.random::<f64>() * total;
                let class = if u < bounds.node {
                    Class::Node
                } else if u < bounds.node + bounds.edge || bounds.pair <= 0.0 {
                    if bounds.edge > 0.0 {
                        Class::Edge
                    } else {
                        Class::Node
                    }
                } else {
                    Class::Pair
                };
                (dt, class)
            }
            ClockMode::Race => {
                let tn = sample_exp(rng, bounds.node);
                let te = sample_exp(rng, bounds.edge);
                let tp = sample_exp(rng, bounds.pair);
                if tn <= te && tn <= tp {
                    (tn, Class::Node)
                } else if te <= tp {
                    (te, Class::Edge)
                } else {
                    (tp, Class::Pair)
                }
            }
        }
    }
}

impl Simulator for IconSimulator {
    fn params(&self) -> &Params {
        &self.params
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut SimState, rng: &mut R) -> StepOutcome {
        icon_step_with(self, state, rng)
    }
}

/// One iteration with the default clock mode.
pub fn icon_step<R: Rng + ?Sized>(state: &mut SimState, params: &Params, rng: &mut R) -> StepOutcome {
    icon_step_with(&IconSimulator::new(*params), state, rng)
}

#[inline]
fn icon_step_with<R: Rng + ?Sized>(sim: &IconSimulator, state: &mut SimState, rng: &mut R) -> StepOutcome {
    let horizon = sim.params.horizon;
    if state.time() >= horizon {
        return StepOutcome::HorizonReached;
    }
    let bounds = compute_rate_bounds(state, &sim.params);
    if bounds.total() <= 0.0 {
        state.set_time(horizon);
        return StepOutcome::HorizonReached;
    }
    let (dt, class) = sim.draw_class(&bounds, rng);
    let t = state.time() + dt;
    if t > horizon {
        state.set_time(horizon);
        return StepOutcome::HorizonReached;
    }
    state.set_time(t);

    match class {
        Class::Node => {
            let v = rng.random_range(0..state.n()) as NodeId;
            if state.state(v) == NodeState::Infected {
                state.set_node_state_unchecked(v, NodeState::Susceptible);
                return StepOutcome::Accepted(EventRecord::recovery(t, v));
            }
        }
        Class::Edge => {
            let e = state.sample_uniform_edge(rng).expect("edge class drawn with no edges");
            let u: f64 = rng.random();
            match (state.state(e.a()), state.state(e.b())) {
                (NodeState::Infected, NodeState::Infected) => {
                    if u < sim.accept_ii {
                        state.delete_edge(e);
                        return StepOutcome::Accepted(EventRecord::disconnect(t, e.a(), e.b()));
                    }
                }
                (NodeState::Infected, NodeState::Susceptible) => {
                    if u < sim.accept_si {
                        state.set_node_state_unchecked(e.b(), NodeState::Infected);
                        return StepOutcome::Accepted(EventRecord::transmission(t, e.b(), e.a()));
                    }
                }
                (NodeState::Susceptible, NodeState::Infected) => {
                    if u < sim.accept_si {
                        state.set_node_state_unchecked(e.a(), NodeState::Infected);
                        return StepOutcome::Accepted(EventRecord::transmission(t, e.a(), e.b()));
                    }
                }
                (NodeState::Susceptible, NodeState::Susceptible) => {}
            }
        }
        Class::Pair => {
            let n = state.n();
            let v1 = rng.random_range(0..n) as NodeId;
            let mut v2 = rng.random_range(0..n - 1) as NodeId;
            if v2 >= v1 {
                v2 += 1;
            }
            let e = Edge::new_unchecked(v1, v2);
            if state.state(e.a()) == NodeState::Susceptible && state.state(e.b()) == NodeState::Susceptible && state.insert_edge(e) {
                return StepOutcome::Accepted(EventRecord::connect(t, e.a(), e.b()));
            }
        }
    }
    StepOutcome::Rejected
}

/// Runs to the horizon and returns the accepted events.
pub fn simulate<R: Rng + ?Sized>(state: &mut SimState, params: &Params, rng: &mut R) -> (Vec<EventRecord>, StepStats) {
    let mut log = Vec::new();
    let summary = run(&mut IconSimulator::new(*params), state, rng, &mut log, RunOptions::default());
    (log, summary.stats)
}

/// Runs to the horizon, streaming events to `recorder`.
pub fn simulate_with<R: Rng + ?Sized, Rec: Recorder + ?Sized>(state: &mut SimState, params: &Params, rng: &mut R, recorder: &mut Rec) -> StepStats {
    run(&mut IconSimulator::new(*params), state, rng, recorder, RunOptions::default()).stats
}

/// Runs to the horizon discarding events.
pub fn simulate_quiet<R: Rng + ?Sized>(state: &mut SimState, params: &Params, rng: &mut R) -> StepStats {
    simulate_with(state, params, rng, &mut NullRecorder)
}
