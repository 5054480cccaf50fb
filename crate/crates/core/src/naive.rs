//! Reference simulator that races an exponential clock for every possible
//! reaction at every step. O(n^2) per step; used for correctness and timing
//! comparisons only.
//!
//! Redrawing all clocks after each event is valid because the waiting times
//! are memoryless.

use rand::Rng;

use crate::error::{usage, Result};
use crate::graph::{Edge, NodeId, NodeState, SimState};
use crate::model::{sample_exp, EventRecord, Params, Simulator, StepOutcome};

/// Default upper bound on `n` for the naive simulator.
pub const DEFAULT_MAX_NODES: usize = 2000;

#[derive(Debug, Clone)]
pub struct NaiveSimulator {
    params: Params,
}

impl NaiveSimulator {
    pub fn new(params: Params) -> Self {
        NaiveSimulator { params }
    }

    /// Refuses graphs larger than `max_nodes`.
    pub fn checked(params: Params, state: &SimState, max_nodes: usize) -> Result<Self> {
        if state.n() > max_nodes {
            return usage(format!("naive simulator capped at n <= {max_nodes}, got n={}", state.n()));
        }
        Ok(Self::new(params))
    }
}

impl Simulator for NaiveSimulator {
    fn params(&self) -> &Params {
        &self.params
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut SimState, rng: &mut R) -> StepOutcome {
        naive_step(state, &self.params, rng)
    }
}

#[derive(Clone, Copy)]
enum Candidate {
    Recovery(NodeId),
    Transmission { infected: NodeId, infector: NodeId },
    Disconnect(Edge),
    Connect(Edge),
}

pub fn naive_step<R: Rng + ?Sized>(state: &mut SimState, params: &Params, rng: &mut R) -> StepOutcome {
    if state.time() >= params.horizon {
        return StepOutcome::HorizonReached;
    }
    let n = state.n() as NodeId;
    let mut best_dt = f64::INFINITY;
    let mut best: Option<Candidate> = None;
    let mut offer = |dt: f64, c: Candidate| {
        if dt < best_dt {
            best_dt = dt;
            best = Some(c);
        }
    };

    for v in 0..n {
        if state.state(v) == NodeState::Infected && params.alpha > 0.0 {
            offer(sample_exp(rng, params.alpha), Candidate::Recovery(v));
        }
    }
    for u in 0..n {
        let su = state.state(u);
        for w in (u + 1)..n {
            let sw = state.state(w);
            let e = Edge::new_unchecked(u, w);
            let adjacent = state.edges().contains(e);
            match (su, sw, adjacent) {
                (NodeState::Infected, NodeState::Susceptible, true) if params.beta > 0.0 => {
                    offer(sample_exp(rng, params.beta), Candidate::Transmission { infected: w, infector: u })
                }
                (NodeState::Susceptible, NodeState::Infected, true) if params.beta > 0.0 => {
                    offer(sample_exp(rng, params.beta), Candidate::Transmission { infected: u, infector: w })
                }
                (NodeState::Infected, NodeState::Infected, true) if params.b > 0.0 => offer(sample_exp(rng, params.b), Candidate::Disconnect(e)),
                (NodeState::Susceptible, NodeState::Susceptible, false) if params.a > 0.0 => {
                    offer(sample_exp(rng, params.a), Candidate::Connect(e))
                }
                _ => {}
            }
        }
    }

    let Some(candidate) = best else {
        state.set_time(params.horizon);
        return StepOutcome::HorizonReached;
    };
    let t = state.time() + best_dt;
    if t > params.horizon {
        state.set_time(params.horizon);
        return StepOutcome::HorizonReached;
    }
    state.set_time(t);
    let record = match candidate {
        Candidate::Recovery(v) => {
            state.set_node_state_unchecked(v, NodeState::Susceptible);
            EventRecord::recovery(t, v)
        }
        Candidate::Transmission { infected, infector } => {
            state.set_node_state_unchecked(infected, NodeState::Infected);
            EventRecord::transmission(t, infected, infector)
        }
        Candidate::Disconnect(e) => {
            state.delete_edge(e);
            EventRecord::disconnect(t, e.a(), e.b())
        }
        Candidate::Connect(e) => {
            state.insert_edge(e);
            EventRecord::connect(t, e.a(), e.b())
        }
    };
    StepOutcome::Accepted(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use NodeState::*;

    #[test]
    fn single_si_edge_transmits() {
        let params = Params::new(0.0, 2.0, 0.0, 0.0, 1e9).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let trials = 20_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            let mut s = SimState::from_parts(vec![Susceptible, Infected], [(0, 1)]).unwrap();
            match naive_step(&mut s, &params, &mut r) {
                StepOutcome::Accepted(ev) => {
                    assert_eq!(ev.kind, EventKind::Transmission);
                    assert_eq!((ev.node_a, ev.node_b), (0, Some(1)));
                    sum += ev.t;
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        let mean = sum / trials as f64;
        assert!((mean - 0.5).abs() < 4.0 * 0.5 / (trials as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn two_isolated_infected_recover_at_twice_alpha() {
        let params = Params::new(1.5, 1.0, 0.0, 1.0, 1e9).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let trials = 20_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            let mut s = SimState::from_parts(vec![Infected, Infected], []).unwrap();
            let StepOutcome::Accepted(ev) = naive_step(&mut s, &params, &mut r) else { panic!() };
            assert_eq!(ev.kind, EventKind::Recovery);
            sum += ev.t;
        }
        let expect = 1.0 / 3.0;
        let mean = sum / trials as f64;
        assert!((mean - expect).abs() < 4.0 * expect / (trials as f64).sqrt());
    }

    #[test]
    fn path_transmission_probability() {
        // S-I-S path: transmission wins with probability 2 beta / (2 beta + alpha)
        let (alpha, beta) = (1.0, 0.75);
        let params = Params::new(alpha, beta, 0.0, 0.0, 1e9).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let trials = 40_000;
        let mut tx = 0;
        for _ in 0..trials {
            let mut s = SimState::from_parts(vec![Susceptible, Infected, Susceptible], [(0, 1), (1, 2)]).unwrap();
            let StepOutcome::Accepted(ev) = naive_step(&mut s, &params, &mut r) else { panic!() };
            if ev.kind == EventKind::Transmission {
                tx += 1;
            }
        }
        let p = 2.0 * beta / (2.0 * beta + alpha);
        let f = tx as f64 / trials as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt(), "{f} vs {p}");
    }

    #[test]
    fn nothing_possible_reaches_horizon() {
        let params = Params::new(1.0, 1.0, 0.0, 0.0, 3.0).unwrap();
        let mut s = SimState::new(4);
        assert_eq!(naive_step(&mut s, &params, &mut ChaCha8Rng::seed_from_u64(0)), StepOutcome::HorizonReached);
        assert_eq!(s.time(), 3.0);
    }

    #[test]
    fn size_cap() {
        let params = Params::new(1.0, 1.0, 0.0, 0.0, 3.0).unwrap();
        assert!(NaiveSimulator::checked(params, &SimState::new(30), 20).is_err());
        assert!(NaiveSimulator::checked(params, &SimState::new(20), 20).is_ok());
    }
}
