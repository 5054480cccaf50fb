//! Exact transient solution of the full CTMC for tiny graphs (n <= 5).
//!
//! A full state packs `n` node bits (1 = infected) followed by one bit per
//! node pair in lexicographic order (1 = edge present). The transient
//! distribution is computed by uniformization with a certified truncation
//! of the Poisson tail.

use crate::error::{usage, Result};
use crate::graph::{NodeId, NodeState, SimState};
use crate::model::{EventKind, Params};

pub const MAX_NODES: usize = 5;

/// Neglected Poisson tail mass in [`transient`].
pub const TRUNCATION_TAIL: f64 = 1e-12;

/// Bit layout of full states for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    n: usize,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_NODES).contains(&n) {
            return usage(format!("exact oracle supports 2 <= n <= {MAX_NODES}, got n={n}"));
        }
        Ok(StateSpace { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn size(&self) -> usize {
        1 << (self.n + self.pairs())
    }

    /// Bit position of the edge `(i, j)`, `i < j`.
    pub fn edge_bit(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        // pairs (k, *) for k < i come first
        let before: usize = (0..i).map(|k| self.n - 1 - k).sum();
        self.n + before + (j - i - 1)
    }

    pub fn encode(&self, state: &SimState) -> Result<u32> {
        if state.n() != self.n {
            return usage(format!("state has n={}, state space has n={}", state.n(), self.n));
        }
        let mut code = 0u32;
        for v in 0..self.n {
            if state.state(v as NodeId).is_infected() {
                code |= 1 << v;
            }
        }
        for e in state.edges().iter() {
            code |= 1 << self.edge_bit(e.a() as usize, e.b() as usize);
        }
        Ok(code)
    }

    pub fn decode(&self, code: u32) -> SimState {
        let states = (0..self.n).map(|v| if code >> v & 1 == 1 { NodeState::Infected } else { NodeState::Susceptible }).collect();
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if code >> self.edge_bit(i, j) & 1 == 1 {
                    edges.push((i as NodeId, j as NodeId));
                }
            }
        }
        SimState::from_parts(states, edges).expect("decoded state is well formed")
    }

    pub fn infected(&self, code: u32) -> u32 {
        (code & ((1 << self.n) - 1)).count_ones()
    }

    pub fn edges(&self, code: u32) -> u32 {
        (code >> self.n).count_ones()
    }
}

/// One reaction out of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub target: u32,
    pub rate: f64,
    pub kind: EventKind,
}

/// Sparse generator, one entry per reaction (parallel reactions leading to
/// the same target are kept separate).
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    space: StateSpace,
    transitions: Vec<Vec<Transition>>,
    exit_rates: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn transitions(&self, code: u32) -> &[Transition] {
        &self.transitions[code as usize]
    }

    pub fn exit_rate(&self, code: u32) -> f64 {
        self.exit_rates[code as usize]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit_rates.iter().copied().fold(0.0, f64::max)
    }

    /// Dense `Q` with the diagonal filled in. Only sensible for small spaces.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let size = self.space.size();
        let mut q = vec![vec![0.0; size]; size];
        for (x, row) in self.transitions.iter().enumerate() {
            for tr in row {
                q[x][tr.target as usize] += tr.rate;
            }
            q[x][x] -= self.exit_rates[x];
        }
        q
    }
}

pub fn build_generator(n: usize, params: &Params) -> Result<GeneratorMatrix> {
    let space = StateSpace::new(n)?;
    let size = space.size();
    let mut transitions = Vec::with_capacity(size);
    let mut exit_rates = Vec::with_capacity(size);
    for code in 0..size as u32 {
        let mut row = Vec::new();
        let mut push = |target: u32, rate: f64, kind: EventKind| {
            if rate > 0.0 {
                row.push(Transition { target, rate, kind });
            }
        };
        let infected = |v: usize| code >> v & 1 == 1;
        for v in 0..n {
            if infected(v) {
                push(code & !(1 << v), params.alpha, EventKind::Recovery);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let bit = space.edge_bit(i, j);
                let adjacent = code >> bit & 1 == 1;
                match (infected(i), infected(j), adjacent) {
                    (true, false, true) => push(code | 1 << j, params.beta, EventKind::Transmission),
                    (false, true, true) => push(code | 1 << i, params.beta, EventKind::Transmission),
                    (true, true, true) => push(code & !(1 << bit), params.b, EventKind::Disconnect),
                    (false, false, false) => push(code | 1 << bit, params.a, EventKind::Connect),
                    _ => {}
                }
            }
        }
        exit_rates.push(row.iter().map(|t| t.rate).sum());
        transitions.push(row);
    }
    Ok(GeneratorMatrix { space, transitions, exit_rates })
}

/// Distribution over full states at time `t` plus marginal expectations.
#[derive(Debug, Clone)]
pub struct Transient {
    /// Expected fraction of infected nodes.
    pub prevalence: f64,
    pub edge_count: f64,
    pub distribution: Vec<f64>,
    /// Number of kernel powers summed.
    pub terms: usize,
}

impl Transient {
    /// Variance of the fraction of infected nodes.
    pub fn prevalence_variance(&self, space: &StateSpace) -> f64 {
        let n = space.n() as f64;
        let second: f64 = self.distribution.iter().enumerate().map(|(x, p)| p * (space.infected(x as u32) as f64 / n).powi(2)).sum();
        second - self.prevalence * self.prevalence
    }
}

pub fn point_mass(space: &StateSpace, code: u32) -> Vec<f64> {
    let mut p = vec![0.0; space.size()];
    p[code as usize] = 1.0;
    p
}

fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// `p(t) = p(0) exp(Qt)` by uniformization at rate `max_x |Q_xx|`.
pub fn transient(q: &GeneratorMatrix, initial: &[f64], t: f64) -> Result<Transient> {
    let space = q.space;
    if initial.len() != space.size() {
        return usage(format!("initial distribution has {} entries, expected {}", initial.len(), space.size()));
    }
    let mass: f64 = initial.iter().sum();
    if (mass - 1.0).abs() > 1e-9 || initial.iter().any(|&p| p < 0.0) {
        return usage(format!("initial distribution must be non-negative and sum to 1 (sum {mass})"));
    }
    if !t.is_finite() || t < 0.0 {
        return usage(format!("time {t} must be finite and non-negative"));
    }
    let lambda = q.max_exit_rate();
    let lt = lambda * t;
    if lt == 0.0 {
        return Ok(summarize(&space, initial.to_vec(), 0));
    }

    let mut current = initial.to_vec();
    let mut next = vec![0.0; current.len()];
    let mut result = vec![0.0; current.len()];
    let mut accumulated = 0.0;
    let mut k = 0usize;
    // the mode sits near lt; stop once the remaining tail is negligible
    let max_terms = (lt + 40.0 * lt.sqrt() + 100.0) as usize;
    loop {
        let weight = (-lt + k as f64 * lt.ln() - ln_factorial(k)).exp();
        if weight > 0.0 {
            for (r, c) in result.iter_mut().zip(&current) {
                *r += weight * c;
            }
        }
        accumulated += weight;
        if (1.0 - accumulated < TRUNCATION_TAIL && k as f64 >= lt) || k >= max_terms {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for (x, &px) in current.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            next[x] += px * (1.0 - q.exit_rates[x] / lambda);
            for tr in &q.transitions[x] {
                next[tr.target as usize] += px * tr.rate / lambda;
            }
        }
        std::mem::swap(&mut current, &mut next);
        k += 1;
    }
    Ok(summarize(&space, result, k + 1))
}

fn summarize(space: &StateSpace, distribution: Vec<f64>, terms: usize) -> Transient {
    let n = space.n() as f64;
    let mut prevalence = 0.0;
    let mut edge_count = 0.0;
    for (x, &p) in distribution.iter().enumerate() {
        prevalence += p * space.infected(x as u32) as f64 / n;
        edge_count += p * space.edges(x as u32) as f64;
    }
    Transient { prevalence, edge_count, distribution, terms }
}

/// Exact expectations at `t` starting deterministically from `initial`.
pub fn transient_expectations(params: &Params, initial: &SimState, t: f64) -> Result<Transient> {
    let q = build_generator(initial.n(), params)?;
    let space = q.space();
    let p0 = point_mass(&space, space.encode(initial)?);
    transient(&q, &p0, t)
}
