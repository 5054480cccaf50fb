//! Helpers shared by the integration and acceptance tests.

#![allow(dead_code)]

use icon_core::{NodeState, SimState};

/// Dense generator of the full chain on `n` nodes, built directly from the
/// reaction rules. States are `node_bits | edge_bits << n` with pairs in
/// lexicographic order.
pub struct DenseChain {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub q: Vec<Vec<f64>>,
}

impl DenseChain {
    pub fn new(n: usize, alpha: f64, beta: f64, a: f64, b: f64) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let size = 1usize << (n + pairs.len());
        let mut q = vec![vec![0.0; size]; size];
        for s in 0..size {
            let infected = |v: usize| s >> v & 1 == 1;
            let edge = |k: usize| s >> (n + k) & 1 == 1;
            for v in 0..n {
                if infected(v) {
                    q[s][s ^ (1 << v)] += alpha;
                }
            }
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let bit = 1 << (n + k);
                match (edge(k), infected(i), infected(j)) {
                    (true, true, true) => q[s][s ^ bit] += b,
                    (true, true, false) => q[s][s | 1 << j] += beta,
                    (true, false, true) => q[s][s | 1 << i] += beta,
                    (false, false, false) => q[s][s | bit] += a,
                    _ => {}
                }
            }
            let out: f64 = q[s].iter().sum();
            q[s][s] -= out;
        }
        DenseChain { n, pairs, q }
    }

    pub fn encode(&self, state: &SimState) -> usize {
        let mut code = 0;
        for v in 0..self.n {
            if state.state(v as u32) == NodeState::Infected {
                code |= 1 << v;
            }
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            if state.has_edge(i as u32, j as u32) {
                code |= 1 << (self.n + k);
            }
        }
        code
    }

    pub fn infected(&self, code: usize) -> u32 {
        (code & ((1 << self.n) - 1)).count_ones()
    }

    /// Distribution at time `t` from the point mass on `initial`.
    pub fn distribution(&self, initial: usize, t: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.q.len()];
        v[initial] = 1.0;
        expm_action(&self.q, v, t)
    }

    pub fn edges(&self, code: usize) -> u32 {
        (code >> self.n).count_ones()
    }

    pub fn mean_edges(&self, initial: usize, t: f64) -> f64 {
        self.distribution(initial, t).iter().enumerate().map(|(c, p)| p * self.edges(c) as f64).sum()
    }

    pub fn mean_prevalence(&self, initial: usize, t: f64) -> f64 {
        self.distribution(initial, t).iter().enumerate().map(|(c, p)| p * self.infected(c) as f64).sum::<f64>() / self.n as f64
    }
}

fn matmul(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i][k];
            if xik != 0.0 {
                for j in 0..n {
                    out[i][j] += xik * y[k][j];
                }
            }
        }
    }
    out
}

/// Row vector `v exp(q t)`: Taylor series of order 30 on substeps of norm at most 0.5.
pub fn expm_action(q: &[Vec<f64>], mut v: Vec<f64>, t: f64) -> Vec<f64> {
    let norm = q.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max) * t;
    let substeps = (norm / 0.5).ceil().max(1.0) as usize;
    let h = t / substeps as f64;
    for _ in 0..substeps {
        let mut term = v.clone();
        for k in 1..=30 {
            let mut next = vec![0.0; term.len()];
            for (i, &ti) in term.iter().enumerate() {
                if ti != 0.0 {
                    for (j, &qij) in q[i].iter().enumerate() {
                        next[j] += ti * qij;
                    }
                }
            }
            let scale = h / k as f64;
            for (x, n) in v.iter_mut().zip(next.iter_mut()) {
                *n *= scale;
                *x += *n;
            }
            term = next;
        }
    }
    v
}

/// `exp(q t)` by scaling and squaring with a 30-term Taylor series.
pub fn expm(q: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    let n = q.len();
    let norm = q.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max) * t;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = t / 2f64.powi(squarings as i32);
    let a: Vec<Vec<f64>> = q.iter().map(|row| row.iter().map(|x| x * scale).collect()).collect();
    let mut result: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = result.clone();
    for k in 1..=30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for (r, tr) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(tr) {
                *x += y;
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// Complete graph on `n` nodes with node 0 infected.
pub fn complete_with_one_infected(n: usize) -> SimState {
    let mut s = SimState::new(n);
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            s.add_edge(i, j).unwrap();
        }
    }
    s.set_node_state(0, NodeState::Infected).unwrap();
    s
}

/// Hand-built state on 10 nodes: infected {0,1,2,3}; II edges (0,1),
/// (2,3); SI edges (0,4), (1,5), (2,6), (3,7), (0,8); SS edges (4,5),
/// (6,7), (8,9). Six susceptible nodes give 15 pairs, 12 of them unlinked.
pub fn frozen_state() -> SimState {
    let mut s = SimState::new(10);
    for v in 0..4 {
        s.set_node_state(v, NodeState::Infected).unwrap();
    }
    for (u, v) in [(0, 1), (2, 3), (0, 4), (1, 5), (2, 6), (3, 7), (0, 8), (4, 5), (6, 7), (8, 9)] {
        s.add_edge(u, v).unwrap();
    }
    s
}

pub const FROZEN_INFECTED: f64 = 4.0;
pub const FROZEN_SI: f64 = 5.0;
pub const FROZEN_II: f64 = 2.0;
pub const FROZEN_SS_PAIRS: f64 = 12.0;
