//! Rejection-free simulator that maintains one list per reaction class:
//! infected nodes, SI edges, II edges and non-adjacent susceptible pairs.
//!
//! Class rates come straight from the list lengths, so every step is
//! accepted. The price is the update after an epidemic event: flipping a
//! node touches all its neighbors and every susceptible non-neighbor, i.e.
//! O(deg + |S|) per recovery or transmission.

use rand::Rng;

use crate::error::{usage, Result};
use crate::graph::{Edge, IndexedEdgeList, NodeId, NodeState, SimState};
use crate::model::{sample_exp, EventRecord, Params, Simulator, StepOutcome};

/// Default upper bound on `n`; the pair list needs O(n^2) memory.
pub const DEFAULT_MAX_NODES: usize = 10_000;

const ABSENT: u32 = u32::MAX;

/// Subset of `[0, n)` with O(1) insert, remove, membership and sampling.
#[derive(Debug, Clone)]
pub struct IndexedNodeSet {
    items: Vec<NodeId>,
    positions: Vec<u32>,
}

impl IndexedNodeSet {
    pub fn new(n: usize) -> Self {
        IndexedNodeSet { items: Vec::new(), positions: vec![ABSENT; n] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.positions[v as usize] != ABSENT
    }

    #[inline]
    pub fn insert(&mut self, v: NodeId) -> bool {
        if self.contains(v) {
            return false;
        }
        self.positions[v as usize] = self.items.len() as u32;
        self.items.push(v);
        true
    }

    #[inline]
    pub fn remove(&mut self, v: NodeId) -> bool {
        let pos = self.positions[v as usize];
        if pos == ABSENT {
            return false;
        }
        self.positions[v as usize] = ABSENT;
        self.items.swap_remove(pos as usize);
        if let Some(&moved) = self.items.get(pos as usize) {
            self.positions[moved as usize] = pos;
        }
        true
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<NodeId> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())])
        }
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.items
    }

    pub fn sorted(&self) -> Vec<NodeId> {
        let mut v = self.items.clone();
        v.sort_unstable();
        v
    }
}

/// Set of node pairs backed by a dense position table over all
/// `n(n-1)/2` pairs; every operation is a direct array access.
#[derive(Debug, Clone)]
pub struct PairSet {
    items: Vec<u32>,
    positions: Vec<u32>,
}

#[inline]
fn pair_index(e: Edge) -> usize {
    let (i, j) = (e.a() as usize, e.b() as usize);
    j * (j - 1) / 2 + i
}

fn pair_from_index(idx: u32) -> Edge {
    let idx = idx as u64;
    let mut j = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0) as u64;
    while j * (j - 1) / 2 > idx {
        j -= 1;
    }
    while (j + 1) * j / 2 <= idx {
        j += 1;
    }
    let i = idx - j * (j - 1) / 2;
    Edge::new_unchecked(i as NodeId, j as NodeId)
}

impl PairSet {
    pub fn new(n: usize) -> Self {
        let pairs = n * n.saturating_sub(1) / 2;
        assert!(pairs < ABSENT as usize, "too many node pairs for a dense pair table");
        PairSet { items: Vec::new(), positions: vec![ABSENT; pairs] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, e: Edge) -> bool {
        self.positions[pair_index(e)] != ABSENT
    }

    #[inline]
    pub fn insert(&mut self, e: Edge) -> bool {
        let idx = pair_index(e);
        if self.positions[idx] != ABSENT {
            return false;
        }
        self.positions[idx] = self.items.len() as u32;
        self.items.push(idx as u32);
        true
    }

    #[inline]
    pub fn remove(&mut self, e: Edge) -> bool {
        let idx = pair_index(e);
        let pos = self.positions[idx];
        if pos == ABSENT {
            return false;
        }
        self.positions[idx] = ABSENT;
        self.items.swap_remove(pos as usize);
        if let Some(&moved) = self.items.get(pos as usize) {
            self.positions[moved as usize] = pos;
        }
        true
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Edge> {
        if self.items.is_empty() {
            None
        } else {
            Some(pair_from_index(self.items[rng.random_range(0..self.items.len())]))
        }
    }

    pub fn sorted(&self) -> Vec<Edge> {
        let mut v: Vec<Edge> = self.items.iter().map(|&i| pair_from_index(i)).collect();
        v.sort_unstable();
        v
    }
}

/// The four reaction lists.
#[derive(Debug, Clone)]
pub struct EventIndex {
    pub infected: IndexedNodeSet,
    pub si_edges: IndexedEdgeList,
    pub ii_edges: IndexedEdgeList,
    pub ss_nonadjacent_pairs: PairSet,
}

impl EventIndex {
    /// Order-independent contents, for comparisons.
    pub fn canonical(&self) -> (Vec<NodeId>, Vec<Edge>, Vec<Edge>, Vec<Edge>) {
        (self.infected.sorted(), self.si_edges.sorted(), self.ii_edges.sorted(), self.ss_nonadjacent_pairs.sorted())
    }

    pub fn same_contents(&self, other: &EventIndex) -> bool {
        self.infected.len() == other.infected.len()
            && self.si_edges.len() == other.si_edges.len()
            && self.ii_edges.len() == other.ii_edges.len()
            && self.ss_nonadjacent_pairs.len() == other.ss_nonadjacent_pairs.len()
            && self.canonical() == other.canonical()
    }
}

/// Builds all four lists from scratch in O(n^2).
pub fn rebuild_index(state: &SimState) -> EventIndex {
    let n = state.n();
    let mut index = EventIndex {
        infected: IndexedNodeSet::new(n),
        si_edges: IndexedEdgeList::new(),
        ii_edges: IndexedEdgeList::new(),
        ss_nonadjacent_pairs: PairSet::new(n),
    };
    for v in 0..n as NodeId {
        if state.state(v).is_infected() {
            index.infected.insert(v);
        }
    }
    for e in state.edges().iter() {
        match (state.state(e.a()).is_infected(), state.state(e.b()).is_infected()) {
            (true, true) => {
                index.ii_edges.insert(e);
            }
            (false, false) => {}
            _ => {
                index.si_edges.insert(e);
            }
        }
    }
    let susceptible: Vec<NodeId> = (0..n as NodeId).filter(|&v| !state.state(v).is_infected()).collect();
    for (k, &j) in susceptible.iter().enumerate() {
        for &i in &susceptible[..k] {
            let e = Edge::new_unchecked(i, j);
            if !state.edges().contains(e) {
                index.ss_nonadjacent_pairs.insert(e);
            }
        }
    }
    index
}

#[derive(Debug, Clone)]
pub struct FastSimulator {
    params: Params,
    index: EventIndex,
    susceptible: IndexedNodeSet,
    adjacency: Vec<Vec<NodeId>>,
    marks: Vec<u32>,
    epoch: u32,
}

impl FastSimulator {
    /// Builds the lists for `state`. The simulator must then be the only
    /// writer of `state`.
    pub fn new(params: Params, state: &SimState) -> Self {
        let index = rebuild_index(state);
        let n = state.n();
        let mut susceptible = IndexedNodeSet::new(n);
        for v in 0..n as NodeId {
            if !state.state(v).is_infected() {
                susceptible.insert(v);
            }
        }
        FastSimulator { params, index, susceptible, adjacency: state.adjacency(), marks: vec![0; n], epoch: 0 }
    }

    /// As [`FastSimulator::new`], refusing graphs larger than `max_nodes`.
    pub fn checked(params: Params, state: &SimState, max_nodes: usize) -> Result<Self> {
        if state.n() > max_nodes {
            return usage(format!("fast baseline capped at n <= {max_nodes} (pair list is O(n^2)), got n={}", state.n()));
        }
        Ok(Self::new(params, state))
    }

    pub fn index(&self) -> &EventIndex {
        &self.index
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    pub(crate) fn recover(&mut self, state: &mut SimState, v: NodeId) {
        state.set_node_state_unchecked(v, NodeState::Susceptible);
        self.index.infected.remove(v);
        let epoch = self.next_epoch();
        for &w in &self.adjacency[v as usize] {
            self.marks[w as usize] = epoch;
            let e = Edge::new_unchecked(v, w);
            if state.state(w).is_infected() {
                self.index.ii_edges.remove(e);
                self.index.si_edges.insert(e);
            } else {
                self.index.si_edges.remove(e);
            }
        }
        for &u in self.susceptible.as_slice() {
            if self.marks[u as usize] != epoch {
                self.index.ss_nonadjacent_pairs.insert(Edge::new_unchecked(v, u));
            }
        }
        self.susceptible.insert(v);
    }

    pub(crate) fn infect(&mut self, state: &mut SimState, v: NodeId) {
        state.set_node_state_unchecked(v, NodeState::Infected);
        self.index.infected.insert(v);
        self.susceptible.remove(v);
        for &w in &self.adjacency[v as usize] {
            let e = Edge::new_unchecked(v, w);
            if state.state(w).is_infected() {
                self.index.si_edges.remove(e);
                self.index.ii_edges.insert(e);
            } else {
                self.index.si_edges.insert(e);
            }
        }
        // neighbors hold no pair with v, so their removals are no-ops
        for &u in self.susceptible.as_slice() {
            self.index.ss_nonadjacent_pairs.remove(Edge::new_unchecked(v, u));
        }
    }

    pub(crate) fn disconnect(&mut self, state: &mut SimState, e: Edge) {
        self.index.ii_edges.remove(e);
        state.delete_edge(e);
        remove_neighbor(&mut self.adjacency[e.a() as usize], e.b());
        remove_neighbor(&mut self.adjacency[e.b() as usize], e.a());
    }

    pub(crate) fn connect(&mut self, state: &mut SimState, e: Edge) {
        self.index.ss_nonadjacent_pairs.remove(e);
        state.insert_edge(e);
        self.adjacency[e.a() as usize].push(e.b());
        self.adjacency[e.b() as usize].push(e.a());
    }
}

fn remove_neighbor(list: &mut Vec<NodeId>, w: NodeId) {
    if let Some(pos) = list.iter().position(|&x| x == w) {
        list.swap_remove(pos);
    }
}

impl Simulator for FastSimulator {
    fn params(&self) -> &Params {
        &self.params
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut SimState, rng: &mut R) -> StepOutcome {
        fast_step(self, state, rng)
    }
}

pub fn fast_step<R: Rng + ?Sized>(sim: &mut FastSimulator, state: &mut SimState, rng: &mut R) -> StepOutcome {
    let p = sim.params;
    if state.time() >= p.horizon {
        return StepOutcome::HorizonReached;
    }
    let rates = [
        p.alpha * sim.index.infected.len() as f64,
        p.beta * sim.index.si_edges.len() as f64,
        p.b * sim.index.ii_edges.len() as f64,
        p.a * sim.index.ss_nonadjacent_pairs.len() as f64,
    ];
    let total: f64 = rates.iter().sum();
    if total <= 0.0 {
        state.set_time(p.horizon);
        return StepOutcome::HorizonReached;
    }
    let t = state.time() + sample_exp(rng, total);
    if t > p.horizon {
        state.set_time(p.horizon);
        return StepOutcome::HorizonReached;
    }
    state.set_time(t);

    let mut u = rng.random::<f64>() * total;
    let mut class = 0;
    for (k, &r) in rates.iter().enumerate() {
        if r > 0.0 {
            class = k;
            if u < r {
                break;
            }
            u -= r;
        }
    }
    let record = match class {
        0 => {
            let v = sim.index.infected.sample(rng).expect("recovery class with no infected nodes");
            sim.recover(state, v);
            EventRecord::recovery(t, v)
        }
        1 => {
            let e = sim.index.si_edges.sample(rng).expect("transmission class with no SI edges");
            let (target, source) = if state.state(e.a()).is_infected() { (e.b(), e.a()) } else { (e.a(), e.b()) };
            sim.infect(state, target);
            EventRecord::transmission(t, target, source)
        }
        2 => {
            let e = sim.index.ii_edges.sample(rng).expect("disconnect class with no II edges");
            sim.disconnect(state, e);
            EventRecord::disconnect(t, e.a(), e.b())
        }
        _ => {
            let e = sim.index.ss_nonadjacent_pairs.sample(rng).expect("connect class with no SS pairs");
            sim.connect(state, e);
            EventRecord::connect(t, e.a(), e.b())
        }
    };
    StepOutcome::Accepted(record)
}
