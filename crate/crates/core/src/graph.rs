//! Dynamical state of a coevolving network: node states plus an edge list
//! supporting constant-time insert, remove, membership and uniform sampling.

use std::fmt;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::{usage, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeState {
    Susceptible,
    Infected,
}

impl NodeState {
    pub fn is_infected(self) -> bool {
        self == NodeState::Infected
    }

    pub fn symbol(self) -> char {
        match self {
            NodeState::Susceptible => 'S',
            NodeState::Infected => 'I',
        }
    }
}

/// Undirected edge stored in canonical order `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: NodeId,
    b: NodeId,
}

impl Edge {
    /// Canonicalizes `(u, v)`. Returns `None` for a self-loop.
    pub fn new(u: NodeId, v: NodeId) -> Option<Edge> {
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Some(Edge { a: u, b: v }),
            std::cmp::Ordering::Greater => Some(Edge { a: v, b: u }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Caller guarantees `u != v`.
    #[inline]
    pub(crate) fn new_unchecked(u: NodeId, v: NodeId) -> Edge {
        debug_assert_ne!(u, v);
        if u < v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }

    #[inline]
    pub fn a(self) -> NodeId {
        self.a
    }

    #[inline]
    pub fn b(self) -> NodeId {
        self.b
    }

    #[inline]
    fn key(self) -> u64 {
        (u64::from(self.a) << 32) | u64::from(self.b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Set of edges kept as a dense vector plus a position index.
///
/// Removal swaps the last edge into the freed slot, so the vector stays
/// gap-free and `sample` is a single uniform index draw.
#[derive(Debug, Clone, Default)]
pub struct IndexedEdgeList {
    edges: Vec<Edge>,
    positions: FxHashMap<u64, u32>,
}

impl IndexedEdgeList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        IndexedEdgeList {
            edges: Vec::with_capacity(capacity),
            positions: FxHashMap::with_capacity_and_hasher(capacity, Default::default()),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    #[inline]
    pub fn contains(&self, edge: Edge) -> bool {
        self.positions.contains_key(&edge.key())
    }

    /// Returns `false` if the edge was already present.
    #[inline]
    pub fn insert(&mut self, edge: Edge) -> bool {
        use std::collections::hash_map::Entry;
        match self.positions.entry(edge.key()) {
            Entry::Occupied(_) => false,
            Entry::Vacant(slot) => {
                slot.insert(self.edges.len() as u32);
                self.edges.push(edge);
                true
            }
        }
    }

    /// Returns `false` if the edge was absent.
    #[inline]
    pub fn remove(&mut self, edge: Edge) -> bool {
        let Some(pos) = self.positions.remove(&edge.key()) else {
            return false;
        };
        let pos = pos as usize;
        self.edges.swap_remove(pos);
        if let Some(moved) = self.edges.get(pos) {
            self.positions.insert(moved.key(), pos as u32);
        }
        true
    }

    /// Uniformly random stored edge, or `None` when empty.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Edge> {
        if self.edges.is_empty() {
            None
        } else {
            Some(self.edges[rng.random_range(0..self.edges.len())])
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges in sorted order, independent of insertion history.
    pub fn sorted(&self) -> Vec<Edge> {
        let mut v = self.edges.clone();
        v.sort_unstable();
        v
    }

    pub fn clear(&mut self) {
        self.edges.clear();
        self.positions.clear();
    }
}

impl FromIterator<Edge> for IndexedEdgeList {
    fn from_iter<T: IntoIterator<Item = Edge>>(iter: T) -> Self {
        let mut list = IndexedEdgeList::new();
        for e in iter {
            list.insert(e);
        }
        list
    }
}

/// Full dynamical state: node states, the current edge set and model time.
#[derive(Debug, Clone)]
pub struct SimState {
    states: Vec<NodeState>,
    edges: IndexedEdgeList,
    infected: usize,
    t: f64,
}

impl SimState {
    /// `n` susceptible nodes, no edges, time zero.
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "node count exceeds u32 range");
        SimState {
            states: vec![NodeState::Susceptible; n],
            edges: IndexedEdgeList::new(),
            infected: 0,
            t: 0.0,
        }
    }

    pub fn from_parts(states: Vec<NodeState>, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut state = SimState::new(states.len());
        for (v, s) in states.into_iter().enumerate() {
            state.set_node_state(v as NodeId, s)?;
        }
        for (u, v) in edges {
            state.add_edge(u, v)?;
        }
        Ok(state)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.t
    }

    #[inline]
    pub(crate) fn set_time(&mut self, t: f64) {
        debug_assert!(t >= self.t, "time must not decrease ({} -> {})", self.t, t);
        self.t = t;
    }

    /// Resets the clock, e.g. when reusing a generated graph as an initial state.
    pub fn reset_time(&mut self) {
        self.t = 0.0;
    }

    #[inline]
    pub fn state(&self, v: NodeId) -> NodeState {
        self.states[v as usize]
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    #[inline]
    pub fn infected_count(&self) -> usize {
        self.infected
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &IndexedEdgeList {
        &self.edges
    }

    pub fn prevalence(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.infected as f64 / self.n() as f64
        }
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n() as f64
        }
    }

    /// Number of node pairs, `n(n-1)/2`.
    pub fn pair_count(&self) -> u64 {
        let n = self.n() as u64;
        n * n.saturating_sub(1) / 2
    }

    pub fn set_node_state(&mut self, v: NodeId, s: NodeState) -> Result<bool> {
        if v as usize >= self.n() {
            return usage(format!("node {v} out of range for n={}", self.n()));
        }
        Ok(self.set_node_state_unchecked(v, s))
    }

    #[inline]
    pub(crate) fn set_node_state_unchecked(&mut self, v: NodeId, s: NodeState) -> bool {
        let slot = &mut self.states[v as usize];
        if *slot == s {
            return false;
        }
        *slot = s;
        match s {
            NodeState::Infected => self.infected += 1,
            NodeState::Susceptible => self.infected -= 1,
        }
        true
    }

    /// Inserts `(v1, v2)` in canonical order; `Ok(false)` if already present.
    pub fn add_edge(&mut self, v1: NodeId, v2: NodeId) -> Result<bool> {
        let n = self.n();
        if v1 as usize >= n || v2 as usize >= n {
            return usage(format!("edge ({v1}, {v2}) out of range for n={n}"));
        }
        match Edge::new(v1, v2) {
            Some(e) => Ok(self.edges.insert(e)),
            None => usage(format!("self-loop on node {v1}")),
        }
    }

    #[inline]
    pub(crate) fn insert_edge(&mut self, e: Edge) -> bool {
        self.edges.insert(e)
    }

    /// Removes `(v1, v2)` in either order; `false` if absent.
    pub fn remove_edge(&mut self, v1: NodeId, v2: NodeId) -> bool {
        match Edge::new(v1, v2) {
            Some(e) => self.edges.remove(e),
            None => false,
        }
    }

    #[inline]
    pub(crate) fn delete_edge(&mut self, e: Edge) -> bool {
        self.edges.remove(e)
    }

    pub fn has_edge(&self, v1: NodeId, v2: NodeId) -> bool {
        Edge::new(v1, v2).is_some_and(|e| self.edges.contains(e))
    }

    #[inline]
    pub fn sample_uniform_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Edge> {
        self.edges.sample(rng)
    }

    /// Adjacency lists built from the current edge set.
    pub fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.n()];
        for e in self.edges.iter() {
            adj[e.a() as usize].push(e.b());
            adj[e.b() as usize].push(e.a());
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for e in self.edges.iter() {
            deg[e.a() as usize] += 1;
            deg[e.b() as usize] += 1;
        }
        deg
    }

    /// Sets every node susceptible.
    pub fn clear_infections(&mut self) {
        self.states.fill(NodeState::Susceptible);
        self.infected = 0;
    }
}
