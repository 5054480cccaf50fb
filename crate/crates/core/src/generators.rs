//! Initial contact graphs and initial infection patterns.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::graph::{Edge, NodeId, NodeState, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Erdős–Rényi G(n, p).
    #[serde(rename = "er")]
    ErdosRenyi,
    /// Barabási–Albert preferential attachment.
    #[serde(rename = "ba")]
    BarabasiAlbert,
    /// Random geometric graph on the unit square.
    #[serde(rename = "geom")]
    Geometric,
}

impl GraphKind {
    pub const ALL: [GraphKind; 3] = [GraphKind::ErdosRenyi, GraphKind::BarabasiAlbert, GraphKind::Geometric];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::ErdosRenyi => "er",
            GraphKind::BarabasiAlbert => "ba",
            GraphKind::Geometric => "geom",
        }
    }

    /// Parameters giving mean degree of roughly 5 for `n` nodes.
    pub fn default_spec(self, n: usize) -> GraphSpec {
        let param = match self {
            GraphKind::ErdosRenyi => GraphParam::Probability(5.0 / (n as f64 - 1.0)),
            GraphKind::BarabasiAlbert => GraphParam::Attachment(5),
            GraphKind::Geometric => GraphParam::TargetMeanDegree(5.0),
        };
        GraphSpec { n, param }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er" | "random" | "erdos-renyi" => Ok(GraphKind::ErdosRenyi),
            "ba" | "barabasi-albert" => Ok(GraphKind::BarabasiAlbert),
            "geom" | "geometric" => Ok(GraphKind::Geometric),
            other => usage(format!("unknown graph kind '{other}' (expected er, ba or geom)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GraphParam {
    Probability(f64),
    Attachment(usize),
    TargetMeanDegree(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub param: GraphParam,
}

impl GraphSpec {
    pub fn erdos_renyi(n: usize, p: f64) -> Self {
        GraphSpec { n, param: GraphParam::Probability(p) }
    }

    pub fn barabasi_albert(n: usize, m: usize) -> Self {
        GraphSpec { n, param: GraphParam::Attachment(m) }
    }

    pub fn geometric(n: usize, target_mean_degree: f64) -> Self {
        GraphSpec { n, param: GraphParam::TargetMeanDegree(target_mean_degree) }
    }

    pub fn kind(&self) -> GraphKind {
        match self.param {
            GraphParam::Probability(_) => GraphKind::ErdosRenyi,
            GraphParam::Attachment(_) => GraphKind::BarabasiAlbert,
            GraphParam::TargetMeanDegree(_) => GraphKind::Geometric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return usage(format!("graph needs at least 2 nodes, got {n}"));
        }
        if n > u32::MAX as usize {
            return usage("node count exceeds u32 range");
        }
        match self.param {
            GraphParam::Probability(p) if !(0.0..=1.0).contains(&p) => usage(format!("edge probability {p} not in [0, 1]")),
            GraphParam::Attachment(m) if m < 1 || m >= n => usage(format!("attachment count m={m} must satisfy 1 <= m < n={n}")),
            GraphParam::TargetMeanDegree(d) if !(d > 0.0 && d < (n - 1) as f64) => {
                usage(format!("target mean degree {d} not in (0, {})", n - 1))
            }
            _ => Ok(()),
        }
    }

    /// Builds the graph with all nodes susceptible.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimState> {
        self.validate()?;
        match self.param {
            GraphParam::Probability(p) => gen_erdos_renyi(self.n, p, rng),
            GraphParam::Attachment(m) => gen_barabasi_albert(self.n, m, rng),
            GraphParam::TargetMeanDegree(d) => gen_geometric(self.n, d, rng),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param {
            GraphParam::Probability(p) => write!(f, "er(n={}, p={p})", self.n),
            GraphParam::Attachment(m) => write!(f, "ba(n={}, m={m})", self.n),
            GraphParam::TargetMeanDegree(d) => write!(f, "geom(n={}, target_mean_degree={d})", self.n),
        }
    }
}

/// G(n, p) by geometric skipping over the pair sequence, O(n + |E|).
pub fn gen_erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<SimState> {
    if !(0.0..=1.0).contains(&p) {
        return usage(format!("edge probability {p} not in [0, 1]"));
    }
    let mut state = SimState::new(n);
    if p == 0.0 || n < 2 {
        return Ok(state);
    }
    if p == 1.0 {
        for v in 1..n as NodeId {
            for w in 0..v {
                state.insert_edge(Edge::new_unchecked(w, v));
            }
        }
        return Ok(state);
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w): (i64, i64) = (1, -1);
    let n = n as i64;
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            state.insert_edge(Edge::new_unchecked(w as NodeId, v as NodeId));
        }
    }
    Ok(state)
}

/// Preferential attachment grown from a complete graph on `m` nodes.
///
/// Each new node attaches to `m` distinct existing nodes chosen with
/// probability proportional to degree, so `|E| = m(m-1)/2 + (n-m)m`.
pub fn gen_barabasi_albert<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<SimState> {
    if m < 1 || m >= n {
        return usage(format!("attachment count m={m} must satisfy 1 <= m < n={n}"));
    }
    let mut state = SimState::new(n);
    // every edge endpoint once; uniform draws from it are degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * (m * (m - 1) / 2 + (n - m) * m));
    for v in 1..m as NodeId {
        for w in 0..v {
            state.insert_edge(Edge::new_unchecked(w, v));
            endpoints.push(w);
            endpoints.push(v);
        }
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for v in m as NodeId..n as NodeId {
        targets.clear();
        while targets.len() < m {
            let cand = if endpoints.is_empty() {
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !targets.contains(&cand) {
                targets.push(cand);
            }
        }
        for &w in &targets {
            state.insert_edge(Edge::new_unchecked(w, v));
            endpoints.push(w);
            endpoints.push(v);
        }
    }
    Ok(state)
}

/// Connection radius giving `target_mean_degree` on an unbounded plane.
pub fn geometric_radius(n: usize, target_mean_degree: f64) -> f64 {
    (target_mean_degree / (n as f64 * PI)).sqrt()
}

/// Random geometric graph with radius calibrated to `target_mean_degree`.
///
/// Boundary effects make the measured mean degree fall somewhat below the
/// target; callers should use [`SimState::mean_degree`] on the result.
pub fn gen_geometric<R: Rng + ?Sized>(n: usize, target_mean_degree: f64, rng: &mut R) -> Result<SimState> {
    if target_mean_degree.is_nan() || target_mean_degree <= 0.0 {
        return usage(format!("target mean degree {target_mean_degree} must be positive"));
    }
    let r = geometric_radius(n, target_mean_degree);
    if r >= std::f64::consts::SQRT_2 {
        return usage(format!("radius {r} reaches the unit-square diagonal; graph would be complete"));
    }
    gen_geometric_radius(n, r, rng)
}

/// Points uniform on the unit square, edges between pairs at distance `<= radius`.
pub fn gen_geometric_radius<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Result<SimState> {
    if !radius.is_finite() || radius <= 0.0 {
        return usage(format!("radius {radius} must be positive and finite"));
    }
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut state = SimState::new(n);

    // cells at least `radius` wide so neighbors lie in the 3x3 block
    let max_cells = ((n as f64).sqrt().ceil() as usize).max(1);
    let cells = ((1.0 / radius).floor() as usize).clamp(1, max_cells);
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in points.iter().enumerate() {
        buckets[cell_of(y) * cells + cell_of(x)].push(i as NodeId);
    }
    let r2 = radius * radius;
    for (i, &(x, y)) in points.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for ny in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &buckets[ny * cells + nx] {
                    if (j as usize) <= i {
                        continue;
                    }
                    let (px, py) = points[j as usize];
                    if (px - x).powi(2) + (py - y).powi(2) <= r2 {
                        state.insert_edge(Edge::new_unchecked(i as NodeId, j));
                    }
                }
            }
        }
    }
    Ok(state)
}

/// Infects exactly `round(fraction * n)` distinct nodes chosen uniformly;
/// all other nodes become susceptible.
pub fn init_infected<R: Rng + ?Sized>(state: &mut SimState, fraction: f64, rng: &mut R) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return usage(format!("infected fraction {fraction} not in [0, 1]"));
    }
    let n = state.n();
    let k = (fraction * n as f64).round() as usize;
    state.clear_infections();
    for v in rand::seq::index::sample(rng, n, k.min(n)) {
        state.set_node_state_unchecked(v as NodeId, NodeState::Infected);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn assert_simple(state: &SimState) {
        let sorted = state.edges().sorted();
        for w in sorted.windows(2) {
            assert_ne!(w[0], w[1]);
        }
        for e in sorted {
            assert!(e.a() < e.b());
            assert!((e.b() as usize) < state.n());
        }
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(gen_erdos_renyi(50, 0.0, &mut rng(1)).unwrap().edge_count(), 0);
        assert_eq!(gen_erdos_renyi(50, 1.0, &mut rng(1)).unwrap().edge_count(), 50 * 49 / 2);
        assert!(gen_erdos_renyi(50, 1.5, &mut rng(1)).is_err());
        assert!(GraphSpec::erdos_renyi(50, -0.1).generate(&mut rng(1)).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_moments() {
        // |E| ~ Binomial(4950, 5/99): mean 250, sd ~15.4
        let p: f64 = 5.0 / 99.0;
        let sd = (4950.0 * p * (1.0 - p)).sqrt();
        let mut total = 0.0;
        let seeds = 200;
        for seed in 0..seeds {
            let g = gen_erdos_renyi(100, p, &mut rng(seed)).unwrap();
            assert_simple(&g);
            let m = g.edge_count() as f64;
            assert!((m - 250.0).abs() < 4.0 * sd, "seed {seed}: {m} edges");
            total += m;
        }
        let mean = total / seeds as f64;
        assert!((mean - 250.0).abs() < 4.0 * sd / (seeds as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn barabasi_albert_edge_count_formula() {
        for (n, m) in [(100, 5), (10, 1), (20, 19), (6, 5), (57, 3), (2, 1)] {
            let g = gen_barabasi_albert(n, m, &mut rng(n as u64)).unwrap();
            assert_simple(&g);
            assert_eq!(g.edge_count(), m * (m - 1) / 2 + (n - m) * m, "n={n} m={m}");
        }
        let g = gen_barabasi_albert(100, 5, &mut rng(3)).unwrap();
        assert!((g.mean_degree() - 9.7).abs() < 1e-12);
        assert!(gen_barabasi_albert(5, 5, &mut rng(1)).is_err());
    }

    #[test]
    fn barabasi_albert_saturated_is_complete() {
        let g = gen_barabasi_albert(8, 7, &mut rng(2)).unwrap();
        assert_eq!(g.edge_count(), 28);
    }

    #[test]
    fn barabasi_albert_heavier_tail_than_er() {
        let n = 1000;
        let mut wins = 0;
        for seed in 0..100 {
            let ba = gen_barabasi_albert(n, 5, &mut rng(seed)).unwrap();
            let p = ba.mean_degree() / (n as f64 - 1.0);
            let er = gen_erdos_renyi(n, p, &mut rng(10_000 + seed)).unwrap();
            let max_ba = ba.degrees().into_iter().max().unwrap();
            let max_er = er.degrees().into_iter().max().unwrap();
            if max_ba > max_er {
                wins += 1;
            }
        }
        assert!(wins >= 95, "BA max degree larger in only {wins}/100 pairs");
    }

    #[test]
    fn geometric_mean_degree_below_target() {
        for seed in 0..20 {
            let g = gen_geometric(1000, 5.0, &mut rng(seed)).unwrap();
            assert_simple(&g);
            let d = g.mean_degree();
            assert!((3.5..=5.0).contains(&d), "seed {seed}: mean degree {d}");
        }
    }

    #[test]
    fn geometric_radius_edge_cases() {
        for seed in 0..50 {
            assert_eq!(gen_geometric_radius(2, 1.5, &mut rng(seed)).unwrap().edge_count(), 1);
        }
        let g = gen_geometric(1000, 1e-9, &mut rng(4)).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(gen_geometric_radius(10, 0.0, &mut rng(1)).is_err());
        // radius reaches the diagonal
        assert!(gen_geometric(3, 1.99, &mut rng(1)).is_ok());
        assert!(GraphSpec::geometric(3, 2.0).validate().is_err());
        assert!(gen_geometric(1, 7.0, &mut rng(1)).is_err());
    }

    #[test]
    fn geometric_matches_brute_force() {
        // grid bucketing must find exactly the pairs a full scan finds
        let r = 0.07;
        let mut a = rng(9);
        let g = gen_geometric_radius(400, r, &mut a).unwrap();
        let mut b = rng(9);
        let pts: Vec<(f64, f64)> = (0..400).map(|_| (b.random(), b.random())).collect();
        let mut count = 0;
        for i in 0..400 {
            for j in (i + 1)..400 {
                let d2: f64 = (pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2);
                if d2 <= r * r {
                    count += 1;
                    assert!(g.has_edge(i as u32, j as u32));
                }
            }
        }
        assert_eq!(count, g.edge_count());
    }

    #[test]
    fn init_infected_exact_count() {
        let mut g = gen_erdos_renyi(1000, 0.005, &mut rng(1)).unwrap();
        init_infected(&mut g, 0.1, &mut rng(2)).unwrap();
        assert_eq!(g.infected_count(), 100);
        init_infected(&mut g, 0.0, &mut rng(2)).unwrap();
        assert_eq!(g.infected_count(), 0);
        init_infected(&mut g, 1.0, &mut rng(2)).unwrap();
        assert_eq!(g.infected_count(), 1000);
        assert!(init_infected(&mut g, 1.1, &mut rng(2)).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in GraphKind::ALL {
            let spec = kind.default_spec(300);
            let a = spec.generate(&mut rng(42)).unwrap();
            let b = spec.generate(&mut rng(42)).unwrap();
            assert_eq!(a.edges().as_slice(), b.edges().as_slice(), "{kind}");
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("er".parse::<GraphKind>().unwrap(), GraphKind::ErdosRenyi);
        assert_eq!("geom".parse::<GraphKind>().unwrap(), GraphKind::Geometric);
        assert!("grid".parse::<GraphKind>().is_err());
        assert!(GraphSpec::erdos_renyi(1, 0.5).validate().is_err());
        assert!(GraphSpec::barabasi_albert(10, 0).validate().is_err());
    }
}
