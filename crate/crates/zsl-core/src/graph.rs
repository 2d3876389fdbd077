//! Finite weighted graphs and their random-walk structure.
//!
//! A graph is a vertex count `n` together with a symmetric nonnegative
//! weight function ω on pairs of vertices (self-loops allowed). Degrees
//! `d(s) = Σ_t ω(s,t)` induce the stationary measure ν(s) = d(s)/Σd and the
//! edge measure ℙ(s,t) = ω(s,t)/Σd on ordered pairs; the Markov operator
//! `A f(s) = (1/d(s)) Σ_t ω(s,t) f(t)` is self-adjoint on L²(V,ν).
//!
//! Weights live in a sorted sparse map keyed by unordered pair, so iteration
//! order — and therefore every floating-point reduction in the crate — is
//! deterministic.

use std::collections::BTreeMap;
use std::io::{BufRead, Write as IoWrite};

use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("negative weight {w} on pair ({s}, {t})")]
    NegativeWeight { s: u32, t: u32, w: f64 },
    #[error("vertex {v} out of range for {n} vertices")]
    IndexOutOfRange { v: u32, n: u32 },
    #[error("vertex {0} is isolated (zero degree)")]
    IsolatedVertex(u32),
    #[error("all vertices are isolated")]
    EmptyGraph,
    #[error("vertex counts differ: {0} vs {1}")]
    SizeMismatch(u32, u32),
    #[error("graph file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Symmetric weighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: u32,
    // unordered pair (s ≤ t) → ω(s,t); entries are strictly positive
    weights: BTreeMap<(u32, u32), f64>,
}

impl WeightedGraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: u32) -> Self {
        WeightedGraph { n, weights: BTreeMap::new() }
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    /// Adds `w` to ω(s,t) (and ω(t,s); a self-loop is a single entry).
    pub fn add_weight(&mut self, s: u32, t: u32, w: f64) -> Result<()> {
        for v in [s, t] {
            if v >= self.n {
                return Err(GraphError::IndexOutOfRange { v, n: self.n });
            }
        }
        if w < 0.0 || !w.is_finite() {
            return Err(GraphError::NegativeWeight { s, t, w });
        }
        if w == 0.0 {
            return Ok(());
        }
        let key = (s.min(t), s.max(t));
        *self.weights.entry(key).or_insert(0.0) += w;
        Ok(())
    }

    /// ω(s,t); zero for absent pairs and out-of-range indices.
    pub fn weight(&self, s: u32, t: u32) -> f64 {
        let key = (s.min(t), s.max(t));
        self.weights.get(&key).copied().unwrap_or(0.0)
    }

    /// Unordered positive-weight pairs `((s, t), ω)` with s ≤ t, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.weights.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    /// d(s) = Σ_t ω(s,t) for every vertex (self-loop weight counted once).
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n as usize];
        for (&(s, t), &w) in &self.weights {
            d[s as usize] += w;
            if s != t {
                d[t as usize] += w;
            }
        }
        d
    }

    /// Multiplies every weight by `c > 0`; ν, ℙ and the spectrum are invariant.
    pub fn scale(&self, c: f64) -> WeightedGraph {
        let weights = self.weights.iter().map(|(&k, &w)| (k, c * w)).collect();
        WeightedGraph { n: self.n, weights }
    }

    /// Vertices with positive degree, ascending.
    pub fn support(&self) -> Vec<u32> {
        let d = self.degrees();
        (0..self.n).filter(|&s| d[s as usize] > 0.0).collect()
    }

    /// Connectivity of the subgraph induced on positive-degree vertices.
    /// Returns (connected-on-support, bipartite-on-support).
    ///
    /// Union-find on a doubled vertex set: merging s with t+n and t with s+n
    /// tracks 2-colorability; a vertex merged with its own shadow witnesses
    /// an odd cycle. Self-loops are odd cycles.
    pub(crate) fn support_structure(&self) -> (bool, bool) {
        let n = self.n as usize;
        let mut uf = UnionFind::new(2 * n);
        let mut bipartite = true;
        for &(s, t) in self.weights.keys() {
            let (s, t) = (s as usize, t as usize);
            if s == t {
                bipartite = false;
                continue;
            }
            uf.merge(s, t + n);
            uf.merge(t, s + n);
        }
        let support = self.support();
        if bipartite {
            for &s in &support {
                let s = s as usize;
                if uf.find(s) == uf.find(s + n) {
                    bipartite = false;
                    break;
                }
            }
        }
        let connected = match support.split_first() {
            None => false,
            Some((&first, rest)) => {
                let root = uf.find(first as usize);
                rest.iter().all(|&s| {
                    let s = s as usize;
                    uf.find(s) == root || uf.find(s + self.n as usize) == root
                })
            }
        };
        (connected, bipartite)
    }

    /// True when every vertex can reach every other (and none is isolated).
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        self.support().len() == self.n as usize && self.support_structure().0
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, x: usize) -> u32 {
        let mut root = x as u32;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        // path compression
        let mut cur = x as u32;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

/// Builds a graph from `(s, t, w)` entries; duplicates for the same
/// unordered pair (in either orientation) are summed.
pub fn build_graph(n: u32, entries: &[(u32, u32, f64)]) -> Result<WeightedGraph> {
    let mut g = WeightedGraph::empty(n);
    for &(s, t, w) in entries {
        g.add_weight(s, t, w)?;
    }
    Ok(g)
}

/// Stationary vertex measure and the data needed for the edge measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalkMeasures {
    /// ν(s) = d(s) / Σ_t d(t).
    pub nu: Vec<f64>,
    /// Degrees d(s).
    pub degrees: Vec<f64>,
    /// Σ_s d(s) = Σ_{s,t} ω(s,t) — the normalizer of the edge measure.
    pub total_degree: f64,
}

impl RandomWalkMeasures {
    /// ℙ(s,t) = ω(s,t) / Σd over ordered pairs.
    pub fn edge_prob(&self, g: &WeightedGraph, s: u32, t: u32) -> f64 {
        g.weight(s, t) / self.total_degree
    }
}

/// ν and ℙ for a graph with no isolated vertices.
pub fn measures(g: &WeightedGraph) -> Result<RandomWalkMeasures> {
    let degrees = g.degrees();
    for (s, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            return Err(GraphError::IsolatedVertex(s as u32));
        }
    }
    let total_degree: f64 = degrees.iter().sum();
    let nu = degrees.iter().map(|d| d / total_degree).collect();
    Ok(RandomWalkMeasures { nu, degrees, total_degree })
}

/// Map V → ℝ^k stored row-major; k = 1 is the scalar case.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    k: usize,
    data: Vec<f64>,
}

impl VertexFunction {
    pub fn zeros(n: usize, k: usize) -> Self {
        assert!(k >= 1);
        VertexFunction { k, data: vec![0.0; n * k] }
    }

    pub fn scalar(values: Vec<f64>) -> Self {
        VertexFunction { k: 1, data: values }
    }

    pub fn from_data(k: usize, data: Vec<f64>) -> Self {
        assert!(k >= 1 && data.len().is_multiple_of(k));
        VertexFunction { k, data }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.data.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.data[s * self.k..(s + 1) * self.k]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.data[s * self.k..(s + 1) * self.k]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Markov operator: (A f)(s) = (1/d(s)) Σ_t ω(s,t) f(t), applied per
/// coordinate. Constants are fixed points.
pub fn markov_apply(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    let n = g.vertex_count() as usize;
    assert_eq!(f.len(), n, "function length must match vertex count");
    let degrees = g.degrees();
    for (s, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            return Err(GraphError::IsolatedVertex(s as u32));
        }
    }
    let k = f.dim();
    let mut out = VertexFunction::zeros(n, k);
    for (s, t, w) in g.edges() {
        let (s, t) = (s as usize, t as usize);
        for j in 0..k {
            out.data[s * k + j] += w * f.data[t * k + j];
        }
        if s != t {
            for j in 0..k {
                out.data[t * k + j] += w * f.data[s * k + j];
            }
        }
    }
    for s in 0..n {
        let inv = 1.0 / degrees[s];
        for x in out.row_mut(s) {
            *x *= inv;
        }
    }
    Ok(out)
}

/// Pointwise weight sum of two graphs on the same vertex set.
pub fn union(g1: &WeightedGraph, g2: &WeightedGraph) -> Result<WeightedGraph> {
    if g1.n != g2.n {
        return Err(GraphError::SizeMismatch(g1.n, g2.n));
    }
    let mut out = g1.clone();
    for (&k, &w) in &g2.weights {
        *out.weights.entry(k).or_insert(0.0) += w;
    }
    Ok(out)
}

/// Standard families used throughout the tests and the command-line demos.
pub mod families {
    use super::*;

    /// Complete graph K_n, unit weights.
    pub fn complete(n: u32) -> WeightedGraph {
        let mut g = WeightedGraph::empty(n);
        for s in 0..n {
            for t in s + 1..n {
                g.add_weight(s, t, 1.0).unwrap();
            }
        }
        g
    }

    /// Cycle C_n (n ≥ 3), unit weights.
    pub fn cycle(n: u32) -> WeightedGraph {
        assert!(n >= 3);
        let mut g = WeightedGraph::empty(n);
        for s in 0..n {
            g.add_weight(s, (s + 1) % n, 1.0).unwrap();
        }
        g
    }

    /// Path on n vertices, unit weights; `path(2)` is the single edge P₂.
    pub fn path(n: u32) -> WeightedGraph {
        assert!(n >= 2);
        let mut g = WeightedGraph::empty(n);
        for s in 0..n - 1 {
            g.add_weight(s, s + 1, 1.0).unwrap();
        }
        g
    }

    /// Complete bipartite K_{a,b}: parts {0..a} and {a..a+b}, unit cross weights.
    pub fn complete_bipartite(a: u32, b: u32) -> WeightedGraph {
        let mut g = WeightedGraph::empty(a + b);
        for s in 0..a {
            for t in a..a + b {
                g.add_weight(s, t, 1.0).unwrap();
            }
        }
        g
    }

    /// Star: hub 0 joined to `leaves` leaves with unit weights.
    pub fn star(leaves: u32) -> WeightedGraph {
        let mut g = WeightedGraph::empty(leaves + 1);
        for t in 1..=leaves {
            g.add_weight(0, t, 1.0).unwrap();
        }
        g
    }

    /// Random weighted graph: a random spanning tree (when `connect`) plus
    /// each remaining pair independently with probability `extra`, weights
    /// uniform in [0.2, 2). Deterministic in the generator state.
    pub fn random_weighted(rng: &mut SplitMix64, n: u32, connect: bool, extra: f64) -> WeightedGraph {
        let mut g = WeightedGraph::empty(n);
        let w = |rng: &mut SplitMix64| 0.2 + 1.8 * rng.next_f64();
        if connect {
            for v in 1..n {
                let parent = rng.next_below(v as u64) as u32;
                let wv = w(rng);
                g.add_weight(parent, v, wv).unwrap();
            }
        }
        for s in 0..n {
            for t in s + 1..n {
                if rng.next_f64() < extra && g.weight(s, t) == 0.0 {
                    let wv = w(rng);
                    g.add_weight(s, t, wv).unwrap();
                }
            }
        }
        g
    }
}

/// Writes the interchange format: header `n <count>`, then one `s t w` line
/// per unordered positive-weight pair (s ≤ t), ascending.
pub fn write_graph(g: &WeightedGraph, out: &mut impl IoWrite) -> Result<()> {
    writeln!(out, "n {}", g.vertex_count())?;
    for (s, t, w) in g.edges() {
        writeln!(out, "{s} {t} {w}")?;
    }
    Ok(())
}

/// Reads the interchange format; repeated pairs (in either orientation) sum,
/// matching `build_graph`. Blank lines and `#` comments are skipped.
pub fn read_graph(input: impl BufRead) -> Result<WeightedGraph> {
    let mut g: Option<WeightedGraph> = None;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        match g.as_mut() {
            None => {
                let bad = || GraphError::Format(format!("line {}: expected header `n <count>`", idx + 1));
                if parts.next() != Some("n") {
                    return Err(bad());
                }
                let n: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                g = Some(WeightedGraph::empty(n));
            }
            Some(g) => {
                let bad = || GraphError::Format(format!("line {}: expected `s t w`", idx + 1));
                let s: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let t: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let w: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                g.add_weight(s, t, w)?;
            }
        }
    }
    g.ok_or_else(|| GraphError::Format("missing header line".into()))
}
