//! Erdős–Rényi graph sampling and per-graph statistics.
//!
//! `sample_er` draws G(m, rho) with unit edge weights, consuming exactly one
//! uniform draw per unordered vertex pair in row-major order, so a sample is
//! a pure function of `(m, rho, seed)`.  `degree_stats` and `er_gap_trial`
//! compute the summaries used by the Monte Carlo sweeps: degree extremes,
//! two L¹ deviation measures, and the two-sided spectral gap with its
//! `sqrt(m·rho)` scaling.

use crate::graph::{GraphError, WeightedGraph};
use crate::rng::SplitMix64;
use crate::spectral;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ErGraphError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, ErGraphError>;

/// Parameters of one Erdős–Rényi draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErdosRenyiParams {
    /// Number of vertices.
    pub m: u32,
    /// Edge probability.
    pub rho: f64,
    /// Seed for the dedicated generator of this draw.
    pub seed: u64,
}

/// Samples G(m, rho): each unordered pair {i, j}, i < j, visited in
/// row-major order, becomes a unit-weight edge iff its uniform draw is
/// `< rho`.  One draw is consumed per pair regardless of the outcome.
pub fn sample_er(params: &ErdosRenyiParams) -> WeightedGraph {
    let mut rng = SplitMix64::new(params.seed);
    let m = params.m;
    let mut g = WeightedGraph::empty(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let u = rng.next_f64();
            if u < params.rho {
                g.add_weight(i, j, 1.0).expect("indices in range");
            }
        }
    }
    g
}

/// Degree summaries of a sampled graph against its target density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub min_deg: f64,
    pub max_deg: f64,
    pub mean_deg: f64,
    /// Σ_i |d(i) − (m−1)ρ| normalised by m·(m−1)·ρ (deviation from the
    /// expected degree).
    pub l1_dev_expected: f64,
    /// Σ_i |d(i) − d̄| normalised by m·d̄ (deviation from the empirical
    /// mean); defined as 0 when the graph has no edges.
    pub l1_dev_mean: f64,
}

/// Computes `DegreeStats` for a graph drawn with edge probability `rho`.
pub fn degree_stats(g: &WeightedGraph, rho: f64) -> Result<DegreeStats> {
    let m = g.vertex_count() as f64;
    if g.vertex_count() < 2 {
        return Err(ErGraphError::BadParameter(format!(
            "need at least 2 vertices, got {}",
            g.vertex_count()
        )));
    }
    if !(rho > 0.0) {
        return Err(ErGraphError::BadParameter(format!(
            "edge probability must be positive, got {rho}"
        )));
    }
    let degrees = g.degrees();
    let expected = (m - 1.0) * rho;
    let mean = degrees.iter().sum::<f64>() / m;
    let mut min_deg = f64::INFINITY;
    let mut max_deg = f64::NEG_INFINITY;
    let mut dev_expected = 0.0;
    let mut dev_mean = 0.0;
    for &d in &degrees {
        min_deg = min_deg.min(d);
        max_deg = max_deg.max(d);
        dev_expected += (d - expected).abs();
        dev_mean += (d - mean).abs();
    }
    Ok(DegreeStats {
        min_deg,
        max_deg,
        mean_deg: mean,
        l1_dev_expected: dev_expected / (m * expected),
        l1_dev_mean: if mean > 0.0 { dev_mean / (m * mean) } else { 0.0 },
    })
}

/// Outcome of one spectral-gap trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErGapTrial {
    pub connected: bool,
    /// Two-sided gap ‖A⁰‖; 1.0 for disconnected samples (including the
    /// edgeless one).
    pub gap: f64,
    /// gap · √(m·rho).
    pub scaled_gap: f64,
}

/// Computes the gap record for an already-sampled graph.
pub fn gap_trial_from_graph(g: &WeightedGraph, m: u32, rho: f64) -> ErGapTrial {
    let (connected, gap) = match spectral::spectral_report(g) {
        Ok(report) => (report.connected, report.restricted_norm),
        // No edges at all: the maximally disconnected sample.
        Err(GraphError::EmptyGraph) => (false, 1.0),
        Err(e) => unreachable!("spectral report on sampled graph: {e}"),
    };
    ErGapTrial { connected, gap, scaled_gap: gap * (m as f64 * rho).sqrt() }
}

/// Samples G(m, rho) and reports connectivity, the two-sided gap, and the
/// √(m·rho)-scaled gap.
pub fn er_gap_trial(params: &ErdosRenyiParams) -> ErGapTrial {
    let g = sample_er(params);
    gap_trial_from_graph(&g, params.m, params.rho)
}
