//! Eigenvalues of the Markov operator, the two-sided gap ‖A⁰‖, and the two
//! perturbation bounds for unions of graphs on a common vertex set.
//!
//! A is self-adjoint on L²(V,ν), so it shares its spectrum with the
//! symmetric matrix B(s,t) = ω(s,t)/√(d(s)d(t)): B = D^{1/2} A D^{-1/2}
//! with D = diag(d). Reports are computed by a dense symmetric eigensolve
//! of B on the positive-degree vertices.

use crate::graph::{measures, union, GraphError, Result, WeightedGraph};
use crate::lapack;

/// Spectrum of A restricted to the positive-degree part of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Eigenvalues μ₁ ≥ μ₂ ≥ … ≥ μ_m of A on the m kept vertices.
    pub eigenvalues: Vec<f64>,
    /// ‖A⁰‖ = max(|μ₂|, |μ_m|): the norm of A off the constants.
    /// Convention: 1 when the graph is not connected (including when
    /// isolated vertices were dropped), 0 when only one vertex remains.
    pub restricted_norm: f64,
    /// Whole-graph connectivity; forced false if any vertex was dropped.
    pub connected: bool,
    /// 2-colorability of the kept part (self-loops are odd cycles).
    pub bipartite: bool,
    /// Number of zero-degree vertices excluded from the analysis.
    pub isolated_removed: usize,
}

impl SpectralReport {
    /// Largest non-trivial eigenvalue μ₂ (second from the top).
    pub fn mu2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }
}

/// Dense column-major B over the `support` vertices of `g`.
fn symmetrized_dense(g: &WeightedGraph, support: &[u32], degrees: &[f64]) -> Vec<f64> {
    let m = support.len();
    let mut pos = vec![u32::MAX; g.vertex_count() as usize];
    for (i, &s) in support.iter().enumerate() {
        pos[s as usize] = i as u32;
    }
    let mut b = vec![0.0f64; m * m];
    for (s, t, w) in g.edges() {
        // every edge endpoint has positive degree, so pos is defined here
        let i = pos[s as usize] as usize;
        let j = pos[t as usize] as usize;
        let v = w / (degrees[s as usize] * degrees[t as usize]).sqrt();
        b[j * m + i] = v;
        b[i * m + j] = v;
    }
    b
}

/// Full spectral analysis of the Markov operator of `g`.
pub fn spectral_report(g: &WeightedGraph) -> Result<SpectralReport> {
    let degrees = g.degrees();
    let support = g.support();
    let m = support.len();
    if m == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let isolated_removed = g.vertex_count() as usize - m;
    let (support_connected, bipartite) = g.support_structure();
    let connected = support_connected && isolated_removed == 0;

    let mut b = symmetrized_dense(g, &support, &degrees);
    let mut eigenvalues = lapack::symmetric_eigenvalues(m, &mut b);
    eigenvalues.reverse();

    let restricted_norm = if !connected {
        1.0
    } else if m == 1 {
        0.0
    } else {
        eigenvalues[1].abs().max(eigenvalues[m - 1].abs())
    };

    Ok(SpectralReport { eigenvalues, restricted_norm, connected, bipartite, isolated_removed })
}

/// Outcome of the degree-dominated perturbation bound: when
/// d_{ω₂} ≤ δ′·d_{ω₁} pointwise, the union's gap moves by at most δ′.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationCheck {
    /// δ′ = max_s d_{ω₂}(s)/d_{ω₁}(s), the tightest valid domination constant.
    pub delta_prime: f64,
    /// | ‖A⁰_{ω₁+ω₂}‖ − ‖A⁰_{ω₁}‖ |.
    pub lhs: f64,
    /// lhs ≤ δ′ + 1e−12.
    pub holds: bool,
}

/// Checks | ‖A⁰_{ω₁+ω₂}‖ − ‖A⁰_{ω₁}‖ | ≤ δ′ with δ′ = max_s d₂(s)/d₁(s).
/// `g1` must have no isolated vertices; `g2` may.
pub fn perturbation_bound_check(g1: &WeightedGraph, g2: &WeightedGraph) -> Result<PerturbationCheck> {
    let d1 = g1.degrees();
    for (s, &d) in d1.iter().enumerate() {
        if d <= 0.0 {
            return Err(GraphError::IsolatedVertex(s as u32));
        }
    }
    let sum = union(g1, g2)?;
    let d2 = g2.degrees();
    let delta_prime = d1
        .iter()
        .zip(&d2)
        .map(|(&a, &b)| b / a)
        .fold(0.0f64, f64::max);
    let n1 = spectral_report(g1)?.restricted_norm;
    let nu = spectral_report(&sum)?.restricted_norm;
    let lhs = (nu - n1).abs();
    Ok(PerturbationCheck { delta_prime, lhs, holds: lhs <= delta_prime + 1e-12 })
}

/// Outcome of the degree-regularity union bound.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionGapBound {
    /// δ = Σ_s [ |d₁(s) − D₁/n|/D₁ + |d₂(s) − D₂/n|/D₂ ], the total
    /// deviation of both degree sequences from regularity.
    pub delta: f64,
    /// min(1, δ + (1−δ)·max(‖A⁰₁‖, ‖A⁰₂‖)).
    pub bound: f64,
    /// ‖A⁰_{ω₁+ω₂}‖.
    pub norm_sum: f64,
    /// norm_sum ≤ bound + 1e−12.
    pub holds: bool,
}

/// Checks ‖A⁰_{ω₁+ω₂}‖ ≤ δ + (1−δ)·max(‖A⁰₁‖,‖A⁰₂‖) (clamped to 1).
/// Neither graph may have isolated vertices.
pub fn union_gap_bound(g1: &WeightedGraph, g2: &WeightedGraph) -> Result<UnionGapBound> {
    let m1 = measures(g1)?;
    let m2 = measures(g2)?;
    let sum = union(g1, g2)?;
    let n = g1.vertex_count() as f64;
    let mut delta = 0.0;
    for s in 0..g1.vertex_count() as usize {
        delta += (m1.degrees[s] - m1.total_degree / n).abs() / m1.total_degree;
        delta += (m2.degrees[s] - m2.total_degree / n).abs() / m2.total_degree;
    }
    let norm1 = spectral_report(g1)?.restricted_norm;
    let norm2 = spectral_report(g2)?.restricted_norm;
    let bound = (delta + (1.0 - delta) * norm1.max(norm2)).min(1.0);
    let norm_sum = spectral_report(&sum)?.restricted_norm;
    Ok(UnionGapBound { delta, bound, norm_sum, holds: norm_sum <= bound + 1e-12 })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, families, markov_apply, VertexFunction};
    use crate::rng::SplitMix64;

    #[test]
    fn complete_graph_spectrum() {
        for m in 2..=8u32 {
            let rep = spectral_report(&families::complete(m)).unwrap();
            assert!((rep.eigenvalues[0] - 1.0).abs() < 1e-12);
            for i in 1..m as usize {
                assert!((rep.eigenvalues[i] + 1.0 / (m as f64 - 1.0)).abs() < 1e-12);
            }
            assert!((rep.restricted_norm - 1.0 / (m as f64 - 1.0)).abs() < 1e-12);
            assert!(rep.connected);
            assert_eq!(rep.bipartite, m == 2);
        }
    }

    #[test]
    fn complete_bipartite_spectrum() {
        for n in 1..=8u32 {
            let rep = spectral_report(&families::complete_bipartite(n, n)).unwrap();
            let e = &rep.eigenvalues;
            assert!((e[0] - 1.0).abs() < 1e-12);
            assert!((e[2 * n as usize - 1] + 1.0).abs() < 1e-12);
            for i in 1..2 * n as usize - 1 {
                assert!(e[i].abs() < 1e-12, "n={n} i={i} e={}", e[i]);
            }
            assert!((rep.restricted_norm - 1.0).abs() < 1e-12);
            assert!(rep.bipartite && rep.connected);
        }
    }

    #[test]
    fn four_cycle_spectrum() {
        let rep = spectral_report(&families::cycle(4)).unwrap();
        let want = [1.0, 0.0, 0.0, -1.0];
        for (got, want) in rep.eigenvalues.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((rep.restricted_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_vertices_are_dropped_and_flagged() {
        let g = build_graph(5, &[(1, 3, 2.0), (3, 4, 1.0)]).unwrap();
        let rep = spectral_report(&g).unwrap();
        assert_eq!(rep.isolated_removed, 2);
        assert_eq!(rep.eigenvalues.len(), 3);
        assert!(!rep.connected);
        assert_eq!(rep.restricted_norm, 1.0);

        let all_isolated = build_graph(3, &[]).unwrap();
        assert!(matches!(spectral_report(&all_isolated), Err(GraphError::EmptyGraph)));
    }

    #[test]
    fn single_vertex_self_loop() {
        let g = build_graph(1, &[(0, 0, 2.0)]).unwrap();
        let rep = spectral_report(&g).unwrap();
        assert!((rep.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert_eq!(rep.restricted_norm, 0.0);
        assert!(rep.connected && !rep.bipartite);
    }

    #[test]
    fn disconnected_graph_has_unit_norm_and_mu2_one() {
        let g = build_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let rep = spectral_report(&g).unwrap();
        assert!(!rep.connected);
        assert_eq!(rep.restricted_norm, 1.0);
        assert!((rep.mu2().unwrap() - 1.0).abs() < 1e-10);
    }

    /// Dense A assembled through `markov_apply` on indicator functions, then
    /// conjugated by D^{1/2} and fed to the Jacobi oracle: independently
    /// reproduces the production eigenvalues.
    #[test]
    fn lapack_agrees_with_jacobi_oracle_on_random_graphs() {
        let mut rng = SplitMix64::new(0xABCD);
        for trial in 0..20 {
            let n = 2 + (trial % 7) as u32;
            let mut g = families::random_weighted(&mut rng, n, true, 0.5);
            if trial % 3 == 0 {
                g.add_weight(trial as u32 % n, trial as u32 % n, 0.7).unwrap();
            }
            let n = n as usize;
            let d = g.degrees();
            let mut dense_m = vec![0.0; n * n];
            for t in 0..n {
                let mut e = VertexFunction::zeros(n, 1);
                e.data_mut()[t] = 1.0;
                let col = markov_apply(&g, &e).unwrap();
                for s in 0..n {
                    // W = D^{1/2} A D^{-1/2}
                    dense_m[t * n + s] = col.data()[s] * (d[s] / d[t]).sqrt();
                }
            }
            let (oracle, _) = testsolver::jacobi_eigen(n, &dense_m);
            let mut got = spectral_report(&g).unwrap().eigenvalues;
            got.reverse(); // ascending, to match the oracle
            assert_eq!(got.len(), oracle.len());
            for (a, b) in got.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "trial {trial}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalues_scale_invariant_and_bounded() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..20 {
            let g = families::random_weighted(&mut rng, 7, true, 0.4);
            let r1 = spectral_report(&g).unwrap();
            let r2 = spectral_report(&g.scale(3.7)).unwrap();
            assert!((r1.eigenvalues[0] - 1.0).abs() < 1e-10);
            for (a, b) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
                assert!((a - b).abs() < 1e-12);
                assert!(a.abs() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn connectivity_and_bipartite_match_spectral_signatures() {
        let mut rng = SplitMix64::new(1234);
        for trial in 0..40 {
            let g = match trial % 4 {
                0 => families::random_weighted(&mut rng, 6, true, 0.4),
                1 => families::random_weighted(&mut rng, 6, false, 0.3),
                2 => families::cycle(2 * (2 + trial as u32 % 3)),
                _ => families::complete_bipartite(2, 1 + trial as u32 % 4),
            };
            if g.support().is_empty() {
                continue;
            }
            let rep = spectral_report(&g).unwrap();
            let m = rep.eigenvalues.len();
            if m < 2 {
                continue;
            }
            let support_connected = rep.mu2().unwrap() < 1.0 - 1e-8;
            assert_eq!(rep.connected, support_connected && rep.isolated_removed == 0);
            if rep.connected {
                let bip_spectral = rep.eigenvalues[m - 1] <= -1.0 + 1e-8;
                assert_eq!(rep.bipartite, bip_spectral, "trial {trial}");
            }
        }
    }

    #[test]
    fn union_doubling_preserves_spectrum() {
        let mut rng = SplitMix64::new(7);
        let g = families::random_weighted(&mut rng, 6, true, 0.5);
        let doubled = union(&g, &g).unwrap();
        let r1 = spectral_report(&g).unwrap();
        let r2 = spectral_report(&doubled).unwrap();
        for (a, b) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_check_trivial_cases() {
        let g = families::complete(5);
        let empty = crate::graph::WeightedGraph::empty(5);
        let rec = perturbation_bound_check(&g, &empty).unwrap();
        assert_eq!(rec.delta_prime, 0.0);
        assert!(rec.lhs.abs() < 1e-14 && rec.holds);

        let rec = perturbation_bound_check(&g, &g).unwrap();
        assert!((rec.delta_prime - 1.0).abs() < 1e-14);
        assert!(rec.lhs < 1e-12 && rec.holds);
    }

    #[test]
    fn perturbation_check_random_small_pairs() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..50 {
            let n = 3 + (rng.next_below(6) as u32);
            let g1 = families::random_weighted(&mut rng, n, true, 0.5);
            let g2 = families::random_weighted(&mut rng, n, false, 0.5);
            // scale g2 so that d₂ ≤ 0.1·d₁ pointwise
            let d1min = g1.degrees().into_iter().fold(f64::INFINITY, f64::min);
            let d2max = g2.degrees().into_iter().fold(0.0f64, f64::max);
            let g2 = if d2max > 0.0 { g2.scale(0.1 * d1min / d2max) } else { g2 };
            let rec = perturbation_bound_check(&g1, &g2).unwrap();
            assert!(rec.delta_prime <= 0.1 + 1e-12);
            assert!(rec.holds, "lhs={} delta'={}", rec.lhs, rec.delta_prime);
        }
    }

    #[test]
    fn union_gap_bound_regular_cases() {
        // complete graphs are regular: δ = 0, bound = max of the two norms
        let g1 = families::complete(6);
        let g2 = families::cycle(6);
        let rec = union_gap_bound(&g1, &g2).unwrap();
        assert!(rec.delta.abs() < 1e-14);
        let n1 = spectral_report(&g1).unwrap().restricted_norm;
        let n2 = spectral_report(&g2).unwrap().restricted_norm;
        assert!((rec.bound - n1.max(n2)).abs() < 1e-12);
        assert!(rec.holds);

        // g ∪ g for regular g: equality up to rounding
        let rec = union_gap_bound(&g1, &g1).unwrap();
        assert!((rec.norm_sum - rec.bound).abs() < 1e-12);
        assert!(rec.holds);
    }

    #[test]
    fn union_gap_bound_random_small_pairs() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..50 {
            let n = 3 + (rng.next_below(6) as u32);
            let g1 = families::random_weighted(&mut rng, n, true, 0.5);
            let g2 = families::random_weighted(&mut rng, n, true, 0.5);
            let rec = union_gap_bound(&g1, &g2).unwrap();
            assert!(rec.holds, "norm={} bound={} delta={}", rec.norm_sum, rec.bound, rec.delta);
        }
    }
}
