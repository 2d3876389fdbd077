//! The p-Laplacian Δ_p and two-sided bounds on its first positive
//! eigenvalue λ_{1,p} = 1/(2·π_p^p).
//!
//! A Poincaré lower estimate π̂ ≤ π_p therefore yields an UPPER bound
//! 1/(2π̂^p) on λ_{1,p}; a two-sided spectral gap yields a LOWER bound via
//! interpolation plus uniform convexity.

use crate::graph::{GraphError, VertexFunction, WeightedGraph};
use crate::numeric::spow;
use crate::poincare::{
    interpolation_norm_upper, poincare_estimate, PoincareError, Result,
};
use crate::spectral::spectral_report;

/// Bounds on λ_{1,p} for one graph.
#[derive(Debug, Clone, Copy)]
pub struct PLaplacianReport {
    pub p: f64,
    /// 1/(2·π̂^p) computed from the best Poincaré witness.
    pub lambda_1p_upper: f64,
    /// Gap-driven lower bound (when a gap was supplied):
    /// (1 − 2^{1−2/p}·gap^{2/p})^p · (1/2 + 2^{1−p}), clamped to 0 when the
    /// interpolated norm reaches 1.
    pub lambda_lower_from_gap: Option<f64>,
}

/// Δ_p f(s) = (1/d(s)) Σ_t ω(s,t)·{f(s) − f(t)}^{p−1} with the signed power
/// {z}^α = |z|^{α−1}z. Scalar functions only; p > 1.
pub fn p_laplacian_apply(
    g: &WeightedGraph,
    f: &VertexFunction,
    p: f64,
) -> std::result::Result<VertexFunction, GraphError> {
    assert_eq!(f.dim(), 1, "the p-Laplacian is defined for scalar functions");
    assert!(p > 1.0);
    let n = g.vertex_count() as usize;
    assert_eq!(f.len(), n, "function length must match vertex count");
    let degrees = g.degrees();
    for (s, &d) in degrees.iter().enumerate() {
        if d <= 0.0 {
            return Err(GraphError::IsolatedVertex(s as u32));
        }
    }
    let mut out = VertexFunction::zeros(n, 1);
    for (s, t, w) in g.edges() {
        if s == t {
            continue; // {0}^{p−1} = 0
        }
        let (si, ti) = (s as usize, t as usize);
        let diff = f.data()[si] - f.data()[ti];
        let e = spow(diff, p - 1.0);
        out.data_mut()[si] += w * e;
        out.data_mut()[ti] -= w * e; // {−z}^{p−1} = −{z}^{p−1}
    }
    for s in 0..n {
        out.data_mut()[s] /= degrees[s];
    }
    Ok(out)
}

/// Gap-driven lower bound for λ_{1,p}; 0 when vacuous.
pub fn lambda_lower_from_gap(p: f64, gap: f64) -> f64 {
    let base = 1.0 - interpolation_norm_upper(p, gap);
    if base <= 0.0 {
        0.0
    } else {
        base.powf(p) * (0.5 + 2.0f64.powf(1.0 - p))
    }
}

/// Computes both λ_{1,p} bounds. A supplied `gap` must equal the graph's
/// two-sided gap ‖A⁰‖ within 1e−9 (it is cross-checked).
pub fn lambda1p_report(
    g: &WeightedGraph,
    p: f64,
    restarts: u32,
    seed: u64,
    gap: Option<f64>,
) -> Result<PLaplacianReport> {
    if let Some(eps) = gap {
        let rep = spectral_report(g)?;
        if (eps - rep.restricted_norm).abs() > 1e-9 {
            return Err(PoincareError::BadParameter(format!(
                "supplied gap {eps} does not match the graph's ‖A⁰‖ = {}",
                rep.restricted_norm
            )));
        }
    }
    let est = poincare_estimate(g, p, 1, restarts, seed)?;
    let lambda_1p_upper = 1.0 / (2.0 * est.lower_estimate.powf(p));
    Ok(PLaplacianReport {
        p,
        lambda_1p_upper,
        lambda_lower_from_gap: gap.map(|eps| lambda_lower_from_gap(p, eps)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{families, markov_apply};
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    #[test]
    fn constant_functions_are_in_the_kernel() {
        let g = families::complete(5);
        let f = VertexFunction::scalar(vec![3.2; 5]);
        for &p in &[2.0, 3.0, 4.5] {
            let out = p_laplacian_apply(&g, &f, p).unwrap();
            assert!(out.data().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn two_point_signed_power_hand_value() {
        let g = families::path(2);
        let f = VertexFunction::scalar(vec![0.0, 1.0]);
        let out = p_laplacian_apply(&g, &f, 3.0).unwrap();
        assert_eq!(out.data(), &[-1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn p2_laplacian_is_identity_minus_markov(seed in 0u64..200) {
            let mut rng = SplitMix64::new(seed);
            let n = 2 + rng.next_below(7) as u32;
            let g = families::random_weighted(&mut rng, n, true, 0.5);
            let mut f = VertexFunction::zeros(n as usize, 1);
            for x in f.data_mut() {
                *x = rng.next_normal();
            }
            let lap = p_laplacian_apply(&g, &f, 2.0).unwrap();
            let af = markov_apply(&g, &f).unwrap();
            for s in 0..n as usize {
                let want = f.data()[s] - af.data()[s];
                prop_assert!((lap.data()[s] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gap_lower_bound_formula_values() {
        // gap 0 at p = 2: (1)²·(1/2 + 1/2) = 1, matching λ_{1,2} = 1 − μ₂
        assert_eq!(lambda_lower_from_gap(2.0, 0.0), 1.0);
        // at the certifiable-gap threshold the bound stays above 1/2
        for &p in &[2.0, 3.0, 4.0] {
            let eps = crate::certify::epsilon_lp(p).unwrap();
            let lower = lambda_lower_from_gap(p, eps);
            assert!(lower > 0.5, "p={p}: {lower}");
        }
        // vacuous regime clamps to zero
        assert_eq!(lambda_lower_from_gap(3.0, 0.999), 0.0);
    }

    #[test]
    fn k3_report_matches_spectral_identity() {
        let g = families::complete(3);
        let rep = spectral_report(&g).unwrap();
        let r = lambda1p_report(&g, 2.0, 24, 5, Some(rep.restricted_norm)).unwrap();
        // λ_{1,2} = 1 − μ₂ = 3/2 and the p = 2 estimate is sharp
        assert!((r.lambda_1p_upper - 1.5).abs() < 1e-5, "{}", r.lambda_1p_upper);
        let lower = r.lambda_lower_from_gap.unwrap();
        assert!(r.lambda_1p_upper >= lower - 1e-9);
    }

    #[test]
    fn upper_bound_dominates_gap_lower_bound() {
        let mut rng = SplitMix64::new(4096);
        for trial in 0..6u64 {
            let n = 3 + (rng.next_below(5) as u32);
            let g = families::random_weighted(&mut rng, n, true, 0.6);
            let rep = spectral_report(&g).unwrap();
            for &p in &[2.0, 3.0] {
                let r = lambda1p_report(&g, p, 16, trial, Some(rep.restricted_norm)).unwrap();
                let lower = r.lambda_lower_from_gap.unwrap();
                assert!(
                    r.lambda_1p_upper >= lower - 1e-9,
                    "p={p}: upper {} lower {lower}",
                    r.lambda_1p_upper
                );
            }
        }
    }

    #[test]
    fn mismatched_gap_is_rejected() {
        let g = families::complete(3);
        assert!(matches!(
            lambda1p_report(&g, 2.0, 4, 0, Some(0.9)),
            Err(PoincareError::BadParameter(_))
        ));
    }
}
