//! Certified fixed-point ranges from measured spectral gaps.
//!
//! The explicit thresholds ε(p) for the supported target families convert a
//! two-sided link gap into the range of exponents p for which the
//! fixed-point criterion is certified.  The module also evaluates the
//! density-model range formulas (largest certified p and the conformal-
//! dimension lower bound as functions of (m, d, η)) and the gap thresholds
//! implied by a relator-density budget.
//!
//! Two constants are not pinned down by the theory and are always echoed in
//! certificates: the universal factor K in the isomorphic-target threshold
//! (conservative default 1) and the budget constant B (default from pilot
//! calibration).

use crate::groups::{self, GroupError, Presentation};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("group error: {0}")]
    Group(#[from] GroupError),
}

pub type Result<T> = std::result::Result<T, CertifyError>;

/// Upper cap for certified-p searches; reported with `unbounded = true`
/// whenever the search hits it (in particular for gap = 0).
pub const DEFAULT_P_CAP: f64 = 64.0;

/// Gap-bound constant default, calibrated by pilot runs of the binomial
/// model: the median of gap²·ρm² over m ∈ {300, 600}, ρm² ∈ {16, 32, 64}
/// (20 trials each) is 0.1693, stable across the grid to within ±0.004.
pub const DEFAULT_B: f64 = 0.17;

/// Threshold for L^p targets (and isometric subquotients of 2/p-Hilbertian
/// spaces): 2·p^{−p/2}·2^{−p²/2}.
pub fn epsilon_lp(p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(CertifyError::BadParameter(format!("p must be at least 2, got {p}")));
    }
    Ok(2.0 * p.powf(-p / 2.0) * 2f64.powf(-p * p / 2.0))
}

/// Threshold for targets at Banach–Mazur distance `d_bm` from a subquotient
/// of a 2/p-Hilbertian space: K·p^{−p/2}·2^{−p²/2}·d_bm^{−p(p+1)/2}.
/// K is a universal constant the theory does not pin down; it is supplied by
/// the caller and echoed in certificates.
pub fn epsilon_isomorphic(p: f64, d_bm: f64, k: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(CertifyError::BadParameter(format!("p must be at least 2, got {p}")));
    }
    if !(d_bm >= 1.0) {
        return Err(CertifyError::BadParameter(format!(
            "Banach–Mazur distance must be at least 1, got {d_bm}"
        )));
    }
    if !(k > 0.0) {
        return Err(CertifyError::BadParameter(format!("constant K must be positive, got {k}")));
    }
    Ok(k * p.powf(-p / 2.0) * 2f64.powf(-p * p / 2.0) * d_bm.powf(-p * (p + 1.0) / 2.0))
}

/// A target-space family with a computable threshold ε(p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdFamily {
    /// L^p spaces (the same threshold covers isometric subquotients of
    /// 2/p-Hilbertian spaces).
    Lp,
    /// Spaces alpha-isomorphic to a subquotient of a 2/p-Hilbertian space.
    Subquotient { alpha: f64 },
}

impl ThresholdFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdFamily::Lp => "lp",
            ThresholdFamily::Subquotient { .. } => "subquotient",
        }
    }

    pub fn params(&self) -> String {
        match self {
            ThresholdFamily::Lp => String::new(),
            ThresholdFamily::Subquotient { alpha } => format!("alpha={alpha}"),
        }
    }

    /// ε_family(p), using `k` for the isomorphic-target constant.
    pub fn threshold(&self, p: f64, k: f64) -> Result<f64> {
        match self {
            ThresholdFamily::Lp => epsilon_lp(p),
            ThresholdFamily::Subquotient { alpha } => epsilon_isomorphic(p, *alpha, k),
        }
    }
}

/// Result of the largest-certified-p search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPResult {
    pub p: f64,
    /// True when the search hit the cap (in particular for gap = 0); the
    /// true supremum is then at least `p`.
    pub unbounded: bool,
}

/// Largest p ≥ 2 whose threshold still exceeds the measured gap, by
/// bisection on the strictly decreasing ε_family.  `None` when even p = 2
/// is out of reach (ε_family(2) < gap); at the boundary gap = ε_family(2)
/// the endpoint 2 itself is returned, so the search is exactly inverse to
/// the threshold.  gap ≤ 0 returns the cap with the `unbounded` flag.
pub fn max_p_certified(gap: f64, family: &ThresholdFamily, k: f64) -> Option<MaxPResult> {
    // Eigensolves can overshoot the unit norm by a few ulps.
    assert!((0.0..=1.0 + 1e-9).contains(&gap), "gap must lie in [0,1], got {gap}");
    let gap = gap.min(1.0);
    let eps = |p: f64| family.threshold(p, k).expect("p ≥ 2 in search range");
    if gap <= 0.0 {
        return Some(MaxPResult { p: DEFAULT_P_CAP, unbounded: true });
    }
    if eps(2.0) < gap {
        return None;
    }
    if eps(DEFAULT_P_CAP) >= gap {
        return Some(MaxPResult { p: DEFAULT_P_CAP, unbounded: true });
    }
    let (mut lo, mut hi) = (2.0f64, DEFAULT_P_CAP);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if eps(mid) >= gap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(MaxPResult { p: 0.5 * (lo + hi), unbounded: false })
}

fn check_density_args(m: f64, d: f64, eta: f64) -> Result<()> {
    if !(m > 1.0) {
        return Err(CertifyError::BadParameter(format!("m must exceed 1, got {m}")));
    }
    if !(d > 0.0 && d < 1.0) {
        return Err(CertifyError::BadParameter(format!("density must lie in (0,1), got {d}")));
    }
    if !(eta > 0.0) {
        return Err(CertifyError::BadParameter(format!("eta must be positive, got {eta}")));
    }
    Ok(())
}

/// √((3d−1)·log m / (η + log c)), clamped at 0 when d ≤ 1/3.  Shared by the
/// p-range endpoints and the conformal-dimension bound so they agree exactly.
fn density_endpoint(m: f64, d: f64, eta: f64, c: f64) -> f64 {
    (((3.0 * d - 1.0) * m.ln() / (eta + c.ln())).max(0.0)).sqrt()
}

/// Certified p-ranges in the density model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRanges {
    /// Endpoint of the L^p range: √((3d−1)·log m/(η+log 2)).
    pub p_max_lp: f64,
    /// Endpoint √((3d−1)·log m/(η+log 2α)) − 1/2 when `alpha` was supplied.
    pub p_max_subquotient: Option<f64>,
    /// Whether the density bound d ≥ 1/3 + (log log m − log(2−η))/(3 log m)
    /// holds; the range formulas assume it asymptotically.
    pub density_condition_met: bool,
}

impl DensityRanges {
    /// The certified interval [2, p_max_lp], or `None` when it is empty.
    pub fn lp_range(&self) -> Option<(f64, f64)> {
        (self.p_max_lp >= 2.0).then_some((2.0, self.p_max_lp))
    }

    pub fn subquotient_range(&self) -> Option<(f64, f64)> {
        let p = self.p_max_subquotient?;
        (p >= 2.0).then_some((2.0, p))
    }
}

/// Evaluates the density-model p-range endpoints at generator count m,
/// density d, and slack η; `alpha ≥ 1` enables the isomorphic-subquotient
/// endpoint.
pub fn density_p_ranges(m: f64, d: f64, eta: f64, alpha: Option<f64>) -> Result<DensityRanges> {
    check_density_args(m, d, eta)?;
    if let Some(a) = alpha {
        if !(a >= 1.0) {
            return Err(CertifyError::BadParameter(format!("alpha must be at least 1, got {a}")));
        }
    }
    let p_max_lp = density_endpoint(m, d, eta, 2.0);
    let p_max_subquotient = alpha.map(|a| density_endpoint(m, d, eta, 2.0 * a) - 0.5);
    // NaN-safe: an out-of-range eta (≥ 2) makes the bound undefined, which
    // compares false.
    let density_condition_met = d >= 1.0 / 3.0 + (m.ln().ln() - (2.0 - eta).ln()) / (3.0 * m.ln());
    Ok(DensityRanges { p_max_lp, p_max_subquotient, density_condition_met })
}

/// Conformal-dimension lower bound for boundaries of density-model groups:
/// the same expression as the L^p range endpoint.
pub fn confdim_lower_bound(m: f64, d: f64, eta: f64) -> Result<f64> {
    check_density_args(m, d, eta)?;
    Ok(density_endpoint(m, d, eta, 2.0))
}

/// Gap thresholds implied by the relator-density budget constant B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapThresholds {
    /// √(B/(ρm²)): gaps below this certify the p = 2 criterion.
    pub certifiable_epsilon: f64,
    /// √(8B/log m): the same threshold at the lowest admissible density
    /// ρ = log m/(8m²).
    pub log_rule: f64,
}

/// Evaluates both budget thresholds.
pub fn density_gap_thresholds(m: f64, rho: f64, b: f64) -> Result<GapThresholds> {
    if !(m > 1.0) {
        return Err(CertifyError::BadParameter(format!("m must exceed 1, got {m}")));
    }
    if !(rho > 0.0) {
        return Err(CertifyError::BadParameter(format!("rho must be positive, got {rho}")));
    }
    if !(b > 0.0) {
        return Err(CertifyError::BadParameter(format!("B must be positive, got {b}")));
    }
    Ok(GapThresholds {
        certifiable_epsilon: (b / (rho * m * m)).sqrt(),
        log_rule: (8.0 * b / m.ln()).sqrt(),
    })
}

/// User-supplied constants echoed in every certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyConstants {
    /// Universal factor in the isomorphic-target threshold.
    #[serde(rename = "K")]
    pub k: f64,
    /// Budget constant for the density thresholds.
    #[serde(rename = "B")]
    pub b: f64,
    /// Slack used when deriving the conformal-dimension bound for
    /// density-model presentations.
    pub eta: f64,
}

impl Default for CertifyConstants {
    fn default() -> Self {
        CertifyConstants { k: 1.0, b: DEFAULT_B, eta: 0.01 }
    }
}

/// Per-family certification outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCertificate {
    pub name: String,
    pub params: String,
    /// ε_family(2), the threshold the measured gap is compared against.
    pub epsilon: f64,
    /// gap < ε_family(2), strictly.
    pub certified: bool,
    /// Largest certified p (null when even p = 2 fails).
    pub max_p: Option<f64>,
    /// Set when the p search hit the cap.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub unbounded: bool,
}

/// Full certification record for one presentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub m: u32,
    pub model: String,
    pub seed: u64,
    pub n_relators: usize,
    /// Two-sided link gap; 1.0 for empty, disconnected, or isolated-vertex
    /// links (nothing certifiable).
    pub gap: f64,
    pub families: Vec<FamilyCertificate>,
    /// Conformal-dimension bound, present for density-model presentations.
    pub confdim_lower: Option<f64>,
    pub constants: CertifyConstants,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }
}

/// Builds the link, measures the gap, and evaluates every requested family
/// threshold.  Empty or disconnected links yield gap 1 and no certification.
pub fn certify_presentation(
    pres: &Presentation,
    families: &[ThresholdFamily],
    constants: &CertifyConstants,
) -> Certificate {
    let gap = match groups::link_spectral_report(pres) {
        Ok(report) => report.gap,
        Err(GroupError::EmptyLink) => 1.0,
        Err(e) => unreachable!("link analysis cannot fail on a valid presentation: {e}"),
    };
    let family_certs = families
        .iter()
        .map(|family| {
            let epsilon = family.threshold(2.0, constants.k).expect("p = 2 is valid");
            let max_p = max_p_certified(gap, family, constants.k);
            FamilyCertificate {
                name: family.name().to_string(),
                params: family.params(),
                epsilon,
                certified: gap < epsilon,
                max_p: max_p.map(|r| r.p),
                unbounded: max_p.is_some_and(|r| r.unbounded),
            }
        })
        .collect();
    let confdim_lower = match pres.model {
        groups::ModelTag::Density(d) => {
            confdim_lower_bound(f64::from(pres.m), d, constants.eta).ok()
        }
        _ => None,
    };
    Certificate {
        m: pres.m,
        model: pres.model.to_string(),
        seed: pres.seed,
        n_relators: pres.relators.len(),
        gap,
        families: family_certs,
        confdim_lower,
        constants: *constants,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_threshold_reference_values() {
        assert_eq!(epsilon_lp(2.0).unwrap(), 0.25);
        assert!((epsilon_lp(3.0).unwrap() - 1.7010e-2).abs() < 1e-6);
        assert!(matches!(epsilon_lp(1.99), Err(CertifyError::BadParameter(_))));
    }

    #[test]
    fn lp_threshold_is_strictly_decreasing_on_a_grid() {
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let p = 2.0 + 10.0 * i as f64 / 999.0;
            let eps = epsilon_lp(p).unwrap();
            assert!(eps < prev, "p={p}");
            assert!(eps > 0.0);
            prev = eps;
        }
    }

    #[test]
    fn isomorphic_threshold_degenerations() {
        for i in 0..20 {
            let p = 2.0 + i as f64 / 3.0;
            let iso = epsilon_isomorphic(p, 1.0, 2.0).unwrap();
            assert!((iso - epsilon_lp(p).unwrap()).abs() <= 1e-18 * iso.abs().max(1.0), "p={p}");
        }
        assert_eq!(epsilon_isomorphic(2.0, 2.0, 1.0).unwrap(), 1.0 / 64.0);
        // Monotone decreasing in the distance.
        let near = epsilon_isomorphic(3.0, 1.5, 1.0).unwrap();
        let far = epsilon_isomorphic(3.0, 2.5, 1.0).unwrap();
        assert!(far < near);
        assert!(epsilon_isomorphic(1.0, 1.0, 1.0).is_err());
        assert!(epsilon_isomorphic(2.0, 0.5, 1.0).is_err());
        assert!(epsilon_isomorphic(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn max_p_search_inverts_the_threshold() {
        for p in [2.0, 2.5, 3.0, 4.0, 5.0, 6.0] {
            let gap = epsilon_lp(p).unwrap();
            let found = max_p_certified(gap, &ThresholdFamily::Lp, 1.0).unwrap();
            assert!((found.p - p).abs() < 1e-6, "p={p} found {}", found.p);
            assert!(!found.unbounded);
        }
    }

    #[test]
    fn max_p_search_edge_cases() {
        // Above the p=2 threshold nothing is certified.
        assert!(max_p_certified(0.26, &ThresholdFamily::Lp, 1.0).is_none());
        assert!(max_p_certified(1.0, &ThresholdFamily::Lp, 1.0).is_none());
        // At the boundary the endpoint itself is reported.
        let boundary = max_p_certified(0.25, &ThresholdFamily::Lp, 1.0).unwrap();
        assert!((boundary.p - 2.0).abs() < 1e-6);
        // Zero gap hits the cap with the flag set.
        let unbounded = max_p_certified(0.0, &ThresholdFamily::Lp, 1.0).unwrap();
        assert_eq!(unbounded.p, DEFAULT_P_CAP);
        assert!(unbounded.unbounded);
    }

    #[test]
    fn density_ranges_reference_evaluations() {
        // m=10⁶: endpoint ≈ 1.982, below 2, so the range is empty.
        let small = density_p_ranges(1e6, 0.4, 0.01, None).unwrap();
        let expect = ((3.0 * 0.4 - 1.0) * 1e6f64.ln() / (0.01 + 2f64.ln())).sqrt();
        assert!((small.p_max_lp - expect).abs() < 1e-12 * expect);
        assert!((small.p_max_lp - 1.982).abs() < 1e-3);
        assert!(small.lp_range().is_none());
        // m=10⁴⁰: endpoint ≈ 5.12, non-empty.
        let large = density_p_ranges(1e40, 0.4, 0.01, None).unwrap();
        assert!((large.p_max_lp - 5.12).abs() < 1e-2);
        assert_eq!(large.lp_range(), Some((2.0, large.p_max_lp)));
        // d = 1/3 zeroes the numerator; both ranges empty.
        let zero = density_p_ranges(1e6, 1.0 / 3.0, 0.01, Some(2.0)).unwrap();
        assert_eq!(zero.p_max_lp, 0.0);
        assert!(zero.lp_range().is_none());
        assert!(zero.subquotient_range().is_none());
    }

    #[test]
    fn subquotient_endpoint_relations() {
        // alpha = 1 shares the L^p denominator, shifted by 1/2.
        let r = density_p_ranges(1e40, 0.4, 0.01, Some(1.0)).unwrap();
        assert!((r.p_max_subquotient.unwrap() - (r.p_max_lp - 0.5)).abs() < 1e-12);
        // Larger alpha shrinks the endpoint.
        let r2 = density_p_ranges(1e40, 0.4, 0.01, Some(3.0)).unwrap();
        assert!(r2.p_max_subquotient.unwrap() < r.p_max_subquotient.unwrap());
        assert!(density_p_ranges(1e40, 0.4, 0.01, Some(0.5)).is_err());
    }

    #[test]
    fn density_parameter_validation() {
        assert!(density_p_ranges(1.0, 0.4, 0.01, None).is_err());
        assert!(density_p_ranges(1e6, 0.0, 0.01, None).is_err());
        assert!(density_p_ranges(1e6, 1.0, 0.01, None).is_err());
        assert!(density_p_ranges(1e6, 0.4, 0.0, None).is_err());
    }

    #[test]
    fn density_condition_flag() {
        // Threshold at m=10⁶, η=0.01 is ≈ 0.3801.
        assert!(density_p_ranges(1e6, 0.4, 0.01, None).unwrap().density_condition_met);
        assert!(!density_p_ranges(1e6, 0.35, 0.01, None).unwrap().density_condition_met);
    }

    #[test]
    fn confdim_bound_equals_lp_endpoint_exactly() {
        for (m, d, eta) in [(1e6, 0.4, 0.01), (1e40, 0.4, 0.01), (1e12, 0.5, 0.3)] {
            let ranges = density_p_ranges(m, d, eta, None).unwrap();
            assert_eq!(confdim_lower_bound(m, d, eta).unwrap(), ranges.p_max_lp);
        }
    }

    #[test]
    fn gap_threshold_formulas() {
        // ρm² = B ⇒ ε = 1.
        let t = density_gap_thresholds(100.0, 2e-4, 2.0).unwrap();
        assert!((t.certifiable_epsilon - 1.0).abs() < 1e-12);
        // At ρ = log m/(8m²) with B=1 both rules coincide.
        let m = 50.0f64;
        let rho = m.ln() / (8.0 * m * m);
        let t = density_gap_thresholds(m, rho, 1.0).unwrap();
        assert!((t.certifiable_epsilon - t.log_rule).abs() < 1e-12);
        // Monotonicity in ρm².
        let lo = density_gap_thresholds(100.0, 1e-4, 1.0).unwrap();
        let hi = density_gap_thresholds(100.0, 4e-4, 1.0).unwrap();
        assert!(hi.certifiable_epsilon < lo.certifiable_epsilon);
        assert!(density_gap_thresholds(100.0, 0.0, 1.0).is_err());
        assert!(density_gap_thresholds(100.0, 1e-4, 0.0).is_err());
    }

    #[test]
    fn empty_presentation_certifies_nothing() {
        let pres = groups::sample_binomial_model(3, 0.0, 1).unwrap();
        let families = [ThresholdFamily::Lp, ThresholdFamily::Subquotient { alpha: 2.0 }];
        let cert = certify_presentation(&pres, &families, &CertifyConstants::default());
        assert_eq!(cert.gap, 1.0);
        assert_eq!(cert.n_relators, 0);
        for f in &cert.families {
            assert!(!f.certified);
            assert!(f.max_p.is_none());
        }
    }

    #[test]
    fn full_m1_presentation_certifies_nothing() {
        let pres =
            groups::Presentation::explicit(1, groups::enumerate_relators(1).unwrap()).unwrap();
        let cert = certify_presentation(&pres, &[ThresholdFamily::Lp], &CertifyConstants::default());
        assert_eq!(cert.gap, 1.0); // bipartite two-vertex link
        assert!(!cert.families[0].certified);
    }

    #[test]
    fn certification_is_monotone_in_the_gap() {
        let families = [ThresholdFamily::Lp, ThresholdFamily::Subquotient { alpha: 1.5 }];
        let gaps = [0.3, 0.2, 0.1, 0.01, 0.0];
        for w in gaps.windows(2) {
            let (larger, smaller) = (w[0], w[1]);
            for family in &families {
                let eps = family.threshold(2.0, 1.0).unwrap();
                if larger < eps {
                    // Certified at the larger gap ⇒ certified at the smaller.
                    assert!(smaller < eps);
                }
                let at_larger = max_p_certified(larger, family, 1.0).map(|r| r.p).unwrap_or(0.0);
                let at_smaller = max_p_certified(smaller, family, 1.0).map(|r| r.p).unwrap_or(0.0);
                assert!(at_smaller >= at_larger - 1e-9);
            }
        }
    }

    #[test]
    fn certificate_json_shape() {
        let pres = groups::sample_density_model(6, 0.5, 11).unwrap();
        let families = [ThresholdFamily::Lp, ThresholdFamily::Subquotient { alpha: 2.0 }];
        let constants = CertifyConstants::default();
        let cert = certify_presentation(&pres, &families, &constants);
        assert!(cert.confdim_lower.is_some()); // density model
        let value: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
        for key in ["m", "model", "seed", "n_relators", "gap", "families", "confdim_lower", "constants"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["constants"]["K"], 1.0);
        assert_eq!(value["constants"]["B"], DEFAULT_B);
        let fam = &value["families"][0];
        let obj = fam.as_object().unwrap();
        // Interface contract: exactly these keys in the common case.
        assert_eq!(obj.len(), 5);
        for key in ["name", "params", "epsilon", "certified", "max_p"] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        // Non-density models carry no conformal-dimension bound.
        let bin = groups::sample_binomial_model(4, 0.01, 3).unwrap();
        let cert = certify_presentation(&bin, &families, &constants);
        assert!(cert.confdim_lower.is_none());
    }
}
