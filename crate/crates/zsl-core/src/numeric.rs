//! Scalar helpers shared by the optimizer, the p-Laplacian, and the energy
//! iteration: signed powers and one-dimensional convex minimisation.

/// Signed power `{z}^α = |z|^{α−1} z`, with `{0}^α = 0`.
///
/// This is the odd extension of `z ↦ z^α` used by the Mazur map and the
/// p-Laplacian; callers treat its derivative at 0 as 0.
#[inline]
pub fn spow(z: f64, alpha: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    if alpha == 1.0 {
        return z;
    }
    if alpha == 2.0 {
        return z.abs() * z;
    }
    if alpha == 3.0 {
        return z * z * z;
    }
    if alpha == 7.0 {
        let s = z * z;
        return s * s * s * z;
    }
    z.abs().powf(alpha - 1.0) * z
}

/// `|z|^p` with fast paths for the exponents that dominate the workloads.
#[inline]
pub fn pow_abs(z: f64, p: f64) -> f64 {
    if p == 2.0 {
        z * z
    } else if p == 1.0 {
        z.abs()
    } else if p == 3.0 {
        let a = z.abs();
        a * a * a
    } else if p == 4.0 {
        let s = z * z;
        s * s
    } else if p == 8.0 {
        let s = z * z;
        let q = s * s;
        q * q
    } else {
        z.abs().powf(p)
    }
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
///
/// Runs until the bracket is narrower than `tol` (absolute) and returns the
/// bracket midpoint with its value. Deterministic: fixed arithmetic, no
/// randomness.
pub fn golden_min(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    debug_assert!(lo <= hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if hi - lo <= tol {
        let x = 0.5 * (lo + hi);
        return (x, f(x));
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 == f2 {
            // plateau (ulp-flat region near the minimum): shrink both sides —
            // unimodality puts the minimum inside [x1, x2]
            lo = x1;
            hi = x2;
            x1 = hi - INV_PHI * (hi - lo);
            x2 = lo + INV_PHI * (hi - lo);
            f1 = f(x1);
            f2 = f(x2);
        } else if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Tolerance used for every inner one-dimensional minimisation in the crate.
pub const CENTER_TOL: f64 = 1e-12;

/// Weighted one-dimensional p-center: the `x` minimising
/// `Σ_i w_i |v_i − x|^p` for `p ≥ 1`, found by golden-section search on the
/// bracket `[min v, max v]` (the minimiser of a convex coercive objective
/// lies inside the data range).
pub fn lp_center(weights: &[f64], values: &[f64], p: f64) -> f64 {
    debug_assert_eq!(weights.len(), values.len());
    debug_assert!(!values.is_empty());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo <= CENTER_TOL {
        return 0.5 * (lo + hi);
    }
    let obj = |x: f64| {
        let mut s = 0.0;
        for (&w, &v) in weights.iter().zip(values) {
            s += w * pow_abs(v - x, p);
        }
        s
    };
    golden_min(lo, hi, CENTER_TOL, obj).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spow_is_odd_and_matches_powers() {
        assert_eq!(spow(0.0, 0.5), 0.0);
        assert_eq!(spow(-1.0, 2.0), -1.0);
        assert_eq!(spow(2.0, 3.0), 8.0);
        assert_eq!(spow(-2.0, 3.0), -8.0);
        for &z in &[-2.5, -0.3, 0.4, 1.7] {
            for &a in &[0.5, 1.0, 1.5, 2.0, 3.0, 7.0] {
                assert!((spow(z, a) + spow(-z, a)).abs() < 1e-15);
                let want = z.abs().powf(a - 1.0) * z;
                assert!((spow(z, a) - want).abs() <= 1e-12 * want.abs().max(1.0), "z={z} a={a}");
            }
        }
    }

    #[test]
    fn pow_abs_fast_paths_agree_with_powf() {
        for &z in &[-3.0f64, -0.7, 0.0, 0.2, 1.9] {
            for &p in &[1.0f64, 2.0, 3.0, 4.0, 8.0, 2.5] {
                let want = z.abs().powf(p);
                assert!((pow_abs(z, p) - want).abs() <= 1e-12 * want.max(1.0));
            }
        }
    }

    #[test]
    fn golden_min_finds_quadratic_vertex() {
        // x-accuracy near a smooth minimum is √ulp-limited (value plateau);
        // the minimum VALUE is exact to full precision.
        let (x, fx) = golden_min(-10.0, 10.0, 1e-12, |x| (x - 3.25) * (x - 3.25) + 1.0);
        assert!((x - 3.25).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lp_center_p2_is_weighted_mean() {
        let w = [0.2, 0.3, 0.5];
        let v = [1.0, -2.0, 4.0];
        let mean = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        assert!((lp_center(&w, &v, 2.0) - mean).abs() < 1e-7);
    }

    #[test]
    fn lp_center_p1_is_weighted_median_point() {
        // Majority weight on one value pins the L1 center there.
        let w = [0.7, 0.2, 0.1];
        let v = [5.0, -1.0, 9.0];
        assert!((lp_center(&w, &v, 1.0) - 5.0).abs() < 1e-6);
    }

    #[test]
    fn lp_center_two_points_symmetric_is_midpoint() {
        for &p in &[1.5, 2.0, 3.0, 8.0] {
            let c = lp_center(&[0.5, 0.5], &[0.0, 1.0], p);
            assert!((c - 0.5).abs() < 1e-7, "p={p} c={c}");
        }
    }
}
