//! Acceptance suite: one test per release gate, each a property of the
//! public API (or the binary) checked at a stated tolerance.  Tests are
//! numbered so the harness output reads as a checklist; comments state the
//! property being gated and the measurement behind any calibrated constant.
//!
//! a07a (degree interval coverage) is a known-red gate: the true coverage
//! of the fixed degree interval sits near 70%, not the gated 95%, because at
//! m = 2000 the lower Binomial tail alone makes ~30% of samples contain at
//! least one low-degree vertex.  The assertion is kept faithful rather than
//! widened; the failure message carries the measured rate and the tail
//! arithmetic.

use std::process::Command;
use zsl_core::certify::{self, ThresholdFamily};
use zsl_core::complex::{self, FiniteAction};
use zsl_core::graph::{families, measures, VertexFunction, WeightedGraph};
use zsl_core::groups;
use zsl_core::mc::{self, ErKind};
use zsl_core::poincare::{
    convexity_gap_threshold, functional_poincare_coefficient, gradient_lp_norm, lp_norm,
    poincare_estimate, poincare_estimate_with_iters,
};
use zsl_core::rng::SplitMix64;
use zsl_core::spectral::{perturbation_bound_check, spectral_report, union_gap_bound};

fn median(values: &[f64]) -> f64 {
    mc::median(values)
}

/// Relator enumeration is exact: (2m−1)³ + 1 cyclically reduced words of
/// length 3 on m generators, and the closed-form counter agrees.
#[test]
fn a01_relator_enumeration_count() {
    for m in 1..=5u32 {
        let listed = groups::enumerate_relators(m).unwrap().len() as u64;
        let formula = {
            let k = u64::from(2 * m - 1);
            k * k * k + 1
        };
        assert_eq!(listed, formula, "m = {m}");
        assert_eq!(groups::relator_count(m), formula, "m = {m}");
    }
}

/// The ratio-maximization lower estimate at p = 2 reproduces the closed
/// form 1/√(2 − 2μ₂) within 1e−6 on random connected graphs.
#[test]
fn a02_p2_estimate_matches_closed_form() {
    let mut rng = SplitMix64::new(0xACCE_0002);
    for trial in 0..50u64 {
        let n = 2 + (trial % 7) as u32; // 2..=8 vertices
        let g = families::random_weighted(&mut rng, n, true, 0.5);
        let report = spectral_report(&g).unwrap();
        let closed = 1.0 / (2.0 - 2.0 * report.mu2().unwrap()).sqrt();
        let est = poincare_estimate(&g, 2.0, 1, 32, 1000 + trial).unwrap();
        assert!(
            (est.lower_estimate - closed).abs() < 1e-6,
            "trial {trial} (n = {n}): estimate {} vs closed form {closed}",
            est.lower_estimate
        );
    }
}

/// On the two-point graph the p-Poincaré constant is exactly 1/2 for all p.
#[test]
fn a03_two_point_constant_is_half() {
    let g = families::path(2);
    for &p in &[1.5, 2.0, 3.0, 8.0] {
        let est = poincare_estimate(&g, p, 1, 8, 7).unwrap();
        assert!(
            (est.lower_estimate - 0.5).abs() < 1e-9,
            "p = {p}: {}",
            est.lower_estimate
        );
    }
}

/// Balanced complete bipartite graphs have walk spectrum inside {−1, 0, 1};
/// complete graphs have two-sided gap exactly 1/(m−1).
#[test]
fn a04_reference_spectra() {
    for n in [1u32, 2, 3, 4, 5, 8, 16, 31, 32, 64] {
        let report = spectral_report(&families::complete_bipartite(n, n)).unwrap();
        for &ev in &report.eigenvalues {
            let off = (ev - 1.0).abs().min(ev.abs()).min((ev + 1.0).abs());
            assert!(off < 1e-10, "K_{{{n},{n}}} eigenvalue {ev}");
        }
        assert!(report.bipartite, "K_{{{n},{n}}} must be flagged bipartite");
        assert!((report.restricted_norm - 1.0).abs() < 1e-10, "K_{{{n},{n}}} norm");
    }
    for m in 2..=64u32 {
        let report = spectral_report(&families::complete(m)).unwrap();
        let expect = 1.0 / f64::from(m - 1);
        assert!(
            (report.restricted_norm - expect).abs() < 1e-10,
            "K_{m}: {} vs {expect}",
            report.restricted_norm
        );
    }
}

/// Proven inequalities hold with at most 1e−9 slack: (a) adding a relative
/// perturbation of degree ratio δ′ moves the two-sided gap by at most δ′;
/// (b) the union bound min(1, δ + (1−δ)·max gap) dominates the union's gap.
#[test]
fn a05a_perturbation_and_union_bounds() {
    let mut rng = SplitMix64::new(0xACCE_0005);
    for trial in 0..1000u32 {
        let n = 3 + (u64::from(trial) % 6) as u32; // 3..=8 vertices
        let g1 = families::random_weighted(&mut rng, n, true, 0.4);
        let mut g2 = families::random_weighted(&mut rng, n, false, 0.5);
        // Scale the perturbation so its degree ratio δ′ lands in (0, 0.5].
        let d1 = g1.degrees();
        let raw: f64 = g2
            .degrees()
            .iter()
            .zip(&d1)
            .map(|(&a, &b)| a / b)
            .fold(0.0, f64::max);
        if raw > 0.0 {
            g2 = g2.scale(0.5 * rng.next_f64().max(0.05) / raw);
        }
        let pc = perturbation_bound_check(&g1, &g2).unwrap();
        assert!(pc.delta_prime <= 0.5 + 1e-12, "trial {trial}: δ′ {}", pc.delta_prime);
        assert!(
            pc.lhs <= pc.delta_prime + 1e-9,
            "trial {trial}: gap moved {} > δ′ {}",
            pc.lhs,
            pc.delta_prime
        );

        let h1 = families::random_weighted(&mut rng, n, true, 0.4);
        let h2 = families::random_weighted(&mut rng, n, true, 0.4);
        let ub = union_gap_bound(&h1, &h2).unwrap();
        assert!(
            ub.norm_sum <= ub.bound + 1e-9,
            "trial {trial}: union gap {} > bound {} (δ = {})",
            ub.norm_sum,
            ub.bound,
            ub.delta
        );
    }
}

/// Energy evaluation recomputes itself in both its pairwise and its
/// vertex-degree form and asserts their agreement at 1e−10 internally, so
/// every successful call certifies the identity; midpoint averaging never
/// increases energy.
#[test]
fn a05b_energy_identity_and_midpoint_inequality() {
    let shapes = [complex::shapes::triangle(), complex::shapes::octahedron()];
    let actions: Vec<FiniteAction> = shapes.iter().map(FiniteAction::trivial).collect();
    let mut rng = SplitMix64::new(0xACCE_0542);
    for trial in 0..1000u32 {
        let which = (trial % 2) as usize;
        let (cx, action) = (&shapes[which], &actions[which]);
        let n = cx.vertex_count() as usize;
        let k = 1 + (trial as usize / 2) % 2;
        let p = [2.0, 3.0, 4.0][(trial as usize / 4) % 3];
        let random_map = |rng: &mut SplitMix64| {
            let data: Vec<f64> = (0..n * k).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
            VertexFunction::from_data(k, data)
        };
        let phi = random_map(&mut rng);
        let psi = random_map(&mut rng);
        // Internal identity assert fires on disagreement; Ok certifies it.
        let mixed = complex::energy(cx, action, &phi, &psi, p).unwrap();
        let mid_data: Vec<f64> = phi
            .data()
            .iter()
            .zip(psi.data())
            .map(|(&a, &b)| 0.5 * (a + b))
            .collect();
        let mid = VertexFunction::from_data(k, mid_data);
        let e_mid = complex::energy(cx, action, &mid, &mid, p).unwrap();
        assert!(
            e_mid <= mixed + 1e-9,
            "trial {trial} (p = {p}, k = {k}): midpoint energy {e_mid} > mixed energy {mixed}"
        );
    }
}

/// Function-level mean-zero Poincaré bound: on graphs whose two-sided gap
/// is below 2/(p·2^p), every ν-mean-zero f obeys ‖f‖_p ≤ C(p, gap)·‖∇f‖_p.
#[test]
fn a05c_functional_poincare_bound() {
    let mut rng = SplitMix64::new(0xACCE_0543);
    let ps = [2.0, 3.0, 4.0];
    for graph_idx in 0..100u32 {
        // Noised complete graphs keep the two-sided gap under the strictest
        // (p = 4) threshold 1/32 once n exceeds ~40.
        let n = 40 + (graph_idx % 21);
        let mut g = WeightedGraph::empty(n);
        for s in 0..n {
            for t in s + 1..n {
                g.add_weight(s, t, 1.0 + 0.02 * rng.next_f64()).unwrap();
            }
        }
        let gap = spectral_report(&g).unwrap().restricted_norm;
        let m = measures(&g).unwrap();
        let coeffs: Vec<f64> = ps
            .iter()
            .map(|&p| {
                assert!(gap < convexity_gap_threshold(p), "n = {n}: gap {gap} too large");
                functional_poincare_coefficient(p, gap).unwrap()
            })
            .collect();
        for sample in 0..10u32 {
            let mut f = VertexFunction::zeros(n as usize, 1);
            for x in f.data_mut() {
                *x = 2.0 * rng.next_f64() - 1.0;
            }
            let mean: f64 = (0..n as usize).map(|s| m.nu[s] * f.row(s)[0]).sum();
            for s in 0..n as usize {
                f.row_mut(s)[0] -= mean;
            }
            for (&p, &coeff) in ps.iter().zip(&coeffs) {
                let lhs = lp_norm(&f, &m.nu, p);
                let rhs = coeff * gradient_lp_norm(&g, &f, p).unwrap();
                assert!(
                    lhs <= rhs + 1e-9,
                    "graph {graph_idx} sample {sample} p = {p}: ‖f‖ {lhs} > bound {rhs}"
                );
            }
        }
    }
}

/// At ρ = 2·log m/m the √(mρ)-scaled gap distribution is stable in m
/// (medians within ×1.5 between m = 1000 and m = 4000) and almost all
/// samples are connected.
#[test]
fn a06_er_scaled_gap_stability() {
    let grid: Vec<(u32, f64)> = [1000u32, 4000]
        .iter()
        .map(|&m| (m, 2.0 * f64::from(m).ln() / f64::from(m)))
        .collect();
    let rows = mc::run_er_montecarlo(ErKind::Gap, &grid, 50, 0xACCE_0006).unwrap();
    let connected = rows.iter().filter(|r| r.connected).count();
    assert!(
        connected * 10 >= rows.len() * 9,
        "{connected}/{} connected, need ≥ 90%",
        rows.len()
    );
    let med = |m: u32| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.m == m)
            .map(|r| r.scaled_gap.unwrap())
            .collect();
        median(&v)
    };
    let (lo, hi) = (med(1000), med(4000));
    let ratio = (lo / hi).max(hi / lo);
    println!("scaled-gap medians: m=1000 {lo:.4}, m=4000 {hi:.4}, ratio {ratio:.3}");
    assert!(ratio <= 1.5, "medians {lo} vs {hi}: ratio {ratio} > 1.5");
}

/// Degree interval coverage at m = 2000, ρ = 2·log m/m.  KNOWN RED: the
/// interval [0.25·mρ, 2.5·mρ] is not wide enough for a 95% all-vertices
/// guarantee at this scale — P(Bin(1999, ρ) ≤ 3) ≈ 1.8e−4, so a fraction
/// 1 − (1 − 1.8e−4)^2000 ≈ 0.30 of graphs contain at least one vertex
/// below the cutoff, leaving ~70% coverage.  The gate is kept faithful
/// instead of being widened to fit.
#[test]
fn a07a_degree_interval_coverage() {
    let m = 2000u32;
    let rho = 2.0 * f64::from(m).ln() / f64::from(m);
    let rows = mc::run_er_montecarlo(ErKind::Degrees, &[(m, rho)], 100, 0xACCE_0007).unwrap();
    let target = f64::from(m) * rho;
    let inside = rows
        .iter()
        .filter(|r| r.min_deg >= 0.25 * target && r.max_deg <= 2.5 * target)
        .count();
    assert!(
        inside >= 95,
        "degree interval coverage {inside}/100 < 95: at m = 2000 the lower Binomial tail \
         P(deg ≤ {:.0}) ≈ 1.8e−4 per vertex already implies ~30% of graphs miss the interval, \
         so ~70% coverage is the true rate; the 95% gate is not attainable with these constants",
        (0.25 * target).floor()
    );
}

/// The normalized l1 degree deviation scales like 1/√((m−1)ρ): the
/// rescaled medians agree within ×1.5 between m = 1000 and m = 4000.
#[test]
fn a07b_l1_degree_deviation_scaling() {
    let grid: Vec<(u32, f64)> = [1000u32, 4000]
        .iter()
        .map(|&m| (m, 2.0 * f64::from(m).ln() / f64::from(m)))
        .collect();
    let rows = mc::run_er_montecarlo(ErKind::Degrees, &grid, 100, 0xACCE_0072).unwrap();
    let med = |m: u32, rho: f64| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.m == m)
            .map(|r| r.l1_dev_expected * (f64::from(m - 1) * rho).sqrt())
            .collect();
        median(&v)
    };
    let lo = med(1000, grid[0].1);
    let hi = med(4000, grid[1].1);
    let ratio = (lo / hi).max(hi / lo);
    println!("rescaled l1 medians: m=1000 {lo:.4}, m=4000 {hi:.4}, ratio {ratio:.3}");
    assert!(ratio <= 1.5, "medians {lo} vs {hi}: ratio {ratio} > 1.5");
}

/// Random triangular presentations: the √(ρm²)-scaled link gap is stable
/// in m for each relator budget ρm² ∈ {16, 32, 64}, and the rate of gaps
/// under the p = 2 threshold 1/4 is non-decreasing in the budget.
#[test]
fn a08_group_gap_scaling_and_certification_rate() {
    let ms = [300u32, 600];
    let budgets = [16.0f64, 32.0, 64.0];
    let mut grid = Vec::new();
    for &m in &ms {
        for &b in &budgets {
            grid.push((m, b / (f64::from(m) * f64::from(m))));
        }
    }
    let rows = mc::run_group_montecarlo(&grid, 50, 0xACCE_0008).unwrap();
    let cell = |m: u32, b: f64| -> Vec<&mc::GroupRow> {
        rows.iter()
            .filter(|r| r.m == m && (r.param * f64::from(m) * f64::from(m) - b).abs() < 1e-9)
            .collect()
    };
    for &b in &budgets {
        let med_of = |m: u32| {
            let v: Vec<f64> = cell(m, b).iter().map(|r| r.gap * b.sqrt()).collect();
            median(&v)
        };
        let (lo, hi) = (med_of(300), med_of(600));
        let ratio = (lo / hi).max(hi / lo);
        println!("budget {b}: scaled medians m=300 {lo:.4}, m=600 {hi:.4}, ratio {ratio:.3}");
        assert!(ratio <= 1.5, "budget {b}: medians {lo} vs {hi} differ by {ratio} > 1.5");
    }
    for &m in &ms {
        let rates: Vec<usize> = budgets
            .iter()
            .map(|&b| cell(m, b).iter().filter(|r| r.gap < 0.25).count())
            .collect();
        println!("m = {m}: certification counts per budget {rates:?} / 50");
        assert!(
            rates[0] <= rates[1] && rates[1] <= rates[2],
            "m = {m}: certification rate must be non-decreasing in the budget, got {rates:?}"
        );
    }
}

/// Midpoint iteration on the reference complexes with the trivial group:
/// converges under the energy tolerance within the step budget, contracts
/// at least as fast as the worst link Poincaré estimate (+0.05 numerical
/// headroom), and lands on a constant map.
#[test]
fn a09_fixed_point_contraction() {
    for (name, cx) in [
        ("triangle", complex::shapes::triangle()),
        ("octahedron", complex::shapes::octahedron()),
    ] {
        let action = FiniteAction::trivial(&cx);
        let n = cx.vertex_count();
        let max_link_pi = |p: f64| -> f64 {
            (0..n)
                .map(|v| {
                    let link = cx.link_of(v).unwrap();
                    poincare_estimate(&link.graph, p, 1, 32, 40 + u64::from(v))
                        .unwrap()
                        .lower_estimate
                })
                .fold(0.0, f64::max)
        };
        for &p in &[2.0, 4.0] {
            let pi_hat = max_link_pi(p);
            let mut rng = SplitMix64::new(0xACCE_0009 + p as u64);
            let data: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
            let phi0 = VertexFunction::from_data(1, data);
            let run = complex::iterate_fixed_point(&cx, &action, &phi0, p, 1e-8, 200).unwrap();
            assert!(*run.energies.last().unwrap() < 1e-8, "{name} p = {p}");
            assert!(run.steps <= 200, "{name} p = {p}: {} steps", run.steps);
            for (i, &r) in run.ratios.iter().enumerate() {
                assert!(
                    r <= pi_hat + 0.05,
                    "{name} p = {p} step {i}: ratio {r} > π̂ {pi_hat} + 0.05"
                );
            }
            let column: Vec<f64> = (0..n as usize).map(|v| run.phi.row(v)[0]).collect();
            let spread = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - column.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-7, "{name} p = {p}: final spread {spread}");
        }
    }
}

/// Threshold formulas invert exactly: feeding ε(p) back through the
/// largest-certified-p search returns p; the density p-range endpoint and
/// the conformal-dimension bound are bitwise equal; ε(2) = 1/4 exactly.
#[test]
fn a10_threshold_inverses() {
    assert_eq!(certify::epsilon_lp(2.0).unwrap(), 0.25);
    for &p in &[2.0, 2.5, 3.0, 4.0, 5.0, 6.0] {
        let eps = certify::epsilon_lp(p).unwrap();
        let inv = certify::max_p_certified(eps, &ThresholdFamily::Lp, 1.0)
            .expect("threshold values are always certifiable");
        assert!(!inv.unbounded, "p = {p}");
        assert!((inv.p - p).abs() < 1e-6, "p = {p}: inverse {}", inv.p);
    }
    for &(m, d, eta) in &[(1e4, 0.36, 0.01), (1e6, 0.4, 0.01), (1e5, 0.5, 0.1)] {
        let ranges = certify::density_p_ranges(m, d, eta, Some(1.5)).unwrap();
        let conf = certify::confdim_lower_bound(m, d, eta).unwrap();
        assert_eq!(ranges.p_max_lp, conf, "endpoints must agree bitwise");
    }
}

/// Monte Carlo commands are reproducible: byte-identical output across
/// reruns and across worker counts.
#[test]
fn a11_cli_determinism() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["er-stats", "--m", "80", "--rho-rule", "2*logm/m", "--trials", "5", "--seed", "7"],
        vec!["link-spectrum", "--m", "40", "--rho", "1e-2", "--trials", "5", "--seed", "7"],
        vec![
            "certify", "--model", "binomial", "--m", "40", "--rho", "1e-2", "--trials", "5",
            "--seed", "7", "--family", "lp", "--family", "subquotient", "--alpha", "1.25",
            "--format", "json",
        ],
        vec!["union-check", "--trials", "50", "--n", "7", "--seed", "7"],
    ];
    for args in &cases {
        let run = |extra: &[&str]| {
            let out = Command::new(env!("CARGO_BIN_EXE_zsl"))
                .args(args)
                .args(extra)
                .env_remove("ZSL_SEED")
                .output()
                .expect("binary runs");
            assert!(
                out.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let base = run(&[]);
        assert_eq!(run(&[]), base, "{args:?}: rerun must be byte-identical");
        assert_eq!(run(&["--workers", "1"]), base, "{args:?}: workers=1 differs");
        assert_eq!(run(&["--workers", "3"]), base, "{args:?}: workers=3 differs");
    }
}

/// Report-only: the p = 8 Poincaré estimate trend on balanced complete
/// bipartite graphs, written to a CSV under the test temp dir and echoed
/// here.  Estimates above 1 at some size are plausible and acceptable;
/// no value gates the build (optimizer completeness is not guaranteed).
#[test]
fn a12_knn_p8_trend_report() {
    let mut lines = vec!["n,p8_estimate,restarts,iters".to_string()];
    for &(n, restarts, iters) in
        &[(16u32, 8u32, 1200u32), (64, 8, 800), (256, 4, 400), (1024, 2, 200), (4096, 1, 80)]
    {
        let g = families::complete_bipartite(n, n);
        let est = poincare_estimate_with_iters(&g, 8.0, 1, restarts, iters, 12 + u64::from(n))
            .unwrap()
            .lower_estimate;
        println!("K_{{{n},{n}}}: p=8 estimate {est:.6}");
        lines.push(format!("{n},{est},{restarts},{iters}"));
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("knn_p8_trend.csv");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    println!("trend recorded at {}", path.display());
}
