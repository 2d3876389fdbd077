//! p-Poincaré constants of weighted graphs.
//!
//! For p > 1 and functions f: V → ℓ^p_k, the constant π_{p}(G) is the
//! smallest π with inf_x ‖f−x‖_{L^p(ν)} ≤ π·‖∇f‖_{L^p(ℙ)} for all f. We
//! maximize the ratio R(f) by projected gradient ascent with random
//! restarts; every evaluated f certifies a lower bound, so the maximum seen
//! is always a valid estimate even when the ascent stalls. A bipartite
//! variant takes the infimum over functions constant on each part instead
//! of over constants.
//!
//! Also here: the p = 2 closed form 1/√(2−2μ₂), the Mazur map between
//! L^p and L^q spheres, the extrapolation ratio between π_p and π_q, the
//! interpolation sandwich for ‖A‖ on mean-zero L^p, and the Poincaré upper
//! bound driven by uniform convexity and a two-sided spectral gap.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{measures, GraphError, VertexFunction, WeightedGraph};
use crate::numeric::{lp_center, pow_abs, spow};
use crate::rng::{stable_seed, SplitMix64};
use crate::spectral::{spectral_report, SpectralReport};

#[derive(Debug, Error)]
pub enum PoincareError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("partition is not a bipartition of the graph")]
    NotBipartite,
    #[error("spectral gap too large for the convexity bound")]
    GapTooLarge,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, PoincareError>;

/// Outcome of a ratio-maximization run.
#[derive(Debug, Clone)]
pub struct PoincareEstimate {
    pub p: f64,
    /// Best ratio found: a certified lower bound on the true constant.
    pub lower_estimate: f64,
    /// The function achieving `lower_estimate`.
    pub witness: VertexFunction,
    pub restarts_used: u32,
    /// Analytic upper bound when one is available (p = 2 closed form).
    pub upper_bound: Option<f64>,
}

/// ‖f‖_{L^p(ν; ℓ^p_k)} = (Σ_s ν(s) Σ_j |f(s)_j|^p)^{1/p}.
pub fn lp_norm(f: &VertexFunction, nu: &[f64], p: f64) -> f64 {
    let k = f.dim();
    let mut acc = 0.0;
    for (s, &w) in nu.iter().enumerate() {
        for j in 0..k {
            acc += w * pow_abs(f.row(s)[j], p);
        }
    }
    acc.powf(1.0 / p)
}

/// ‖∇f‖_{L^p(V×V, ℙ; ℓ^p_k)} with ∇f(s,t) = f(t) − f(s).
pub fn gradient_lp_norm(g: &WeightedGraph, f: &VertexFunction, p: f64) -> Result<f64> {
    let m = measures(g)?;
    let k = f.dim();
    let mut acc = 0.0;
    for (s, t, w) in g.edges() {
        if s == t {
            continue;
        }
        let (rs, rt) = (f.row(s as usize), f.row(t as usize));
        let mut e = 0.0;
        for j in 0..k {
            e += pow_abs(rt[j] - rs[j], p);
        }
        // ordered pairs (s,t) and (t,s) contribute equally
        acc += 2.0 * w / m.total_degree * e;
    }
    Ok(acc.powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// ratio maximization

/// Shared state for evaluating and ascending R(f). `group` assigns each
/// vertex to the block whose own p-center is subtracted in the numerator:
/// one block for the ordinary constant, two for the bipartite variant.
struct RatioProblem {
    k: usize,
    p: f64,
    nu: Vec<f64>,
    /// (s, t, 2ω(s,t)/W) over unordered pairs s < t; self-loops dropped
    /// (they contribute nothing to ∇f).
    edges: Vec<(u32, u32, f64)>,
    group: Vec<u8>,
    ngroups: usize,
    /// vertex ids per group, ascending
    members: Vec<Vec<u32>>,
}

struct Eval {
    ratio: f64,
    num_p: f64,
    den_p: f64,
    /// group-major k-vectors: centers[g*k + j]
    centers: Vec<f64>,
}

impl RatioProblem {
    fn new(g: &WeightedGraph, p: f64, k: usize, group: Vec<u8>) -> Result<Self> {
        if p <= 1.0 || !p.is_finite() {
            return Err(PoincareError::BadParameter(format!("p must exceed 1, got {p}")));
        }
        if k == 0 {
            return Err(PoincareError::BadParameter("dimension k must be at least 1".into()));
        }
        let m = measures(g)?;
        let edges = g
            .edges()
            .filter(|&(s, t, _)| s != t)
            .map(|(s, t, w)| (s, t, 2.0 * w / m.total_degree))
            .collect();
        let ngroups = 1 + group.iter().copied().max().unwrap_or(0) as usize;
        let mut members = vec![Vec::new(); ngroups];
        for (s, &gid) in group.iter().enumerate() {
            members[gid as usize].push(s as u32);
        }
        Ok(RatioProblem { k, p, nu: m.nu, edges, group, ngroups, members })
    }

    fn n(&self) -> usize {
        self.nu.len()
    }

    /// Coordinatewise p-centers of f over each group (the inner infimum;
    /// exact by separability of the ℓ^p target).
    fn centers(&self, f: &VertexFunction) -> Vec<f64> {
        let mut out = vec![0.0; self.ngroups * self.k];
        let mut weights = Vec::new();
        let mut values = Vec::new();
        for (gid, verts) in self.members.iter().enumerate() {
            for j in 0..self.k {
                weights.clear();
                values.clear();
                for &s in verts {
                    weights.push(self.nu[s as usize]);
                    values.push(f.row(s as usize)[j]);
                }
                out[gid * self.k + j] = lp_center(&weights, &values, self.p);
            }
        }
        out
    }

    fn eval(&self, f: &VertexFunction) -> Eval {
        let centers = self.centers(f);
        let mut num_p = 0.0;
        for s in 0..self.n() {
            let c = &centers[self.group[s] as usize * self.k..];
            let row = f.row(s);
            let mut e = 0.0;
            for j in 0..self.k {
                e += pow_abs(row[j] - c[j], self.p);
            }
            num_p += self.nu[s] * e;
        }
        let mut den_p = 0.0;
        for &(s, t, c) in &self.edges {
            let (rs, rt) = (f.row(s as usize), f.row(t as usize));
            let mut e = 0.0;
            for j in 0..self.k {
                e += pow_abs(rt[j] - rs[j], self.p);
            }
            den_p += c * e;
        }
        let ratio = if den_p > 0.0 && num_p >= 0.0 { (num_p / den_p).powf(1.0 / self.p) } else { 0.0 };
        Eval { ratio, num_p, den_p, centers }
    }

    /// Ascent direction for log R at f: ∇N/N − ∇D/D where N = numᵖ, D = denᵖ.
    /// The centers are held fixed (envelope: they are the exact inner argmin,
    /// so their sensitivity drops out of the first-order term).
    fn direction(&self, f: &VertexFunction, ev: &Eval) -> VertexFunction {
        let k = self.k;
        let mut dir = VertexFunction::zeros(self.n(), k);
        let pn = self.p / ev.num_p;
        for s in 0..self.n() {
            let c = &ev.centers[self.group[s] as usize * k..];
            let row = f.row(s);
            let out = dir.row_mut(s);
            for j in 0..k {
                out[j] = pn * self.nu[s] * spow(row[j] - c[j], self.p - 1.0);
            }
        }
        let pd = self.p / ev.den_p;
        for &(s, t, cw) in &self.edges {
            let (si, ti) = (s as usize, t as usize);
            for j in 0..k {
                let g = pd * cw * spow(f.row(si)[j] - f.row(ti)[j], self.p - 1.0);
                dir.row_mut(si)[j] -= g;
                dir.row_mut(ti)[j] += g;
            }
        }
        dir
    }

    /// ν-mean-center each coordinate, then normalize in L²(ν). Both maps
    /// leave R unchanged; they keep iterates well-scaled.
    fn project(&self, f: &mut VertexFunction) {
        let k = self.k;
        for j in 0..k {
            let mut mean = 0.0;
            for s in 0..self.n() {
                mean += self.nu[s] * f.row(s)[j];
            }
            for s in 0..self.n() {
                f.row_mut(s)[j] -= mean;
            }
        }
        let mut norm2 = 0.0;
        for s in 0..self.n() {
            for &x in f.row(s) {
                norm2 += self.nu[s] * x * x;
            }
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            for x in f.data_mut() {
                *x *= inv;
            }
        }
    }

    /// One restart: random start, projected gradient ascent with
    /// backtracking. Returns the best (ratio, f) over every evaluation.
    fn ascend(&self, seed: u64, max_iters: u32) -> (f64, VertexFunction) {
        let mut rng = SplitMix64::new(seed);
        let n = self.n();
        let mut f = VertexFunction::zeros(n, self.k);
        for x in f.data_mut() {
            *x = rng.next_normal();
        }
        self.project(&mut f);

        let mut best_ratio = f64::NEG_INFINITY;
        let mut best_f = f.clone();
        let mut ev = self.eval(&f);
        if ev.ratio > best_ratio {
            best_ratio = ev.ratio;
            best_f = f.clone();
        }
        let mut step = 0.25;
        for _ in 0..max_iters {
            if ev.num_p <= 0.0 || ev.den_p <= 0.0 {
                break; // degenerate start (f in the center span)
            }
            let dir = self.direction(&f, &ev);
            let prev = ev.ratio;
            let mut improved = false;
            while step >= 1e-16 {
                let mut trial = f.clone();
                for (x, d) in trial.data_mut().iter_mut().zip(dir.data()) {
                    *x += step * d;
                }
                self.project(&mut trial);
                let tev = self.eval(&trial);
                if tev.ratio > best_ratio {
                    best_ratio = tev.ratio;
                    best_f = trial.clone();
                }
                if tev.ratio > ev.ratio {
                    f = trial;
                    ev = tev;
                    step *= 1.4;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved || ev.ratio - prev < 1e-10 * ev.ratio.max(1e-300) {
                break;
            }
        }
        (best_ratio, best_f)
    }

    /// Max over `restarts` independent ascents; deterministic in `seed`
    /// regardless of how the restarts are scheduled.
    fn maximize(&self, restarts: u32, max_iters: u32, seed: u64) -> (f64, VertexFunction) {
        let runs: Vec<(f64, VertexFunction)> = (0..restarts)
            .into_par_iter()
            .map(|r| self.ascend(stable_seed(&[seed, r as u64]), max_iters))
            .collect();
        let mut best = (f64::NEG_INFINITY, VertexFunction::zeros(self.n(), self.k));
        for run in runs {
            if run.0 > best.0 {
                best = run;
            }
        }
        best
    }
}

/// Exact p = 2 scalar constant 1/√(2−2μ₂) from a spectral report.
pub fn poincare2_closed_form(report: &SpectralReport) -> Result<f64> {
    if !report.connected {
        return Err(PoincareError::Disconnected);
    }
    match report.mu2() {
        None => Ok(0.0), // single vertex: no nonconstant functions
        Some(mu2) => Ok(1.0 / (2.0 - 2.0 * mu2).sqrt()),
    }
}

fn check_connected(g: &WeightedGraph) -> Result<()> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(PoincareError::Disconnected)
    }
}

/// Default iteration cap per restart.
pub const DEFAULT_MAX_ITERS: u32 = 5000;

/// Lower-estimates π_p(G) for ℓ^p_k targets by random-restart ascent.
/// Any output is a certified lower bound; `upper_bound` carries the p = 2
/// closed form when applicable.
pub fn poincare_estimate(
    g: &WeightedGraph,
    p: f64,
    k: usize,
    restarts: u32,
    seed: u64,
) -> Result<PoincareEstimate> {
    poincare_estimate_with_iters(g, p, k, restarts, DEFAULT_MAX_ITERS, seed)
}

/// As [`poincare_estimate`] with an explicit per-restart iteration cap
/// (large-graph scans trade iterations for coverage).
pub fn poincare_estimate_with_iters(
    g: &WeightedGraph,
    p: f64,
    k: usize,
    restarts: u32,
    max_iters: u32,
    seed: u64,
) -> Result<PoincareEstimate> {
    check_connected(g)?;
    let problem = RatioProblem::new(g, p, k, vec![0; g.vertex_count() as usize])?;
    let (lower_estimate, witness) = problem.maximize(restarts, max_iters, seed);
    // the closed form needs an eigensolve; skip it on very large graphs
    let upper_bound = if p == 2.0 && g.vertex_count() <= 4096 {
        Some(poincare2_closed_form(&spectral_report(g)?)?)
    } else {
        None
    };
    Ok(PoincareEstimate { p, lower_estimate, witness, restarts_used: restarts, upper_bound })
}

/// Replays the ordinary ratio R(f) — the exact evaluator the optimizer uses.
pub fn poincare_ratio(g: &WeightedGraph, f: &VertexFunction, p: f64) -> Result<f64> {
    let problem = RatioProblem::new(g, p, f.dim(), vec![0; g.vertex_count() as usize])?;
    Ok(problem.eval(f).ratio)
}

fn validate_bipartition(g: &WeightedGraph, parts: &[bool]) -> Result<()> {
    if parts.len() != g.vertex_count() as usize {
        return Err(PoincareError::BadParameter("partition length mismatch".into()));
    }
    if !parts.contains(&true) || !parts.contains(&false) {
        return Err(PoincareError::NotBipartite);
    }
    for (s, t, _) in g.edges() {
        if parts[s as usize] == parts[t as usize] {
            return Err(PoincareError::NotBipartite);
        }
    }
    Ok(())
}

fn part_groups(parts: &[bool]) -> Vec<u8> {
    parts.iter().map(|&side| side as u8).collect()
}

/// Bipartite variant: the numerator infimum runs over functions constant on
/// each part. For p = 2 this equals 1/√(2−2μ̃) with μ̃ the largest
/// eigenvalue of A on the complement of the two part-indicators.
pub fn bipartite_poincare_estimate(
    g: &WeightedGraph,
    parts: &[bool],
    p: f64,
    k: usize,
    restarts: u32,
    seed: u64,
) -> Result<PoincareEstimate> {
    check_connected(g)?;
    validate_bipartition(g, parts)?;
    let problem = RatioProblem::new(g, p, k, part_groups(parts))?;
    let (lower_estimate, witness) = problem.maximize(restarts, DEFAULT_MAX_ITERS, seed);
    Ok(PoincareEstimate { p, lower_estimate, witness, restarts_used: restarts, upper_bound: None })
}

/// Replays the bipartite ratio for a witness.
pub fn bipartite_poincare_ratio(
    g: &WeightedGraph,
    parts: &[bool],
    f: &VertexFunction,
    p: f64,
) -> Result<f64> {
    validate_bipartition(g, parts)?;
    let problem = RatioProblem::new(g, p, f.dim(), part_groups(parts))?;
    Ok(problem.eval(f).ratio)
}

// ---------------------------------------------------------------------------
// Mazur map

/// Entrywise signed power {z}^{p/q}: maps the unit sphere of L^p(ν; ℓ^p_k)
/// onto the unit sphere of L^q(ν; ℓ^q_k), transferring ‖f‖_p^p = ‖Mf‖_q^q.
pub fn mazur_map(f: &VertexFunction, p: f64, q: f64) -> VertexFunction {
    assert!(p >= 1.0 && q >= 1.0, "Mazur map needs p, q ≥ 1");
    let alpha = p / q;
    let data = f.data().iter().map(|&z| spow(z, alpha)).collect();
    VertexFunction::from_data(f.dim(), data)
}

// ---------------------------------------------------------------------------
// extrapolation ratio

/// Measured quotient π̂_p / π̂_q^{max(q/p, 1)} on one graph — the empirical
/// proxy for the extrapolation constant relating the two Poincaré constants.
#[derive(Debug, Clone)]
pub struct ExtrapolationScan {
    pub p: f64,
    pub q: f64,
    pub pi_p: f64,
    pub pi_q: f64,
    pub max_observed_ratio: f64,
}

/// Estimates π_p and π_q with `restarts` restarts each (same seed, so
/// p = q reproduces identical runs) and reports the extrapolation quotient.
pub fn extrapolation_ratio_scan(
    g: &WeightedGraph,
    p: f64,
    q: f64,
    restarts: u32,
    seed: u64,
) -> Result<ExtrapolationScan> {
    let ep = poincare_estimate(g, p, 1, restarts, seed)?;
    let eq = poincare_estimate(g, q, 1, restarts, seed)?;
    let expo = (q / p).max(1.0);
    let max_observed_ratio = ep.lower_estimate / eq.lower_estimate.powf(expo);
    Ok(ExtrapolationScan { p, q, pi_p: ep.lower_estimate, pi_q: eq.lower_estimate, max_observed_ratio })
}

// ---------------------------------------------------------------------------
// Markov operator norm on mean-zero L^p

/// Sandwich for ‖A‖ on mean-zero L^p(ν; ℓ^p_k): interpolation upper bound
/// and a sampled lower bound.
#[derive(Debug, Clone, Copy)]
pub struct NormBounds {
    /// 2^{1−2/p}·‖A⁰‖^{2/p} (L² bound ‖A⁰‖ interpolated against the
    /// L^∞ bound 2 on mean-zero functions).
    pub upper: f64,
    /// Best ‖Af‖_p/‖f‖_p over sampled mean-zero f — a certified lower bound.
    pub lower: f64,
}

/// Computes the sandwich; `samples` random starts, each refined by a signed
/// power iteration adapted to p (ratios are tracked at every step, so the
/// reported lower bound is attained by a genuine function).
pub fn markov_lp_norm_bounds(
    g: &WeightedGraph,
    p: f64,
    k: usize,
    samples: u32,
    seed: u64,
) -> Result<NormBounds> {
    if p < 2.0 {
        return Err(PoincareError::BadParameter(format!("interpolation bound needs p ≥ 2, got {p}")));
    }
    check_connected(g)?;
    let rep = spectral_report(g)?;
    let upper = interpolation_norm_upper(p, rep.restricted_norm);
    let m = measures(g)?;
    let n = g.vertex_count() as usize;

    let center = |f: &mut VertexFunction| {
        for j in 0..k {
            let mut mean = 0.0;
            for s in 0..n {
                mean += m.nu[s] * f.row(s)[j];
            }
            for s in 0..n {
                f.row_mut(s)[j] -= mean;
            }
        }
    };

    let mut lower = 0.0f64;
    for sample in 0..samples {
        let mut rng = SplitMix64::new(stable_seed(&[seed, sample as u64]));
        let mut f = VertexFunction::zeros(n, k);
        for x in f.data_mut() {
            *x = rng.next_normal();
        }
        center(&mut f);
        for _ in 0..40 {
            let nf = lp_norm(&f, &m.nu, p);
            if nf <= 0.0 {
                break;
            }
            let af = crate::graph::markov_apply(g, &f)?;
            let naf = lp_norm(&af, &m.nu, p);
            lower = lower.max(naf / nf);
            // signed power iteration: g = {Af}^{p−1} lives in L^{p'}; pulling
            // it back through A and the inverse power re-aligns f with the
            // extremal direction. A is self-adjoint on ν, so no transpose.
            let mut u = VertexFunction::from_data(
                k,
                af.data().iter().map(|&z| spow(z, p - 1.0)).collect(),
            );
            let au = crate::graph::markov_apply(g, &u)?;
            u = VertexFunction::from_data(
                k,
                au.data().iter().map(|&z| spow(z, 1.0 / (p - 1.0))).collect(),
            );
            center(&mut u);
            let nu_norm = lp_norm(&u, &m.nu, p);
            if nu_norm <= 0.0 {
                break;
            }
            let scale = 1.0 / nu_norm;
            for x in u.data_mut() {
                *x *= scale;
            }
            f = u;
        }
    }
    Ok(NormBounds { upper, lower })
}

/// 2^{1−2/p}·gap^{2/p}: the interpolation upper bound for ‖A‖ on mean-zero
/// L^p given the two-sided L² gap.
pub fn interpolation_norm_upper(p: f64, gap: f64) -> f64 {
    2.0f64.powf(1.0 - 2.0 / p) * gap.powf(2.0 / p)
}

// ---------------------------------------------------------------------------
// uniform convexity ⇒ Poincaré upper bound

/// Poincaré upper bound from p-uniform convexity plus a spectral gap.
#[derive(Debug, Clone, Copy)]
pub struct ConvexityPoincareBound {
    /// (1+C)^{−1/p}·(1−gap)^{−1} — an upper bound for π_p.
    pub poincare_upper: f64,
    /// 1 − poincare_upper (the contraction margin).
    pub delta: f64,
}

/// Default convexity constant for ℓ^p-type targets: 2^{2−p}.
pub fn default_convexity_constant(p: f64) -> f64 {
    2.0f64.powf(2.0 - p)
}

/// Computes the convexity-driven bound; requires (1+C)^{1/p}(1−gap) > 1.
/// `convexity_c = None` uses the ℓ^p default 2^{2−p}.
pub fn convexity_poincare_bound(
    p: f64,
    convexity_c: Option<f64>,
    gap: f64,
) -> Result<ConvexityPoincareBound> {
    let c = convexity_c.unwrap_or_else(|| default_convexity_constant(p));
    if !((1.0 + c).powf(1.0 / p) * (1.0 - gap) > 1.0) {
        return Err(PoincareError::GapTooLarge);
    }
    let poincare_upper = (1.0 + c).powf(-1.0 / p) / (1.0 - gap);
    Ok(ConvexityPoincareBound { poincare_upper, delta: 1.0 - poincare_upper })
}

/// Coefficient of the function-level mean-zero Poincaré bound
/// ‖f‖_p ≤ coeff·‖∇f‖_p on graphs with two-sided gap `gap`:
/// (1+2^{2−p})^{−1/p} · (1 − 2^{1−2/p}·gap^{2/p})^{−1}.
/// None when the interpolated norm reaches 1 and the bound is vacuous.
pub fn functional_poincare_coefficient(p: f64, gap: f64) -> Option<f64> {
    let eps_p = interpolation_norm_upper(p, gap);
    if eps_p >= 1.0 {
        return None;
    }
    let c = default_convexity_constant(p);
    Some((1.0 + c).powf(-1.0 / p) / (1.0 - eps_p))
}

/// Gap threshold 2/(p·2^p) under which the convexity bound is guaranteed to
/// apply for ℓ^p targets.
pub fn convexity_gap_threshold(p: f64) -> f64 {
    2.0 / (p * 2.0f64.powf(p))
}

// ---------------------------------------------------------------------------
// CSV emitter for scan results

/// One row of a Poincaré scan table.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub graph_id: String,
    pub p: f64,
    pub k: usize,
    pub estimate: f64,
    pub upper_bound: Option<f64>,
    pub restarts: u32,
    pub seed: u64,
}

pub const SCAN_CSV_HEADER: &str = "graph_id,p,k,estimate,upper_bound,restarts,seed";

impl ScanRow {
    pub fn csv_line(&self) -> String {
        let upper = self.upper_bound.map(|u| u.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.graph_id, self.p, self.k, self.estimate, upper, self.restarts, self.seed
        )
    }
}
