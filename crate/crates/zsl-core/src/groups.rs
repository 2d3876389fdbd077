//! Triangular presentations: cyclically reduced length-3 relators over m
//! generators, the three sampling models (density, uniform, binomial), and
//! the two-sided link graph with its three-part decomposition.
//!
//! The relator space is addressed through a bijective rank/unrank so that
//! uniform and binomial sampling never materialize the full list; exhaustive
//! enumeration is kept for small m and doubles as an independent check of
//! the count formula (2m−1)³+1.

use crate::graph::WeightedGraph;
use crate::rng::SplitMix64;
use crate::spectral;
use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("generator count {m} exceeds the cap {cap} for this operation")]
    TooLarge { m: u32, cap: u32 },
    #[error("requested {n} relators but only {count} exist")]
    NTooLarge { n: u64, count: u64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("presentation has no relators")]
    EmptyLink,
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph error: {0}")]
    Graph(#[from] crate::graph::GraphError),
}

pub type Result<T> = std::result::Result<T, GroupError>;

/// Largest m for exhaustive enumeration (list size ~(2m)³).
pub const ENUMERATION_M_CAP: u32 = 64;
/// Largest m for rank-addressed sampling ((2m)³ must fit comfortably in u64).
pub const SAMPLING_M_CAP: u32 = 1_000_000;

/// A generator or its inverse.  Ordering is `a0 < A0 < a1 < A1 < …`
/// (uppercase denotes the inverse), which matches the id encoding below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    /// Generator index in [0, m).
    pub index: u32,
    /// True for the inverse letter.
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: u32, inverse: bool) -> Self {
        Letter { index, inverse }
    }

    /// Dense id in [0, 2m): generator 2i, its inverse 2i+1.
    pub fn id(self) -> u32 {
        2 * self.index + u32::from(self.inverse)
    }

    pub fn from_id(id: u32) -> Self {
        Letter { index: id / 2, inverse: id % 2 == 1 }
    }

    /// The inverse letter (id XOR 1).
    pub fn inv(self) -> Self {
        Letter::from_id(self.id() ^ 1)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.inverse { 'A' } else { 'a' };
        write!(f, "{c}{}", self.index)
    }
}

/// A cyclically reduced word of length 3.  Derived ordering is lexicographic
/// in (x, y, z) and agrees with the rank order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relator {
    pub x: Letter,
    pub y: Letter,
    pub z: Letter,
}

impl Relator {
    /// Validates cyclic reduction: y ≠ x⁻¹, z ≠ y⁻¹, x ≠ z⁻¹.
    pub fn new(x: Letter, y: Letter, z: Letter) -> Option<Self> {
        if is_cyclically_reduced(x, y, z) {
            Some(Relator { x, y, z })
        } else {
            None
        }
    }
}

impl fmt::Display for Relator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.x, self.y, self.z)
    }
}

pub fn is_cyclically_reduced(x: Letter, y: Letter, z: Letter) -> bool {
    y != x.inv() && z != y.inv() && x != z.inv()
}

/// Which random model produced a presentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelTag {
    Density(f64),
    Uniform(u64),
    Binomial(f64),
    Explicit,
}

impl ModelTag {
    /// Short model name without the parameter.
    pub fn name(&self) -> &'static str {
        match self {
            ModelTag::Density(_) => "density",
            ModelTag::Uniform(_) => "uniform",
            ModelTag::Binomial(_) => "binomial",
            ModelTag::Explicit => "explicit",
        }
    }

    /// Numeric model parameter (0 for explicit presentations).
    pub fn param(&self) -> f64 {
        match self {
            ModelTag::Density(d) => *d,
            ModelTag::Uniform(n) => *n as f64,
            ModelTag::Binomial(r) => *r,
            ModelTag::Explicit => 0.0,
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelTag::Density(d) => write!(f, "density:{d}"),
            ModelTag::Uniform(n) => write!(f, "uniform:{n}"),
            ModelTag::Binomial(r) => write!(f, "binomial:{r}"),
            ModelTag::Explicit => write!(f, "explicit"),
        }
    }
}

impl std::str::FromStr for ModelTag {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GroupError::Format(format!("unknown model tag {s:?}"));
        if s == "explicit" {
            return Ok(ModelTag::Explicit);
        }
        let (name, param) = s.split_once(':').ok_or_else(bad)?;
        match name {
            "density" => Ok(ModelTag::Density(param.parse().map_err(|_| bad())?)),
            "uniform" => Ok(ModelTag::Uniform(param.parse().map_err(|_| bad())?)),
            "binomial" => Ok(ModelTag::Binomial(param.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// A triangular presentation: m generators and a set of relators.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    pub m: u32,
    /// Sorted, duplicate-free.
    pub relators: Vec<Relator>,
    pub model: ModelTag,
    pub seed: u64,
}

impl Presentation {
    /// Builds a presentation from explicit relators (validated, deduplicated,
    /// sorted).
    pub fn explicit(m: u32, relators: impl IntoIterator<Item = Relator>) -> Result<Self> {
        if m == 0 {
            return Err(GroupError::BadParameter("m must be at least 1".into()));
        }
        let mut set = BTreeSet::new();
        for r in relators {
            for letter in [r.x, r.y, r.z] {
                if letter.index >= m {
                    return Err(GroupError::BadParameter(format!(
                        "letter {letter} out of range for m={m}"
                    )));
                }
            }
            if !is_cyclically_reduced(r.x, r.y, r.z) {
                return Err(GroupError::BadParameter(format!(
                    "relator {r} is not cyclically reduced"
                )));
            }
            set.insert(r);
        }
        Ok(Presentation { m, relators: set.into_iter().collect(), model: ModelTag::Explicit, seed: 0 })
    }
}

/// Number of cyclically reduced length-3 words over m generators:
/// (2m−1)³ + 1.
pub fn relator_count(m: u32) -> u64 {
    let a = 2 * u64::from(m) - 1;
    a * a * a + 1
}

/// Valid (y, z) pairs for a fixed first letter: (2m−1) + (2m−2)².
/// Multiplying by the 2m choices of x recovers (2m−1)³ + 1 exactly.
fn pairs_per_first_letter(m: u32) -> u64 {
    let m = u64::from(m);
    (2 * m - 1) + (2 * m - 2) * (2 * m - 2)
}

/// Rank of a relator in the lexicographic order on (x, y, z) ids.
pub fn rank(m: u32, r: &Relator) -> u64 {
    let two_m = u64::from(2 * m);
    let per = pairs_per_first_letter(m);
    let big = two_m - 1; // y == x leaves 2m−1 choices of z
    let small = two_m - 2; // otherwise 2m−2
    let x = u64::from(r.x.id());
    let inv_x = x ^ 1;
    // Position of x among y-candidates (all ids except inv_x, ascending).
    let x_pos = x - u64::from(inv_x < x);
    let y = u64::from(r.y.id());
    let y_cand = y - u64::from(y > inv_x);
    // z-rank: id minus the number of excluded ids below it.
    let inv_y = y ^ 1;
    let z = u64::from(r.z.id());
    let mut z_rank = z;
    z_rank -= u64::from(inv_x < z);
    if inv_y != inv_x {
        z_rank -= u64::from(inv_y < z);
    }
    let rem = if y_cand < x_pos {
        y_cand * small + z_rank
    } else if y_cand == x_pos {
        x_pos * small + z_rank
    } else {
        x_pos * small + big + (y_cand - x_pos - 1) * small + z_rank
    };
    x * per + rem
}

/// Inverse of `rank`.
pub fn unrank(m: u32, rank: u64) -> Relator {
    debug_assert!(rank < relator_count(m));
    let two_m = u64::from(2 * m);
    let per = pairs_per_first_letter(m);
    let big = two_m - 1;
    let small = two_m - 2;
    let x = rank / per;
    let mut rem = rank % per;
    let inv_x = x ^ 1;
    let x_pos = x - u64::from(inv_x < x);
    let (y_cand, z_rank) = if rem < x_pos * small {
        (rem / small, rem % small)
    } else {
        rem -= x_pos * small;
        if rem < big {
            (x_pos, rem)
        } else {
            rem -= big;
            (x_pos + 1 + rem / small, rem % small)
        }
    };
    let y = y_cand + u64::from(y_cand >= inv_x);
    let inv_y = y ^ 1;
    let mut excluded = [inv_y.min(inv_x), inv_y.max(inv_x)];
    if excluded[0] == excluded[1] {
        excluded[1] = u64::MAX; // single exclusion when y == x
    }
    let mut z = z_rank;
    for e in excluded {
        if z >= e {
            z += 1;
        }
    }
    Relator {
        x: Letter::from_id(x as u32),
        y: Letter::from_id(y as u32),
        z: Letter::from_id(z as u32),
    }
}

/// Exhaustive lexicographic enumeration of all cyclically reduced length-3
/// words; authoritative for the count formula on small m.
pub fn enumerate_relators(m: u32) -> Result<Vec<Relator>> {
    if m == 0 {
        return Err(GroupError::BadParameter("m must be at least 1".into()));
    }
    if m > ENUMERATION_M_CAP {
        return Err(GroupError::TooLarge { m, cap: ENUMERATION_M_CAP });
    }
    let ids = 2 * m;
    let mut out = Vec::with_capacity(relator_count(m) as usize);
    for xi in 0..ids {
        let x = Letter::from_id(xi);
        for yi in 0..ids {
            let y = Letter::from_id(yi);
            if y == x.inv() {
                continue;
            }
            for zi in 0..ids {
                let z = Letter::from_id(zi);
                if z == y.inv() || x == z.inv() {
                    continue;
                }
                out.push(Relator { x, y, z });
            }
        }
    }
    Ok(out)
}

fn check_sampling_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(GroupError::BadParameter("m must be at least 1".into()));
    }
    if m > SAMPLING_M_CAP {
        return Err(GroupError::TooLarge { m, cap: SAMPLING_M_CAP });
    }
    Ok(())
}

/// Floyd's uniform n-subset of {0, …, count−1}.
fn floyd_subset(count: u64, n: u64, rng: &mut SplitMix64) -> BTreeSet<u64> {
    let mut set = BTreeSet::new();
    for j in (count - n)..count {
        let t = rng.next_below(j + 1);
        if !set.insert(t) {
            set.insert(j);
        }
    }
    set
}

fn presentation_from_ranks(
    m: u32,
    ranks: impl IntoIterator<Item = u64>,
    model: ModelTag,
    seed: u64,
) -> Presentation {
    let relators: Vec<Relator> = ranks.into_iter().map(|r| unrank(m, r)).collect();
    debug_assert!(relators.windows(2).all(|w| w[0] < w[1]));
    Presentation { m, relators, model, seed }
}

/// Density model: a uniform subset of round((2m−1)^{3d}) relators.
pub fn sample_density_model(m: u32, d: f64, seed: u64) -> Result<Presentation> {
    check_sampling_m(m)?;
    if !(d > 0.0 && d < 1.0) {
        return Err(GroupError::BadParameter(format!("density must lie in (0,1), got {d}")));
    }
    let count = relator_count(m);
    let n = (2.0 * f64::from(m) - 1.0).powf(3.0 * d).round() as u64;
    if n > count {
        return Err(GroupError::NTooLarge { n, count });
    }
    let mut rng = SplitMix64::new(seed);
    let ranks = floyd_subset(count, n, &mut rng);
    Ok(presentation_from_ranks(m, ranks, ModelTag::Density(d), seed))
}

/// Uniform model: a uniform N-subset of the relator space.
pub fn sample_uniform_model(m: u32, n: u64, seed: u64) -> Result<Presentation> {
    check_sampling_m(m)?;
    let count = relator_count(m);
    if n > count {
        return Err(GroupError::NTooLarge { n, count });
    }
    let mut rng = SplitMix64::new(seed);
    let ranks = floyd_subset(count, n, &mut rng);
    Ok(presentation_from_ranks(m, ranks, ModelTag::Uniform(n), seed))
}

/// Binomial model: every relator included independently with probability
/// rho.  Implemented by geometric skipping over ranks, so the cost is
/// proportional to the sample size, not the relator space.
pub fn sample_binomial_model(m: u32, rho: f64, seed: u64) -> Result<Presentation> {
    check_sampling_m(m)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(GroupError::BadParameter(format!(
            "inclusion probability must lie in [0,1], got {rho}"
        )));
    }
    let count = relator_count(m);
    let model = ModelTag::Binomial(rho);
    if rho <= 0.0 {
        return Ok(Presentation { m, relators: Vec::new(), model, seed });
    }
    if rho >= 1.0 {
        return Ok(presentation_from_ranks(m, 0..count, model, seed));
    }
    let mut rng = SplitMix64::new(seed);
    let ln_fail = (1.0 - rho).ln();
    let mut ranks = Vec::new();
    let mut cur: u64 = 0;
    loop {
        // Geometric number of skipped ranks: P(skip = k) = (1−ρ)^k ρ.
        let skip = rng.next_open01().ln() / ln_fail;
        if skip >= (count - cur) as f64 {
            break;
        }
        cur += skip as u64;
        if cur >= count {
            break;
        }
        ranks.push(cur);
        cur += 1;
        if cur >= count {
            break;
        }
    }
    Ok(presentation_from_ranks(m, ranks, model, seed))
}

/// The link graph of a triangular presentation, with its decomposition into
/// the three per-position parts.
#[derive(Debug, Clone)]
pub struct LinkGraph {
    /// ω₁+ω₂+ω₃ on 2m vertices indexed by letter id.
    pub base: WeightedGraph,
    /// Part i collects the edges contributed by position i of the relators.
    pub parts: [WeightedGraph; 3],
}

/// Builds the link: each relator xyz adds weight 1 to {x, y⁻¹} in part 1,
/// {y, z⁻¹} in part 2, and {z, x⁻¹} in part 3.
pub fn build_link(pres: &Presentation) -> LinkGraph {
    let n = 2 * pres.m;
    let mut parts = [WeightedGraph::empty(n), WeightedGraph::empty(n), WeightedGraph::empty(n)];
    let mut base = WeightedGraph::empty(n);
    for r in &pres.relators {
        let pairs = [(r.x, r.y.inv()), (r.y, r.z.inv()), (r.z, r.x.inv())];
        for (i, (s, t)) in pairs.into_iter().enumerate() {
            // Cyclic reduction forbids self-loops in every part.
            assert_ne!(s, t, "self-loop from relator {r}");
            parts[i].add_weight(s.id(), t.id(), 1.0).expect("letter ids in range");
            base.add_weight(s.id(), t.id(), 1.0).expect("letter ids in range");
        }
    }
    LinkGraph { base, parts }
}

/// Spectral summary of a presentation's link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    /// Two-sided gap ‖A⁰‖ of the base link (1.0 when disconnected).
    pub gap: f64,
    pub connected: bool,
    /// Isolated vertices dropped from the base link before the eigensolve.
    pub isolated: u32,
    /// ‖A⁰‖ of each of the three parts.
    pub part_gaps: [f64; 3],
    /// Degree-irregularity statistic summed over the three parts:
    /// Σ_s Σ_i |d_i(s) − D_i/(2m)| / D_i.
    pub delta: f64,
}

/// Full spectral analysis of the link and its parts.
pub fn link_spectral_report(pres: &Presentation) -> Result<LinkReport> {
    if pres.relators.is_empty() {
        return Err(GroupError::EmptyLink);
    }
    let link = build_link(pres);
    let base_report = spectral::spectral_report(&link.base)?;
    let mut part_gaps = [0.0f64; 3];
    let mut delta = 0.0;
    let n = f64::from(2 * pres.m);
    for (i, part) in link.parts.iter().enumerate() {
        part_gaps[i] = spectral::spectral_report(part)?.restricted_norm;
        let degrees = part.degrees();
        let total: f64 = degrees.iter().sum();
        let uniform = total / n;
        delta += degrees.iter().map(|d| (d - uniform).abs()).sum::<f64>() / total;
    }
    Ok(LinkReport {
        gap: base_report.restricted_norm,
        connected: base_report.connected,
        isolated: base_report.isolated_removed as u32,
        part_gaps,
        delta,
    })
}

/// True iff rho ≥ m^{−1.42}, the regime where the binomial model is finite
/// with overwhelming probability (closed condition at the boundary).
pub fn finiteness_regime_flag(m: u32, rho: f64) -> bool {
    rho >= f64::from(m).powf(-1.42)
}

/// Effective edge density of each link part viewed as an Erdős–Rényi graph:
/// ρ′ = 1 − (1−ρ)^{4m−2}.
pub fn rho_prime(m: u32, rho: f64) -> f64 {
    1.0 - (1.0 - rho).powi(4 * m as i32 - 2)
}

/// Writes a presentation as a header line "m <m> model <tag>" followed by
/// one relator per line ("a2 A0 a1", uppercase = inverse).
pub fn write_presentation<W: Write>(w: &mut W, pres: &Presentation) -> Result<()> {
    writeln!(w, "m {} model {}", pres.m, pres.model)?;
    for r in &pres.relators {
        writeln!(w, "{r}")?;
    }
    Ok(())
}

fn parse_letter(token: &str, m: u32, line: usize) -> Result<Letter> {
    let bad = || GroupError::Format(format!("line {line}: bad letter token {token:?}"));
    let mut chars = token.chars();
    let head = chars.next().ok_or_else(bad)?;
    let inverse = match head {
        'a' => false,
        'A' => true,
        _ => return Err(bad()),
    };
    let index: u32 = chars.as_str().parse().map_err(|_| bad())?;
    if index >= m {
        return Err(GroupError::Format(format!(
            "line {line}: letter {token} out of range for m={m}"
        )));
    }
    Ok(Letter { index, inverse })
}

/// Reads the `write_presentation` format.  The seed is not stored in the
/// file; the returned presentation carries seed 0.
pub fn read_presentation<R: BufRead>(r: R) -> Result<Presentation> {
    let mut lines = r.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('#') {
                    break t.to_string();
                }
            }
            None => return Err(GroupError::Format("missing header line".into())),
        }
    };
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (m, model) = match parts.as_slice() {
        ["m", m, "model", tag] => {
            let m: u32 = m
                .parse()
                .map_err(|_| GroupError::Format(format!("bad generator count {m:?}")))?;
            (m, tag.parse::<ModelTag>()?)
        }
        _ => return Err(GroupError::Format(format!("bad header {header:?}"))),
    };
    if m == 0 {
        return Err(GroupError::Format("m must be at least 1".into()));
    }
    let mut set = BTreeSet::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(GroupError::Format(format!(
                "line {lineno}: expected 3 letters, got {}",
                tokens.len()
            )));
        }
        let x = parse_letter(tokens[0], m, lineno)?;
        let y = parse_letter(tokens[1], m, lineno)?;
        let z = parse_letter(tokens[2], m, lineno)?;
        let rel = Relator::new(x, y, z).ok_or_else(|| {
            GroupError::Format(format!("line {lineno}: relator {t:?} is not cyclically reduced"))
        })?;
        set.insert(rel);
    }
    Ok(Presentation { m, relators: set.into_iter().collect(), model, seed: 0 })
}
