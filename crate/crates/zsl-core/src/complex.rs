//! Finite simplicial 2-complexes with finite symmetry groups, the
//! orbit-summed p-energy of vertex maps, and the midpoint averaging
//! iteration whose contraction rate is governed by the link Poincaré
//! constants.
//!
//! Maps take values in ℓ^p_k and the symmetry acts trivially on the target,
//! so equivariance of a map means constancy on vertex orbits.  The energy
//! computes BOTH of its defining expressions — the pair form over link
//! edges and the vertex form against the center — and asserts their
//! equality before returning, so every energy evaluation doubles as a check
//! of the orbit/stabilizer bookkeeping.

use crate::graph::{GraphError, VertexFunction, WeightedGraph};
use crate::numeric::{lp_center, pow_abs};
use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("bad simplex: {0}")]
    BadSimplex(String),
    #[error("vertex {0} does not exist")]
    UnknownVertex(u32),
    #[error("permutations do not form a symmetry group: {0}")]
    NotAnAction(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("link of vertex {0} is empty, has isolated vertices, or is disconnected")]
    DisconnectedLink(u32),
    #[error("iteration did not reach the tolerance within the step budget")]
    MaxIterExceeded { trace: Vec<f64> },
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, ComplexError>;

/// A finite simplicial complex of dimension ≤ 2, closed downward: every
/// face of a stored triangle is a stored edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex2 {
    n: u32,
    edges: BTreeSet<(u32, u32)>,
    triangles: BTreeSet<(u32, u32, u32)>,
}

impl SimplicialComplex2 {
    /// Builds the downward closure of a triangle list on n vertices.
    pub fn from_triangles(
        n: u32,
        triangles: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<Self> {
        let mut tri_set = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (a, b, c) in triangles {
            let mut t = [a, b, c];
            t.sort_unstable();
            if t[0] == t[1] || t[1] == t[2] {
                return Err(ComplexError::BadSimplex(format!(
                    "triangle ({a},{b},{c}) repeats a vertex"
                )));
            }
            if t[2] >= n {
                return Err(ComplexError::BadSimplex(format!(
                    "triangle ({a},{b},{c}) exceeds vertex count {n}"
                )));
            }
            tri_set.insert((t[0], t[1], t[2]));
            edges.insert((t[0], t[1]));
            edges.insert((t[0], t[2]));
            edges.insert((t[1], t[2]));
        }
        Ok(SimplicialComplex2 { n, edges, triangles: tri_set })
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn triangles(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.triangles.iter().copied()
    }

    /// The link of a vertex: one link vertex per edge at the center
    /// (identified with the other endpoint), weighted by triangle counts.
    pub fn link_of(&self, v: u32) -> Result<Link> {
        if v >= self.n {
            return Err(ComplexError::UnknownVertex(v));
        }
        let neighbors: Vec<u32> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        let mut graph = WeightedGraph::empty(neighbors.len() as u32);
        let index = |u: u32| neighbors.binary_search(&u).expect("endpoint is a neighbor") as u32;
        for &(a, b, c) in &self.triangles {
            let pair = if a == v {
                Some((b, c))
            } else if b == v {
                Some((a, c))
            } else if c == v {
                Some((a, b))
            } else {
                None
            };
            if let Some((s, t)) = pair {
                graph.add_weight(index(s), index(t), 1.0)?;
            }
        }
        Ok(Link { neighbors, graph })
    }
}

/// The link of one vertex.
#[derive(Debug, Clone)]
pub struct Link {
    /// Other endpoints of the edges at the center, ascending; link vertex i
    /// of `graph` is `neighbors[i]`.
    pub neighbors: Vec<u32>,
    /// ω(s,t) = number of triangles through the center and both endpoints.
    pub graph: WeightedGraph,
}

/// A finite group acting on a complex by simplicial automorphisms, stored
/// as the full list of vertex permutations.  The target of the maps is
/// acted on trivially.
#[derive(Debug, Clone)]
pub struct FiniteAction {
    n: u32,
    elements: Vec<Vec<u32>>,
    orbit_reps: Vec<u32>,
    rep_of: Vec<u32>,
    stabilizer_orders: Vec<u64>,
}

impl FiniteAction {
    /// The trivial group: every vertex is its own orbit.
    pub fn trivial(complex: &SimplicialComplex2) -> Self {
        let n = complex.vertex_count();
        FiniteAction {
            n,
            elements: vec![(0..n).collect()],
            orbit_reps: (0..n).collect(),
            rep_of: (0..n).collect(),
            stabilizer_orders: vec![1; n as usize],
        }
    }

    /// Validates a full element list: bijections forming a group (identity,
    /// closure, inverses) that maps triangles to triangles.
    pub fn new(complex: &SimplicialComplex2, elements: Vec<Vec<u32>>) -> Result<Self> {
        let n = complex.vertex_count();
        let set: BTreeSet<&Vec<u32>> = elements.iter().collect();
        if set.len() != elements.len() {
            return Err(ComplexError::NotAnAction("duplicate elements".into()));
        }
        let identity: Vec<u32> = (0..n).collect();
        if !set.contains(&identity) {
            return Err(ComplexError::NotAnAction("identity missing".into()));
        }
        for g in &elements {
            if g.len() != n as usize {
                return Err(ComplexError::NotAnAction(format!(
                    "permutation length {} does not match vertex count {n}",
                    g.len()
                )));
            }
            let mut seen = vec![false; n as usize];
            for &img in g {
                if img >= n || seen[img as usize] {
                    return Err(ComplexError::NotAnAction(format!("{g:?} is not a bijection")));
                }
                seen[img as usize] = true;
            }
            for &(a, b, c) in &complex.triangles {
                let mut t = [g[a as usize], g[b as usize], g[c as usize]];
                t.sort_unstable();
                if !complex.triangles.contains(&(t[0], t[1], t[2])) {
                    return Err(ComplexError::NotAnAction(format!(
                        "{g:?} does not map triangle ({a},{b},{c}) to a triangle"
                    )));
                }
            }
        }
        for g in &elements {
            for h in &elements {
                let comp: Vec<u32> = (0..n as usize).map(|v| g[h[v] as usize]).collect();
                if !set.contains(&comp) {
                    return Err(ComplexError::NotAnAction("not closed under composition".into()));
                }
            }
            // Finite closure under composition implies inverses exist.
        }

        // Orbits and stabilizer orders.
        let mut rep_of = vec![u32::MAX; n as usize];
        let mut orbit_reps = Vec::new();
        let mut stabilizer_orders = Vec::new();
        for v in 0..n {
            if rep_of[v as usize] != u32::MAX {
                continue;
            }
            orbit_reps.push(v);
            let mut stab = 0u64;
            for g in &elements {
                let img = g[v as usize];
                if rep_of[img as usize] == u32::MAX {
                    rep_of[img as usize] = v;
                }
                if img == v {
                    stab += 1;
                }
            }
            stabilizer_orders.push(stab);
        }
        Ok(FiniteAction { n, elements, orbit_reps, rep_of, stabilizer_orders })
    }

    /// Generates the group from a set of permutations (closure by repeated
    /// composition), then validates as in `new`.
    pub fn from_generators(complex: &SimplicialComplex2, generators: Vec<Vec<u32>>) -> Result<Self> {
        let n = complex.vertex_count() as usize;
        const CLOSURE_CAP: usize = 10_000;
        let mut set: BTreeSet<Vec<u32>> = BTreeSet::new();
        set.insert((0..complex.vertex_count()).collect());
        let mut frontier: Vec<Vec<u32>> = set.iter().cloned().collect();
        let generators: Vec<Vec<u32>> = generators;
        while let Some(g) = frontier.pop() {
            for gen in &generators {
                if gen.len() != n {
                    return Err(ComplexError::NotAnAction(format!(
                        "generator length {} does not match vertex count {n}",
                        gen.len()
                    )));
                }
                let comp: Vec<u32> = (0..n).map(|v| gen[g[v] as usize]).collect();
                if set.insert(comp.clone()) {
                    if set.len() > CLOSURE_CAP {
                        return Err(ComplexError::NotAnAction(format!(
                            "group closure exceeds {CLOSURE_CAP} elements"
                        )));
                    }
                    frontier.push(comp);
                }
            }
        }
        FiniteAction::new(complex, set.into_iter().collect())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn orbit_reps(&self) -> &[u32] {
        &self.orbit_reps
    }

    /// |Γ_m| for the i-th orbit representative.
    pub fn stabilizer_order(&self, rep_index: usize) -> u64 {
        self.stabilizer_orders[rep_index]
    }

    pub fn representative_of(&self, v: u32) -> u32 {
        self.rep_of[v as usize]
    }

    /// With the trivial target action, equivariance is constancy on orbits.
    pub fn check_equivariant(&self, f: &VertexFunction) -> Result<()> {
        if f.len() != self.n as usize {
            return Err(ComplexError::BadParameter(format!(
                "map has {} rows, complex has {} vertices",
                f.len(),
                self.n
            )));
        }
        for v in 0..self.n {
            let rep = self.rep_of[v as usize];
            if f.row(v as usize) != f.row(rep as usize) {
                return Err(ComplexError::BadParameter(format!(
                    "map is not equivariant: rows {v} and {rep} differ"
                )));
            }
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(ComplexError::BadParameter(format!("p must be at least 1, got {p}")));
    }
    Ok(())
}

fn norm_p(a: &[f64], b: &[f64], p: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| pow_abs(x - y, p)).sum()
}

/// The p-energy E(φ,ψ): both defining expressions are evaluated — the pair
/// form Σ_m (1/|Γ_m|)·Σ ω_m(s,t)‖φ(s)−ψ(t)‖^p over ordered link edges, and
/// the vertex form Σ_m (1/|Γ_m|)·Σ d_m(s)‖φ(s)−ψ(m)‖^p — asserted equal,
/// and the common p-th root is returned.  Both maps must be equivariant.
pub fn energy(
    complex: &SimplicialComplex2,
    action: &FiniteAction,
    phi: &VertexFunction,
    psi: &VertexFunction,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    check_dims(complex, action, phi)?;
    check_dims(complex, action, psi)?;
    if phi.dim() != psi.dim() {
        return Err(ComplexError::BadParameter(format!(
            "maps have different target dimensions {} and {}",
            phi.dim(),
            psi.dim()
        )));
    }
    let mut pair_form = 0.0;
    let mut vertex_form = 0.0;
    for (i, &m) in action.orbit_reps().iter().enumerate() {
        let link = complex.link_of(m)?;
        let inv_stab = 1.0 / action.stabilizer_order(i) as f64;
        for (s_idx, t_idx, w) in link.graph.edges() {
            let s = link.neighbors[s_idx as usize] as usize;
            let t = link.neighbors[t_idx as usize] as usize;
            // Both orientations of the unordered edge.
            pair_form += w
                * inv_stab
                * (norm_p(phi.row(s), psi.row(t), p) + norm_p(phi.row(t), psi.row(s), p));
        }
        for (s_idx, d) in link.graph.degrees().into_iter().enumerate() {
            let s = link.neighbors[s_idx] as usize;
            vertex_form += d * inv_stab * norm_p(phi.row(s), psi.row(m as usize), p);
        }
    }
    let tol = 1e-10 * pair_form.abs().max(1.0);
    assert!(
        (pair_form - vertex_form).abs() <= tol,
        "energy forms disagree: pair {pair_form} vs vertex {vertex_form}"
    );
    Ok(pair_form.powf(1.0 / p))
}

fn check_dims(
    complex: &SimplicialComplex2,
    action: &FiniteAction,
    f: &VertexFunction,
) -> Result<()> {
    if f.len() != complex.vertex_count() as usize {
        return Err(ComplexError::BadParameter(format!(
            "map has {} rows, complex has {} vertices",
            f.len(),
            complex.vertex_count()
        )));
    }
    action.check_equivariant(f)
}

/// Orbit-summed distance d(φ,ψ) = (Σ_m a_m·‖φ(m)−ψ(m)‖^p)^{1/p}, with
/// a_m the total (ordered) link weight of the representative over |Γ_m|.
pub fn map_distance(
    complex: &SimplicialComplex2,
    action: &FiniteAction,
    phi: &VertexFunction,
    psi: &VertexFunction,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    check_dims(complex, action, phi)?;
    check_dims(complex, action, psi)?;
    let mut sum = 0.0;
    for (i, &m) in action.orbit_reps().iter().enumerate() {
        let link = complex.link_of(m)?;
        let total_degree: f64 = link.graph.degrees().iter().sum();
        let a_m = total_degree / action.stabilizer_order(i) as f64;
        sum += a_m * norm_p(phi.row(m as usize), psi.row(m as usize), p);
    }
    Ok(sum.powf(1.0 / p))
}

/// One averaging half-step: for each orbit representative, the coordinate-
/// wise p-mean of φ over its link (weights ∝ link degrees), extended to the
/// whole orbit by equivariance.
pub fn p_mean_map(
    complex: &SimplicialComplex2,
    action: &FiniteAction,
    phi: &VertexFunction,
    p: f64,
) -> Result<VertexFunction> {
    check_p(p)?;
    check_dims(complex, action, phi)?;
    let k = phi.dim();
    let mut rep_values: Vec<Vec<f64>> = Vec::with_capacity(action.orbit_reps().len());
    for &m in action.orbit_reps() {
        let link = complex.link_of(m)?;
        let weights = link.graph.degrees();
        let ok = !weights.is_empty() && weights.iter().all(|&d| d > 0.0) && {
            let (connected, _) = link.graph.support_structure();
            connected
        };
        if !ok {
            return Err(ComplexError::DisconnectedLink(m));
        }
        let mut value = vec![0.0; k];
        let mut coords = vec![0.0; link.neighbors.len()];
        for (j, slot) in value.iter_mut().enumerate() {
            for (idx, &s) in link.neighbors.iter().enumerate() {
                coords[idx] = phi.row(s as usize)[j];
            }
            *slot = lp_center(&weights, &coords, p);
        }
        rep_values.push(value);
    }
    let mut psi = VertexFunction::zeros(complex.vertex_count() as usize, k);
    for v in 0..complex.vertex_count() {
        let rep = action.representative_of(v);
        let rep_index =
            action.orbit_reps().binary_search(&rep).expect("representative is listed");
        psi.row_mut(v as usize).copy_from_slice(&rep_values[rep_index]);
    }
    Ok(psi)
}

fn midpoint(a: &VertexFunction, b: &VertexFunction) -> VertexFunction {
    let mut out = a.clone();
    for (x, y) in out.data_mut().iter_mut().zip(b.data()) {
        *x = 0.5 * (*x + *y);
    }
    out
}

/// Trace of an averaging run.
#[derive(Debug, Clone)]
pub struct FixedPointRun {
    /// Final map.
    pub phi: VertexFunction,
    /// E(φ_0), E(φ_1), … (one entry per evaluated map).
    pub energies: Vec<f64>,
    /// energies[i+1]/energies[i]; the link Poincaré constants bound these.
    pub ratios: Vec<f64>,
    pub steps: usize,
}

/// Iterates φ ← (φ + ψ)/2 with ψ the link p-mean map, until the energy
/// drops below `tol`.  Errors with the partial energy trace if `max_iter`
/// steps do not suffice, and with `DisconnectedLink` when a representative's
/// link cannot support the averaging.
pub fn iterate_fixed_point(
    complex: &SimplicialComplex2,
    action: &FiniteAction,
    phi0: &VertexFunction,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointRun> {
    check_p(p)?;
    if !(tol >= 0.0) {
        return Err(ComplexError::BadParameter(format!("tolerance must be ≥ 0, got {tol}")));
    }
    let mut phi = phi0.clone();
    let mut energies = vec![energy(complex, action, &phi, &phi, p)?];
    let mut ratios = Vec::new();
    for step in 0..=max_iter {
        let current = *energies.last().expect("nonempty");
        if current < tol {
            return Ok(FixedPointRun { phi, energies, ratios, steps: step });
        }
        if step == max_iter {
            break;
        }
        let psi = p_mean_map(complex, action, &phi, p)?;
        phi = midpoint(&phi, &psi);
        let next = energy(complex, action, &phi, &phi, p)?;
        ratios.push(if current > 0.0 { next / current } else { 0.0 });
        energies.push(next);
    }
    Err(ComplexError::MaxIterExceeded { trace: energies })
}

/// Standard example complexes.
pub mod shapes {
    use super::*;

    /// One triangle on three vertices; every link is a two-vertex path.
    pub fn triangle() -> SimplicialComplex2 {
        SimplicialComplex2::from_triangles(3, [(0, 1, 2)]).expect("valid")
    }

    /// The octahedron boundary: antipodal pairs (0,3), (1,4), (2,5); every
    /// link is a 4-cycle.
    pub fn octahedron() -> SimplicialComplex2 {
        SimplicialComplex2::from_triangles(
            6,
            [
                (0, 1, 2),
                (0, 1, 5),
                (0, 4, 2),
                (0, 4, 5),
                (3, 1, 2),
                (3, 1, 5),
                (3, 4, 2),
                (3, 4, 5),
            ],
        )
        .expect("valid")
    }
}

/// Writes "v <n>" then one "t i j k" line per triangle.
pub fn write_complex<W: Write>(w: &mut W, complex: &SimplicialComplex2) -> Result<()> {
    writeln!(w, "v {}", complex.vertex_count())?;
    for (a, b, c) in complex.triangles() {
        writeln!(w, "t {a} {b} {c}")?;
    }
    Ok(())
}

/// Reads the `write_complex` format.
pub fn read_complex<R: BufRead>(r: R) -> Result<SimplicialComplex2> {
    let mut n: Option<u32> = None;
    let mut triangles = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        match tokens.as_slice() {
            ["v", count] if n.is_none() => {
                n = Some(count.parse().map_err(|_| {
                    ComplexError::Format(format!("line {lineno}: bad vertex count {count:?}"))
                })?);
            }
            ["t", a, b, c] if n.is_some() => {
                let parse = |s: &str| {
                    s.parse::<u32>().map_err(|_| {
                        ComplexError::Format(format!("line {lineno}: bad vertex index {s:?}"))
                    })
                };
                triangles.push((parse(a)?, parse(b)?, parse(c)?));
            }
            _ => {
                return Err(ComplexError::Format(format!("line {lineno}: unexpected {t:?}")));
            }
        }
    }
    let n = n.ok_or_else(|| ComplexError::Format("missing \"v <n>\" header".into()))?;
    SimplicialComplex2::from_triangles(n, triangles)
}

/// Parses one permutation per non-comment line in cycle notation, e.g.
/// "(0 3)(1 4)(2 5)", and returns the group they generate.
pub fn read_action<R: BufRead>(r: R, complex: &SimplicialComplex2) -> Result<FiniteAction> {
    let n = complex.vertex_count();
    let mut generators = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut perm: Vec<u32> = (0..n).collect();
        let mut rest = t;
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| {
                ComplexError::Format(format!("line {lineno}: expected '(' in {t:?}"))
            })?;
            let (body, tail) = open.split_once(')').ok_or_else(|| {
                ComplexError::Format(format!("line {lineno}: unclosed cycle in {t:?}"))
            })?;
            let cycle: Vec<u32> = body
                .split_whitespace()
                .map(|s| {
                    s.parse::<u32>().map_err(|_| {
                        ComplexError::Format(format!("line {lineno}: bad vertex {s:?}"))
                    })
                })
                .collect::<Result<_>>()?;
            for &v in &cycle {
                if v >= n {
                    return Err(ComplexError::Format(format!(
                        "line {lineno}: vertex {v} out of range"
                    )));
                }
            }
            for w in cycle.windows(2) {
                perm[w[0] as usize] = w[1];
            }
            if cycle.len() > 1 {
                perm[cycle[cycle.len() - 1] as usize] = cycle[0];
            }
            rest = tail.trim_start();
        }
        generators.push(perm);
    }
    FiniteAction::from_generators(complex, generators)
}
