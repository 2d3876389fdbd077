//! Numerical laboratory for two-sided spectral gaps of weighted graphs and the
//! fixed-point machinery they certify.
//!
//! The crate is organised around one pipeline:
//!
//! 1. [`graph`] — weighted graphs `(V, ω)`, their random-walk measures, and the
//!    Markov averaging operator `A`.
//! 2. [`spectral`] — dense symmetric eigendecomposition of the normalised
//!    adjacency, the two-sided gap `‖A⁰‖` (the operator norm of `A` restricted
//!    to the orthogonal complement of constants), and perturbation / union
//!    bounds for that norm.
//! 3. [`poincare`] and [`plaplacian`] — p-Poincaré constants `π_p` estimated by
//!    projected gradient ascent with random restarts, the closed p = 2 form,
//!    Mazur-map norm transfer, interpolation bounds for `‖A‖` on mean-zero
//!    `L^p`, and the nonlinear p-spectral quantity `λ_{1,p} = 1/(2π_p^p)`.
//! 4. [`ergraph`] — Erdős–Rényi sampling and degree/gap Monte Carlo trials.
//! 5. [`groups`] — random triangular group presentations (density, uniform,
//!    and binomial models), their link graphs on `S ∪ S⁻¹`, and the three-way
//!    positional decomposition of those links.
//! 6. [`complex`] — finite 2-complexes with finite group actions, the
//!    equivariant `p`-energy, and the fixed-point averaging iteration that
//!    contracts it.
//! 7. [`certify`] — explicit `ε(X)` thresholds per Banach-space family and
//!    certificates mapping a measured gap to the certified `p`-range.
//!
//! Everything randomised runs on an explicit counter-based generator
//! ([`rng::SplitMix64`]) so that every experiment is reproducible bit for bit
//! from a master seed, independently of worker count.

// Vertex loops index several parallel arrays by vertex id; the index form is
// the clearer one here.
#![allow(clippy::needless_range_loop)]
// Validation guards are written `!(x >= c)` on purpose: unlike `x < c`, the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod complex;
pub mod ergraph;
pub mod graph;
pub mod groups;
mod lapack;
pub mod mc;
pub mod numeric;
pub mod plaplacian;
pub mod poincare;
pub mod rng;
pub mod spectral;
