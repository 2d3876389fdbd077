//! Deterministic Monte Carlo sweeps over the random-graph and random-group
//! ensembles.
//!
//! Every trial derives its own seed by stably hashing (master seed, sweep
//! tag, grid point, trial index), so results are byte-identical across runs
//! and across any number of worker threads: parallelism only reorders the
//! computation, never the seeds or the output rows.

use crate::certify::{certify_presentation, Certificate, CertifyConstants, ThresholdFamily};
use crate::ergraph::{self, ErGraphError, ErdosRenyiParams};
use crate::groups::{self, GroupError, ModelTag};
use crate::rng::stable_seed;
use rayon::prelude::*;
use serde::Serialize;

// Domain tags for trial-seed derivation.  Part of the output contract: a
// recorded row seed equals stable_seed([master, tag, m, param_bits, trial]).
pub const TAG_ER_GAP: u64 = 1;
pub const TAG_ER_DEGREES: u64 = 2;
pub const TAG_GROUP: u64 = 3;
pub const TAG_CERTIFY: u64 = 4;

/// Which statistic an Erdős–Rényi sweep collects.  Gap trials run the
/// eigensolver; degree trials only tabulate degree statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErKind {
    Gap,
    Degrees,
}

impl ErKind {
    pub fn name(self) -> &'static str {
        match self {
            ErKind::Gap => "gap",
            ErKind::Degrees => "degrees",
        }
    }

    fn tag(self) -> u64 {
        match self {
            ErKind::Gap => TAG_ER_GAP,
            ErKind::Degrees => TAG_ER_DEGREES,
        }
    }
}

/// One Erdős–Rényi trial.  `gap`/`scaled_gap` are present only for gap
/// sweeps (empty CSV cells, JSON nulls otherwise).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErRow {
    pub kind: &'static str,
    pub m: u32,
    pub rho: f64,
    pub trial: u32,
    /// Per-trial seed derived from the master seed.
    pub seed: u64,
    pub connected: bool,
    pub gap: Option<f64>,
    pub scaled_gap: Option<f64>,
    pub min_deg: f64,
    pub max_deg: f64,
    pub l1_dev_expected: f64,
    pub l1_dev_mean: f64,
}

pub const ER_CSV_HEADER: &str =
    "kind,m,rho,trial,seed,connected,gap,scaled_gap,min_deg,max_deg,l1_dev_expected,l1_dev_mean";

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn er_row_csv(row: &ErRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        row.kind,
        row.m,
        row.rho,
        row.trial,
        row.seed,
        row.connected,
        opt_cell(row.gap),
        opt_cell(row.scaled_gap),
        row.min_deg,
        row.max_deg,
        row.l1_dev_expected,
        row.l1_dev_mean,
    )
}

/// Runs `trials` independent trials at every `(m, rho)` grid point.  Rows
/// come back grid-major, trial-minor, independent of the worker count.
pub fn run_er_montecarlo(
    kind: ErKind,
    grid: &[(u32, f64)],
    trials: u32,
    master_seed: u64,
) -> Result<Vec<ErRow>, ErGraphError> {
    for &(m, rho) in grid {
        if m < 2 || !(rho > 0.0 && rho <= 1.0) {
            return Err(ErGraphError::BadParameter(format!(
                "grid point (m={m}, rho={rho}) is out of range"
            )));
        }
    }
    let tasks: Vec<(u32, f64, u32)> = grid
        .iter()
        .flat_map(|&(m, rho)| (0..trials).map(move |t| (m, rho, t)))
        .collect();
    Ok(tasks
        .into_par_iter()
        .map(|(m, rho, trial)| {
            let seed = stable_seed(&[master_seed, kind.tag(), u64::from(m), rho.to_bits(), u64::from(trial)]);
            let g = ergraph::sample_er(&ErdosRenyiParams { m, rho, seed });
            let stats = ergraph::degree_stats(&g, rho).expect("grid validated");
            let (connected, gap, scaled_gap) = match kind {
                ErKind::Gap => {
                    let t = ergraph::gap_trial_from_graph(&g, m, rho);
                    (t.connected, Some(t.gap), Some(t.scaled_gap))
                }
                ErKind::Degrees => (g.is_connected(), None, None),
            };
            ErRow {
                kind: kind.name(),
                m,
                rho,
                trial,
                seed,
                connected,
                gap,
                scaled_gap,
                min_deg: stats.min_deg,
                max_deg: stats.max_deg,
                l1_dev_expected: stats.l1_dev_expected,
                l1_dev_mean: stats.l1_dev_mean,
            }
        })
        .collect())
}

/// One random-presentation trial under the binomial model.
///
/// A trial whose presentation has no relators reports the disconnected
/// convention: gap 1, all 2m vertices isolated, part gaps 1, delta 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub m: u32,
    pub model: &'static str,
    /// Model parameter (the relator probability rho).
    pub param: f64,
    pub trial: u32,
    /// Per-trial seed derived from the master seed.
    pub seed: u64,
    pub n_relators: u64,
    pub gap: f64,
    pub connected: bool,
    pub isolated: u32,
    pub part1_gap: f64,
    pub part2_gap: f64,
    pub part3_gap: f64,
    pub delta: f64,
}

pub const GROUP_CSV_HEADER: &str =
    "m,model,param,trial,seed,n_relators,gap,connected,isolated,part1_gap,part2_gap,part3_gap,delta";

pub fn group_row_csv(row: &GroupRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.m,
        row.model,
        row.param,
        row.trial,
        row.seed,
        row.n_relators,
        row.gap,
        row.connected,
        row.isolated,
        row.part1_gap,
        row.part2_gap,
        row.part3_gap,
        row.delta,
    )
}

/// Runs `trials` binomial-model presentations at every `(m, rho)` grid point
/// and reports the link spectra.  Row order matches `run_er_montecarlo`.
pub fn run_group_montecarlo(
    grid: &[(u32, f64)],
    trials: u32,
    master_seed: u64,
) -> Result<Vec<GroupRow>, GroupError> {
    for &(m, rho) in grid {
        if m == 0 || !(0.0..=1.0).contains(&rho) {
            return Err(GroupError::BadParameter(format!(
                "grid point (m={m}, rho={rho}) is out of range"
            )));
        }
    }
    let tasks: Vec<(u32, f64, u32)> = grid
        .iter()
        .flat_map(|&(m, rho)| (0..trials).map(move |t| (m, rho, t)))
        .collect();
    tasks
        .into_par_iter()
        .map(|(m, rho, trial)| {
            let seed = stable_seed(&[master_seed, TAG_GROUP, u64::from(m), rho.to_bits(), u64::from(trial)]);
            let pres = groups::sample_binomial_model(m, rho, seed)?;
            let n_relators = pres.relators.len() as u64;
            let report = match groups::link_spectral_report(&pres) {
                Ok(r) => r,
                Err(GroupError::EmptyLink) => groups::LinkReport {
                    gap: 1.0,
                    connected: false,
                    isolated: 2 * m,
                    part_gaps: [1.0; 3],
                    delta: 0.0,
                },
                Err(e) => return Err(e),
            };
            Ok(GroupRow {
                m,
                model: "binomial",
                param: rho,
                trial,
                seed,
                n_relators,
                gap: report.gap,
                connected: report.connected,
                isolated: report.isolated,
                part1_gap: report.part_gaps[0],
                part2_gap: report.part_gaps[1],
                part3_gap: report.part_gaps[2],
                delta: report.delta,
            })
        })
        .collect()
}

fn model_param_bits(model: &ModelTag) -> u64 {
    match model {
        ModelTag::Density(d) => d.to_bits(),
        ModelTag::Uniform(n) => *n,
        ModelTag::Binomial(rho) => rho.to_bits(),
        ModelTag::Explicit => 0,
    }
}

/// Samples `trials` presentations at every `(m, model)` grid point and
/// certifies each one.  Seeding and ordering follow the other sweeps, so
/// certificate streams are reproducible across worker counts too.
pub fn run_certify_montecarlo(
    grid: &[(u32, ModelTag)],
    trials: u32,
    master_seed: u64,
    families: &[ThresholdFamily],
    constants: &CertifyConstants,
) -> Result<Vec<Certificate>, GroupError> {
    for (m, model) in grid {
        if *m == 0 {
            return Err(GroupError::BadParameter("m must be at least 1".into()));
        }
        if *model == ModelTag::Explicit {
            return Err(GroupError::BadParameter(
                "certificate sweeps need a sampling model, not explicit relators".into(),
            ));
        }
    }
    let tasks: Vec<(u32, ModelTag, u32)> = grid
        .iter()
        .flat_map(|&(m, model)| (0..trials).map(move |t| (m, model, t)))
        .collect();
    tasks
        .into_par_iter()
        .map(|(m, model, trial)| {
            let seed = stable_seed(&[
                master_seed,
                TAG_CERTIFY,
                u64::from(m),
                model_param_bits(&model),
                u64::from(trial),
            ]);
            let pres = match model {
                ModelTag::Density(d) => groups::sample_density_model(m, d, seed)?,
                ModelTag::Uniform(n) => groups::sample_uniform_model(m, n, seed)?,
                ModelTag::Binomial(rho) => groups::sample_binomial_model(m, rho, seed)?,
                ModelTag::Explicit => unreachable!("rejected above"),
            };
            Ok(certify_presentation(&pres, families, constants))
        })
        .collect()
}

/// Median of a sample (mean of the middle two for even lengths).
/// Panics on empty input.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in sample"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
