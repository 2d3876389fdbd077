//! The eight experiment commands.  Every command resolves its parameters
//! (flags over config file over environment), echoes the resolved
//! configuration at the head of its output, emits rows in a deterministic
//! order, and prints a one-line summary to stderr.

use crate::config::{ConfigEcho, FileConfig, RhoRule};
use crate::{CliError, Common, OutFormat};
use serde_json::Value;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use zsl_core::certify::{
    self, Certificate, CertifyConstants, ThresholdFamily, DEFAULT_B,
};
use zsl_core::complex::{self, FiniteAction, SimplicialComplex2};
use zsl_core::graph::{families, read_graph, VertexFunction, WeightedGraph};
use zsl_core::groups::{self, ModelTag, Presentation};
use zsl_core::mc::{self, ErKind};
use zsl_core::plaplacian;
use zsl_core::poincare::{self, ScanRow, SCAN_CSV_HEADER};
use zsl_core::rng::{stable_seed, SplitMix64};
use zsl_core::spectral;

// ---------------------------------------------------------------------------
// output plumbing

/// Buffered sink for the data stream (file or stdout).
struct Emitter {
    out: BufWriter<Box<dyn Write>>,
    format: OutFormat,
    master_seed: u64,
}

impl Emitter {
    fn open(path: Option<&Path>, format: OutFormat, master_seed: u64) -> Result<Self, CliError> {
        let raw: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| {
                CliError::Runtime(format!("cannot create {}: {e}", p.display()))
            })?),
            None => Box::new(std::io::stdout()),
        };
        Ok(Emitter { out: BufWriter::new(raw), format, master_seed })
    }

    fn io(e: std::io::Error) -> CliError {
        CliError::Runtime(format!("write failed: {e}"))
    }

    /// Config echo plus (for CSV) the header row, `master_seed` first.
    fn begin(&mut self, echo: &ConfigEcho, csv_header: &str) -> Result<(), CliError> {
        match self.format {
            OutFormat::Csv => {
                writeln!(self.out, "{}", echo.csv_line()).map_err(Self::io)?;
                writeln!(self.out, "master_seed,{csv_header}").map_err(Self::io)?;
            }
            OutFormat::Json => {
                writeln!(self.out, "{}", echo.json_line()).map_err(Self::io)?;
            }
        }
        Ok(())
    }

    /// One data row: `core_csv` for the CSV lane, `value` for the JSON lane.
    /// Every row carries the master seed.
    fn row(&mut self, core_csv: &str, value: Value) -> Result<(), CliError> {
        match self.format {
            OutFormat::Csv => {
                writeln!(self.out, "{},{core_csv}", self.master_seed).map_err(Self::io)
            }
            OutFormat::Json => {
                let Value::Object(mut map) = value else {
                    unreachable!("rows serialize to objects");
                };
                map.insert("master_seed".to_string(), self.master_seed.into());
                writeln!(self.out, "{}", Value::Object(map)).map_err(Self::io)
            }
        }
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(Self::io)
    }
}

fn to_value<T: serde::Serialize>(row: &T) -> Value {
    serde_json::to_value(row).expect("rows serialize")
}

fn summary(line: &str) {
    eprintln!("{line}");
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("bad {what} value {tok:?}")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// er-stats

pub struct ErStatsParams {
    pub m_list: String,
    pub rho_rule: RhoRule,
    pub kind: ErKind,
    pub trials: u32,
    pub seed: u64,
}

impl ErStatsParams {
    pub fn resolve(
        cfg: &FileConfig,
        m: Option<String>,
        rho: Option<f64>,
        rho_rule: Option<RhoRule>,
        kind: Option<String>,
        trials: Option<u32>,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let m_list = cfg
            .resolve(m, "m")?
            .ok_or_else(|| CliError::Validation("--m is required".into()))?;
        let rho = cfg.resolve(rho, "rho")?;
        let rho_rule = cfg.resolve(rho_rule, "rho-rule")?;
        let rho_rule = match (rho, rho_rule) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("--rho and --rho-rule are exclusive".into()))
            }
            (Some(v), None) => RhoRule::Absolute(v),
            (None, Some(rule)) => rule,
            (None, None) => {
                return Err(CliError::Validation("one of --rho / --rho-rule is required".into()))
            }
        };
        let kind = match cfg.resolve(kind, "kind")?.as_deref() {
            None | Some("gap") => ErKind::Gap,
            Some("degrees") => ErKind::Degrees,
            Some(other) => {
                return Err(CliError::Validation(format!(
                    "unknown kind {other:?}; use gap or degrees"
                )))
            }
        };
        let trials = cfg.resolve(trials, "trials")?.unwrap_or(50);
        let seed = cfg.resolve_seed(seed)?;
        Ok(ErStatsParams { m_list, rho_rule, kind, trials, seed })
    }
}

pub fn er_stats(p: ErStatsParams, common: &Common) -> Result<(), CliError> {
    let ms: Vec<u32> = parse_list(&p.m_list, "m")?;
    if ms.is_empty() {
        return Err(CliError::Validation("grid is empty".into()));
    }
    let grid: Vec<(u32, f64)> = ms.iter().map(|&m| (m, p.rho_rule.apply(m))).collect();
    let rows = mc::run_er_montecarlo(p.kind, &grid, p.trials, p.seed)?;

    let mut echo = ConfigEcho::new("er-stats", p.seed);
    echo.set("m", ms.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .set("rho_rule", p.rho_rule.echo())
        .set("kind", p.kind.name())
        .set("trials", p.trials)
        .set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, p.seed)?;
    emitter.begin(&echo, mc::ER_CSV_HEADER)?;
    for row in &rows {
        emitter.row(&mc::er_row_csv(row), to_value(row))?;
    }
    emitter.finish()?;

    let connected = rows.iter().filter(|r| r.connected).count();
    summary(&format!(
        "er-stats: {} rows ({} grid points x {} trials), {}/{} connected",
        rows.len(),
        grid.len(),
        p.trials,
        connected,
        rows.len()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// group-sample

pub struct ModelChoice {
    pub tag: ModelTag,
}

impl ModelChoice {
    pub fn resolve(
        cfg: &FileConfig,
        model: Option<String>,
        rho: Option<f64>,
        count: Option<u64>,
        density: Option<f64>,
    ) -> Result<Self, CliError> {
        let model = cfg
            .resolve(model, "model")?
            .ok_or_else(|| CliError::Validation("--model is required".into()))?;
        let rho = cfg.resolve(rho, "rho")?;
        let count = cfg.resolve(count, "count")?;
        let density = cfg.resolve(density, "density")?;
        let tag = match model.as_str() {
            "binomial" => ModelTag::Binomial(rho.ok_or_else(|| {
                CliError::Validation("model binomial needs --rho".into())
            })?),
            "uniform" => ModelTag::Uniform(count.ok_or_else(|| {
                CliError::Validation("model uniform needs --count".into())
            })?),
            "density" => ModelTag::Density(density.ok_or_else(|| {
                CliError::Validation("model density needs --density".into())
            })?),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown model {other:?}; use binomial, uniform, or density"
                )))
            }
        };
        Ok(ModelChoice { tag })
    }

    fn sample(&self, m: u32, seed: u64) -> Result<Presentation, CliError> {
        let pres = match self.tag {
            ModelTag::Binomial(rho) => groups::sample_binomial_model(m, rho, seed)?,
            ModelTag::Uniform(n) => groups::sample_uniform_model(m, n, seed)?,
            ModelTag::Density(d) => groups::sample_density_model(m, d, seed)?,
            ModelTag::Explicit => unreachable!("never constructed"),
        };
        Ok(pres)
    }
}

pub fn group_sample(
    cfg: &FileConfig,
    m: Option<u32>,
    model: ModelChoice,
    seed: Option<u64>,
    common: &Common,
) -> Result<(), CliError> {
    let m = cfg
        .resolve(m, "m")?
        .ok_or_else(|| CliError::Validation("--m is required".into()))?;
    let seed = cfg.resolve_seed(seed)?;
    let pres = model.sample(m, seed)?;

    let raw: Box<dyn Write> = match common.out.as_deref() {
        Some(p) => Box::new(File::create(p).map_err(|e| {
            CliError::Runtime(format!("cannot create {}: {e}", p.display()))
        })?),
        None => Box::new(std::io::stdout()),
    };
    let mut out = BufWriter::new(raw);
    groups::write_presentation(&mut out, &pres)?;
    out.flush().map_err(Emitter::io)?;

    summary(&format!(
        "group-sample: m={} model={} seed={} -> {} relators (finite regime: {})",
        m,
        pres.model,
        seed,
        pres.relators.len(),
        match pres.model {
            ModelTag::Binomial(rho) => groups::finiteness_regime_flag(m, rho).to_string(),
            _ => "n/a".to_string(),
        }
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// link-spectrum

pub fn link_spectrum_file(input: &Path, common: &Common) -> Result<(), CliError> {
    let file = File::open(input)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", input.display())))?;
    let pres = groups::read_presentation(BufReader::new(file))?;
    let report = groups::link_spectral_report(&pres)?;
    let row = mc::GroupRow {
        m: pres.m,
        model: pres.model.name(),
        param: pres.model.param(),
        trial: 0,
        seed: pres.seed,
        n_relators: pres.relators.len() as u64,
        gap: report.gap,
        connected: report.connected,
        isolated: report.isolated,
        part1_gap: report.part_gaps[0],
        part2_gap: report.part_gaps[1],
        part3_gap: report.part_gaps[2],
        delta: report.delta,
    };

    let mut echo = ConfigEcho::new("link-spectrum", pres.seed);
    echo.set("input", input.display()).set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, pres.seed)?;
    emitter.begin(&echo, mc::GROUP_CSV_HEADER)?;
    emitter.row(&mc::group_row_csv(&row), to_value(&row))?;
    emitter.finish()?;

    summary(&format!(
        "link-spectrum: m={} {} relators, gap {:.6}, connected {}",
        row.m, row.n_relators, row.gap, row.connected
    ));
    Ok(())
}

pub fn link_spectrum_sweep(
    cfg: &FileConfig,
    m: Option<String>,
    rho: Option<f64>,
    trials: Option<u32>,
    seed: Option<u64>,
    common: &Common,
) -> Result<(), CliError> {
    let m_list = cfg
        .resolve(m, "m")?
        .ok_or_else(|| CliError::Validation("--m is required (or use --input)".into()))?;
    let ms: Vec<u32> = parse_list(&m_list, "m")?;
    let rho = cfg
        .resolve(rho, "rho")?
        .ok_or_else(|| CliError::Validation("--rho is required (or use --input)".into()))?;
    let trials = cfg.resolve(trials, "trials")?.unwrap_or(50);
    let seed = cfg.resolve_seed(seed)?;
    let grid: Vec<(u32, f64)> = ms.iter().map(|&m| (m, rho)).collect();
    let rows = mc::run_group_montecarlo(&grid, trials, seed)?;

    let mut echo = ConfigEcho::new("link-spectrum", seed);
    echo.set("m", ms.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .set("rho", rho)
        .set("model", "binomial")
        .set("trials", trials)
        .set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, seed)?;
    emitter.begin(&echo, mc::GROUP_CSV_HEADER)?;
    for row in &rows {
        emitter.row(&mc::group_row_csv(row), to_value(row))?;
    }
    emitter.finish()?;

    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    summary(&format!(
        "link-spectrum: {} rows, median gap {:.6}",
        rows.len(),
        mc::median(&gaps)
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// certify

pub const CERT_CSV_HEADER: &str = "m,model,seed,n_relators,gap,family,family_params,epsilon,certified,max_p,unbounded,confdim_lower";

fn certificate_csv_lines(cert: &Certificate) -> Vec<String> {
    cert.families
        .iter()
        .map(|fam| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                cert.m,
                cert.model,
                cert.seed,
                cert.n_relators,
                cert.gap,
                fam.name,
                fam.params,
                fam.epsilon,
                fam.certified,
                fam.max_p.map(|p| p.to_string()).unwrap_or_default(),
                fam.unbounded,
                cert.confdim_lower.map(|c| c.to_string()).unwrap_or_default(),
            )
        })
        .collect()
}

pub struct CertifyParams {
    pub families: Vec<ThresholdFamily>,
    pub constants: CertifyConstants,
}

impl CertifyParams {
    pub fn resolve(
        cfg: &FileConfig,
        family: Vec<String>,
        alpha: Option<f64>,
        const_k: Option<f64>,
        const_b: Option<f64>,
        eta: Option<f64>,
    ) -> Result<Self, CliError> {
        let alpha = cfg.resolve(alpha, "alpha")?.unwrap_or(1.0);
        let names = if family.is_empty() {
            match cfg.resolve(None::<String>, "family")? {
                Some(raw) => parse_list(&raw, "family")?,
                None => vec!["lp".to_string()],
            }
        } else {
            family
        };
        let mut families = Vec::new();
        for name in names {
            match name.as_str() {
                "lp" => families.push(ThresholdFamily::Lp),
                "subquotient" => families.push(ThresholdFamily::Subquotient { alpha }),
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown family {other:?}; use lp or subquotient"
                    )))
                }
            }
        }
        let constants = CertifyConstants {
            k: cfg.resolve(const_k, "const-k")?.unwrap_or(1.0),
            b: cfg.resolve(const_b, "const-b")?.unwrap_or(DEFAULT_B),
            eta: cfg.resolve(eta, "eta")?.unwrap_or(0.01),
        };
        Ok(CertifyParams { families, constants })
    }
}

fn families_echo(families: &[ThresholdFamily]) -> String {
    families
        .iter()
        .map(|f| match f {
            ThresholdFamily::Lp => "lp".to_string(),
            ThresholdFamily::Subquotient { alpha } => format!("subquotient(alpha={alpha})"),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn emit_certificates(
    command_echo: ConfigEcho,
    certs: &[Certificate],
    seed: u64,
    common: &Common,
) -> Result<(), CliError> {
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, seed)?;
    emitter.begin(&command_echo, CERT_CSV_HEADER)?;
    for cert in certs {
        match common.format {
            OutFormat::Csv => {
                for line in certificate_csv_lines(cert) {
                    emitter.row(&line, Value::Null)?;
                }
            }
            OutFormat::Json => emitter.row("", to_value(cert))?,
        }
    }
    emitter.finish()
}

fn certification_summary(certs: &[Certificate]) -> String {
    let mut parts = Vec::new();
    if certs.is_empty() {
        return "no certificates".to_string();
    }
    for (i, fam) in certs[0].families.iter().enumerate() {
        let hits = certs.iter().filter(|c| c.families[i].certified).count();
        let name = if fam.params.is_empty() {
            fam.name.clone()
        } else {
            format!("{}({})", fam.name, fam.params)
        };
        parts.push(format!("{name}: {hits}/{}", certs.len()));
    }
    format!("certified {}", parts.join(", "))
}

pub fn certify_file(input: &Path, params: CertifyParams, common: &Common) -> Result<(), CliError> {
    let file = File::open(input)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", input.display())))?;
    let pres = groups::read_presentation(BufReader::new(file))?;
    let cert = certify::certify_presentation(&pres, &params.families, &params.constants);

    let mut echo = ConfigEcho::new("certify", pres.seed);
    echo.set("input", input.display())
        .set("families", families_echo(&params.families))
        .set("const_k", params.constants.k)
        .set("const_b", params.constants.b)
        .set("eta", params.constants.eta)
        .set("format", common.format.name());
    emit_certificates(echo, std::slice::from_ref(&cert), pres.seed, common)?;
    summary(&format!("certify: 1 presentation; {}", certification_summary(&[cert])));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn certify_sweep(
    cfg: &FileConfig,
    m: Option<String>,
    model: ModelChoice,
    trials: Option<u32>,
    seed: Option<u64>,
    params: CertifyParams,
    common: &Common,
) -> Result<(), CliError> {
    let m_list = cfg
        .resolve(m, "m")?
        .ok_or_else(|| CliError::Validation("--m is required".into()))?;
    let ms: Vec<u32> = parse_list(&m_list, "m")?;
    let trials = cfg.resolve(trials, "trials")?.unwrap_or(100);
    let seed = cfg.resolve_seed(seed)?;
    let grid: Vec<(u32, ModelTag)> = ms.iter().map(|&m| (m, model.tag)).collect();
    let certs = mc::run_certify_montecarlo(&grid, trials, seed, &params.families, &params.constants)?;

    let mut echo = ConfigEcho::new("certify", seed);
    echo.set("m", ms.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
        .set("model", model.tag)
        .set("trials", trials)
        .set("families", families_echo(&params.families))
        .set("const_k", params.constants.k)
        .set("const_b", params.constants.b)
        .set("eta", params.constants.eta)
        .set("format", common.format.name());
    emit_certificates(echo, &certs, seed, common)?;
    summary(&format!(
        "certify: {} presentations; {}",
        certs.len(),
        certification_summary(&certs)
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// graph sources shared by poincare / plaplacian

/// A graph argument: a file path or a family spec like `complete:8`,
/// `cycle:5`, `path:4`, `star:6`, `complete-bipartite:3x4`.
pub fn load_graph(spec: &str) -> Result<(String, WeightedGraph), CliError> {
    if let Some((name, rest)) = spec.split_once(':') {
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| CliError::Validation(format!("bad size {s:?} in {spec:?}")))
        };
        let g = match name {
            "complete" => families::complete(parse(rest)?),
            "cycle" => families::cycle(parse(rest)?),
            "path" => families::path(parse(rest)?),
            "star" => families::star(parse(rest)?),
            "complete-bipartite" => {
                let (a, b) = rest.split_once('x').ok_or_else(|| {
                    CliError::Validation(format!("{spec:?}: expected complete-bipartite:AxB"))
                })?;
                families::complete_bipartite(parse(a)?, parse(b)?)
            }
            _ => {
                return Err(CliError::Validation(format!(
                    "unknown family {name:?}; use complete, cycle, path, star, complete-bipartite, or a file path"
                )))
            }
        };
        return Ok((spec.to_string(), g));
    }
    let file = File::open(spec)
        .map_err(|e| CliError::Runtime(format!("cannot open {spec}: {e}")))?;
    let g = read_graph(BufReader::new(file))?;
    Ok((spec.to_string(), g))
}

// ---------------------------------------------------------------------------
// poincare

#[allow(clippy::too_many_arguments)]
pub fn poincare_cmd(
    cfg: &FileConfig,
    graph: Option<String>,
    p_flag: Option<f64>,
    k: Option<usize>,
    restarts: Option<u32>,
    max_iters: Option<u32>,
    bipartite: bool,
    seed: Option<u64>,
    common: &Common,
) -> Result<(), CliError> {
    let spec = cfg
        .resolve(graph, "graph")?
        .ok_or_else(|| CliError::Validation("--graph is required".into()))?;
    let p = cfg.resolve(p_flag, "p")?.unwrap_or(2.0);
    let k = cfg.resolve(k, "k")?.unwrap_or(1);
    let restarts = cfg.resolve(restarts, "restarts")?.unwrap_or(32);
    let max_iters = cfg.resolve(max_iters, "max-iters")?.unwrap_or(poincare::DEFAULT_MAX_ITERS);
    let seed = cfg.resolve_seed(seed)?;
    let (graph_id, g) = load_graph(&spec)?;

    let estimate = if bipartite {
        let parts = bipartition_of(&spec, &g)?;
        poincare::bipartite_poincare_estimate(&g, &parts, p, k, restarts, seed)?
    } else {
        poincare::poincare_estimate_with_iters(&g, p, k, restarts, max_iters, seed)?
    };
    let row = ScanRow {
        graph_id: graph_id.clone(),
        p,
        k,
        estimate: estimate.lower_estimate,
        upper_bound: estimate.upper_bound,
        restarts,
        seed,
    };

    let mut echo = ConfigEcho::new("poincare", seed);
    echo.set("graph", &graph_id)
        .set("p", p)
        .set("k", k)
        .set("restarts", restarts)
        .set("max_iters", max_iters)
        .set("bipartite", bipartite)
        .set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, seed)?;
    emitter.begin(&echo, SCAN_CSV_HEADER)?;
    let json = serde_json::json!({
        "graph_id": row.graph_id,
        "p": row.p,
        "k": row.k,
        "estimate": row.estimate,
        "upper_bound": row.upper_bound,
        "restarts": row.restarts,
        "seed": row.seed,
    });
    emitter.row(&row.csv_line(), json)?;
    emitter.finish()?;

    summary(&format!(
        "poincare {graph_id} p={p} k={k}: estimate {:.9}{}",
        row.estimate,
        row.upper_bound.map(|u| format!(", upper bound {u:.9}")).unwrap_or_default()
    ));
    Ok(())
}

/// Bipartition for the bipartite variant, derived from the family specifier
/// (side sizes are only known for complete-bipartite graphs).
fn bipartition_of(spec: &str, g: &WeightedGraph) -> Result<Vec<bool>, CliError> {
    if let Some(rest) = spec.strip_prefix("complete-bipartite:") {
        if let Some((a, _)) = rest.split_once('x') {
            let a: u32 = a.parse().expect("validated by load_graph");
            return Ok((0..g.vertex_count()).map(|v| v >= a).collect());
        }
    }
    Err(CliError::Validation(
        "--bipartite currently needs a complete-bipartite:AxB graph spec".into(),
    ))
}

// ---------------------------------------------------------------------------
// plaplacian

#[allow(clippy::too_many_arguments)]
pub fn plaplacian_cmd(
    cfg: &FileConfig,
    graph: Option<String>,
    p_flag: Option<f64>,
    restarts: Option<u32>,
    skip_gap: bool,
    seed: Option<u64>,
    common: &Common,
) -> Result<(), CliError> {
    let spec = cfg
        .resolve(graph, "graph")?
        .ok_or_else(|| CliError::Validation("--graph is required".into()))?;
    let p = cfg.resolve(p_flag, "p")?.unwrap_or(2.0);
    let restarts = cfg.resolve(restarts, "restarts")?.unwrap_or(24);
    let seed = cfg.resolve_seed(seed)?;
    let (graph_id, g) = load_graph(&spec)?;

    let gap = if skip_gap {
        None
    } else {
        Some(spectral::spectral_report(&g)?.restricted_norm)
    };
    let report = plaplacian::lambda1p_report(&g, p, restarts, seed, gap)?;

    let mut echo = ConfigEcho::new("plaplacian", seed);
    echo.set("graph", &graph_id)
        .set("p", p)
        .set("restarts", restarts)
        .set("skip_gap", skip_gap)
        .set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, seed)?;
    emitter.begin(&echo, "graph_id,p,lambda_1p_upper,lambda_lower_from_gap,gap")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    emitter.row(
        &format!(
            "{graph_id},{p},{},{},{}",
            report.lambda_1p_upper,
            opt(report.lambda_lower_from_gap),
            opt(gap)
        ),
        serde_json::json!({
            "graph_id": graph_id,
            "p": p,
            "lambda_1p_upper": report.lambda_1p_upper,
            "lambda_lower_from_gap": report.lambda_lower_from_gap,
            "gap": gap,
        }),
    )?;
    emitter.finish()?;

    summary(&format!(
        "plaplacian {graph_id} p={p}: upper {:.9}{}",
        report.lambda_1p_upper,
        report
            .lambda_lower_from_gap
            .map(|l| format!(", gap lower bound {l:.9}"))
            .unwrap_or_default()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// fixedpoint-demo

fn load_complex(spec: &str) -> Result<(String, SimplicialComplex2), CliError> {
    match spec {
        "triangle" => Ok(("triangle".to_string(), complex::shapes::triangle())),
        "octahedron" => Ok(("octahedron".to_string(), complex::shapes::octahedron())),
        path => {
            let file = File::open(path)
                .map_err(|e| CliError::Runtime(format!("cannot open {path}: {e}")))?;
            Ok((path.to_string(), complex::read_complex(BufReader::new(file))?))
        }
    }
}

/// Random equivariant start: i.i.d. uniform [−1,1) coordinates on orbit
/// representatives, copied across orbits.
pub fn random_equivariant_start(
    action: &FiniteAction,
    n: usize,
    k: usize,
    seed: u64,
) -> VertexFunction {
    let mut rng = SplitMix64::new(stable_seed(&[seed, 6]));
    let mut f = VertexFunction::zeros(n, k);
    for &rep in action.orbit_reps() {
        let row: Vec<f64> = (0..k).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        f.row_mut(rep as usize).copy_from_slice(&row);
    }
    for v in 0..n {
        let rep = action.representative_of(v as u32) as usize;
        let row: Vec<f64> = f.row(rep).to_vec();
        f.row_mut(v).copy_from_slice(&row);
    }
    f
}

#[allow(clippy::too_many_arguments)]
pub fn fixedpoint_demo(
    cfg: &FileConfig,
    complex_spec: Option<String>,
    action_path: Option<PathBuf>,
    p_flag: Option<f64>,
    k: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    seed: Option<u64>,
    common: &Common,
) -> Result<(), CliError> {
    let spec = cfg.resolve(complex_spec, "complex")?.unwrap_or_else(|| "triangle".to_string());
    let p = cfg.resolve(p_flag, "p")?.unwrap_or(2.0);
    let k = cfg.resolve(k, "k")?.unwrap_or(1);
    let tol = cfg.resolve(tol, "tol")?.unwrap_or(1e-8);
    let max_iter = cfg.resolve(max_iter, "max-iter")?.unwrap_or(200);
    let seed = cfg.resolve_seed(seed)?;
    let (complex_id, cx) = load_complex(&spec)?;
    let action = match &action_path {
        Some(path) => {
            let file = File::open(path)
                .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
            complex::read_action(BufReader::new(file), &cx)?
        }
        None => FiniteAction::trivial(&cx),
    };
    let phi0 = random_equivariant_start(&action, cx.vertex_count() as usize, k, seed);
    let run = complex::iterate_fixed_point(&cx, &action, &phi0, p, tol, max_iter)?;

    let mut echo = ConfigEcho::new("fixedpoint-demo", seed);
    echo.set("complex", &complex_id)
        .set("action", action_path.as_deref().map(|p| p.display().to_string()).unwrap_or_else(|| "trivial".into()))
        .set("p", p)
        .set("k", k)
        .set("tol", tol)
        .set("max_iter", max_iter)
        .set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, seed)?;
    emitter.begin(&echo, "step,energy,ratio")?;
    for (step, &energy) in run.energies.iter().enumerate() {
        let ratio = if step == 0 { None } else { Some(run.ratios[step - 1]) };
        emitter.row(
            &format!("{step},{energy},{}", ratio.map(|r| r.to_string()).unwrap_or_default()),
            serde_json::json!({ "step": step, "energy": energy, "ratio": ratio }),
        )?;
    }
    emitter.finish()?;

    let spread = (0..k)
        .map(|j| {
            let column: Vec<f64> = (0..run.phi.len()).map(|v| run.phi.row(v)[j]).collect();
            column.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - column.iter().cloned().fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);
    let max_ratio = run.ratios.iter().cloned().fold(0.0f64, f64::max);
    summary(&format!(
        "fixedpoint-demo {complex_id} p={p}: energy {:.3e} after {} steps, max ratio {:.4}, final spread {:.3e}",
        run.energies.last().unwrap(),
        run.steps,
        max_ratio,
        spread
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// union-check

const TAG_UNION: u64 = 5;

pub fn union_check(
    cfg: &FileConfig,
    trials: Option<u32>,
    max_n: Option<u32>,
    seed: Option<u64>,
    common: &Common,
) -> Result<(), CliError> {
    let trials = cfg.resolve(trials, "trials")?.unwrap_or(1000);
    let max_n = cfg.resolve(max_n, "n")?.unwrap_or(8);
    if max_n < 2 {
        return Err(CliError::Validation("--n must be at least 2".into()));
    }
    let seed = cfg.resolve_seed(seed)?;

    let mut echo = ConfigEcho::new("union-check", seed);
    echo.set("trials", trials).set("n", max_n).set("format", common.format.name());
    let mut emitter = Emitter::open(common.out.as_deref(), common.format, seed)?;
    emitter.begin(
        &echo,
        "trial,seed,n,delta_prime,perturb_lhs,perturb_holds,delta,union_bound,union_norm,union_holds",
    )?;

    let mut violations = 0u32;
    for trial in 0..trials {
        let trial_seed = stable_seed(&[seed, TAG_UNION, u64::from(trial)]);
        let mut rng = SplitMix64::new(trial_seed);
        let n = 2 + rng.next_below(u64::from(max_n) - 1) as u32;
        let g1 = families::random_weighted(&mut rng, n, true, 0.3);
        let g2 = families::random_weighted(&mut rng, n, true, 0.4);
        let perturb = spectral::perturbation_bound_check(&g1, &g2)?;
        let union = spectral::union_gap_bound(&g1, &g2)?;
        if !perturb.holds || !union.holds {
            violations += 1;
        }
        emitter.row(
            &format!(
                "{trial},{trial_seed},{n},{},{},{},{},{},{},{}",
                perturb.delta_prime,
                perturb.lhs,
                perturb.holds,
                union.delta,
                union.bound,
                union.norm_sum,
                union.holds
            ),
            serde_json::json!({
                "trial": trial,
                "seed": trial_seed,
                "n": n,
                "delta_prime": perturb.delta_prime,
                "perturb_lhs": perturb.lhs,
                "perturb_holds": perturb.holds,
                "delta": union.delta,
                "union_bound": union.bound,
                "union_norm": union.norm_sum,
                "union_holds": union.holds,
            }),
        )?;
    }
    emitter.finish()?;

    summary(&format!(
        "union-check: {trials} trials, {violations} violations",
    ));
    if violations > 0 {
        return Err(CliError::Runtime(format!(
            "{violations} trials violated a proven bound"
        )));
    }
    Ok(())
}
