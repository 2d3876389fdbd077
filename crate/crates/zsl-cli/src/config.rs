//! Key=value configuration files, flag/file/environment resolution, and the
//! resolved-config echo that heads every output.

use crate::CliError;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Parsed key=value file: one `key = value` pair per line, `#` comments and
/// blank lines ignored.
#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, value) = t.split_once('=').ok_or_else(|| {
                CliError::Validation(format!(
                    "{}: line {}: expected key=value, got {t:?}",
                    path.display(),
                    idx + 1
                ))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    /// Flag value if given, else the file's, parsed.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Validation(format!("config key {key}={raw:?}: {e}"))),
        }
    }

    /// Master seed: flag, then file, then the ZSL_SEED environment variable,
    /// then 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(seed) = self.resolve(flag, "seed")? {
            return Ok(seed);
        }
        match std::env::var("ZSL_SEED") {
            Ok(raw) => raw
                .parse()
                .map_err(|_| CliError::Validation(format!("ZSL_SEED={raw:?} is not a valid seed"))),
            Err(_) => Ok(0),
        }
    }
}

/// A ρ-selection rule: a plain number, or one of the supported scaling
/// expressions `c*logm/m` and `c*logm/(8*m^2)` (natural log).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoRule {
    Absolute(f64),
    LogOverM(f64),
    LogOver8M2(f64),
}

impl RhoRule {
    pub fn apply(self, m: u32) -> f64 {
        let m = f64::from(m);
        match self {
            RhoRule::Absolute(v) => v,
            RhoRule::LogOverM(c) => c * m.ln() / m,
            RhoRule::LogOver8M2(c) => c * m.ln() / (8.0 * m * m),
        }
    }

    /// Canonical text for the config echo.
    pub fn echo(self) -> String {
        match self {
            RhoRule::Absolute(v) => v.to_string(),
            RhoRule::LogOverM(c) => format!("{c}*logm/m"),
            RhoRule::LogOver8M2(c) => format!("{c}*logm/(8*m^2)"),
        }
    }
}

impl FromStr for RhoRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(v) = compact.parse::<f64>() {
            return Ok(RhoRule::Absolute(v));
        }
        if let Some(c) = compact.strip_suffix("*logm/m") {
            return c.parse().map(RhoRule::LogOverM).map_err(|e| e.to_string());
        }
        if let Some(c) = compact.strip_suffix("*logm/(8*m^2)") {
            return c.parse().map(RhoRule::LogOver8M2).map_err(|e| e.to_string());
        }
        Err(format!(
            "unsupported rho rule {s:?}; use a number, \"c*logm/m\", or \"c*logm/(8*m^2)\""
        ))
    }
}

/// Fully resolved experiment parameters, echoed (sorted by key) at the head
/// of every output.  The worker count and output path are delivery details,
/// not experiment parameters: they are excluded so reruns are byte-identical
/// across `--workers` settings and destinations.
#[derive(Debug, Default)]
pub struct ConfigEcho {
    entries: BTreeMap<String, String>,
}

impl ConfigEcho {
    pub fn new(command: &str, master_seed: u64) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert("command".to_string(), command.to_string());
        entries.insert("master_seed".to_string(), master_seed.to_string());
        ConfigEcho { entries }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.insert(key.to_string(), value.to_string());
        self
    }

    pub fn csv_line(&self) -> String {
        let body: Vec<String> =
            self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# config: {}", body.join(" "))
    }

    pub fn json_line(&self) -> String {
        let obj: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let mut root = serde_json::Map::new();
        root.insert("_config".to_string(), serde_json::Value::Object(obj));
        serde_json::Value::Object(root).to_string()
    }
}
