//! Flat `key = value` run configuration.
//!
//! Lists are written either as repeated keys or as a bracketed value:
//!
//! ```text
//! command = sweep
//! alpha = 6
//! K = 2
//! eps = 0.1
//! eps = 0.05
//! hessian_diag = [1, 1.5, 2]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sbp_core::ansatz::{alpha_threshold, choose_exponents, lambda_window, PotentialSpec, ReductionParams};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: cannot parse `{key}`: {reason}")]
    Parse { line: usize, key: String, reason: String },
    #[error("{key} must be {constraint}")]
    Validation { key: String, constraint: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

impl ConfigError {
    fn validation(key: &str, constraint: impl Into<String>) -> Self {
        ConfigError::Validation {
            key: key.to_string(),
            constraint: constraint.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GroundState,
    FieldCheck,
    AnsatzCheck,
    Landscape,
    Solve,
    VerifyTheorem,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroundState => "ground-state",
            Command::FieldCheck => "field-check",
            Command::AnsatzCheck => "ansatz-check",
            Command::Landscape => "landscape",
            Command::Solve => "solve",
            Command::VerifyTheorem => "verify-theorem",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ground-state" => Command::GroundState,
            "field-check" => Command::FieldCheck,
            "ansatz-check" => Command::AnsatzCheck,
            "landscape" => Command::Landscape,
            "solve" => Command::Solve,
            "verify-theorem" => Command::VerifyTheorem,
            "sweep" => Command::Sweep,
            other => return Err(format!("unknown command `{other}`")),
        })
    }
}

pub const DEFAULT_EPS: [f64; 7] = [0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025];

/// Keys that may be repeated to build a list.
const LIST_KEYS: &[&str] = &["eps", "eps_list", "hessian_diag"];

const KEYS: &[&str] = &[
    "command",
    "alpha",
    "lambda",
    "beta",
    "K",
    "p",
    "a",
    "eps",
    "eps_list",
    "hessian_diag",
    "grid_n",
    "grid_L",
    "output",
    "workers",
    "seed",
    "profile_rmax",
    "landscape_points",
    "scan",
    "coarse",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Parameters at the first `ε` of `eps_list`.
    pub params: ReductionParams<f64>,
    pub pot: PotentialSpec<f64>,
    /// Fixed `(L, n)`; `None` lets the grid policy size each run.
    pub grid: Option<(f64, usize)>,
    pub eps_list: Vec<f64>,
    pub k: usize,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub seed: u64,
    pub profile_rmax: f64,
    pub landscape_points: usize,
    pub scan: usize,
    pub coarse: usize,
    /// Key/value pairs as read, for the run manifest.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn params_at(&self, eps: f64) -> ReductionParams<f64> {
        let mut p = self.params;
        p.eps = eps;
        p
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

struct Entry {
    line: usize,
    values: Vec<String>,
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                key: content.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                key: key.to_string(),
                reason: "unknown key".into(),
            });
        }
        let values = split_list(value).map_err(|reason| ConfigError::Parse {
            line,
            key: key.to_string(),
            reason,
        })?;
        match entries.get_mut(key) {
            Some(e) if LIST_KEYS.contains(&key) => e.values.extend(values),
            Some(_) => {
                return Err(ConfigError::Parse {
                    line,
                    key: key.to_string(),
                    reason: "repeated key".into(),
                })
            }
            None => {
                entries.insert(key.to_string(), Entry { line, values });
            }
        }
    }
    build(entries)
}

fn split_list(value: &str) -> Result<Vec<String>, String> {
    if let Some(inner) = value.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or("unterminated list")?;
        let items: Vec<String> = inner
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(items)
    } else if value.is_empty() {
        Err("missing value".into())
    } else {
        Ok(vec![value.to_string()])
    }
}

fn scalar<T: FromStr>(entries: &BTreeMap<String, Entry>, key: &str) -> Result<Option<T>, ConfigError> {
    let Some(e) = entries.get(key) else {
        return Ok(None);
    };
    if e.values.len() != 1 {
        return Err(ConfigError::Parse {
            line: e.line,
            key: key.into(),
            reason: "expected a single value".into(),
        });
    }
    e.values[0].parse().map(Some).map_err(|_| ConfigError::Parse {
        line: e.line,
        key: key.into(),
        reason: format!("invalid value `{}`", e.values[0]),
    })
}

fn list(entries: &BTreeMap<String, Entry>, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    let Some(e) = entries.get(key) else {
        return Ok(None);
    };
    e.values
        .iter()
        .map(|v| {
            v.parse::<f64>().map_err(|_| ConfigError::Parse {
                line: e.line,
                key: key.into(),
                reason: format!("invalid number `{v}`"),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn build(entries: BTreeMap<String, Entry>) -> Result<RunConfig, ConfigError> {
    let command = match entries.get("command") {
        Some(e) => e.values[0].parse().map_err(|reason| ConfigError::Parse {
            line: e.line,
            key: "command".into(),
            reason,
        })?,
        None => Command::Sweep,
    };
    let k: usize = scalar(&entries, "K")?.unwrap_or(2);
    if k < 2 {
        return Err(ConfigError::validation("K", ">= 2"));
    }
    let p: f64 = scalar(&entries, "p")?.unwrap_or(2.0);
    if !(p > 1.0 && p < 5.0) {
        return Err(ConfigError::validation("p", "in (1, 5)"));
    }
    let a: f64 = scalar(&entries, "a")?.unwrap_or(1.0);
    if !(a > 0.0) {
        return Err(ConfigError::validation("a", "> 0"));
    }
    let alpha: f64 = scalar(&entries, "alpha")?.unwrap_or(6.0);
    let threshold = alpha_threshold::<f64>();
    if !(alpha > threshold) {
        return Err(ConfigError::validation("alpha", format!("> 3+sqrt(7) ≈ {threshold:.4}")));
    }
    let (auto_lambda, _) = choose_exponents(alpha).map_err(|_| ConfigError::validation("alpha", "inside the exponent window"))?;
    let lambda: f64 = scalar(&entries, "lambda")?.unwrap_or(auto_lambda);
    let (lo, hi) = lambda_window(alpha);
    if !(lambda > lo && lambda < hi) {
        return Err(ConfigError::validation("lambda", format!("in ({lo:.4}, {hi:.4})")));
    }
    let beta_hi = (alpha - lambda) / (alpha + 1.0);
    let beta: f64 = scalar(&entries, "beta")?.unwrap_or(0.5 * beta_hi);
    if !(beta > 0.0 && beta < beta_hi) {
        return Err(ConfigError::validation("beta", format!("in (0, {beta_hi:.4})")));
    }
    let mut eps_list = list(&entries, "eps")?.unwrap_or_default();
    eps_list.extend(list(&entries, "eps_list")?.unwrap_or_default());
    if eps_list.is_empty() {
        eps_list = DEFAULT_EPS.to_vec();
    }
    if let Some(bad) = eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(ConfigError::validation("eps", format!("in (0, 1), got {bad}")));
    }
    let pot = match list(&entries, "hessian_diag")? {
        None => PotentialSpec::radial(alpha),
        Some(d) if d.len() == 3 => PotentialSpec::diagonal(alpha, [d[0], d[1], d[2]]),
        Some(_) => return Err(ConfigError::validation("hessian_diag", "a list of 3 positive numbers")),
    }
    .map_err(|e| ConfigError::validation("hessian_diag", e.to_string()))?;
    let params = ReductionParams::new(eps_list[0], a, p, alpha, lambda, beta)
        .map_err(|e| ConfigError::validation("params", e.to_string()))?;
    let grid_n: Option<usize> = scalar(&entries, "grid_n")?;
    let grid_l: Option<f64> = scalar(&entries, "grid_L")?;
    let grid = match (grid_l, grid_n) {
        (Some(l), Some(n)) => Some(validate_grid(l, n)?),
        (None, None) => None,
        _ => return Err(ConfigError::validation("grid_n", "given together with grid_L")),
    };
    let workers: usize = scalar(&entries, "workers")?.unwrap_or(1);
    if workers == 0 {
        return Err(ConfigError::validation("workers", ">= 1"));
    }
    let profile_rmax: f64 = scalar(&entries, "profile_rmax")?.unwrap_or(25.0);
    if !(profile_rmax >= 20.0) {
        return Err(ConfigError::validation("profile_rmax", ">= 20"));
    }
    let landscape_points: usize = scalar(&entries, "landscape_points")?.unwrap_or(12);
    if landscape_points < 2 {
        return Err(ConfigError::validation("landscape_points", ">= 2"));
    }
    let scan: usize = scalar(&entries, "scan")?.unwrap_or(6);
    if scan < 3 {
        return Err(ConfigError::validation("scan", ">= 3"));
    }
    let coarse: usize = scalar(&entries, "coarse")?.unwrap_or(8);
    if coarse < 2 {
        return Err(ConfigError::validation("coarse", ">= 2"));
    }
    let echo = entries
        .iter()
        .map(|(k, e)| (k.clone(), e.values.join(", ")))
        .collect();
    Ok(RunConfig {
        command,
        params,
        pot,
        grid,
        eps_list,
        k,
        output_dir: scalar::<String>(&entries, "output")?.unwrap_or_else(|| "out".into()).into(),
        workers,
        seed: scalar(&entries, "seed")?.unwrap_or(0),
        profile_rmax,
        landscape_points,
        scan,
        coarse,
        echo,
    })
}

/// Check a `(L, n)` pair against the grid rules.
pub fn validate_grid(l: f64, n: usize) -> Result<(f64, usize), ConfigError> {
    if n < 32 || n % 2 != 0 {
        return Err(ConfigError::validation("grid_n", "even and >= 32"));
    }
    if !(l > 0.0) {
        return Err(ConfigError::validation("grid_L", "> 0"));
    }
    Ok((l, n))
}
