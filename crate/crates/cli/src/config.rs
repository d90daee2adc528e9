use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bloch_teleport::ThetaCorrection;

use crate::error::{CliError, CliResult};
use crate::sweep::{parse_counts, parse_reals, Sweep};
use crate::table::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Distributions,
    Peaks,
    TeleportError,
    SuccessProb,
    Dephasing,
    Bounds,
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Distributions => "distributions",
            Command::Peaks => "peaks",
            Command::TeleportError => "teleport-error",
            Command::SuccessProb => "success-prob",
            Command::Dephasing => "dephasing",
            Command::Bounds => "bounds",
            Command::OracleCheck => "oracle-check",
        }
    }
}

/// Settings accepted both as `--key` flags and as `key=value` config lines.
pub const KEYS: [&str; 16] = [
    "n",
    "theta",
    "phi",
    "k1-cut",
    "gamma",
    "seed",
    "grid-theta",
    "grid-phi",
    "quad-nodes",
    "threads",
    "format",
    "out",
    "correction",
    "k1",
    "states",
    "trajectories",
];

/// Parses a flat `key=value` file; `#` starts a comment line and `_` may
/// stand for `-` in keys.
pub fn parse_config_text(text: &str, origin: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{origin}:{}: expected key=value", i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("{origin}:{}: unknown key '{key}'", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text, &path.display().to_string())
}

/// Flag values win over config-file values.
pub fn merge(flags: Vec<(&'static str, Option<String>)>, mut file: BTreeMap<String, String>) -> BTreeMap<String, String> {
    for (k, v) in flags {
        if let Some(v) = v {
            file.insert(k.to_string(), v);
        }
    }
    file
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub command: Command,
    pub n: Sweep<u32>,
    pub theta: Sweep<f64>,
    pub phi: Sweep<f64>,
    /// `None` selects the per-command default.
    pub k1_cut: Option<Sweep<u32>>,
    pub gamma: Sweep<f64>,
    pub seed: u64,
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub quad_nodes: usize,
    /// 0 leaves the worker count to rayon.
    pub threads: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub correction: ThetaCorrection,
    pub k1: Option<u32>,
    pub states: usize,
    pub trajectories: usize,
}

fn usage(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{key}: {msg}"))
}

fn scalar<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim().parse::<T>().map_err(|_| usage(key, format!("cannot parse '{v}'")))
}

impl ExperimentSpec {
    pub fn resolve(command: Command, settings: &BTreeMap<String, String>) -> CliResult<Self> {
        let get = |k: &str, default: &str| settings.get(k).cloned().unwrap_or_else(|| default.to_string());
        let counts = |k: &str, default: &str| parse_counts(&get(k, default)).map_err(|e| usage(k, e));
        let reals = |k: &str, default: &str| parse_reals(&get(k, default)).map_err(|e| usage(k, e));
        let positive = |k: &str, default: &str| -> CliResult<usize> {
            let v: usize = scalar(k, &get(k, default))?;
            if v == 0 {
                return Err(usage(k, "must be positive"));
            }
            Ok(v)
        };
        let n = counts("n", "10")?;
        if n.values().contains(&0) {
            return Err(usage("n", "particle numbers must be at least 1"));
        }
        let spec = Self {
            command,
            n,
            theta: reals("theta", "pi/2")?,
            phi: reals("phi", "0")?,
            k1_cut: settings
                .get("k1-cut")
                .map(|s| parse_counts(s).map_err(|e| usage("k1-cut", e)))
                .transpose()?,
            gamma: reals("gamma", "0")?,
            seed: scalar("seed", &get("seed", "0"))?,
            grid_theta: positive("grid-theta", "32")?,
            grid_phi: positive("grid-phi", "64")?,
            quad_nodes: positive("quad-nodes", "40")?,
            threads: scalar("threads", &get("threads", "0"))?,
            format: Format::parse(&get("format", "csv")).map_err(|e| usage("format", e))?,
            out: settings.get("out").filter(|s| s.as_str() != "-").map(PathBuf::from),
            correction: get("correction", "reflected").parse().map_err(|e| usage("correction", e))?,
            k1: settings.get("k1").map(|s| scalar("k1", s)).transpose()?,
            states: scalar("states", &get("states", "5"))?,
            trajectories: positive("trajectories", "2000")?,
        };
        if spec.gamma.values().iter().any(|&g| g < 0.0) {
            return Err(usage("gamma", "rates must be nonnegative"));
        }
        Ok(spec)
    }

    /// Every resolved setting, in a fixed order, for the output header.
    pub fn header(&self) -> Vec<(String, String)> {
        let opt = |v: Option<String>, none: &str| v.unwrap_or_else(|| none.to_string());
        [
            ("program", format!("bloch-teleport {}", env!("CARGO_PKG_VERSION"))),
            ("command", self.command.name().to_string()),
            ("n", self.n.text().to_string()),
            ("theta", self.theta.text().to_string()),
            ("phi", self.phi.text().to_string()),
            ("k1-cut", opt(self.k1_cut.as_ref().map(|s| s.text().to_string()), "default")),
            ("gamma", self.gamma.text().to_string()),
            ("seed", self.seed.to_string()),
            ("grid-theta", self.grid_theta.to_string()),
            ("grid-phi", self.grid_phi.to_string()),
            ("quad-nodes", self.quad_nodes.to_string()),
            ("threads", self.threads.to_string()),
            ("format", self.format.name().to_string()),
            ("correction", self.correction.name().to_string()),
            ("k1", opt(self.k1.map(|k| k.to_string()), "all")),
            ("states", self.states.to_string()),
            ("trajectories", self.trajectories.to_string()),
            ("out", opt(self.out.as_ref().map(|p| p.display().to_string()), "stdout")),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}
