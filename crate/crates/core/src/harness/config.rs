//! Experiment configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::Threshold;
use crate::synth::Normalization;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Config(format!("unknown report format '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub multipoles: Vec<u32>,
    /// Thresholds for the per-statistic tables, sorted.
    pub thresholds: Vec<Threshold>,
    /// Thresholds whose statistics enter the correlation matrix, sorted.
    pub correlation_thresholds: Vec<Threshold>,
    pub n_realizations: u64,
    pub master_seed: u64,
    /// Rings per multipole.
    pub oversampling: usize,
    pub normalization: Normalization,
    /// Count critical points (needs `oversampling >= 4`).
    pub critical: bool,
    /// Bin width of the critical value histogram; `None` disables it.
    pub histogram_bin: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
    /// Worker threads; `None` uses `SPHGEOM_THREADS` or the rayon default.
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Progress lines on standard error.
    #[serde(skip)]
    pub progress: bool,
}

pub const DEFAULT_THRESHOLDS: [f64; 5] = [-3.0, -1.5, 0.0, 1.5, 3.0];
pub const DEFAULT_CORRELATION_THRESHOLDS: [f64; 5] = [-3.0, -1.0, 0.0, 1.0, 3.0];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            multipoles: vec![100, 300],
            thresholds: DEFAULT_THRESHOLDS.iter().map(|&u| Threshold(u)).collect(),
            correlation_thresholds: DEFAULT_CORRELATION_THRESHOLDS.iter().map(|&u| Threshold(u)).collect(),
            n_realizations: 200,
            master_seed: 1,
            oversampling: 6,
            normalization: Normalization::Ensemble,
            critical: true,
            histogram_bin: Some(0.03),
            output_dir: None,
            formats: vec![ReportFormat::Csv, ReportFormat::Json],
            threads: None,
            progress: false,
        }
    }
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn sorted(mut us: Vec<Threshold>) -> Vec<Threshold> {
    us.sort_by(|a, b| a.0.total_cmp(&b.0));
    us.dedup();
    us
}

/// Keys understood by [`ExperimentConfig::set`].
pub const CONFIG_KEYS: [&str; 12] = [
    "ell",
    "thresholds",
    "correlation_thresholds",
    "n",
    "seed",
    "oversampling",
    "normalization",
    "critical",
    "histogram_bin",
    "output_dir",
    "formats",
    "threads",
];

impl ExperimentConfig {
    /// Set one key. Aliases: `multipoles` for `ell`, `n_realizations` for
    /// `n`, `master_seed` for `seed`, `out` for `output_dir`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "ell" | "multipoles" => self.multipoles = parse_list(v, |s| parse_num(key, s))?,
            "thresholds" => self.thresholds = sorted(parse_list(v, Threshold::parse)?),
            "correlation_thresholds" => self.correlation_thresholds = sorted(parse_list(v, Threshold::parse)?),
            "n" | "n_realizations" => self.n_realizations = parse_num(key, v)?,
            "seed" | "master_seed" => self.master_seed = parse_num(key, v)?,
            "oversampling" => self.oversampling = parse_num(key, v)?,
            "normalization" => self.normalization = v.parse()?,
            "critical" => self.critical = parse_bool(key, v)?,
            "histogram_bin" => {
                self.histogram_bin = match v {
                    "none" | "off" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "output_dir" | "out" => self.output_dir = Some(PathBuf::from(v)),
            "formats" => self.formats = parse_list(v, str::parse)?,
            "threads" => self.threads = Some(parse_num(key, v)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (known: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Apply `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            self.set(k, v).map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = ExperimentConfig::default();
        c.apply_text(&text, path)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::EmptyExperiment);
        }
        if self.multipoles.is_empty() || self.multipoles.contains(&0) {
            return Err(Error::Config("multipoles must be a non-empty list of positive integers".into()));
        }
        if self.oversampling < 2 {
            return Err(Error::Config("oversampling must be at least 2".into()));
        }
        if let Some(w) = self.histogram_bin {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Config(format!("histogram_bin {w} must be positive")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    /// Sorted union of table and correlation thresholds.
    pub fn all_thresholds(&self) -> Vec<Threshold> {
        sorted(
            self.thresholds
                .iter()
                .chain(&self.correlation_thresholds)
                .copied()
                .collect(),
        )
    }

    /// The resolved configuration as `key = value` lines.
    pub fn to_text(&self) -> String {
        let join = |us: &[Threshold]| us.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let ells: Vec<String> = self.multipoles.iter().map(|l| l.to_string()).collect();
        writeln!(s, "ell = {}", ells.join(",")).unwrap();
        writeln!(s, "thresholds = {}", join(&self.thresholds)).unwrap();
        writeln!(s, "correlation_thresholds = {}", join(&self.correlation_thresholds)).unwrap();
        writeln!(s, "n = {}", self.n_realizations).unwrap();
        writeln!(s, "seed = {}", self.master_seed).unwrap();
        writeln!(s, "oversampling = {}", self.oversampling).unwrap();
        writeln!(s, "normalization = {}", self.normalization).unwrap();
        writeln!(s, "critical = {}", self.critical).unwrap();
        match self.histogram_bin {
            Some(w) => writeln!(s, "histogram_bin = {w}").unwrap(),
            None => writeln!(s, "histogram_bin = none").unwrap(),
        }
        if let Some(d) = &self.output_dir {
            writeln!(s, "output_dir = {}", d.display()).unwrap();
        }
        let f: Vec<&str> = self
            .formats
            .iter()
            .map(|f| match f {
                ReportFormat::Csv => "csv",
                ReportFormat::Json => "json",
            })
            .collect();
        writeln!(s, "formats = {}", f.join(",")).unwrap();
        s
    }
}
