//! Experiment reports: per-statistic tables, correlation matrices, critical
//! value histograms, and their CSV and JSON files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::{pearson, SampleStats};
use super::{chaos_subtract, ExperimentConfig, RealizationStats, ReportFormat};
use crate::critical::CriticalHistogram;
use crate::error::{Error, Result};
use crate::specfun::Threshold;
use crate::synth::Multipole;
use crate::theory::{
    critical_prediction, defect_constant, lkc_prediction, var_h2, var_h4_prediction, var_trispectrum_prediction,
    CriticalClass,
};

/// Units line written at the top of every table.
pub const UNITS: &str = "# units: area, half_length and epc per 4 pi (half_length is half the boundary length); \
critical counts raw; defect = 2 area(f >= 0) - 4 pi; h2, h4 = int H_q(f)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub ell: u32,
    pub statistic: String,
    /// `None` for threshold-free statistics.
    pub u: Option<Threshold>,
    pub n: u64,
    pub sample_mean: f64,
    pub sample_std: f64,
    pub model_mean: Option<f64>,
    pub model_std: Option<f64>,
    pub percent_diff: Option<f64>,
    pub chaos_subtracted_std: Option<f64>,
    /// Whether the model standard deviation is a certified leading term.
    pub certified: bool,
}

impl StatRow {
    pub fn label(&self) -> String {
        match self.u {
            Some(u) => format!("{}@{}", self.statistic, u),
            None => self.statistic.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub ell: u32,
    pub labels: Vec<String>,
    /// Row-major; `None` where a statistic has zero variance.
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.values[i][j]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridInfo {
    pub ell: u32,
    pub n_rings: usize,
    pub n_phi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub grids: Vec<GridInfo>,
    /// Realization seeds, shared by every multipole.
    pub seeds: Vec<u64>,
    pub rows: Vec<StatRow>,
    pub correlations: Vec<CorrelationMatrix>,
    pub histograms: Vec<CriticalHistogram>,
}

fn row(ell: u32, statistic: &str, u: Option<Threshold>, xs: &[f64], model: Option<(f64, f64)>, certified: bool) -> StatRow {
    let s = SampleStats::of(xs);
    let percent_diff = model.and_then(|(m, _)| (m != 0.0).then(|| 100.0 * (s.mean - m) / m.abs()));
    StatRow {
        ell,
        statistic: statistic.to_string(),
        u,
        n: s.n,
        sample_mean: s.mean,
        sample_std: s.std,
        model_mean: model.map(|m| m.0),
        model_std: model.map(|m| m.1),
        percent_diff,
        chaos_subtracted_std: None,
        certified,
    }
}

const LKC_STATS: [(&str, u32); 3] = [("area", 2), ("half_length", 1), ("epc", 0)];
const CRITICAL_STATS: [(&str, CriticalClass); 3] = [
    ("critical", CriticalClass::C),
    ("extrema", CriticalClass::E),
    ("saddles", CriticalClass::S),
];

fn critical_value(c: &crate::critical::CriticalCounts, class: CriticalClass) -> f64 {
    (match class {
        CriticalClass::C => c.critical,
        CriticalClass::E => c.extrema,
        CriticalClass::S => c.saddles,
    }) as f64
}

/// Named per-realization series for one multipole, in a fixed order.
fn series(cfg: &ExperimentConfig, stats: &[RealizationStats]) -> Result<Vec<(String, Option<Threshold>, Vec<f64>)>> {
    let us = cfg.all_thresholds();
    let mut out = Vec::new();
    for (name, k) in LKC_STATS {
        for (j, &u) in us.iter().enumerate() {
            let xs = stats
                .iter()
                .map(|s| {
                    let e = &s.lkc[j];
                    [e.epc_norm, e.half_length_norm, e.area_frac][k as usize]
                })
                .collect();
            out.push((name.to_string(), Some(u), xs));
        }
    }
    if cfg.critical {
        for (name, class) in CRITICAL_STATS {
            for (j, u) in std::iter::once(Threshold::NEG_INFINITY).chain(us.iter().copied()).enumerate() {
                let xs = stats.iter().map(|s| critical_value(&s.critical[j], class)).collect();
                out.push((name.to_string(), Some(u), xs));
            }
        }
    }
    out.push(("defect".into(), None, stats.iter().map(|s| s.defect).collect()));
    out.push(("h2".into(), None, stats.iter().map(|s| s.h2).collect()));
    out.push(("h4".into(), None, stats.iter().map(|s| s.h4).collect()));
    out.push(("trispectrum".into(), None, stats.iter().map(|s| s.trispectrum).collect()));
    Ok(out)
}

fn model_for(ell: Multipole, name: &str, u: Option<Threshold>) -> Result<Option<((f64, f64), bool)>> {
    let l = ell.ell as f64;
    if let Some(&(_, k)) = LKC_STATS.iter().find(|(n, _)| *n == name) {
        let p = lkc_prediction(k, ell, u.expect("curvatures have thresholds"))?;
        return Ok(Some(((p.mean_norm, p.std_norm()), p.certified)));
    }
    if let Some(&(_, class)) = CRITICAL_STATS.iter().find(|(n, _)| *n == name) {
        let u = u.expect("counts have thresholds");
        let p = critical_prediction(class, ell, u);
        let std = p.var.sqrt();
        // the total-count variance constant misses an O(ell^2) term, and in
        // the tails the ell^3 term drops below the ell^2 log ell remainder
        let remainder = critical_prediction(class, ell, Threshold(f64::NEG_INFINITY)).var;
        let certified = u.0 != f64::NEG_INFINITY && p.var > remainder;
        return Ok(Some(((p.mean, std), certified)));
    }
    Ok(match name {
        "defect" => Some(((0.0, defect_constant(20)?.constant.sqrt() / l), true)),
        "h2" => Some(((0.0, var_h2(ell).sqrt()), true)),
        "h4" if ell.ell >= 2 => Some(((0.0, var_h4_prediction(ell.ell)?.sqrt()), true)),
        "trispectrum" if ell.ell >= 2 => Some(((0.0, var_trispectrum_prediction(ell.ell)?.sqrt()), true)),
        _ => None,
    })
}

/// Labels that enter the correlation matrix.
fn correlation_labels(cfg: &ExperimentConfig) -> Vec<String> {
    let mut labels = Vec::new();
    for u in &cfg.correlation_thresholds {
        for (name, _) in LKC_STATS {
            labels.push(format!("{name}@{u}"));
        }
        if cfg.critical {
            labels.push(format!("critical@{u}"));
        }
    }
    labels.push("defect".into());
    labels.push("trispectrum".into());
    labels
}

pub(super) fn build(
    cfg: &ExperimentConfig,
    per_ell: Vec<(Multipole, Vec<RealizationStats>, Option<CriticalHistogram>)>,
) -> Result<McReport> {
    let mut rows = Vec::new();
    let mut correlations = Vec::new();
    let mut histograms = Vec::new();
    let mut grids = Vec::new();
    for (ell, stats, hist) in per_ell {
        let n_rings = cfg.oversampling * ell.ell as usize;
        grids.push(GridInfo {
            ell: ell.ell,
            n_rings,
            n_phi: 2 * n_rings,
        });
        let all = series(cfg, &stats)?;

        // chaos-subtracted curvatures, keyed by (k, u)
        let mut adjusted: BTreeMap<(u32, u64), Vec<f64>> = BTreeMap::new();
        for s in &stats {
            for a in chaos_subtract(s, s.h2)? {
                adjusted.entry((a.k, a.u.0.to_bits())).or_default().push(a.adjusted());
            }
        }

        for (name, u, xs) in &all {
            let model = model_for(ell, name, *u)?;
            let mut r = row(ell.ell, name, *u, xs, model.map(|m| m.0), model.is_some_and(|m| m.1));
            if let (Some(&(_, k)), Some(u)) = (LKC_STATS.iter().find(|(n, _)| n == name), u) {
                if let Some(v) = adjusted.get(&(k, u.0.to_bits())) {
                    r.chaos_subtracted_std = Some(SampleStats::of(v).std);
                }
            }
            rows.push(r);
        }

        let labels = correlation_labels(cfg);
        let lookup: BTreeMap<String, &Vec<f64>> = all
            .iter()
            .map(|(name, u, xs)| {
                let label = match u {
                    Some(u) => format!("{name}@{u}"),
                    None => name.clone(),
                };
                (label, xs)
            })
            .collect();
        let cols: Vec<&Vec<f64>> = labels.iter().map(|l| lookup[l]).collect();
        let values = (0..cols.len())
            .map(|i| {
                (0..cols.len())
                    .map(|j| {
                        let r = pearson(cols[i], cols[j]);
                        if i == j {
                            r.map(|_| 1.0)
                        } else {
                            r
                        }
                    })
                    .collect()
            })
            .collect();
        correlations.push(CorrelationMatrix {
            ell: ell.ell,
            labels,
            values,
        });
        if let Some(h) = hist {
            histograms.push(h);
        }
    }
    Ok(McReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        // runtime-only settings stay out of the report
        config: ExperimentConfig {
            threads: None,
            progress: false,
            ..cfg.clone()
        },
        grids,
        seeds: (0..cfg.n_realizations).map(|r| super::mix(cfg.master_seed, r)).collect(),
        rows,
        correlations,
        histograms,
    })
}

fn fmt_opt(x: Option<f64>, digits: usize) -> String {
    x.map(|v| format!("{v:.digits$}")).unwrap_or_default()
}

fn decimals(statistic: &str) -> usize {
    match statistic {
        "area" | "half_length" => 4,
        "epc" => 3,
        "critical" | "extrema" | "saddles" => 2,
        _ => 6,
    }
}

impl McReport {
    pub fn row(&self, ell: u32, statistic: &str, u: Option<Threshold>) -> Option<&StatRow> {
        self.rows
            .iter()
            .find(|r| r.ell == ell && r.statistic == statistic && r.u == u)
    }

    pub fn correlation(&self, ell: u32) -> Option<&CorrelationMatrix> {
        self.correlations.iter().find(|c| c.ell == ell)
    }

    pub fn histogram(&self, ell: u32) -> Option<&CriticalHistogram> {
        self.histograms.iter().find(|h| h.ell == ell)
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        // serde_json's Map is a BTreeMap, so a round trip through Value sorts keys
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<McReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Every row at full precision.
    pub fn summary_csv(&self) -> String {
        let mut s = format!("{UNITS}\n");
        s.push_str("ell,statistic,u,n,sample_mean,sample_std,model_mean,model_std,percent_diff,chaos_subtracted_std,certified\n");
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.ell,
                r.statistic,
                r.u.map(|u| u.to_string()).unwrap_or_default(),
                r.n,
                r.sample_mean,
                r.sample_std,
                opt(r.model_mean),
                opt(r.model_std),
                opt(r.percent_diff),
                opt(r.chaos_subtracted_std),
                r.certified
            )
            .expect("write to String");
        }
        s
    }

    /// Thresholds down, multipoles across, Sim and Model columns.
    pub fn table_csv(&self, statistic: &str) -> String {
        let d = decimals(statistic);
        let mut s = format!("{UNITS}\n# statistic: {statistic}\nu");
        for g in &self.grids {
            let l = g.ell;
            write!(s, ",sim_mean_{l},sim_std_{l},model_mean_{l},model_std_{l},percent_diff_{l}").unwrap();
        }
        s.push('\n');
        let mut us: Vec<Threshold> = self
            .rows
            .iter()
            .filter(|r| r.statistic == statistic)
            .filter_map(|r| r.u)
            .collect();
        us.sort_by(|a, b| a.0.total_cmp(&b.0));
        us.dedup();
        for u in us {
            write!(s, "{u}").unwrap();
            for g in &self.grids {
                match self.row(g.ell, statistic, Some(u)) {
                    Some(r) => write!(
                        s,
                        ",{:.d$},{:.d$},{},{},{}",
                        r.sample_mean,
                        r.sample_std,
                        fmt_opt(r.model_mean, d),
                        fmt_opt(r.model_std, d),
                        fmt_opt(r.percent_diff, 2)
                    )
                    .unwrap(),
                    None => s.push_str(",,,,,"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn correlation_csv(&self, ell: u32) -> Option<String> {
        self.correlation(ell).map(correlation_csv)
    }

    /// One line per row: sample against model.
    pub fn summary_text(&self) -> String {
        let mut s = format!("{UNITS}\n");
        for r in &self.rows {
            let u = r.u.map(|u| format!(" u={u}")).unwrap_or_default();
            write!(s, "ell={} {}{u}: sim {:.6} +- {:.6}", r.ell, r.statistic, r.sample_mean, r.sample_std).unwrap();
            if let (Some(m), Some(sd)) = (r.model_mean, r.model_std) {
                write!(s, "  model {m:.6} +- {sd:.6}").unwrap();
            }
            if let Some(p) = r.percent_diff {
                write!(s, "  diff {p:+.3}%").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Labels across and down; empty cells are undefined correlations.
pub fn correlation_csv(c: &CorrelationMatrix) -> String {
    let mut s = format!("label,{}\n", c.labels.join(","));
    for (label, row) in c.labels.iter().zip(&c.values) {
        s.push_str(label);
        for v in row {
            s.push(',');
            if let Some(v) = v {
                write!(s, "{v:.6}").unwrap();
            }
        }
        s.push('\n');
    }
    s
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Write the report into `dir` in each format; returns the files written.
pub fn emit_report(report: &McReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            ReportFormat::Json => write(dir.join("report.json"), &report.to_json()?, &mut written)?,
            ReportFormat::Csv => {
                write(dir.join("summary.csv"), &report.summary_csv(), &mut written)?;
                let mut names: Vec<&str> = LKC_STATS.iter().map(|s| s.0).collect();
                if report.config.critical {
                    names.extend(CRITICAL_STATS.iter().map(|s| s.0));
                }
                for name in names {
                    write(dir.join(format!("table_{name}.csv")), &report.table_csv(name), &mut written)?;
                }
                for g in &report.grids {
                    if let Some(c) = report.correlation_csv(g.ell) {
                        write(dir.join(format!("correlation_ell{}.csv", g.ell)), &c, &mut written)?;
                    }
                }
                for h in &report.histograms {
                    write(dir.join(format!("histogram_ell{}.csv", h.ell)), &h.to_csv(), &mut written)?;
                }
            }
        }
    }
    Ok(written)
}

/// Sample mean must lie within this many standard errors of the model.
pub const CHECK_SIGMAS: f64 = 4.0;
/// Fraction of cells that must pass.
pub const CHECK_FRACTION: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub label: String,
    pub ell: u32,
    /// `(sample_mean - model_mean) / (model_std / sqrt n)`.
    pub z: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub cells: Vec<CellCheck>,
    pub fraction_passed: f64,
    pub passed: bool,
}

/// Compare every certified cell against its model.
pub fn check(report: &McReport) -> CheckOutcome {
    let cells: Vec<CellCheck> = report
        .rows
        .iter()
        .filter_map(|r| {
            let (m, sd) = (r.model_mean?, r.model_std?);
            if !r.certified || sd <= 0.0 || r.n < 2 {
                return None;
            }
            let z = (r.sample_mean - m) / (sd / (r.n as f64).sqrt());
            Some(CellCheck {
                label: r.label(),
                ell: r.ell,
                z,
                passed: z.abs() <= CHECK_SIGMAS,
            })
        })
        .collect();
    let fraction_passed = if cells.is_empty() {
        0.0
    } else {
        cells.iter().filter(|c| c.passed).count() as f64 / cells.len() as f64
    };
    CheckOutcome {
        passed: !cells.is_empty() && fraction_passed >= CHECK_FRACTION,
        cells,
        fraction_passed,
    }
}
