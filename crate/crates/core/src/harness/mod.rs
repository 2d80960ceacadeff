//! Seeded Monte Carlo experiments: many realizations per multipole, every
//! estimator at every threshold, summary statistics against the theory, and
//! correlations across realizations.
//!
//! Realization `r` uses seed `mix(master_seed, r)`. Realizations run in
//! parallel but results are reduced in index order with compensated sums, so
//! a report depends only on its configuration.

mod config;
mod report;
mod stats;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ReportFormat, CONFIG_KEYS, DEFAULT_CORRELATION_THRESHOLDS, DEFAULT_THRESHOLDS};
pub use report::{
    check, correlation_csv, emit_report, CellCheck, CheckOutcome, CorrelationMatrix, GridInfo, McReport, StatRow, CHECK_FRACTION,
    CHECK_SIGMAS,
};
pub use stats::{pearson, NeumaierSum, SampleStats};

use crate::critical::{self, CriticalCounts, CriticalHistogram};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lkc::{self, LkcEstimate};
use crate::specfun::Threshold;
use crate::synth::{normalize, sample_alm, Multipole, SynthesisPlan};
use crate::theory::second_chaos_coefficient;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "SPHGEOM_THREADS";

/// 64-bit avalanche mix of a master seed and a realization index.
pub fn mix(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything measured on one map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationStats {
    pub ell: u32,
    pub index: u64,
    pub seed: u64,
    /// One estimate per threshold of [`ExperimentConfig::all_thresholds`].
    pub lkc: Vec<LkcEstimate>,
    /// Totals first, then one entry per threshold; empty when disabled.
    pub critical: Vec<CriticalCounts>,
    pub defect: f64,
    pub h2: f64,
    pub h4: f64,
    pub trispectrum: f64,
}

/// A curvature with its second-chaos component removed.
///
/// `raw` is kept alongside the correction, so the raw statistic is always
/// recoverable exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosAdjusted {
    pub k: u32,
    pub u: Threshold,
    /// The measured value, per `4 pi`.
    pub raw: f64,
    /// `coefficient * h_2 / (4 pi)`.
    pub correction: f64,
}

impl ChaosAdjusted {
    pub fn adjusted(&self) -> f64 {
        if self.correction == 0.0 {
            self.raw
        } else {
            self.raw - self.correction
        }
    }
}

/// Subtract the second-chaos term from every curvature in `stats`, using
/// `h2` measured on the same map.
pub fn chaos_subtract(stats: &RealizationStats, h2: f64) -> Result<Vec<ChaosAdjusted>> {
    let ell = Multipole::new(stats.ell)?;
    let mut out = Vec::with_capacity(3 * stats.lkc.len());
    for est in &stats.lkc {
        for (k, raw) in [(2, est.area_frac), (1, est.half_length_norm), (0, est.epc_norm)] {
            let c = second_chaos_coefficient(k, ell, est.u)?;
            out.push(ChaosAdjusted {
                k,
                u: est.u,
                raw,
                correction: c * h2 / (4.0 * PI),
            });
        }
    }
    Ok(out)
}

struct Job {
    ell: Multipole,
    plan: SynthesisPlan,
    thresholds: Vec<Threshold>,
}

fn realize(job: &Job, cfg: &ExperimentConfig, index: u64) -> Result<(RealizationStats, Option<CriticalHistogram>)> {
    let seed = mix(cfg.master_seed, index);
    let map = job.plan.synthesize(&sample_alm(job.ell, seed), seed)?;
    let map = normalize(map, cfg.normalization)?;
    let lkc = job.thresholds.iter().map(|&u| lkc::estimate(&map, u)).collect();
    let h2 = lkc::chaos_projection(&map, 2)?.value;
    let h4 = lkc::chaos_projection(&map, 4)?.value;
    let mut critical = Vec::new();
    let mut hist = None;
    if cfg.critical {
        let points = critical::critical_points(&map)?;
        critical.push(critical::counts_above(&points, Threshold::NEG_INFINITY));
        critical.extend(job.thresholds.iter().map(|&u| critical::counts_above(&points, u)));
        if let Some(w) = cfg.histogram_bin {
            let mut h = CriticalHistogram::new(job.ell.ell, w)?;
            h.add_points(&points);
            hist = Some(h);
        }
    }
    Ok((
        RealizationStats {
            ell: job.ell.ell,
            index,
            seed,
            lkc,
            critical,
            defect: lkc::defect(&map),
            h2,
            h4,
            trispectrum: lkc::trispectrum_from_h4(job.ell.ell, h4),
        },
        hist,
    ))
}

/// Per-realization results for one multipole, in index order, plus the
/// merged critical value histogram.
pub fn run_realizations(
    ell: Multipole,
    cfg: &ExperimentConfig,
) -> Result<(Vec<RealizationStats>, Option<CriticalHistogram>)> {
    cfg.validate()?;
    let grid = Arc::new(GridSpec::for_multipole(ell.ell, cfg.oversampling)?);
    let job = Job {
        ell,
        plan: SynthesisPlan::new(ell, grid)?,
        thresholds: cfg.all_thresholds(),
    };
    let n = cfg.n_realizations;
    let done = AtomicU64::new(0);
    let step = (n / 10).max(1);
    let results: Vec<Result<_>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let out = realize(&job, cfg, r);
            let d = done.fetch_add(1, Ordering::Relaxed) + 1;
            if cfg.progress && (d % step == 0 || d == n) {
                eprintln!("ell {}: {d}/{n} realizations", ell.ell);
            }
            out
        })
        .collect();
    let mut stats = Vec::with_capacity(n as usize);
    let mut hist: Option<CriticalHistogram> = None;
    for r in results {
        let (s, h) = r?;
        stats.push(s);
        if let Some(h) = h {
            match hist.as_mut() {
                Some(acc) => acc.merge(&h)?,
                None => hist = Some(h),
            }
        }
    }
    Ok((stats, hist))
}

fn thread_count(cfg: &ExperimentConfig) -> Result<Option<usize>> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::Config(format!("{THREADS_ENV}='{v}' is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// Run the experiment on a pool of the configured width.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<McReport> {
    cfg.validate()?;
    let body = || -> Result<McReport> {
        let mut per_ell = Vec::with_capacity(cfg.multipoles.len());
        for &l in &cfg.multipoles {
            let ell = Multipole::new(l)?;
            let (stats, hist) = run_realizations(ell, cfg)?;
            per_ell.push((ell, stats, hist));
        }
        report::build(cfg, per_ell)
    };
    match thread_count(cfg)? {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Minimum number of realizations for [`correlate`].
pub const MIN_CORRELATION_REALIZATIONS: u64 = 50;

/// Correlation matrices across realizations, one per multipole.
pub fn correlate(cfg: &ExperimentConfig) -> Result<Vec<CorrelationMatrix>> {
    if cfg.n_realizations < MIN_CORRELATION_REALIZATIONS {
        return Err(Error::Config(format!(
            "correlations need at least {MIN_CORRELATION_REALIZATIONS} realizations, got {}",
            cfg.n_realizations
        )));
    }
    Ok(run_experiment(cfg)?.correlations)
}
