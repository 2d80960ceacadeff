//! Command-line front end. `sphgeom <subcommand> --help` lists every flag.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 I/O error,
//! 4 failed `--check`.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::critical::{self, CriticalHistogram, MIN_RINGS_PER_ELL};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MapFormat};
use crate::harness::{self, ExperimentConfig, ReportFormat};
use crate::lkc;
use crate::specfun::Threshold;
use crate::synth::{normalize, simulate, FieldMap, Multipole, Normalization};
use crate::theory::{self, CriticalClass};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

const LKC_UNITS: &str = "# units: area_frac, half_length_norm and epc_norm per 4 pi; half_length is half the boundary length";

#[derive(Parser, Debug)]
#[command(name = "sphgeom", version, about = "Excursion sets and critical points of random spherical harmonics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize one random eigenfunction and write it as a map file.
    Simulate(SimulateArgs),
    /// Area, half boundary length and Euler characteristic at each threshold.
    Functionals(FunctionalsArgs),
    /// Critical point counts and the critical value histogram.
    Critical(CriticalArgs),
    /// Predicted means and standard deviations.
    Theory(TheoryArgs),
    /// Quadrature constants.
    Constants(ConstantsArgs),
    /// Monte Carlo experiment with CSV and JSON reports.
    Experiment(ExperimentArgs),
    /// Correlation matrices across realizations.
    Correlate(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct MapSource {
    /// Read this map file instead of simulating.
    #[arg(long, conflicts_with_all = ["ell", "seed"])]
    pub map: Option<PathBuf>,
    /// Multipole to simulate.
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rings of the simulated grid (default 6 ell).
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long, default_value = "ensemble")]
    pub normalization: Normalization,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub ell: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rings (default 6 ell); longitudes are twice the rings.
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "ensemble")]
    pub normalization: Normalization,
    /// csv or binary.
    #[arg(long, default_value = "csv")]
    pub format: MapFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct FunctionalsArgs {
    #[command(flatten)]
    pub source: MapSource,
    /// Comma-separated thresholds; `inf` and `-inf` allowed.
    #[arg(long, default_value = "-3,-1.5,0,1.5,3", allow_hyphen_values = true)]
    pub thresholds: String,
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub source: MapSource,
    #[arg(long, default_value = "-inf,-3,-1.5,0,1.5,3", allow_hyphen_values = true)]
    pub thresholds: String,
    /// Write the critical value histogram as CSV here.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 0.03)]
    pub bin_width: f64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["k", "class"])))]
pub struct TheoryArgs {
    /// Curvature index: 0 Euler characteristic, 1 half length, 2 area.
    #[arg(long)]
    pub k: Option<u32>,
    /// Critical point class: c, e or s.
    #[arg(long)]
    pub class: Option<CriticalClass>,
    #[arg(long)]
    pub ell: u32,
    /// Comma-separated thresholds.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// One constant by name; all when omitted.
    #[arg(long)]
    pub which: Option<String>,
    /// Quadrature tolerance override.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated multipoles.
    #[arg(long)]
    pub ell: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub thresholds: Option<String>,
    #[arg(long)]
    pub oversampling: Option<usize>,
    #[arg(long)]
    pub normalization: Option<Normalization>,
    /// Skip critical point counting.
    #[arg(long)]
    pub no_critical: bool,
    /// Output directory for report files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated report formats: csv, json.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exit with status 4 unless the sample means agree with the models.
    #[arg(long)]
    pub check: bool,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Format(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parse `std::env::args` and run.
pub fn run() -> i32 {
    // unlocked: worker threads print progress to stderr while a command runs
    let mut out = std::io::BufWriter::new(std::io::stdout());
    let code = run_from(std::env::args_os(), &mut out, &mut std::io::stderr());
    if out.flush().is_err() {
        return EXIT_IO;
    }
    code
}

/// Run with explicit arguments (including the program name) and streams.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a, err),
        Command::Functionals(a) => cmd_functionals(a, out, err),
        Command::Critical(a) => cmd_critical(a, out, err),
        Command::Theory(a) => cmd_theory(a, out),
        Command::Constants(a) => cmd_constants(a, out),
        Command::Experiment(a) => cmd_experiment(a, out, err, false),
        Command::Correlate(a) => cmd_experiment(a, out, err, true),
    }
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn parse_thresholds(s: &str) -> Result<Vec<Threshold>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Threshold::parse)
        .collect()
}

fn grid_for(ell: u32, rings: Option<usize>) -> Result<Arc<GridSpec>> {
    Ok(Arc::new(match rings {
        Some(r) => GridSpec::new(r, 2 * r)?,
        None => GridSpec::for_multipole(ell, 6)?,
    }))
}

fn cmd_simulate(a: SimulateArgs, err: &mut dyn Write) -> Result<i32> {
    let ell = Multipole::new(a.ell)?;
    let grid = grid_for(a.ell, a.rings)?;
    writeln!(
        err,
        "# simulate ell={} seed={} rings={} n_phi={} normalization={} out={}",
        a.ell,
        a.seed,
        grid.n_rings(),
        grid.n_phi(),
        a.normalization,
        a.out.display()
    )
    .map_err(io_out)?;
    if grid.n_rings() < MIN_RINGS_PER_ELL * a.ell as usize {
        writeln!(
            err,
            "warning: {} rings is below {} ell = {}; critical point counts will be refused on this map",
            grid.n_rings(),
            MIN_RINGS_PER_ELL,
            MIN_RINGS_PER_ELL * a.ell as usize
        )
        .map_err(io_out)?;
    }
    let map = normalize(simulate(ell, a.seed, &grid)?, a.normalization)?;
    map.save(&a.out, a.format)?;
    Ok(EXIT_OK)
}

fn load_map(s: &MapSource, err: &mut dyn Write) -> Result<FieldMap> {
    if let Some(path) = &s.map {
        writeln!(err, "# map={} normalization={}", path.display(), s.normalization).map_err(io_out)?;
        return normalize(FieldMap::load(path)?, s.normalization);
    }
    let l = s
        .ell
        .ok_or_else(|| Error::Config("give either --map or --ell".into()))?;
    let grid = grid_for(l, s.rings)?;
    writeln!(
        err,
        "# ell={} seed={} rings={} n_phi={} normalization={}",
        l,
        s.seed,
        grid.n_rings(),
        grid.n_phi(),
        s.normalization
    )
    .map_err(io_out)?;
    normalize(simulate(Multipole::new(l)?, s.seed, &grid)?, s.normalization)
}

/// One line of `functionals` output.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct FunctionalRecord {
    pub u: Threshold,
    pub area_frac: f64,
    pub half_length_norm: f64,
    pub epc_norm: f64,
    pub epc_raw: i64,
    pub defect: f64,
    pub h2: f64,
    pub h4: f64,
    pub trispectrum: f64,
}

/// Records for each threshold on one map.
pub fn functional_records(map: &FieldMap, thresholds: &[Threshold]) -> Result<Vec<FunctionalRecord>> {
    let defect = lkc::defect(map);
    let h2 = lkc::chaos_projection(map, 2)?.value;
    let h4 = lkc::chaos_projection(map, 4)?.value;
    let trispectrum = lkc::trispectrum_from_h4(map.ell(), h4);
    Ok(thresholds
        .iter()
        .map(|&u| {
            let e = lkc::estimate(map, u);
            FunctionalRecord {
                u,
                area_frac: e.area_frac,
                half_length_norm: e.half_length_norm,
                epc_norm: e.epc_norm,
                epc_raw: e.epc_raw,
                defect,
                h2,
                h4,
                trispectrum,
            }
        })
        .collect())
}

fn cmd_functionals(a: FunctionalsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let us = parse_thresholds(&a.thresholds)?;
    let map = load_map(&a.source, err)?;
    let recs = functional_records(&map, &us)?;
    match a.format {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&recs)?).map_err(io_out)?,
        OutputFormat::Csv => {
            writeln!(out, "{LKC_UNITS}").map_err(io_out)?;
            writeln!(out, "u,area_frac,half_length_norm,epc_norm,epc_raw,defect,h2,h4,trispectrum").map_err(io_out)?;
            for r in &recs {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.u, r.area_frac, r.half_length_norm, r.epc_norm, r.epc_raw, r.defect, r.h2, r.h4, r.trispectrum
                )
                .map_err(io_out)?;
            }
        }
        OutputFormat::Table => {
            writeln!(out, "{LKC_UNITS}").map_err(io_out)?;
            writeln!(out, "{:>8} {:>10} {:>12} {:>12} {:>8}", "u", "area", "half_length", "epc", "epc_raw").map_err(io_out)?;
            for r in &recs {
                writeln!(
                    out,
                    "{:>8} {:>10.4} {:>12.4} {:>12.3} {:>8}",
                    r.u.to_string(),
                    r.area_frac,
                    r.half_length_norm,
                    r.epc_norm,
                    r.epc_raw
                )
                .map_err(io_out)?;
            }
            if let Some(r) = recs.first() {
                writeln!(
                    out,
                    "# defect {:.6}  h2 {:.6}  h4 {:.6}  trispectrum {:.6}",
                    r.defect, r.h2, r.h4, r.trispectrum
                )
                .map_err(io_out)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_critical(a: CriticalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let us = parse_thresholds(&a.thresholds)?;
    let map = load_map(&a.source, err)?;
    let points = critical::critical_points(&map)?;
    let counts: Vec<_> = us.iter().map(|&u| critical::counts_above(&points, u)).collect();
    match a.format {
        OutputFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&counts)?).map_err(io_out)?,
        OutputFormat::Csv | OutputFormat::Table => {
            writeln!(out, "# counts of critical points with f >= u; saddles with multiplicity").map_err(io_out)?;
            writeln!(out, "u,maxima,minima,saddles,extrema,critical").map_err(io_out)?;
            for c in &counts {
                writeln!(out, "{},{},{},{},{},{}", c.u, c.maxima, c.minima, c.saddles, c.extrema, c.critical)
                    .map_err(io_out)?;
            }
        }
    }
    if let Some(path) = &a.histogram {
        let mut h = CriticalHistogram::new(map.ell(), a.bin_width)?;
        h.add_points(&points);
        h.write_csv(path)?;
    }
    Ok(EXIT_OK)
}

fn cmd_theory(a: TheoryArgs, out: &mut dyn Write) -> Result<i32> {
    let ell = Multipole::new(a.ell)?;
    let us = parse_thresholds(&a.u)?;
    if let Some(k) = a.k {
        let preds: Vec<_> = us
            .iter()
            .map(|&u| theory::lkc_prediction(k, ell, u))
            .collect::<Result<_>>()?;
        if a.format == OutputFormat::Json {
            writeln!(out, "{}", serde_json::to_string_pretty(&preds)?).map_err(io_out)?;
            return Ok(EXIT_OK);
        }
        writeln!(out, "# mean per 4 pi, std per 4 pi (variance per 16 pi^2); k=1 is half the boundary length")
            .map_err(io_out)?;
        writeln!(out, "k,ell,u,regime,mean,std,status").map_err(io_out)?;
        for p in preds {
            let status = if p.certified { "certified" } else { "envelope, not certified" };
            writeln!(out, "{},{},{},{},{:.6},{:.6},{}", p.k, p.ell, p.u, p.regime, p.mean_norm, p.std_norm(), status)
                .map_err(io_out)?;
        }
    } else if let Some(class) = a.class {
        let preds: Vec<_> = us.iter().map(|&u| theory::critical_prediction(class, ell, u)).collect();
        if a.format == OutputFormat::Json {
            writeln!(out, "{}", serde_json::to_string_pretty(&preds)?).map_err(io_out)?;
            return Ok(EXIT_OK);
        }
        writeln!(out, "# expected count with f >= u and leading standard deviation").map_err(io_out)?;
        writeln!(out, "class,ell,u,mean,std").map_err(io_out)?;
        for p in preds {
            writeln!(out, "{},{},{},{:.4},{:.4}", p.class, p.ell, p.u, p.mean, p.var.sqrt()).map_err(io_out)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_constants(a: ConstantsArgs, out: &mut dyn Write) -> Result<i32> {
    let recs = match &a.which {
        Some(name) => vec![theory::constant(name, a.tolerance)?],
        None => theory::all_constants(a.tolerance)?,
    };
    out.write_all(theory::constants_csv(&recs).as_bytes()).map_err(io_out)?;
    Ok(EXIT_OK)
}

fn resolve_config(a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut c = match &a.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &a.ell {
        c.set("ell", v)?;
    }
    if let Some(n) = a.n {
        c.n_realizations = n;
    }
    if let Some(s) = a.seed {
        c.master_seed = s;
    }
    if let Some(t) = &a.thresholds {
        c.set("thresholds", t)?;
    }
    if let Some(o) = a.oversampling {
        c.oversampling = o;
    }
    if let Some(nm) = a.normalization {
        c.normalization = nm;
    }
    if a.no_critical {
        c.critical = false;
    }
    if let Some(o) = &a.out {
        c.output_dir = Some(o.clone());
    }
    if let Some(f) = &a.format {
        c.set("formats", f)?;
    }
    if a.threads.is_some() {
        c.threads = a.threads;
    }
    c.progress = true;
    c.validate()?;
    Ok(c)
}

fn cmd_experiment(a: ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write, correlate_only: bool) -> Result<i32> {
    let cfg = resolve_config(&a)?;
    for line in cfg.to_text().lines() {
        writeln!(err, "# {line}").map_err(io_out)?;
    }
    let start = std::time::Instant::now();
    if correlate_only {
        let mats = harness::correlate(&cfg)?;
        writeln!(err, "# elapsed {:.1} s", start.elapsed().as_secs_f64()).map_err(io_out)?;
        for m in &mats {
            writeln!(out, "# ell = {}", m.ell).map_err(io_out)?;
            out.write_all(harness::correlation_csv(m).as_bytes()).map_err(io_out)?;
        }
        return Ok(EXIT_OK);
    }
    let report = harness::run_experiment(&cfg)?;
    writeln!(err, "# elapsed {:.1} s", start.elapsed().as_secs_f64()).map_err(io_out)?;
    if let Some(dir) = &cfg.output_dir {
        let formats = if cfg.formats.is_empty() {
            vec![ReportFormat::Csv, ReportFormat::Json]
        } else {
            cfg.formats.clone()
        };
        for p in harness::emit_report(&report, dir, &formats)? {
            writeln!(err, "# wrote {}", p.display()).map_err(io_out)?;
        }
        let summary = dir.join("summary.txt");
        std::fs::write(&summary, report.summary_text()).map_err(|e| Error::io(&summary, e))?;
    }
    out.write_all(report.summary_text().as_bytes()).map_err(io_out)?;
    if a.check {
        let c = harness::check(&report);
        for cell in c.cells.iter().filter(|c| !c.passed) {
            writeln!(out, "check: ell={} {} off by {:.2} standard errors", cell.ell, cell.label, cell.z)
                .map_err(io_out)?;
        }
        writeln!(
            out,
            "check: {:.1}% of {} cells within {} standard errors: {}",
            100.0 * c.fraction_passed,
            c.cells.len(),
            harness::CHECK_SIGMAS,
            if c.passed { "PASS" } else { "FAIL" }
        )
        .map_err(io_out)?;
        if !c.passed {
            return Ok(EXIT_CHECK);
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_from(std::iter::once("sphgeom").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&["simulate", "--ell", "0", "--out", "/tmp/x"]).0, EXIT_USAGE);
        assert_eq!(run(&["theory", "--k", "1", "--ell", "10", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["theory", "--ell", "10"]).0, EXIT_USAGE);
        assert_eq!(run(&["constants", "--which", "nope"]).0, EXIT_USAGE);
        let (code, out, _) = run(&["theory", "--help"]);
        assert_eq!(code, EXIT_OK);
        for flag in ["--k", "--class", "--ell", "--u", "--format"] {
            assert!(out.contains(flag), "{flag}");
        }
    }

    #[test]
    fn theory_output() {
        let (code, out, _) = run(&["theory", "--k", "1", "--ell", "100", "--u", "0"]);
        assert_eq!(code, 0);
        let line = out.lines().last().unwrap();
        assert!(line.starts_with("1,100,0,zero-u,17.765"), "{line}");
        let std: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!((std - 0.018).abs() < 5e-4);
        let (_, out, _) = run(&["theory", "--class", "c", "--ell", "100", "--u", "-inf,-1.5"]);
        assert!(out.contains("c,100,-inf,11662.4"));
    }

    #[test]
    fn simulate_and_functionals() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.sph");
        let b = dir.path().join("b.sph");
        for p in [&a, &b] {
            let (code, _, _) = run(&["simulate", "--ell", "20", "--seed", "7", "--out", p.to_str().unwrap()]);
            assert_eq!(code, 0);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let (_, _, err) = run(&["simulate", "--ell", "20", "--rings", "60", "--out", b.to_str().unwrap()]);
        assert!(err.contains("warning"));
        let (code, out, _) = run(&["functionals", "--map", a.to_str().unwrap(), "--thresholds", "-3,-1.5,0,1.5,3", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 6);
        let (_, out, _) = run(&["functionals", "--ell", "20", "--seed", "7", "--thresholds", "-10", "--format", "json"]);
        let recs: Vec<FunctionalRecord> = serde_json::from_str(&out).unwrap();
        assert_eq!(recs[0].area_frac, 1.0);
        assert_eq!(recs[0].epc_raw, 2);
        let missing = dir.path().join("missing.sph");
        assert_eq!(run(&["functionals", "--map", missing.to_str().unwrap()]).0, EXIT_IO);
    }

    #[test]
    fn experiment_writes_reports() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "ell = 10\nn = 4\nseed = 2\n").unwrap();
        let out_dir = dir.path().join("out");
        let (code, _, err) = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!(err.contains("# ell = 10"));
        assert!(out_dir.join("report.json").exists() && out_dir.join("table_area.csv").exists());
        std::fs::write(&cfg, "ell = 10\nn 4\n").unwrap();
        let (code, _, err) = run(&["experiment", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains(":2:"), "{err}");
    }
}
