//! A full seeded experiment: every statistic against its model, written as
//! CSV and JSON, then the agreement check.
//!
//! ```text
//! cargo run --release --example monte_carlo_report -- 60 50 /tmp/sphgeom-report
//! ```

use std::path::PathBuf;

use sphgeom::harness::{check, emit_report, run_experiment, ExperimentConfig};

fn main() -> sphgeom::Result<()> {
    let mut args = std::env::args().skip(1);
    let ell: u32 = args.next().map_or(60, |s| s.parse().expect("ell"));
    let n: u64 = args.next().map_or(50, |s| s.parse().expect("realizations"));
    let out = args.next().map_or_else(|| std::env::temp_dir().join("sphgeom-report"), PathBuf::from);

    let mut cfg = ExperimentConfig {
        multipoles: vec![ell],
        n_realizations: n,
        master_seed: 2024,
        ..ExperimentConfig::default()
    };
    cfg.progress = true;
    let report = run_experiment(&cfg)?;
    print!("{}", report.summary_text());

    for path in emit_report(&report, &out, &cfg.formats)? {
        println!("wrote {}", path.display());
    }
    let outcome = check(&report);
    let failed: Vec<_> = outcome.cells.iter().filter(|c| !c.passed).collect();
    println!(
        "{:.1}% of {} certified cells within tolerance; {}",
        100.0 * outcome.fraction_passed,
        outcome.cells.len(),
        if outcome.passed { "pass" } else { "fail" }
    );
    for c in failed {
        println!("  outside: {} at ell {} (z = {:+.2})", c.label, c.ell, c.z);
    }
    Ok(())
}
