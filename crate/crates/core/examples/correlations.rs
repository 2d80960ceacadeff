//! Correlations across realizations between functionals at different
//! levels, the defect and the sample trispectrum.
//!
//! ```text
//! cargo run --release --example correlations -- 100 60
//! ```

use sphgeom::harness::{correlate, ExperimentConfig};
use sphgeom::specfun::Threshold;

fn main() -> sphgeom::Result<()> {
    let mut args = std::env::args().skip(1);
    let ell: u32 = args.next().map_or(100, |s| s.parse().expect("ell"));
    let n: u64 = args.next().map_or(60, |s| s.parse().expect("realizations"));
    let cfg = ExperimentConfig {
        multipoles: vec![ell],
        thresholds: vec![Threshold(-1.5), Threshold(0.0)],
        correlation_thresholds: vec![Threshold(-1.5), Threshold(0.0)],
        n_realizations: n,
        histogram_bin: None,
        ..ExperimentConfig::default()
    };
    for m in correlate(&cfg)? {
        print!("{:>17}", format!("ell = {}", m.ell));
        for l in &m.labels {
            print!("{l:>17}");
        }
        println!();
        for (l, row) in m.labels.iter().zip(&m.values) {
            print!("{l:>17}");
            for v in row {
                match v {
                    Some(r) => print!("{r:>17.3}"),
                    None => print!("{:>17}", "-"),
                }
            }
            println!();
        }
    }
    Ok(())
}
