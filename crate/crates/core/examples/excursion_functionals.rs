//! Area, half boundary length and Euler characteristic of excursion sets on
//! one map, next to their expected values.
//!
//! ```text
//! cargo run --release --example excursion_functionals -- 100 3
//! ```

use std::sync::Arc;

use sphgeom::grid::GridSpec;
use sphgeom::lkc::estimate;
use sphgeom::specfun::Threshold;
use sphgeom::synth::{simulate, Multipole};
use sphgeom::theory::lkc_prediction;

fn main() -> sphgeom::Result<()> {
    let mut args = std::env::args().skip(1);
    let ell = Multipole::new(args.next().map_or(100, |s| s.parse().expect("ell")))?;
    let seed: u64 = args.next().map_or(3, |s| s.parse().expect("seed"));
    let grid = Arc::new(GridSpec::for_multipole(ell.ell, 6)?);
    let map = simulate(ell, seed, &grid)?;

    println!("all values per 4 pi; expected value +- one standard deviation in brackets");
    println!("{:>5} {:>26} {:>26} {:>28}", "u", "area", "half length", "euler char.");
    for k in -6..=6 {
        let u = Threshold(0.5 * k as f64);
        let est = estimate(&map, u);
        let cell = |got: f64, k: u32| -> sphgeom::Result<String> {
            let p = lkc_prediction(k, ell, u)?;
            Ok(format!("{got:9.4} [{:8.4} +- {:.4}]", p.mean_norm, p.std_norm()))
        };
        println!(
            "{:>5} {:>26} {:>26} {:>28}",
            u.to_string(),
            cell(est.area_frac, 2)?,
            cell(est.half_length_norm, 1)?,
            cell(est.epc_norm, 0)?
        );
    }
    Ok(())
}
