//! Critical points of a few maps: counts against the expected totals, the
//! Morse relation, and the density of critical values.
//!
//! ```text
//! cargo run --release --example critical_points -- 60 8
//! ```

use std::sync::Arc;

use sphgeom::critical::{counts_above, critical_points, CriticalHistogram};
use sphgeom::grid::GridSpec;
use sphgeom::specfun::Threshold;
use sphgeom::synth::{simulate, Multipole};
use sphgeom::theory::{critical_density_c, critical_density_e, critical_density_s, critical_mean, CriticalClass};

fn main() -> sphgeom::Result<()> {
    let mut args = std::env::args().skip(1);
    let ell = Multipole::new(args.next().map_or(60, |s| s.parse().expect("ell")))?;
    let maps: u64 = args.next().map_or(8, |s| s.parse().expect("maps"));
    let grid = Arc::new(GridSpec::for_multipole(ell.ell, 6)?);
    let mut hist = CriticalHistogram::new(ell.ell, 0.25)?;

    println!("{:>4} {:>8} {:>8} {:>8} {:>8} {:>6}", "map", "maxima", "minima", "saddles", "above 2", "morse");
    for seed in 0..maps {
        let points = critical_points(&simulate(ell, seed, &grid)?)?;
        let all = counts_above(&points, Threshold::NEG_INFINITY);
        let high = counts_above(&points, Threshold(2.0));
        println!(
            "{seed:>4} {:>8} {:>8} {:>8} {:>8} {:>6}",
            all.maxima,
            all.minima,
            all.saddles,
            high.critical,
            all.euler_sum()
        );
        hist.add_points(&points);
    }
    let total = |c| critical_mean(c, ell, Threshold::NEG_INFINITY);
    println!(
        "expected per map: {:.1} critical, {:.1} extrema, {:.1} saddles",
        total(CriticalClass::C),
        total(CriticalClass::E),
        total(CriticalClass::S)
    );

    println!("\ncritical value densities, sample (model)");
    let (c, e, s) = (hist.critical_density(), hist.extrema_density(), hist.saddle_density());
    for b in (1..hist.n_bins() - 1).filter(|&b| hist.center(b).abs() <= 3.5) {
        let t = hist.center(b);
        println!(
            "{t:+5.2}  c {:.3} ({:.3})  e {:.3} ({:.3})  s {:.3} ({:.3})",
            c[b],
            critical_density_c(t),
            e[b],
            critical_density_e(t),
            s[b],
            critical_density_s(t)
        );
    }
    Ok(())
}
