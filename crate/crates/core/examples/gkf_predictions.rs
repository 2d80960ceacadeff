//! Expected values and fluctuations of the excursion set curvatures and of
//! critical point counts, from closed forms only.
//!
//! ```text
//! cargo run --example gkf_predictions -- 300
//! ```

use sphgeom::specfun::Threshold;
use sphgeom::synth::Multipole;
use sphgeom::theory::{critical_prediction, lkc_prediction, CriticalClass};

fn main() -> sphgeom::Result<()> {
    let ell = Multipole::new(std::env::args().nth(1).map_or(300, |s| s.parse().expect("ell")))?;
    let names = ["euler char.", "half length", "area"];
    for k in [2, 1, 0] {
        println!("{} at ell = {} (per 4 pi)", names[k as usize], ell.ell);
        for u in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let p = lkc_prediction(k, ell, Threshold(u))?;
            let note = if p.certified { "" } else { "  (order of magnitude only)" };
            println!("  u {u:+.1}: mean {:12.5}  std {:10.5}  {}{note}", p.mean_norm, p.std_norm(), p.regime);
        }
    }
    println!("critical points above u");
    for u in [f64::NEG_INFINITY, -1.0, 0.0, 1.0, 2.0] {
        let row: Vec<String> = [CriticalClass::C, CriticalClass::E, CriticalClass::S]
            .into_iter()
            .map(|c| {
                let p = critical_prediction(c, ell, Threshold(u));
                format!("{c} {:10.1} +- {:7.1}", p.mean, p.var.sqrt())
            })
            .collect();
        println!("  u {:>4}: {}", Threshold(u).to_string(), row.join("   "));
    }
    Ok(())
}
