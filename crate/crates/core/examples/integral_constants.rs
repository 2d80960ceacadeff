//! The Bessel integral constants behind the defect and nodal variances.
//!
//! ```text
//! cargo run --release --example integral_constants
//! ```

use std::f64::consts::PI;

use sphgeom::theory::{all_constants, cq_two_over_q_check, defect_terms, j04_integral};

fn main() -> sphgeom::Result<()> {
    for r in all_constants(None)? {
        println!("{:<26} {:>12.6}  +- {:.0e}  {}", r.name, r.value, r.tolerance, r.method);
    }

    println!("\nC_q against 2/q for large q");
    for gap in cq_two_over_q_check(&[10, 25, 50])? {
        println!("  q {:>3}: C_q {:.5}, 2/q {:.5}, gap {:+.2}%", gap.q, gap.cq, gap.two_over_q, 100.0 * gap.relative_gap);
    }

    println!("\nfirst defect terms a_k C_(2k+1)");
    for t in defect_terms(5)? {
        println!("  k {}: {:.6} (large-k form {:.6})", t.k, t.term, t.stirling);
    }

    // J0^4 psi ~ 3 / (2 pi^2 psi) on average, so the integral grows like a log
    println!("\nJ0^4 integral minus 3 log(L) / (2 pi^2)");
    for l in [250.0, 500.0, 1000.0, 2000.0] {
        let v = j04_integral(l)?;
        println!("  L {l:>6}: {v:.5}  {:.5}", v - 1.5 * f64::ln(l) / (PI * PI));
    }
    Ok(())
}
