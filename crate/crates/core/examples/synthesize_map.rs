//! Synthesize one random eigenfunction, inspect it and round-trip it through
//! the binary map format.
//!
//! ```text
//! cargo run --release --example synthesize_map -- 80 7
//! ```

use std::sync::Arc;

use sphgeom::grid::{GridSpec, MapFormat};
use sphgeom::synth::{normalize, simulate, FieldMap, Multipole, Normalization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let ell: u32 = args.next().map_or(80, |s| s.parse().expect("ell"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let ell = Multipole::new(ell)?;
    let grid = Arc::new(GridSpec::for_multipole(ell.ell, 6)?);
    println!("grid: {} rings x {} longitudes", grid.n_rings(), grid.n_phi());

    let map = simulate(ell, seed, &grid)?;
    let (mean, var) = map.weighted_moments();
    let (lo, hi) = map.min_max();
    println!("ell {} seed {seed}: mean {mean:+.4}, variance {var:.4}, range [{lo:.3}, {hi:.3}]", ell.ell);

    // the ensemble variance is 1 by construction; sample mode rescales each map
    let unit = normalize(map.clone(), Normalization::Sample)?;
    let (m, v) = unit.weighted_moments();
    println!("sample-normalized: mean {m:+.1e}, variance {v:.12}");

    let dir = std::env::temp_dir().join(format!("sphgeom-map-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("map.bin");
    map.save(&path, MapFormat::Binary)?;
    let back = FieldMap::load(&path)?;
    assert_eq!(back.values(), map.values());
    println!("wrote and reread {} ({:?})", path.display(), back.header());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
