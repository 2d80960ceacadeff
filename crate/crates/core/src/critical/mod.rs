//! Critical points of a pixel map, located by the index of the gradient.
//!
//! The gradient at each pixel comes from central differences in the
//! `(e_theta, e_phi)` frame. Each mesh cell between two rings gets the
//! winding number of the gradient around its corners, and each polar cap gets
//! the winding around its ring plus one turn of the frame. A cell of index
//! `+k` holds `k` extrema and one of index `-k` holds `k` saddles. The
//! windings are sums of integer corrections shared by neighbouring cells, so
//! maxima + minima - saddles is exactly 2 on every map.
//!
//! Counting sign changes around a pixel's neighbours instead overcounts by
//! about 15% whatever the resolution: near an elongated extremum or saddle
//! the sampled quadratic produces spurious adjacent pairs.
//!
//! A critical value is the value of the local quadratic model at its
//! stationary point, taken from the corner nearest to it.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::specfun::Threshold;
use crate::synth::FieldMap;

/// Minimum rings per multipole for critical point detection.
pub const MIN_RINGS_PER_ELL: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub pixel: usize,
    pub value: f64,
    pub kind: CriticalKind,
    /// Number of critical points of this kind in the cell; 1 unless
    /// several are closer together than the pixel spacing.
    pub multiplicity: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub maxima: u64,
    pub minima: u64,
    /// Counted with multiplicity.
    pub saddles: u64,
}

impl Counts {
    pub fn extrema(&self) -> u64 {
        self.maxima + self.minima
    }

    pub fn critical(&self) -> u64 {
        self.extrema() + self.saddles
    }

    fn add(&mut self, p: &CriticalPoint) {
        match p.kind {
            CriticalKind::Maximum => self.maxima += p.multiplicity as u64,
            CriticalKind::Minimum => self.minima += p.multiplicity as u64,
            CriticalKind::Saddle => self.saddles += p.multiplicity as u64,
        }
    }
}

/// Counts of critical points with value at least `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCounts {
    pub u: Threshold,
    pub maxima: u64,
    pub minima: u64,
    pub saddles: u64,
    pub extrema: u64,
    pub critical: u64,
}

impl CriticalCounts {
    fn new(u: Threshold, c: Counts) -> Self {
        CriticalCounts {
            u,
            maxima: c.maxima,
            minima: c.minima,
            saddles: c.saddles,
            extrema: c.extrema(),
            critical: c.critical(),
        }
    }

    /// maxima + minima - saddles; 2 on the whole sphere.
    pub fn euler_sum(&self) -> i64 {
        self.extrema as i64 - self.saddles as i64
    }
}

fn check_resolution(map: &FieldMap) -> Result<()> {
    let required = MIN_RINGS_PER_ELL * map.ell() as usize;
    if map.grid().n_rings() < required {
        return Err(Error::Resolution {
            n_rings: map.grid().n_rings(),
            required,
            ell: map.ell(),
        });
    }
    Ok(())
}

/// Central-difference derivatives of the map, with rings continued across
/// the poles by reflection: ring `-1` at column `j` is ring `0` at `j + n/2`.
struct Stencil<'a> {
    grid: &'a GridSpec,
    f: &'a [f64],
    d_theta: f64,
    d_phi: f64,
}

/// Gradient and covariant Hessian in the orthonormal `(e_theta, e_phi)` frame.
struct Jet {
    g: [f64; 2],
    h: [[f64; 2]; 2],
}

impl<'a> Stencil<'a> {
    fn new(map: &'a FieldMap) -> Self {
        let grid = map.grid();
        Stencil {
            grid,
            f: map.values(),
            d_theta: std::f64::consts::PI / grid.n_rings() as f64,
            d_phi: 2.0 * std::f64::consts::PI / grid.n_phi() as f64,
        }
    }

    fn at(&self, i: isize, j: isize) -> f64 {
        let (r, n) = (self.grid.n_rings() as isize, self.grid.n_phi() as isize);
        let (i, j) = if i < 0 {
            (-1 - i, j + n / 2)
        } else if i >= r {
            (2 * r - 1 - i, j + n / 2)
        } else {
            (i, j)
        };
        self.f[(i * n + j.rem_euclid(n)) as usize]
    }

    fn gradient(&self, i: usize, j: usize) -> [f64; 2] {
        let (i, j) = (i as isize, j as isize);
        let ft = (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.d_theta);
        let fp = (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.d_phi);
        [ft, fp / self.grid.sin_thetas()[i as usize]]
    }

    fn jet(&self, i: usize, j: usize) -> Jet {
        let (s, c) = (self.grid.sin_thetas()[i], self.grid.cos_thetas()[i]);
        let (i, j) = (i as isize, j as isize);
        let (dt, dp) = (self.d_theta, self.d_phi);
        let f0 = self.at(i, j);
        let ft = (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * dt);
        let fp = (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * dp);
        let ftt = (self.at(i + 1, j) - 2.0 * f0 + self.at(i - 1, j)) / (dt * dt);
        let fpp = (self.at(i, j + 1) - 2.0 * f0 + self.at(i, j - 1)) / (dp * dp);
        let ftp = (self.at(i + 1, j + 1) - self.at(i + 1, j - 1) - self.at(i - 1, j + 1) + self.at(i - 1, j - 1))
            / (4.0 * dt * dp);
        let cot = c / s;
        let h12 = (ftp - cot * fp) / s;
        Jet {
            g: [ft, fp / s],
            h: [[ftt, h12], [h12, fpp / (s * s) + cot * ft]],
        }
    }
}

impl Jet {
    /// Newton step to the stationary point of the quadratic model, and the
    /// model's value there relative to the current value.
    fn step(&self) -> Option<(f64, f64)> {
        let [[a, b], [_, d]] = self.h;
        let det = a * d - b * b;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let [g0, g1] = self.g;
        let x = -(d * g0 - b * g1) / det;
        let y = -(a * g1 - b * g0) / det;
        Some((x.hypot(y), 0.5 * (g0 * x + g1 * y)))
    }

    fn trace(&self) -> f64 {
        self.h[0][0] + self.h[1][1]
    }
}

/// Integer winding correction of the gradient angle along an edge:
/// `a2 - a1 + 2 pi w` is the turn in `(-pi, pi]`, and `w` is antisymmetric.
#[inline]
fn wrap(a1: f64, a2: f64) -> i64 {
    let d = a2 - a1;
    if d > std::f64::consts::PI {
        -1
    } else if d < -std::f64::consts::PI {
        1
    } else {
        0
    }
}

/// Critical point of index `k` in a cell with the given corners.
fn locate(st: &Stencil, corners: impl Iterator<Item = usize>, k: i64) -> CriticalPoint {
    let n = st.grid.n_phi();
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for p in corners {
        let jet = st.jet(p / n, p % n);
        let (dist, dv) = jet.step().unwrap_or((f64::INFINITY, 0.0));
        if best.map_or(true, |b| dist < b.0) {
            best = Some((dist, p, st.f[p] + dv, jet.trace()));
        }
    }
    let (_, pixel, value, trace) = best.expect("cell has corners");
    let kind = if k < 0 {
        CriticalKind::Saddle
    } else if trace < 0.0 {
        CriticalKind::Maximum
    } else {
        CriticalKind::Minimum
    };
    CriticalPoint {
        pixel,
        value,
        kind,
        multiplicity: k.unsigned_abs() as u32,
    }
}

/// Every critical point of the map: band cells in mesh order, then the
/// north and south polar caps.
pub fn critical_points(map: &FieldMap) -> Result<Vec<CriticalPoint>> {
    check_resolution(map)?;
    let st = Stencil::new(map);
    let grid = st.grid;
    let (r, n) = (grid.n_rings(), grid.n_phi());
    let angle: Vec<f64> = (0..r)
        .into_par_iter()
        .flat_map_iter(|i| {
            let st = &st;
            (0..n).map(move |j| {
                let [a, b] = st.gradient(i, j);
                b.atan2(a)
            })
        })
        .collect();
    let w = |p: usize, q: usize| wrap(angle[p], angle[q]);

    let rows: Vec<Vec<CriticalPoint>> = (0..r - 1)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in 0..n {
                let j1 = (j + 1) % n;
                // positively oriented: e_theta then e_phi
                let c = [i * n + j, (i + 1) * n + j, (i + 1) * n + j1, i * n + j1];
                let k = w(c[0], c[1]) + w(c[1], c[2]) + w(c[2], c[3]) + w(c[3], c[0]);
                if k != 0 {
                    out.push(locate(&st, c.into_iter(), k));
                }
            }
            out
        })
        .collect();
    let mut points: Vec<CriticalPoint> = rows.into_iter().flatten().collect();

    // the frame turns once around each pole
    let north: i64 = (0..n).map(|j| w(j, (j + 1) % n)).sum::<i64>() + 1;
    let last = (r - 1) * n;
    let south: i64 = (0..n).map(|j| w(last + (j + 1) % n, last + j)).sum::<i64>() + 1;
    for (k, base) in [(north, 0), (south, last)] {
        if k != 0 {
            points.push(locate(&st, base..base + n, k));
        }
    }
    Ok(points)
}

/// Count critical points with `f >= u` in a precomputed list.
pub fn counts_above(points: &[CriticalPoint], u: Threshold) -> CriticalCounts {
    let mut c = Counts::default();
    for p in points.iter().filter(|p| p.value >= u.0) {
        c.add(p);
    }
    CriticalCounts::new(u, c)
}

/// Classify every pixel with `f >= u`.
pub fn classify_critical(map: &FieldMap, u: Threshold) -> Result<CriticalCounts> {
    Ok(counts_above(&critical_points(map)?, u))
}

/// All critical points regardless of level.
pub fn total_counts(map: &FieldMap) -> Result<CriticalCounts> {
    classify_critical(map, Threshold::NEG_INFINITY)
}

/// Histogram of critical values, per class.
///
/// Bin `k` covers `[(k - 1/2) w, (k + 1/2) w)` for `|k| < K`; the two end
/// bins are open. Densities divide by the expected class totals, so each
/// class estimates a probability density of critical values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalHistogram {
    pub bin_width: f64,
    pub half_bins: i64,
    pub ell: u32,
    pub n_maps: u64,
    pub critical: Vec<u64>,
    pub extrema: Vec<u64>,
    pub saddles: Vec<u64>,
}

/// Range covered by regular bins, in units of the field standard deviation.
pub const HISTOGRAM_RANGE: f64 = 6.0;

impl CriticalHistogram {
    pub fn new(ell: u32, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::Config(format!("bin width {bin_width} must be positive")));
        }
        let half_bins = (HISTOGRAM_RANGE / bin_width).ceil() as i64;
        let nb = (2 * half_bins + 1) as usize;
        Ok(CriticalHistogram {
            bin_width,
            half_bins,
            ell,
            n_maps: 0,
            critical: vec![0; nb],
            extrema: vec![0; nb],
            saddles: vec![0; nb],
        })
    }

    pub fn n_bins(&self) -> usize {
        self.critical.len()
    }

    /// Lower edge of bin index `b` (0-based); `-inf` for the first bin.
    pub fn lower_edge(&self, b: usize) -> f64 {
        if b == 0 {
            f64::NEG_INFINITY
        } else {
            (b as i64 - self.half_bins) as f64 * self.bin_width - 0.5 * self.bin_width
        }
    }

    pub fn center(&self, b: usize) -> f64 {
        (b as i64 - self.half_bins) as f64 * self.bin_width
    }

    fn bin_of(&self, v: f64) -> usize {
        let last = self.n_bins() - 1;
        let mut b = ((v / self.bin_width).round() as i64 + self.half_bins).clamp(0, last as i64) as usize;
        // make the assignment agree exactly with the edge comparisons
        while b > 0 && v < self.lower_edge(b) {
            b -= 1;
        }
        while b < last && v >= self.lower_edge(b + 1) {
            b += 1;
        }
        b
    }

    pub fn add_points(&mut self, points: &[CriticalPoint]) {
        for p in points {
            let b = self.bin_of(p.value);
            match p.kind {
                CriticalKind::Saddle => self.saddles[b] += p.multiplicity as u64,
                _ => self.extrema[b] += p.multiplicity as u64,
            }
            self.critical[b] += p.multiplicity as u64;
        }
        self.n_maps += 1;
    }

    pub fn merge(&mut self, other: &CriticalHistogram) -> Result<()> {
        if other.bin_width != self.bin_width || other.half_bins != self.half_bins || other.ell != self.ell {
            return Err(Error::Config("histograms with different binning".into()));
        }
        for (a, b) in self.critical.iter_mut().zip(&other.critical) {
            *a += b;
        }
        for (a, b) in self.extrema.iter_mut().zip(&other.extrema) {
            *a += b;
        }
        for (a, b) in self.saddles.iter_mut().zip(&other.saddles) {
            *a += b;
        }
        self.n_maps += other.n_maps;
        Ok(())
    }

    fn scale(&self, per_map_total: f64) -> f64 {
        1.0 / (self.n_maps.max(1) as f64 * per_map_total * self.bin_width)
    }

    fn lambda(&self) -> f64 {
        let l = self.ell as f64;
        l * (l + 1.0)
    }

    /// Critical density: counts over `(2/sqrt 3) ell (ell+1) w` per map.
    pub fn critical_density(&self) -> Vec<f64> {
        let s = self.scale(2.0 / 3f64.sqrt() * self.lambda());
        self.critical.iter().map(|&c| c as f64 * s).collect()
    }

    /// Extrema density: counts over `(1/sqrt 3) ell (ell+1) w` per map.
    pub fn extrema_density(&self) -> Vec<f64> {
        let s = self.scale(self.lambda() / 3f64.sqrt());
        self.extrema.iter().map(|&c| c as f64 * s).collect()
    }

    /// Saddle density: counts over `(1/sqrt 3) ell (ell+1) w` per map.
    pub fn saddle_density(&self) -> Vec<f64> {
        let s = self.scale(self.lambda() / 3f64.sqrt());
        self.saddles.iter().map(|&c| c as f64 * s).collect()
    }

    /// Bin holding level `t`.
    pub fn bin_at(&self, t: f64) -> usize {
        self.bin_of(t)
    }

    pub fn to_csv(&self) -> String {
        let (c, e, s) = (self.critical_density(), self.extrema_density(), self.saddle_density());
        let mut out = String::from("bin_center,critical_density,extrema_density,saddle_density\n");
        for b in 0..self.n_bins() {
            writeln!(out, "{:.4},{:.6},{:.6},{:.6}", self.center(b), c[b], e[b], s[b]).expect("write to String");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Histogram of one map's critical values.
pub fn critical_histogram(map: &FieldMap, bin_width: f64) -> Result<CriticalHistogram> {
    let mut h = CriticalHistogram::new(map.ell(), bin_width)?;
    h.add_points(&critical_points(map)?);
    Ok(h)
}
