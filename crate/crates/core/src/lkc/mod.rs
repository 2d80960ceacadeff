//! Lipschitz-Killing curvatures of excursion sets `{f >= u}`: area, half
//! boundary length and Euler characteristic, plus the defect and the Wiener
//! chaos projections `h_q = int H_q(f)`.
//!
//! All three functionals read the same quad mesh (see [`crate::grid`]). A quad
//! whose corners alternate above and below `u` is resolved by the mean of its
//! four corners: if the mean is at least `u`, the two above corners are joined
//! through the quad. Length and Euler characteristic use the same rule, so the
//! Euler characteristic always equals `2 * components - contour loops`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{arc_length, GridSpec};
use crate::specfun::{hermite_unchecked, Threshold};
use crate::synth::FieldMap;

const FOUR_PI: f64 = 4.0 * PI;

/// The three functionals at one threshold, each divided by `4 pi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LkcEstimate {
    pub u: Threshold,
    /// Area of the excursion set over `4 pi`.
    pub area_frac: f64,
    /// Half the boundary length over `4 pi`.
    pub half_length_norm: f64,
    /// Euler characteristic over `4 pi`.
    pub epc_norm: f64,
    pub epc_raw: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosProjection {
    pub q: u32,
    pub value: f64,
}

/// A piece of contour inside one quad. Endpoints lie on mesh edges, named by
/// their pixel pair `(lo, hi)`; adjacent quads share endpoints exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub edges: [(usize, usize); 2],
    pub points: [[f64; 3]; 2],
    pub length: f64,
}

#[derive(Clone, Copy, Default, Debug)]
struct Partial {
    length: f64,
    vertices: i64,
    edges: i64,
    diagonals: i64,
    faces: i64,
}

impl Partial {
    fn add(&mut self, o: &Partial) {
        self.length += o.length;
        self.vertices += o.vertices;
        self.edges += o.edges;
        self.diagonals += o.diagonals;
        self.faces += o.faces;
    }

    fn chi(&self) -> i64 {
        self.vertices - self.edges - self.diagonals + self.faces
    }
}

/// Point where the level `u` crosses mesh edge `(a, b)`. Ring and meridian
/// edges interpolate in longitude or colatitude; ladder rungs interpolate the
/// chord and project back to the sphere.
fn crossing(grid: &GridSpec, f: &[f64], a: usize, b: usize, u: f64) -> [f64; 3] {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let t = (u - f[lo]) / (f[hi] - f[lo]);
    let n = grid.n_phi();
    let (ri, ci) = (lo / n, lo % n);
    let (rj, cj) = (hi / n, hi % n);
    if ri == rj {
        let adjacent = cj == ci + 1 || (ci == 0 && cj == n - 1);
        if adjacent {
            let dphi = 2.0 * PI / n as f64;
            let step = if cj == ci + 1 { dphi } else { -dphi };
            let phi = grid.phi(ci) + t * step;
            let th = grid.theta(ri);
            let (s, c) = th.sin_cos();
            return [s * phi.cos(), s * phi.sin(), c];
        }
        let (p, q) = (grid.unit_vector(lo), grid.unit_vector(hi));
        let v = [
            p[0] + t * (q[0] - p[0]),
            p[1] + t * (q[1] - p[1]),
            p[2] + t * (q[2] - p[2]),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        return [v[0] / norm, v[1] / norm, v[2] / norm];
    }
    let th = grid.theta(ri) + t * (grid.theta(rj) - grid.theta(ri));
    let phi = grid.phi(ci);
    let (s, c) = th.sin_cos();
    [s * phi.cos(), s * phi.sin(), c]
}

/// Visit the contour segments of one quad.
#[inline]
fn quad_segments(
    grid: &GridSpec,
    f: &[f64],
    c: [usize; 4],
    u: f64,
    mut emit: impl FnMut((usize, usize), (usize, usize), [f64; 3], [f64; 3]),
) {
    let v = [f[c[0]], f[c[1]], f[c[2]], f[c[3]]];
    let above = [v[0] >= u, v[1] >= u, v[2] >= u, v[3] >= u];
    let key = |k: usize| {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut cut = [false; 4];
    let mut ncut = 0;
    for k in 0..4 {
        cut[k] = above[k] != above[(k + 1) % 4];
        ncut += cut[k] as usize;
    }
    match ncut {
        0 => {}
        2 => {
            let mut it = (0..4).filter(|&k| cut[k]);
            let (e1, e2) = (it.next().unwrap(), it.next().unwrap());
            let p1 = crossing(grid, f, c[e1], c[(e1 + 1) % 4], u);
            let p2 = crossing(grid, f, c[e2], c[(e2 + 1) % 4], u);
            emit(key(e1), key(e2), p1, p2);
        }
        _ => {
            // saddle: cut off the corners of the class that stays disconnected
            let mean = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            let joined_above = mean >= u;
            for k in 0..4 {
                if above[k] != joined_above {
                    let e_in = (k + 3) % 4;
                    let p1 = crossing(grid, f, c[e_in], c[k], u);
                    let p2 = crossing(grid, f, c[k], c[(k + 1) % 4], u);
                    emit(key(e_in), key(k), p1, p2);
                }
            }
        }
    }
}

#[inline]
fn is_diagonal_saddle(v: [f64; 4], u: f64) -> bool {
    let a = [v[0] >= u, v[1] >= u, v[2] >= u, v[3] >= u];
    a[0] == a[2] && a[1] == a[3] && a[0] != a[1]
}

#[inline]
fn quad_partial(grid: &GridSpec, f: &[f64], c: [usize; 4], u: f64, want_length: bool, out: &mut Partial) {
    let v = [f[c[0]], f[c[1]], f[c[2]], f[c[3]]];
    if v.iter().all(|&x| x >= u) {
        out.faces += 1;
        return;
    }
    if v.iter().all(|&x| x < u) {
        return;
    }
    if is_diagonal_saddle(v, u) && 0.25 * (v[0] + v[1] + v[2] + v[3]) >= u {
        out.diagonals += 1;
    }
    if want_length {
        quad_segments(grid, f, c, u, |_, _, p, q| out.length += arc_length(p, q));
    }
}

fn scan(map: &FieldMap, u: f64, want_length: bool) -> Partial {
    let grid = map.grid();
    let f = map.values();
    let (r, n) = (grid.n_rings(), grid.n_phi());

    // ring i: its pixels and ring edges, then the band of quads below it
    let rows: Vec<Partial> = (0..r)
        .into_par_iter()
        .map(|i| {
            let mut p = Partial::default();
            let row = &f[i * n..(i + 1) * n];
            let mut count = 0i64;
            for j in 0..n {
                let a = row[j] >= u;
                if a {
                    count += 1;
                    if row[(j + 1) % n] >= u {
                        p.edges += 1;
                    }
                    if i + 1 < r && f[(i + 1) * n + j] >= u {
                        p.edges += 1;
                    }
                }
            }
            p.vertices = count;
            if i + 1 < r {
                for j in 0..n {
                    let q = grid.quad_corners(i * n + j);
                    quad_partial(grid, f, q, u, want_length, &mut p);
                }
            }
            p
        })
        .collect();

    let mut total = Partial::default();
    for p in &rows {
        total.add(p);
    }
    for q in grid.n_band_quads()..grid.n_quads() {
        quad_partial(grid, f, grid.quad_corners(q), u, want_length, &mut total);
    }
    for (a, b) in grid.cap_rungs() {
        if f[a] >= u && f[b] >= u {
            total.edges += 1;
        }
    }
    total
}

/// All three functionals at `u` in one pass over the mesh.
pub fn estimate(map: &FieldMap, u: Threshold) -> LkcEstimate {
    let p = scan(map, u.0, true);
    let chi = p.chi();
    LkcEstimate {
        u,
        area_frac: excursion_area(map, u),
        half_length_norm: p.length / 2.0 / FOUR_PI,
        epc_norm: chi as f64 / FOUR_PI,
        epc_raw: chi,
    }
}

/// Area of `{f >= u}` over `4 pi`. Pixels with `f = u` count as above.
pub fn excursion_area(map: &FieldMap, u: Threshold) -> f64 {
    let grid = map.grid();
    let n = grid.n_phi();
    // normalize by the summed cell areas so the extremes are exactly 0 and 1
    let (mut above, mut below) = (0.0, 0.0);
    for (i, row) in map.values().chunks_exact(n).enumerate() {
        let k = row.iter().filter(|&&v| v >= u.0).count();
        above += k as f64 * grid.cell_area(i);
        below += (n - k) as f64 * grid.cell_area(i);
    }
    above / (above + below)
}

/// Total length of the level curve `{f = u}` in radians.
pub fn contour_length(map: &FieldMap, u: Threshold) -> f64 {
    scan(map, u.0, true).length
}

/// Half the boundary length of `{f >= u}` over `4 pi`.
pub fn boundary_length(map: &FieldMap, u: Threshold) -> f64 {
    contour_length(map, u) / 2.0 / FOUR_PI
}

/// Euler characteristic of `{f >= u}`: raw and over `4 pi`.
pub fn euler_characteristic(map: &FieldMap, u: Threshold) -> (i64, f64) {
    let chi = scan(map, u.0, false).chi();
    (chi, chi as f64 / FOUR_PI)
}

/// Every contour segment at level `u`, quad by quad.
pub fn contour_segments(map: &FieldMap, u: Threshold) -> Vec<Segment> {
    let grid = map.grid();
    let f = map.values();
    let mut out = Vec::new();
    for q in 0..grid.n_quads() {
        quad_segments(grid, f, grid.quad_corners(q), u.0, |e1, e2, p1, p2| {
            out.push(Segment {
                edges: [e1, e2],
                points: [p1, p2],
                length: arc_length(p1, p2),
            })
        });
    }
    out
}

/// `D = 2 * area({f >= 0}) - 4 pi`.
pub fn defect(map: &FieldMap) -> f64 {
    2.0 * FOUR_PI * excursion_area(map, Threshold(0.0)) - FOUR_PI
}

/// `h_q = int H_q(f(x)) dx` under the grid quadrature, for `q <= 6`.
pub fn chaos_projection(map: &FieldMap, q: u32) -> Result<ChaosProjection> {
    if q > 6 {
        return Err(Error::Unsupported(format!("chaos order {q} (at most 6)")));
    }
    if q == 0 {
        return Ok(ChaosProjection { q, value: FOUR_PI });
    }
    let grid = map.grid();
    let n = grid.n_phi();
    let rows: Vec<f64> = map
        .values()
        .par_chunks_exact(n)
        .enumerate()
        .map(|(i, row)| grid.quad_weight(i) * row.iter().map(|&v| hermite_unchecked(q as i32, v)).sum::<f64>())
        .collect();
    Ok(ChaosProjection {
        q,
        value: rows.iter().sum(),
    })
}

/// `M = -(1/4) sqrt(ell (ell + 1) / 2) h_4 / 4!`.
pub fn sample_trispectrum(map: &FieldMap) -> f64 {
    let h4 = chaos_projection(map, 4).expect("order 4 is supported").value;
    trispectrum_from_h4(map.ell(), h4)
}

pub fn trispectrum_from_h4(ell: u32, h4: f64) -> f64 {
    let l = ell as f64;
    -0.25 * (l * (l + 1.0) / 2.0).sqrt() * h4 / 24.0
}
