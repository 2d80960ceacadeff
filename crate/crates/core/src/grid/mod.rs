//! Iso-latitude pixelization of the sphere.
//!
//! Ring `i` sits at colatitude `theta_i = pi (i + 1/2) / n_rings` and holds
//! `n_phi` pixels at longitudes `phi_j = 2 pi (j + 1/2) / n_phi`. Pixel ids are
//! ring-major: `p = ring * n_phi + col`.
//!
//! The pixels are the vertices of a quadrilateral mesh of the sphere. Between
//! consecutive rings the faces are the obvious longitude-latitude quads. Each
//! polar ring is closed by a "ladder" of quads that pairs column `j` with its
//! mirror column `n_phi - 1 - j`, which turns each polar ring into a disk and
//! gives the mesh Euler characteristic 2.

pub mod mapio;

pub use mapio::{MapFormat, MapHeader};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ring and column of a pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelId {
    pub ring: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    n_rings: usize,
    n_phi: usize,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    cell_area: Vec<f64>,
    quad_weight: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
}

/// One entry of a pixel's neighbourhood. `quad` is set when the neighbour is
/// across a diagonal of that mesh quad rather than joined by a mesh edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub pixel: usize,
    pub quad: Option<usize>,
}

/// Cyclically ordered neighbours of a pixel (8 in general, 6 at four
/// pixels of each polar ring).
#[derive(Clone, Copy, Debug)]
pub struct Neighborhood {
    items: [Neighbor; 8],
    len: usize,
}

impl Neighborhood {
    fn push(&mut self, n: Neighbor) {
        self.items[self.len] = n;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[Neighbor] {
        &self.items[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, pixel: usize) -> bool {
        self.as_slice().iter().any(|n| n.pixel == pixel)
    }
}

/// Build a grid. Equivalent to [`GridSpec::new`].
pub fn build_grid(n_rings: usize, n_phi: usize) -> Result<GridSpec> {
    GridSpec::new(n_rings, n_phi)
}

impl GridSpec {
    pub fn new(n_rings: usize, n_phi: usize) -> Result<Self> {
        if n_rings < 4 {
            return Err(Error::Config(format!("n_rings = {n_rings} (need at least 4)")));
        }
        if n_phi < 4 || n_phi % 2 != 0 {
            return Err(Error::Config(format!("n_phi = {n_phi} (need an even number >= 4)")));
        }
        let theta: Vec<f64> = (0..n_rings)
            .map(|i| PI * (i as f64 + 0.5) / n_rings as f64)
            .collect();
        let cos_theta: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let sin_theta: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let cell_area = (0..n_rings)
            .map(|i| {
                let lo = PI * i as f64 / n_rings as f64;
                let hi = PI * (i + 1) as f64 / n_rings as f64;
                // cos(lo) - cos(hi) without cancellation
                2.0 * (0.5 * (lo + hi)).sin() * (0.5 * (hi - lo)).sin() * dphi
            })
            .collect();
        let quad_weight = fejer_weights(&theta).into_iter().map(|w| w * dphi).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| dphi * (j as f64 + 0.5)).collect();
        Ok(GridSpec {
            n_rings,
            n_phi,
            cos_phi: phi.iter().map(|p| p.cos()).collect(),
            sin_phi: phi.iter().map(|p| p.sin()).collect(),
            theta,
            cos_theta,
            sin_theta,
            cell_area,
            quad_weight,
        })
    }

    /// Default resolution for multipole `ell`: `oversampling * ell` rings and
    /// twice as many longitudes.
    pub fn for_multipole(ell: u32, oversampling: usize) -> Result<Self> {
        let n_rings = (oversampling * ell as usize).max(4);
        GridSpec::new(n_rings, 2 * n_rings)
    }

    pub fn n_rings(&self) -> usize {
        self.n_rings
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn n_pixels(&self) -> usize {
        self.n_rings * self.n_phi
    }

    #[inline]
    pub fn index(&self, ring: usize, col: usize) -> usize {
        ring * self.n_phi + col
    }

    #[inline]
    pub fn pixel_id(&self, p: usize) -> PixelId {
        PixelId {
            ring: p / self.n_phi,
            col: p % self.n_phi,
        }
    }

    pub fn theta(&self, ring: usize) -> f64 {
        self.theta[ring]
    }

    pub fn phi(&self, col: usize) -> f64 {
        2.0 * PI * (col as f64 + 0.5) / self.n_phi as f64
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_thetas(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn sin_thetas(&self) -> &[f64] {
        &self.sin_theta
    }

    /// Exact solid angle of one cell of `ring`.
    pub fn cell_area(&self, ring: usize) -> f64 {
        self.cell_area[ring]
    }

    /// Quadrature weight of one pixel of `ring`. Integrates band-limited
    /// functions exactly; see [`integrate`].
    pub fn quad_weight(&self, ring: usize) -> f64 {
        self.quad_weight[ring]
    }

    pub fn total_cell_area(&self) -> f64 {
        self.cell_area.iter().sum::<f64>() * self.n_phi as f64
    }

    #[inline]
    pub fn unit_vector(&self, p: usize) -> [f64; 3] {
        let (i, j) = (p / self.n_phi, p % self.n_phi);
        let s = self.sin_theta[i];
        [s * self.cos_phi[j], s * self.sin_phi[j], self.cos_theta[i]]
    }

    #[inline]
    pub fn partner_col(&self, col: usize) -> usize {
        self.n_phi - 1 - col
    }

    /// Number of quads between consecutive rings.
    pub fn n_band_quads(&self) -> usize {
        (self.n_rings - 1) * self.n_phi
    }

    /// Number of ladder quads closing one polar ring.
    pub fn n_cap_quads(&self) -> usize {
        self.n_phi / 2 - 1
    }

    pub fn n_quads(&self) -> usize {
        self.n_band_quads() + 2 * self.n_cap_quads()
    }

    /// Corners of quad `q` in cyclic order. Diagonal A joins corners 0 and 2,
    /// diagonal B joins 1 and 3.
    pub fn quad_corners(&self, q: usize) -> [usize; 4] {
        let n = self.n_phi;
        let nb = self.n_band_quads();
        if q < nb {
            let (i, j) = (q / n, q % n);
            let j1 = (j + 1) % n;
            [
                self.index(i, j),
                self.index(i, j1),
                self.index(i + 1, j1),
                self.index(i + 1, j),
            ]
        } else {
            let h1 = self.n_cap_quads();
            let (ring, k) = if q < nb + h1 {
                (0, q - nb)
            } else {
                (self.n_rings - 1, q - nb - h1)
            };
            [
                self.index(ring, k),
                self.index(ring, k + 1),
                self.index(ring, n - 2 - k),
                self.index(ring, n - 1 - k),
            ]
        }
    }

    /// Ladder quad on a polar ring that has `(a, a + 1)` as a side, if any.
    fn cap_quad_of_pair(&self, ring: usize, a: usize) -> Option<usize> {
        let n = self.n_phi;
        let h = n / 2;
        let k = if a + 1 < h {
            a
        } else if a >= h && a + 2 <= n {
            n - 2 - a
        } else {
            return None;
        };
        let base = self.n_band_quads() + if ring == 0 { 0 } else { self.n_cap_quads() };
        Some(base + k)
    }

    /// Interior ladder rungs `(k, n_phi - 1 - k)`, `k = 1..n_phi/2 - 1`, on
    /// both polar rings. Together with the ring and meridian edges these are
    /// all mesh edges.
    pub fn cap_rungs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let h = self.n_phi / 2;
        [0, self.n_rings - 1].into_iter().flat_map(move |ring| {
            (1..h - 1).map(move |k| (self.index(ring, k), self.index(ring, self.n_phi - 1 - k)))
        })
    }

    /// Cyclically ordered neighbourhood of pixel `p`.
    pub fn neighbors(&self, p: usize) -> Neighborhood {
        let n = self.n_phi;
        let (i, j) = (p / n, p % n);
        let jp = (j + 1) % n;
        let jm = (j + n - 1) % n;
        let mut out = Neighborhood {
            items: [Neighbor { pixel: 0, quad: None }; 8],
            len: 0,
        };
        let edge = |pixel| Neighbor { pixel, quad: None };
        let diag = |pixel, quad| Neighbor {
            pixel,
            quad: Some(quad),
        };
        let east = self.index(i, jp);
        let west = self.index(i, jm);
        let band = |row: usize, col: usize| row * n + col;

        let cap = |ring: usize| {
            let pe = self.index(ring, self.partner_col(jp));
            let pp = self.index(ring, self.partner_col(j));
            let pw = self.index(ring, self.partner_col(jm));
            let qe = self.cap_quad_of_pair(ring, j);
            let qw = self.cap_quad_of_pair(ring, jm);
            [(pe, qe), (pp, None), (pw, qw)]
        };
        let keep = |x: usize| x != east && x != west && x != p;

        out.push(edge(east));
        if i == 0 {
            for (x, q) in cap(0) {
                if keep(x) {
                    out.push(Neighbor { pixel: x, quad: q });
                }
            }
        } else {
            out.push(diag(self.index(i - 1, jp), band(i - 1, j)));
            out.push(edge(self.index(i - 1, j)));
            out.push(diag(self.index(i - 1, jm), band(i - 1, jm)));
        }
        out.push(edge(west));
        if i == self.n_rings - 1 {
            let mut c = cap(i);
            c.reverse();
            for (x, q) in c {
                if keep(x) {
                    out.push(Neighbor { pixel: x, quad: q });
                }
            }
        } else {
            out.push(diag(self.index(i + 1, jm), band(i, jm)));
            out.push(edge(self.index(i + 1, j)));
            out.push(diag(self.index(i + 1, jp), band(i, j)));
        }
        out
    }
}

/// Fejer first-rule weights on the nodes `cos(theta_i)`, summing to 2.
fn fejer_weights(theta: &[f64]) -> Vec<f64> {
    let r = theta.len();
    let half = r / 2;
    theta
        .iter()
        .map(|&t| {
            let mut s = 0.0;
            for k in 1..=half {
                let kf = k as f64;
                s += (2.0 * kf * t).cos() / (4.0 * kf * kf - 1.0);
            }
            2.0 / r as f64 * (1.0 - 2.0 * s)
        })
        .collect()
}

/// Quadrature of a pixel map: `sum_p v_p w_p` with per-ring weights exact for
/// polynomials in `cos(theta)` of degree below `n_rings` times trigonometric
/// polynomials in `phi` of degree below `n_phi`.
pub fn integrate(values: &[f64], grid: &GridSpec) -> Result<f64> {
    if values.len() != grid.n_pixels() {
        return Err(Error::Shape {
            expected: grid.n_pixels(),
            got: values.len(),
        });
    }
    let n = grid.n_phi;
    Ok(values
        .chunks_exact(n)
        .enumerate()
        .map(|(i, row)| row.iter().sum::<f64>() * grid.quad_weight[i])
        .sum())
}

/// Great-circle distance between two unit vectors.
pub fn geodesic_distance(x: [f64; 3], y: [f64; 3]) -> Result<f64> {
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    for v in [x, y] {
        if (norm(v) - 1.0).abs() > 1e-9 {
            return Err(Error::domain("geodesic_distance", format!("{v:?} is not a unit vector")));
        }
    }
    let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    Ok(dot.clamp(-1.0, 1.0).acos())
}

/// Arc length between two unit vectors via the chord, stable for short arcs.
#[inline]
pub(crate) fn arc_length(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let chord = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    2.0 * (0.5 * chord).min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::assoc_legendre_norm;

    #[test]
    fn small_grid() {
        let g = build_grid(4, 8).unwrap();
        assert_eq!(g.n_pixels(), 32);
        assert!((g.total_cell_area() - 4.0 * PI).abs() < 1e-12);
        assert!(build_grid(3, 8).is_err());
        assert!(build_grid(4, 7).is_err());
        assert!(build_grid(4, 2).is_err());
        assert_eq!(build_grid(600, 1200).unwrap().n_pixels(), 720_000);
    }

    #[test]
    fn area_partition() {
        for (r, n) in [(4, 4), (5, 10), (37, 80), (600, 1200), (1800, 3600)] {
            let g = build_grid(r, n).unwrap();
            assert!((g.total_cell_area() - 4.0 * PI).abs() < 1e-12, "{r}x{n}");
            let q: f64 = (0..r).map(|i| g.quad_weight(i)).sum::<f64>() * n as f64;
            assert!((q - 4.0 * PI).abs() < 1e-11, "{r}x{n}");
        }
    }

    #[test]
    fn integrate_examples() {
        let g = GridSpec::for_multipole(20, 6).unwrap();
        let ones = vec![1.0; g.n_pixels()];
        assert!((integrate(&ones, &g).unwrap() - 4.0 * PI).abs() < 1e-12);
        let z: Vec<f64> = (0..g.n_pixels()).map(|p| g.unit_vector(p)[2]).collect();
        assert!(integrate(&z, &g).unwrap().abs() < 1e-12);
        let y: Vec<f64> = (0..g.n_pixels())
            .map(|p| {
                let t = g.theta(g.pixel_id(p).ring);
                assoc_legendre_norm(20, 0, t).unwrap().powi(2)
            })
            .collect();
        assert!((integrate(&y, &g).unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(integrate(&ones[1..], &g), Err(Error::Shape { .. })));
    }

    #[test]
    fn longitude_exactness() {
        let g = build_grid(12, 24).unwrap();
        for m in 1..12 {
            let v: Vec<f64> = (0..g.n_pixels())
                .map(|p| {
                    let id = g.pixel_id(p);
                    (m as f64 * g.phi(id.col)).cos() * (1.0 + id.ring as f64)
                })
                .collect();
            assert!(integrate(&v, &g).unwrap().abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn orthonormality() {
        let g = GridSpec::for_multipole(20, 6).unwrap();
        let ylm = |l: u32, m: i32, p: usize| {
            let id = g.pixel_id(p);
            let pb = assoc_legendre_norm(l, m, g.theta(id.ring)).unwrap();
            let ph = m as f64 * g.phi(id.col);
            (pb * ph.cos(), pb * ph.sin())
        };
        let pairs = [(3, 1, 3, 1), (20, 5, 20, 5), (20, 5, 18, 5), (7, 0, 9, 0), (10, 3, 10, 4)];
        for (l1, m1, l2, m2) in pairs {
            let (mut re, mut im) = (vec![0.0; g.n_pixels()], vec![0.0; g.n_pixels()]);
            for p in 0..g.n_pixels() {
                let a = ylm(l1, m1, p);
                let b = ylm(l2, m2, p);
                re[p] = a.0 * b.0 + a.1 * b.1;
                im[p] = a.1 * b.0 - a.0 * b.1;
            }
            let want = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
            assert!((integrate(&re, &g).unwrap() - want).abs() < 1e-5);
            assert!(integrate(&im, &g).unwrap().abs() < 1e-5);
        }
    }

    #[test]
    fn neighbourhoods_are_symmetric() {
        for (r, n) in [(4, 4), (4, 8), (6, 12), (9, 20)] {
            let g = build_grid(r, n).unwrap();
            for p in 0..g.n_pixels() {
                let nb = g.neighbors(p);
                let mut ids: Vec<_> = nb.as_slice().iter().map(|x| x.pixel).collect();
                ids.sort();
                ids.dedup();
                assert_eq!(ids.len(), nb.len(), "duplicates around {p}");
                assert!(!nb.contains(p));
                for x in nb.as_slice() {
                    assert!(g.neighbors(x.pixel).contains(p), "{p} -> {}", x.pixel);
                }
            }
        }
    }

    #[test]
    fn neighbourhood_shapes() {
        let g = build_grid(8, 16).unwrap();
        let interior = g.neighbors(g.index(3, 5));
        assert_eq!(interior.len(), 8);
        let wrap = g.neighbors(g.index(3, 0));
        assert!(wrap.contains(g.index(3, 15)));
        // polar ring: the mirror column is a neighbour
        let polar = g.neighbors(g.index(0, 3));
        assert_eq!(polar.len(), 8);
        assert!(polar.contains(g.index(0, 12)));
        for col in [0, 7, 8, 15] {
            assert_eq!(g.neighbors(g.index(0, col)).len(), 6);
            assert_eq!(g.neighbors(g.index(7, col)).len(), 6);
        }
    }

    #[test]
    fn diagonal_neighbours_are_opposite_quad_corners() {
        let g = build_grid(6, 12).unwrap();
        for p in 0..g.n_pixels() {
            for x in g.neighbors(p).as_slice() {
                if let Some(q) = x.quad {
                    let c = g.quad_corners(q);
                    let a = c.iter().position(|&v| v == p).unwrap();
                    assert_eq!(c[(a + 2) % 4], x.pixel);
                }
            }
        }
    }

    #[test]
    fn mesh_is_a_sphere() {
        for (r, n) in [(4, 4), (5, 10), (12, 24)] {
            let g = build_grid(r, n).unwrap();
            let v = g.n_pixels() as i64;
            let e = (r * n + (r - 1) * n + g.cap_rungs().count()) as i64;
            let f = g.n_quads() as i64;
            assert_eq!(v - e + f, 2);
            // every mesh edge borders exactly two quads
            let mut count = std::collections::HashMap::new();
            for q in 0..g.n_quads() {
                let c = g.quad_corners(q);
                for k in 0..4 {
                    let (a, b) = (c[k].min(c[(k + 1) % 4]), c[k].max(c[(k + 1) % 4]));
                    *count.entry((a, b)).or_insert(0) += 1;
                }
            }
            assert_eq!(count.len() as i64, e);
            assert!(count.values().all(|&k| k == 2));
        }
    }

    #[test]
    fn geodesics() {
        let np = [0.0, 0.0, 1.0];
        assert_eq!(geodesic_distance(np, np).unwrap(), 0.0);
        assert!((geodesic_distance(np, [0.0, 0.0, -1.0]).unwrap() - PI).abs() < 1e-15);
        assert!((geodesic_distance(np, [1.0, 0.0, 0.0]).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(geodesic_distance(np, [2.0, 0.0, 0.0]).is_err());
        assert!((arc_length(np, [1.0, 0.0, 0.0]) - PI / 2.0).abs() < 1e-15);
    }
}
