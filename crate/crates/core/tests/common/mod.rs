//! Oracles shared by the integration targets.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use sphgeom::grid::GridSpec;
use sphgeom::lkc::{contour_segments, euler_characteristic};
use sphgeom::specfun::{assoc_legendre_norm, Threshold};
use sphgeom::synth::{simulate, FieldMap, HarmonicCoefficients, Multipole};

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

pub fn mesh_edges(g: &GridSpec) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for q in 0..g.n_quads() {
        let c = g.quad_corners(q);
        for k in 0..4 {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges
}

/// Components of the above set (`above = true`) or the below set.
pub fn components(map: &FieldMap, u: f64, above: bool, edges: &BTreeSet<(usize, usize)>) -> usize {
    let g = map.grid();
    let f = map.values();
    let side = |p: usize| (f[p] >= u) == above;
    let mut dsu = Dsu::new(f.len());
    for &(a, b) in edges {
        if side(a) && side(b) {
            dsu.union(a, b);
        }
    }
    for q in 0..g.n_quads() {
        let c = g.quad_corners(q);
        let v = c.map(|p| f[p]);
        let s = v.map(|x| x >= u);
        let saddle = s[0] == s[2] && s[1] == s[3] && s[0] != s[1];
        if !saddle {
            continue;
        }
        let joined_above = 0.25 * v.iter().sum::<f64>() >= u;
        if joined_above == above {
            // join the pair of corners on this side
            let (a, b) = if side(c[0]) { (c[0], c[2]) } else { (c[1], c[3]) };
            dsu.union(a, b);
        }
    }
    let mut roots = BTreeSet::new();
    for p in 0..f.len() {
        if side(p) {
            roots.insert(dsu.find(p));
        }
    }
    roots.len()
}

pub fn contour_loops(map: &FieldMap, u: f64) -> usize {
    let segs = contour_segments(map, Threshold(u));
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    for s in &segs {
        for e in s.edges {
            let next = ids.len();
            ids.entry(e).or_insert(next);
        }
    }
    // every crossing point is shared by exactly two segments
    let mut degree = vec![0usize; ids.len()];
    let mut dsu = Dsu::new(ids.len());
    for s in &segs {
        let (a, b) = (ids[&s.edges[0]], ids[&s.edges[1]]);
        degree[a] += 1;
        degree[b] += 1;
        dsu.union(a, b);
    }
    assert!(degree.iter().all(|&d| d == 2), "open contour");
    (0..ids.len()).map(|k| dsu.find(k)).collect::<BTreeSet<_>>().len()
}

pub fn random_cases() -> Vec<(FieldMap, f64)> {
    let g = Arc::new(GridSpec::new(ORACLE_RINGS, 2 * ORACLE_RINGS).unwrap());
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    (0..50)
        .map(|_| {
            let ell = 1 + (next() % 8) as u32;
            let seed = next();
            let u = ((next() >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0;
            (simulate(Multipole::new(ell).unwrap(), seed, &g).unwrap(), u)
        })
        .collect()
}

pub const ORACLE_RINGS: usize = 48;

/// Euler characteristic from connected components: `b0(A) - b1(A)`, with
/// `b1(A) = b0(complement) - 1` by Alexander duality on the sphere.
pub fn betti_chi(map: &FieldMap, u: f64, edges: &BTreeSet<(usize, usize)>) -> i64 {
    components(map, u, true, edges) as i64 - (components(map, u, false, edges) as i64 - 1)
}

/// Number of the 50 random cases whose Euler characteristic differs from
/// the Betti and the contour-loop oracles.
pub fn euler_mismatches() -> usize {
    let edges = mesh_edges(&GridSpec::new(ORACLE_RINGS, 2 * ORACLE_RINGS).unwrap());
    random_cases()
        .iter()
        .filter(|(map, u)| {
            let (chi, _) = euler_characteristic(map, Threshold(*u));
            let b0 = components(map, *u, true, &edges) as i64;
            chi != betti_chi(map, *u, &edges) || chi != 2 * b0 - contour_loops(map, *u) as i64
        })
        .count()
}

/// The field at one point by summing the harmonics directly.
pub fn direct_sum(alm: &HarmonicCoefficients, theta: f64, phi: f64) -> f64 {
    let l = alm.ell;
    let mut s = alm.a[0].re * assoc_legendre_norm(l, 0, theta).unwrap();
    for m in 1..=l {
        let y = Complex64::from_polar(assoc_legendre_norm(l, m as i32, theta).unwrap(), m as f64 * phi);
        s += 2.0 * (alm.a[m as usize] * y).re;
    }
    s
}

/// Largest relative disagreement between a synthesized map and direct
/// summation over `samples` pseudo-random pixels.
pub fn synthesis_error(ell: u32, rings: usize, seed: u64, samples: usize) -> f64 {
    let g = Arc::new(GridSpec::new(rings, 2 * rings).unwrap());
    let ell = Multipole::new(ell).unwrap();
    let map = simulate(ell, seed, &g).unwrap();
    let alm = sphgeom::synth::sample_alm(ell, seed);
    let mut state = 12345u64;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let p = (state >> 17) as usize % g.n_pixels();
        let id = g.pixel_id(p);
        let want = direct_sum(&alm, g.theta(id.ring), g.phi(id.col));
        worst = worst.max((map.values()[p] - want).abs() / want.abs().max(1e-2));
    }
    worst
}
