//! Gaussian random eigenfunctions of a single multipole and their synthesis
//! on a [`GridSpec`].

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::mapio::{self, MapFormat, MapHeader};
use crate::grid::GridSpec;
use crate::specfun::assoc_legendre_norm_row;

/// A multipole `ell >= 1` with eigenvalue `lambda = ell (ell + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multipole {
    pub ell: u32,
}

impl Multipole {
    pub fn new(ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Unsupported("ell = 0 gives a constant field".into()));
        }
        Ok(Multipole { ell })
    }

    pub fn lambda(self) -> f64 {
        let l = self.ell as f64;
        l * (l + 1.0)
    }
}

/// `a_{ell m}` for `m = 0..=ell`; negative orders follow from reality.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicCoefficients {
    pub ell: u32,
    pub a: Vec<Complex64>,
}

impl HarmonicCoefficients {
    pub fn zeros(ell: u32) -> Self {
        HarmonicCoefficients {
            ell,
            a: vec![Complex64::new(0.0, 0.0); ell as usize + 1],
        }
    }
}

/// Draw coefficients with `Var(a_{ell 0}) = 4 pi / (2 ell + 1)` so that the
/// field has unit variance. Each `(seed, ell, m)` has its own ChaCha stream,
/// so coefficients do not depend on evaluation order.
pub fn sample_alm(ell: Multipole, seed: u64) -> HarmonicCoefficients {
    let l = ell.ell;
    let sigma = (4.0 * std::f64::consts::PI / (2.0 * l as f64 + 1.0)).sqrt();
    let half = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let a = (0..=l)
        .map(|m| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(((l as u64) << 32) | m as u64);
            if m == 0 {
                Complex64::new(sigma * rng.sample::<f64, _>(StandardNormal), 0.0)
            } else {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(half * re, half * im)
            }
        })
        .collect();
    HarmonicCoefficients { ell: l, a }
}

/// How a map was brought to unit variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Unit variance in law, by construction of the coefficients.
    #[default]
    Ensemble,
    /// Per-map: weighted mean removed, weighted variance scaled to 1.
    Sample,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ensemble" => Ok(Normalization::Ensemble),
            "sample" => Ok(Normalization::Sample),
            _ => Err(Error::Config(format!("unknown normalization '{s}'"))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Ensemble => "ensemble",
            Normalization::Sample => "sample",
        })
    }
}

/// One realization sampled on a grid.
#[derive(Clone, Debug)]
pub struct FieldMap {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
    ell: u32,
    seed: u64,
    normalization: Normalization,
}

impl FieldMap {
    pub fn from_values(grid: Arc<GridSpec>, values: Vec<f64>, ell: u32, seed: u64) -> Result<Self> {
        if values.len() != grid.n_pixels() {
            return Err(Error::Shape {
                expected: grid.n_pixels(),
                got: values.len(),
            });
        }
        Ok(FieldMap {
            grid,
            values,
            ell,
            seed,
            normalization: Normalization::Ensemble,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Weighted mean and variance under the grid quadrature.
    pub fn weighted_moments(&self) -> (f64, f64) {
        let g = &*self.grid;
        let four_pi = 4.0 * std::f64::consts::PI;
        let rows = self.values.chunks_exact(g.n_phi());
        let mean = rows
            .clone()
            .enumerate()
            .map(|(i, r)| g.quad_weight(i) * r.iter().sum::<f64>())
            .sum::<f64>()
            / four_pi;
        let var = rows
            .enumerate()
            .map(|(i, r)| g.quad_weight(i) * r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
            .sum::<f64>()
            / four_pi;
        (mean, var)
    }

    pub fn header(&self) -> MapHeader {
        MapHeader {
            n_rings: self.grid.n_rings(),
            n_phi: self.grid.n_phi(),
            ell: self.ell,
            seed: self.seed,
        }
    }

    pub fn save(&self, path: &Path, format: MapFormat) -> Result<()> {
        mapio::write_map(path, &self.header(), &self.values, format)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (h, values, _) = mapio::read_map(path)?;
        let grid = Arc::new(GridSpec::new(h.n_rings, h.n_phi)?);
        FieldMap::from_values(grid, values, h.ell, h.seed)
    }
}

/// Cached Legendre table and FFT for repeated synthesis of one multipole on
/// one grid.
pub struct SynthesisPlan {
    grid: Arc<GridSpec>,
    ell: u32,
    // Pbar_{ell m}(cos theta_i) for the northern rings (and the equator ring
    // when n_rings is odd), row-major over m
    plm: Vec<f64>,
    // e^{i m phi_0}
    phase: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
}

impl SynthesisPlan {
    pub fn new(ell: Multipole, grid: Arc<GridSpec>) -> Result<Self> {
        let l = ell.ell;
        if grid.n_phi() <= 2 * l as usize {
            return Err(Error::Aliasing {
                n_phi: grid.n_phi(),
                ell: l,
            });
        }
        let rows = grid.n_rings().div_ceil(2);
        let width = l as usize + 1;
        let mut plm = vec![0.0; rows * width];
        plm.par_chunks_mut(width).enumerate().for_each(|(i, out)| {
            let row = assoc_legendre_norm_row(l, grid.cos_thetas()[i], grid.sin_thetas()[i]);
            out.copy_from_slice(&row);
        });
        let phi0 = grid.phi(0);
        let phase = (0..width)
            .map(|m| Complex64::from_polar(1.0, m as f64 * phi0))
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(grid.n_phi());
        Ok(SynthesisPlan {
            grid,
            ell: l,
            plm,
            phase,
            fft,
        })
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Evaluate `f = a_0 Pbar_0 + sum_m 2 Re[a_m Pbar_m e^{i m phi}]` on every
    /// ring. Mirror rings share one complex FFT.
    pub fn synthesize(&self, alm: &HarmonicCoefficients, seed: u64) -> Result<FieldMap> {
        if alm.ell != self.ell || alm.a.len() != self.ell as usize + 1 {
            return Err(Error::Shape {
                expected: self.ell as usize + 1,
                got: alm.a.len(),
            });
        }
        let g = &*self.grid;
        let (r, n) = (g.n_rings(), g.n_phi());
        let width = self.ell as usize + 1;
        let npairs = r / 2;
        let mut values = vec![0.0; r * n];
        let (north, rest) = values.split_at_mut(npairs * n);
        let (middle, south) = rest.split_at_mut((r % 2) * n);

        // c_m on ring i and its mirror; parity of Pbar_{ell m} is (-1)^{ell+m}
        let fill = |i: usize, spec: &mut [Complex64], mirror: bool| {
            spec.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            let p = &self.plm[i * width..(i + 1) * width];
            for m in 0..width {
                let c = alm.a[m] * self.phase[m] * p[m];
                let odd = (self.ell as usize + m) % 2 == 1;
                let (cn, cs) = if odd { (c, -c) } else { (c, c) };
                // north goes to the real part, south to the imaginary part
                let z = if mirror {
                    cn + Complex64::i() * cs
                } else {
                    cn
                };
                if m == 0 {
                    spec[0] += if mirror {
                        Complex64::new(cn.re, cs.re)
                    } else {
                        Complex64::new(cn.re, 0.0)
                    };
                } else {
                    spec[m] += z;
                    // conj of each real-signal spectrum, recombined
                    let zc = if mirror {
                        cn.conj() + Complex64::i() * cs.conj()
                    } else {
                        cn.conj()
                    };
                    spec[n - m] += zc;
                }
            }
        };

        let scratch_len = self.fft.get_inplace_scratch_len();
        north
            .par_chunks_mut(n)
            .zip(south.par_chunks_mut(n).rev())
            .enumerate()
            .for_each_init(
                || (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); scratch_len]),
                |(spec, scratch), (i, (nrow, srow))| {
                    fill(i, spec, true);
                    self.fft.process_with_scratch(spec, scratch);
                    for ((a, b), z) in nrow.iter_mut().zip(srow.iter_mut()).zip(spec.iter()) {
                        *a = z.re;
                        *b = z.im;
                    }
                },
            );
        if !middle.is_empty() {
            let mut spec = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
            fill(npairs, &mut spec, false);
            self.fft.process_with_scratch(&mut spec, &mut scratch);
            for (a, z) in middle.iter_mut().zip(&spec) {
                *a = z.re;
            }
        }
        Ok(FieldMap {
            grid: Arc::clone(&self.grid),
            values,
            ell: self.ell,
            seed,
            normalization: Normalization::Ensemble,
        })
    }
}

/// One-shot synthesis. Use [`SynthesisPlan`] when synthesizing many maps.
pub fn synthesize(alm: &HarmonicCoefficients, grid: &Arc<GridSpec>) -> Result<FieldMap> {
    let ell = Multipole::new(alm.ell)?;
    SynthesisPlan::new(ell, Arc::clone(grid))?.synthesize(alm, 0)
}

/// Sample and synthesize one realization.
pub fn simulate(ell: Multipole, seed: u64, grid: &Arc<GridSpec>) -> Result<FieldMap> {
    let plan = SynthesisPlan::new(ell, Arc::clone(grid))?;
    plan.synthesize(&sample_alm(ell, seed), seed)
}

/// Apply a normalization mode. Ensemble mode leaves values untouched.
pub fn normalize(mut map: FieldMap, mode: Normalization) -> Result<FieldMap> {
    match mode {
        Normalization::Ensemble => {}
        Normalization::Sample => {
            let (mean, var) = map.weighted_moments();
            let (lo, hi) = map.min_max();
            let scale = lo.abs().max(hi.abs());
            if !(var > (1e-12 * scale).powi(2)) {
                return Err(Error::DegenerateMap("zero weighted variance".into()));
            }
            let s = var.sqrt();
            map.values.iter_mut().for_each(|v| *v = (*v - mean) / s);
        }
    }
    map.normalization = mode;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{geodesic_distance, integrate};
    use crate::specfun::{assoc_legendre_norm, legendre_p};
    use std::f64::consts::PI;

    fn grid(ell: u32) -> Arc<GridSpec> {
        Arc::new(GridSpec::for_multipole(ell, 6).unwrap())
    }

    #[test]
    fn multipole_rules() {
        assert!(matches!(Multipole::new(0), Err(Error::Unsupported(_))));
        assert_eq!(Multipole::new(100).unwrap().lambda(), 10100.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let ell = Multipole::new(30).unwrap();
        let a = sample_alm(ell, 99);
        let b = sample_alm(ell, 99);
        assert_eq!(a, b);
        assert_eq!(a.a[0].im, 0.0);
        assert_ne!(a, sample_alm(ell, 98));
    }

    #[test]
    fn coefficient_variance() {
        let ell = Multipole::new(10).unwrap();
        let want = 4.0 * PI / 21.0;
        let draws = 10_000;
        for m in [0usize, 1, 5, 10] {
            let xs: Vec<f64> = (0..draws)
                .map(|s| sample_alm(ell, s as u64).a[m].norm_sqr())
                .collect();
            let mean = xs.iter().sum::<f64>() / draws as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            assert!((mean - want).abs() < 3.0 * se, "m = {m}: {mean} vs {want}");
        }
    }

    #[test]
    fn one_bit_seed_change_decorrelates() {
        let ell = Multipole::new(5).unwrap();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for s in 0..1000u64 {
            let seed = s.wrapping_mul(0x9e37_79b9_7f4a_7c15);
            xs.push(sample_alm(ell, seed).a[3].re);
            ys.push(sample_alm(ell, seed ^ 1).a[3].re);
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!((cov / (vx * vy).sqrt()).abs() < 0.05);
    }

    #[test]
    fn zero_and_zonal_maps() {
        let g = grid(7);
        let zero = synthesize(&HarmonicCoefficients::zeros(7), &g).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let mut alm = HarmonicCoefficients::zeros(7);
        alm.a[0] = Complex64::new(1.0, 0.0);
        let map = synthesize(&alm, &g).unwrap();
        let norm = (15.0 / (4.0 * PI)).sqrt();
        for p in (0..g.n_pixels()).step_by(37) {
            let t = g.theta(g.pixel_id(p).ring);
            let want = norm * legendre_p(7, t.cos()).unwrap();
            assert!((map.values()[p] - want).abs() < 1e-12);
        }
        // at the pole the zonal harmonic takes its peak value
        assert!((assoc_legendre_norm(7, 0, 0.0).unwrap() - norm).abs() < 1e-12);
    }

    #[test]
    fn aliasing_is_refused() {
        let g = Arc::new(GridSpec::new(20, 20).unwrap());
        let alm = HarmonicCoefficients::zeros(10);
        assert!(matches!(synthesize(&alm, &g), Err(Error::Aliasing { .. })));
    }

    fn direct_sum(alm: &HarmonicCoefficients, theta: f64, phi: f64) -> f64 {
        let l = alm.ell;
        let mut s = alm.a[0].re * assoc_legendre_norm(l, 0, theta).unwrap();
        for m in 1..=l {
            let y = Complex64::from_polar(assoc_legendre_norm(l, m as i32, theta).unwrap(), m as f64 * phi);
            s += 2.0 * (alm.a[m as usize] * y).re;
        }
        s
    }

    #[test]
    fn fft_synthesis_matches_direct_summation() {
        for (ell, rings) in [(50u32, 300usize), (13, 81)] {
            let g = Arc::new(GridSpec::new(rings, 2 * rings).unwrap());
            let alm = sample_alm(Multipole::new(ell).unwrap(), 5);
            let map = synthesize(&alm, &g).unwrap();
            let mut state = 12345u64;
            for _ in 0..100 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let p = (state >> 17) as usize % g.n_pixels();
                let id = g.pixel_id(p);
                let want = direct_sum(&alm, g.theta(id.ring), g.phi(id.col));
                let got = map.values()[p];
                assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-2), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn normalization_modes() {
        let g = grid(20);
        let map = simulate(Multipole::new(20).unwrap(), 3, &g).unwrap();
        let same = normalize(map.clone(), Normalization::Ensemble).unwrap();
        assert_eq!(same.values(), map.values());
        let s = normalize(map, Normalization::Sample).unwrap();
        let (mean, var) = s.weighted_moments();
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        assert_eq!(s.normalization(), Normalization::Sample);

        let flat = FieldMap::from_values(Arc::clone(&g), vec![2.0; g.n_pixels()], 20, 0).unwrap();
        assert!(matches!(normalize(flat, Normalization::Sample), Err(Error::DegenerateMap(_))));
    }

    #[test]
    fn sample_and_ensemble_modes_differ_by_the_sample_variance_spread() {
        // Sample mode rescales by 1/s with Var(s^2) = 2/(2 ell + 1), so the
        // per-pixel RMS difference is about sqrt(1/(2 (2 ell + 1))) = 0.0499.
        let ell = Multipole::new(100).unwrap();
        let g = grid(100);
        let plan = SynthesisPlan::new(ell, Arc::clone(&g)).unwrap();
        let reps = 40;
        let mut ms = 0.0;
        for seed in 0..reps {
            let map = plan.synthesize(&sample_alm(ell, seed), seed).unwrap();
            let s = normalize(map.clone(), Normalization::Sample).unwrap();
            let diff: Vec<f64> = s.values().iter().zip(map.values()).map(|(a, b)| (a - b).powi(2)).collect();
            ms += integrate(&diff, &g).unwrap() / (4.0 * PI);
        }
        let rms = (ms / reps as f64).sqrt();
        let want = (1.0 / (2.0 * 201.0f64)).sqrt();
        assert!((rms / want - 1.0).abs() < 0.25, "rms {rms} vs {want}");
    }

    #[test]
    fn covariance_is_legendre() {
        let ell = Multipole::new(10).unwrap();
        let g = grid(10);
        let plan = SynthesisPlan::new(ell, Arc::clone(&g)).unwrap();
        let n = 2000;
        let mut state = 777u64;
        let mut pick = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 17) as usize % g.n_pixels()
        };
        let pairs: Vec<(usize, usize)> = (0..20).map(|_| (pick(), pick())).collect();
        let maps: Vec<Vec<f64>> = (0..n)
            .map(|s| {
                let m = plan.synthesize(&sample_alm(ell, s as u64), s as u64).unwrap();
                pairs.iter().flat_map(|&(a, b)| [m.values()[a], m.values()[b]]).collect()
            })
            .collect();
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let prod: Vec<f64> = maps.iter().map(|v| v[2 * k] * v[2 * k + 1]).collect();
            let mean = prod.iter().sum::<f64>() / n as f64;
            let var = prod.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let d = geodesic_distance(g.unit_vector(a), g.unit_vector(b)).unwrap();
            let want = legendre_p(10, d.cos().clamp(-1.0, 1.0)).unwrap();
            assert!((mean - want).abs() < 3.5 * se, "pair {k}: {mean} vs {want} (se {se})");
        }
    }

    #[test]
    fn ring_variance_is_flat() {
        let ell = Multipole::new(8).unwrap();
        let g = Arc::new(GridSpec::new(16, 32).unwrap());
        let plan = SynthesisPlan::new(ell, Arc::clone(&g)).unwrap();
        let n = 800;
        let mut per_ring = vec![0.0; g.n_rings()];
        for s in 0..n {
            let m = plan.synthesize(&sample_alm(ell, s), s).unwrap();
            for (i, row) in m.values().chunks_exact(g.n_phi()).enumerate() {
                per_ring[i] += row[0] * row[0];
            }
        }
        // Var of a chi-square mean over n draws is 2/n
        let se = (2.0 / n as f64).sqrt();
        for v in per_ring {
            assert!((v / n as f64 - 1.0).abs() < 4.0 * se);
        }
    }

    // Discrete Laplace-Beltrami residual with centred second differences.
    fn laplace_residual(map: &FieldMap, ell: u32, skip: usize) -> f64 {
        let g = map.grid();
        let (r, n) = (g.n_rings(), g.n_phi());
        let dt = PI / r as f64;
        let dp = 2.0 * PI / n as f64;
        let f = map.values();
        let lam = (ell * (ell + 1)) as f64;
        let (mut num, mut den) = (0.0, 0.0);
        let at = |i: usize, j: usize| f[i * n + (j % n)];
        for i in skip..r - skip {
            let t = g.theta(i);
            let (s, c) = t.sin_cos();
            for j in 0..n {
                let jm = j + n;
                // fourth-order accurate stencils for the second and first derivatives
                let ftt = (-at(i - 2, j) + 16.0 * at(i - 1, j) - 30.0 * at(i, j) + 16.0 * at(i + 1, j)
                    - at(i + 2, j))
                    / (12.0 * dt * dt);
                let ft = (at(i - 2, j) - 8.0 * at(i - 1, j) + 8.0 * at(i + 1, j) - at(i + 2, j)) / (12.0 * dt);
                let fpp = (-at(i, jm - 2) + 16.0 * at(i, jm - 1) - 30.0 * at(i, j) + 16.0 * at(i, j + 1)
                    - at(i, j + 2))
                    / (12.0 * dp * dp);
                let lap = ftt + c / s * ft + fpp / (s * s);
                let w = g.quad_weight(i);
                num += w * (lap + lam * at(i, j)).powi(2);
                den += w * (lam * at(i, j)).powi(2);
            }
        }
        (num / den).sqrt()
    }

    #[test]
    fn maps_are_laplacian_eigenfunctions() {
        for ell in [10u32, 50] {
            let g = grid(ell);
            let map = simulate(Multipole::new(ell).unwrap(), 21, &g).unwrap();
            let res = laplace_residual(&map, ell, 2);
            assert!(res < 1e-2, "ell = {ell}: residual {res}");
        }
    }

    #[test]
    fn save_and_load() {
        let g = grid(12);
        let map = simulate(Multipole::new(12).unwrap(), 4, &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        map.save(&p, MapFormat::Csv).unwrap();
        let back = FieldMap::load(&p).unwrap();
        assert_eq!(back.values(), map.values());
        assert_eq!((back.ell(), back.seed()), (12, 4));
    }
}
