//! Bessel function of the first kind of order zero.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

use crate::error::{Error, Result};

const SERIES_MAX: f64 = 8.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// `J0(x)` for `x >= 0`, accurate to about `1e-14` absolute.
///
/// Power series below 8, Miller backward recurrence up to 25 and the
/// Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("bessel_j0", format!("x = {x} is negative")));
    }
    Ok(j0(x))
}

pub(crate) fn j0(x: f64) -> f64 {
    if x < SERIES_MAX {
        j0_series(x)
    } else if x < ASYMPTOTIC_MIN {
        j0_miller(x)
    } else if x.is_finite() {
        j0_asymptotic(x)
    } else {
        0.0
    }
}

fn j0_series(x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn j0_miller(x: f64) -> f64 {
    // start well above x; J_n(x) is negligible there
    let mut n = (x as usize + 45) & !1;
    let (mut jp1, mut j) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    while n > 0 {
        let jm1 = 2.0 * n as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        n -= 1;
        if n % 2 == 0 && n > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
        }
    }
    // J0 + 2 sum J_{2k} = 1
    j / (norm + j)
}

fn j0_asymptotic(x: f64) -> f64 {
    // P ~ sum (-1)^k a_{2k} / x^{2k}, Q ~ sum (-1)^k a_{2k+1} / x^{2k+1}
    // with a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        if term.abs() > last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        let odd = (2 * k + 1) as f64;
        term *= -(odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) / SQRT_2;
    let sin_chi = (s - c) / SQRT_2;
    (FRAC_2_PI / x).sqrt() * (p * cos_chi - q * sin_chi)
}

/// k-th positive zero of `J0` (k >= 1): McMahon estimate refined by bisection.
pub fn bessel_j0_zero(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("bessel_j0_zero", "zeros are numbered from 1"));
    }
    let b = (k as f64 - 0.25) * PI;
    let guess = b + 1.0 / (8.0 * b) - 31.0 / (384.0 * b.powi(3));
    let (mut lo, mut hi) = (guess - 0.25, guess + 0.25);
    let mut flo = j0(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = j0(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
