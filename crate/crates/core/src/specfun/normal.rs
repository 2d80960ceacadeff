//! Standard normal density, distribution and survival functions.
//!
//! `erfc` is evaluated with a positive-term series for `erf` below `x = 0.75`
//! and a Lentz continued fraction above it. The survival function is
//! computed directly in the upper tail so that `1 - Phi(u)` keeps full
//! relative precision for large `u`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_CUTOFF: f64 = 0.75;

/// `erf(x)` for small `x` via `erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`.
fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= 1e-17 * sum || n > 200.0 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Scaled complementary error function `e^{x^2} erfc(x)` for `x >= 0.75`.
fn erfcx_cf(x: f64) -> f64 {
    // erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (f * PI.sqrt())
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < SERIES_CUTOFF {
        1.0 - erf_series(x)
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

/// `e^{x^2} erfc(x)` for `x >= 0`; stays finite where `erfc` underflows.
pub(crate) fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == f64::INFINITY {
        return 0.0;
    }
    if x < SERIES_CUTOFF {
        (x * x).exp() * (1.0 - erf_series(x))
    } else {
        erfcx_cf(x)
    }
}

/// Standard normal density `phi(u) = e^{-u^2/2} / sqrt(2 pi)`.
pub fn normal_pdf(u: f64) -> f64 {
    if u.is_infinite() {
        return 0.0;
    }
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function `Phi(u)`; `Phi(-inf) = 0`, `Phi(+inf) = 1`.
pub fn normal_cdf(u: f64) -> f64 {
    if u <= 0.0 {
        0.5 * erfc(-u * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc(u * FRAC_1_SQRT_2)
    }
}

/// Survival function `1 - Phi(u)`, accurate in the upper tail.
pub fn normal_sf(u: f64) -> f64 {
    normal_cdf(-u)
}
