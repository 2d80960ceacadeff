//! Hermite, Legendre and normalized associated Legendre functions.

use std::f64::consts::PI;

use super::normal::{erfcx, normal_sf};
use crate::error::{Error, Result};

/// Probabilists' Hermite polynomial `H_k(u)`: `H_0 = 1`, `H_1 = u`, `H_2 = u^2 - 1`, ...
///
/// `k = -1` is the extended member `sqrt(2 pi) (1 - Phi(u)) e^{u^2/2}`, which
/// makes `rho_0(u) = 1 - Phi(u)` fit the same formula as the other `rho_l`.
pub fn hermite(k: i32, u: f64) -> Result<f64> {
    if k < -1 {
        return Err(Error::InvalidOrder(k));
    }
    if !u.is_finite() {
        return Err(Error::domain("hermite", format!("u = {u} is not finite")));
    }
    Ok(hermite_unchecked(k, u))
}

pub(crate) fn hermite_unchecked(k: i32, u: f64) -> f64 {
    match k {
        -1 => hermite_minus_one(u),
        0 => 1.0,
        1 => u,
        _ => {
            let (mut prev, mut cur) = (1.0, u);
            for j in 1..k {
                let next = u * cur - j as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn hermite_minus_one(u: f64) -> f64 {
    let sqrt_2pi = (2.0 * PI).sqrt();
    if u >= 0.0 {
        // (1 - Phi(u)) e^{u^2/2} = erfcx(u / sqrt 2) / 2
        sqrt_2pi * 0.5 * erfcx(u * std::f64::consts::FRAC_1_SQRT_2)
    } else {
        sqrt_2pi * normal_sf(u) * (0.5 * u * u).exp()
    }
}

/// `rho_l(u) = (2 pi)^{-(l+1)/2} H_{l-1}(u) e^{-u^2/2}`.
///
/// Infinite thresholds are accepted: `rho_0(-inf) = 1`, everything else
/// vanishes at `+-inf`.
pub fn rho(l: u32, u: f64) -> Result<f64> {
    if u.is_nan() {
        return Err(Error::domain("rho", "u is NaN"));
    }
    if l == 0 {
        return Ok(normal_sf(u));
    }
    if u.is_infinite() {
        return Ok(0.0);
    }
    let k = l as i32 - 1;
    Ok((2.0 * PI).powf(-(l as f64 + 1.0) / 2.0) * hermite_unchecked(k, u) * (-0.5 * u * u).exp())
}

/// Legendre polynomial `P_ell(t)` by upward recurrence; `P_ell(1) = 1` exactly.
pub fn legendre_p(ell: u32, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::domain("legendre_p", format!("|t| > 1 (t = {t})")));
    }
    Ok(legendre_unchecked(ell, t))
}

pub(crate) fn legendre_unchecked(ell: u32, t: f64) -> f64 {
    if t == 1.0 {
        return 1.0;
    }
    if ell == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, t);
    for k in 1..ell {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

// Values are carried as `mantissa * 2^(600 * exponent)` so that the sectoral
// seed `sin^m(theta)` cannot underflow before the recurrence lifts it.
const SCALE_DOWN: f64 = 2.409_919_865_102_884_4e-181; // 2^-600
const SCALE_UP: f64 = 4.149_515_568_880_993e180; // 2^600

fn unscale(mantissa: f64, exponent: i32) -> f64 {
    if exponent == 0 || mantissa == 0.0 {
        return mantissa;
    }
    let mut v = mantissa;
    let mut e = exponent;
    while e < 0 && v != 0.0 {
        v *= SCALE_DOWN;
        e += 1;
    }
    while e > 0 {
        v *= SCALE_UP;
        e -= 1;
    }
    v
}

/// Fully normalized associated Legendre function `Pbar_{ell m}(cos theta)`.
///
/// Normalized so that `Y_{ell m}(theta, phi) = Pbar_{ell m}(cos theta) e^{i m phi}`
/// has unit L2 norm on the sphere. No Condon-Shortley phase is applied.
pub fn assoc_legendre_norm(ell: u32, m: i32, theta: f64) -> Result<f64> {
    if m < 0 || m as u32 > ell {
        return Err(Error::domain(
            "assoc_legendre_norm",
            format!("m = {m} outside 0..={ell}"),
        ));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(
            "assoc_legendre_norm",
            format!("theta = {theta} outside [0, pi]"),
        ));
    }
    Ok(plm_scaled(ell, m as u32, theta.cos(), theta.sin()))
}

/// Seed `Pbar_{mm}` in scaled form.
fn sectoral(m: u32, sin_t: f64) -> (f64, i32) {
    let mut mant = 1.0 / (4.0 * PI).sqrt();
    let mut exp = 0;
    for k in 1..=m {
        let kf = k as f64;
        mant *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_t;
        if mant.abs() < SCALE_DOWN && mant != 0.0 {
            mant *= SCALE_UP;
            exp -= 1;
        }
    }
    (mant, exp)
}

fn plm_scaled(ell: u32, m: u32, cos_t: f64, sin_t: f64) -> f64 {
    let (mut p_prev, exp0) = sectoral(m, sin_t);
    let mut exp = exp0;
    if ell == m {
        return unscale(p_prev, exp);
    }
    let mf = m as f64;
    let mut p_cur = (2.0 * mf + 3.0).sqrt() * cos_t * p_prev;
    for l in (m + 2)..=ell {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (cos_t * p_cur - b * p_prev);
        p_prev = p_cur;
        p_cur = next;
        if exp < 0 && p_cur.abs() > 1.0 {
            p_prev *= SCALE_DOWN;
            p_cur *= SCALE_DOWN;
            exp += 1;
        }
    }
    unscale(p_cur, exp)
}

/// `Pbar_{ell m}(cos theta)` for every `m = 0..=ell` at one colatitude.
pub fn assoc_legendre_norm_row(ell: u32, cos_t: f64, sin_t: f64) -> Vec<f64> {
    (0..=ell).map(|m| plm_scaled(ell, m, cos_t, sin_t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(1, 0.7).unwrap(), 0.7);
        assert_eq!(hermite(2, 1.0).unwrap(), 0.0);
        assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
        assert!(matches!(hermite(-2, 0.0), Err(Error::InvalidOrder(-2))));
    }

    #[test]
    fn hermite_minus_one_branches_agree() {
        let direct = |u: f64| (2.0 * PI).sqrt() * normal_sf(u) * (0.5 * u * u).exp();
        for &u in &[0.0, 0.5, 2.0, 4.0] {
            let v = hermite(-1, u).unwrap();
            assert!((v / direct(u) - 1.0).abs() < 1e-12, "u = {u}");
        }
        // large u: H_{-1}(u) ~ 1/u
        let v = hermite(-1, 40.0).unwrap();
        assert!((v * 40.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rho_examples() {
        for &u in &[-2.0, 0.0, 0.3, 1.7] {
            assert!((rho(0, u).unwrap() - normal_sf(u)).abs() < 1e-15);
        }
        assert!((rho(1, 0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(rho(2, 0.0).unwrap(), 0.0);
        assert_eq!(rho(0, f64::NEG_INFINITY).unwrap(), 1.0);
        assert_eq!(rho(2, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn legendre_examples() {
        for ell in [0, 1, 7, 100, 900] {
            assert_eq!(legendre_p(ell, 1.0).unwrap(), 1.0);
        }
        assert!((legendre_p(2, 0.0).unwrap() + 0.5).abs() < 1e-16);
        assert!(legendre_p(3, 1.0 + 1e-9).is_err());
    }

    #[test]
    fn assoc_legendre_examples() {
        let y00 = 1.0 / (4.0 * PI).sqrt();
        for theta in [0.0, 0.4, PI] {
            assert!((assoc_legendre_norm(0, 0, theta).unwrap() - y00).abs() < 1e-16);
        }
        for ell in [1u32, 10, 150] {
            let expect = ((2.0 * ell as f64 + 1.0) / (4.0 * PI)).sqrt();
            let got = assoc_legendre_norm(ell, 0, 0.0).unwrap();
            assert!((got / expect - 1.0).abs() < 1e-13);
        }
        assert!(assoc_legendre_norm(3, 4, 0.1).is_err());
        assert!(assoc_legendre_norm(3, -1, 0.1).is_err());
    }

    #[test]
    fn deep_sectoral_values_do_not_underflow_prematurely() {
        // Pbar_{2000,1000} near the pole is astronomically small but the
        // recurrence must still reach the O(1) region near the equator.
        let v = assoc_legendre_norm(2000, 1000, PI / 2.0 - 0.01).unwrap();
        assert!(v.is_finite() && v.abs() > 1e-6);
        let row = assoc_legendre_norm_row(2000, (0.2f64).cos(), (0.2f64).sin());
        assert_eq!(row.len(), 2001);
        assert!(row.iter().all(|x| x.is_finite()));
        assert!(row[0].abs() > 1e-3);
    }

    use crate::specfun::dd::Dd;
    use proptest::prelude::*;

    fn legendre_dd(ell: u32, t: f64) -> f64 {
        let t = Dd::new(t);
        let (mut prev, mut cur) = (Dd::new(1.0), t);
        for k in 1..ell {
            let kf = Dd::new(k as f64);
            let next = (Dd::new(2.0 * k as f64 + 1.0) * t * cur - kf * prev) / Dd::new(k as f64 + 1.0);
            prev = cur;
            cur = next;
        }
        cur.to_f64()
    }

    fn plm_dd(ell: u32, m: u32, cos_t: f64, sin_t: f64) -> f64 {
        // no rescaling needed at the orders used here
        let (c, s) = (Dd::new(cos_t), Dd::new(sin_t));
        let mut pmm = Dd::new(1.0) / (Dd::new(4.0 * PI)).sqrt();
        for k in 1..=m {
            let kf = k as f64;
            pmm = pmm * (Dd::new(2.0 * kf + 1.0) / Dd::new(2.0 * kf)).sqrt() * s;
        }
        let mf = m as f64;
        let mut prev = pmm;
        let mut cur = Dd::new(2.0 * mf + 3.0).sqrt() * c * pmm;
        for l in (m + 2)..=ell {
            let lf = l as f64;
            let a = (Dd::new(4.0 * lf * lf - 1.0) / Dd::new(lf * lf - mf * mf)).sqrt();
            let b = (Dd::new((lf - 1.0) * (lf - 1.0) - mf * mf)
                / Dd::new(4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
            .sqrt();
            let next = a * (c * cur - b * prev);
            prev = cur;
            cur = next;
        }
        cur.to_f64()
    }

    #[test]
    fn legendre_100_against_extended_precision() {
        let want = legendre_dd(100, 0.5);
        assert!((legendre_p(100, 0.5).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn assoc_legendre_200_150_against_extended_precision() {
        let theta = 1.0f64;
        let want = plm_dd(200, 150, theta.cos(), theta.sin());
        let got = assoc_legendre_norm(200, 150, theta).unwrap();
        assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn addition_theorem() {
        // sum_m |Y_lm|^2 = (2l+1)/(4 pi), with m and -m both counted
        let mut rng_state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let theta = PI * next();
            for ell in [1u32, 7, 23, 50] {
                let row = assoc_legendre_norm_row(ell, theta.cos(), theta.sin());
                let s: f64 = row[0] * row[0] + 2.0 * row[1..].iter().map(|p| p * p).sum::<f64>();
                let want = (2.0 * ell as f64 + 1.0) / (4.0 * PI);
                assert!((s - want).abs() < 1e-10 * want.max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn hermite_recurrence(u in -5.0f64..5.0, k in 1i32..20) {
            let hp = hermite(k + 1, u).unwrap();
            let h = hermite(k, u).unwrap();
            let hm = hermite(k - 1, u).unwrap();
            let scale = hp.abs().max((u * h).abs()).max((k as f64 * hm).abs()).max(1.0);
            prop_assert!((hp - u * h + k as f64 * hm).abs() <= 1e-9 * scale);
        }

        #[test]
        fn legendre_bounded(ell in 0u32..=1000, t in -1.0f64..=1.0) {
            prop_assert!(legendre_p(ell, t).unwrap().abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn cdf_derivative_is_pdf(u in -6.0f64..6.0) {
            use crate::specfun::{normal_cdf, normal_pdf};
            let h = 1e-5;
            let d = (normal_cdf(u + h) - normal_cdf(u - h)) / (2.0 * h);
            prop_assert!((d - normal_pdf(u)).abs() < 1e-6);
        }
    }
}
