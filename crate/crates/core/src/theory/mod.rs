//! Closed-form predictions: Gaussian kinematic formula means, leading
//! variances of the Lipschitz-Killing curvatures, critical point counts, and
//! the `J0` power-integral constants.
//!
//! Means and variances of the curvatures are reported per `4 pi` and per
//! `16 pi^2`, matching [`crate::lkc::LkcEstimate`].

mod constants;
mod quad;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use constants::{
    all_constants, constant, constants_csv, cq_constant, cq_constant_with_tol, cq_limit, cq_limit_coarse,
    cq_two_over_q_check, defect_constant, defect_terms, defect_weight, j04_integral, j04_integral_with_tol,
    trispectrum_limit_constant, var_h4_prediction, var_trispectrum_prediction, ConstantRecord, CqGap,
    DefectConstant, DefectTerm, LimitMethod, CONSTANT_NAMES, CQ_TOL, FIT_LIMITS, J04_TOL, TRISPECTRUM_LOG_OFFSET,
};
pub use quad::integrate;

use crate::error::{Error, Result};
use crate::specfun::{hermite, normal_pdf, normal_sf, rho, Threshold};
use crate::synth::Multipole;

const FOUR_PI: f64 = 4.0 * PI;

/// Volume of the unit ball in `R^n`, `n <= 3`.
fn omega(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => unreachable!("dimension {n}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagCoefficient {
    pub i: u32,
    pub l: u32,
    pub value: f64,
}

/// `[i + l, l] = C(i + l, l) omega_{i+l} / (omega_i omega_l)`.
pub fn flag_coefficient(i: u32, l: u32) -> Result<FlagCoefficient> {
    if i + l > 3 {
        return Err(Error::domain("flag_coefficient", format!("i + l = {} exceeds 3", i + l)));
    }
    let binom = [[1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 3.0, 0.0], [1.0, 3.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]][i as usize]
        [l as usize];
    Ok(FlagCoefficient {
        i,
        l,
        value: binom * omega(i + l) / (omega(i) * omega(l)),
    })
}

fn check_k(k: u32) -> Result<()> {
    if k > 2 {
        return Err(Error::domain("lkc", format!("curvature index {k} not in 0, 1, 2")));
    }
    Ok(())
}

/// Lipschitz-Killing curvatures of the sphere: `L_0 = 2`, `L_1 = 0`, `L_2 = 4 pi`.
fn sphere_lkc(j: u32) -> f64 {
    [2.0, 0.0, FOUR_PI][j as usize]
}

/// Expected `L_k(A_u)`: raw and per `4 pi`.
///
/// ```
/// use sphgeom::synth::Multipole;
/// use sphgeom::specfun::Threshold;
/// let (_, norm) = sphgeom::theory::gkf_expected_lkc(1, Multipole::new(100).unwrap(), Threshold(0.0)).unwrap();
/// assert!((norm - 17.766).abs() < 1e-3);
/// ```
pub fn gkf_expected_lkc(k: u32, ell: Multipole, u: Threshold) -> Result<(f64, f64)> {
    check_k(k)?;
    let raw = if u.0 == f64::INFINITY {
        0.0
    } else if u.0 == f64::NEG_INFINITY {
        sphere_lkc(k)
    } else {
        let lambda = ell.lambda() / 2.0;
        let mut sum = 0.0;
        for l in 0..=(2 - k) {
            let flag = flag_coefficient(k, l)?.value;
            sum += flag * rho(l, u.0)? * lambda.powf(l as f64 / 2.0) * sphere_lkc(k + l);
        }
        sum
    };
    Ok((raw, raw / FOUR_PI))
}

/// Coefficient of `h_2 = int H_2(f)` in the second chaos of `L_k(A_u)`.
pub fn second_chaos_coefficient(k: u32, ell: Multipole, u: Threshold) -> Result<f64> {
    check_k(k)?;
    if !u.is_finite() {
        return Ok(0.0);
    }
    let lambda = ell.lambda() / 2.0;
    let e = (2 - k) as f64;
    Ok(0.5
        * flag_k(k)
        * lambda.powf(e / 2.0)
        * hermite(1, u.0)?
        * hermite(2 - k as i32, u.0)?
        * normal_pdf(u.0)
        * (2.0 * PI).powf(-e / 2.0))
}

// flag coefficient [2, 2 - k]
fn flag_k(k: u32) -> f64 {
    flag_coefficient(k, 2 - k).expect("k <= 2").value
}

/// `Var(h_{ell,2}) = 32 pi^2 / (2 ell + 1)`.
pub fn var_h2(ell: Multipole) -> f64 {
    32.0 * PI * PI / (2.0 * ell.ell as f64 + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "generic-u")]
    GenericU,
    #[serde(rename = "zero-u")]
    ZeroU,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::GenericU => "generic-u",
            Regime::ZeroU => "zero-u",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LkcPrediction {
    pub k: u32,
    pub ell: u32,
    pub u: Threshold,
    /// Mean per `4 pi`.
    pub mean_norm: f64,
    /// Variance per `16 pi^2`.
    pub var_norm: f64,
    pub regime: Regime,
    /// False when the variance is only an order-of-magnitude envelope.
    pub certified: bool,
}

impl LkcPrediction {
    pub fn std_norm(&self) -> f64 {
        self.var_norm.sqrt()
    }
}

/// Leading variance of `L_k(A_u)` per `16 pi^2`, with a flag telling whether
/// the constant is certified.
///
/// Away from `u = 0` this is the exact variance of the second-chaos
/// component. At `u = 0` that component vanishes for `k = 1, 2`, and the
/// fourth-chaos constants take over; for `k = 0` only the order
/// `ell^2 log ell` is known, so an envelope is returned.
pub fn lkc_variance_certified(k: u32, ell: Multipole, u: Threshold) -> Result<(f64, bool)> {
    check_k(k)?;
    if !u.is_finite() {
        return Ok((0.0, true));
    }
    let l = ell.ell as f64;
    if u.0 == 0.0 {
        return Ok(match k {
            2 => (0.0188 / (l * l), true),
            1 => ((l.ln() + TRISPECTRUM_LOG_OFFSET) / (128.0 * 16.0 * PI * PI), true),
            _ => (l * l * l.ln() / (16.0 * PI * PI), false),
        });
    }
    Ok((lkc_variance_chaos2(k, ell, u)?, true))
}

pub fn lkc_variance(k: u32, ell: Multipole, u: Threshold) -> Result<f64> {
    lkc_variance_certified(k, ell, u).map(|(v, _)| v)
}

/// Second-chaos variance per `16 pi^2`: `coefficient^2 Var(h_2) / 16 pi^2`.
/// Vanishes at `u = 0` for `k = 1, 2` and at `u in {0, +-1}` for `k = 0`.
pub fn lkc_variance_chaos2(k: u32, ell: Multipole, u: Threshold) -> Result<f64> {
    let c = second_chaos_coefficient(k, ell, u)?;
    Ok(c * c * var_h2(ell) / (16.0 * PI * PI))
}

pub fn lkc_prediction(k: u32, ell: Multipole, u: Threshold) -> Result<LkcPrediction> {
    let (_, mean_norm) = gkf_expected_lkc(k, ell, u)?;
    let (var_norm, certified) = lkc_variance_certified(k, ell, u)?;
    Ok(LkcPrediction {
        k,
        ell: ell.ell,
        u,
        mean_norm,
        var_norm,
        regime: if u.0 == 0.0 { Regime::ZeroU } else { Regime::GenericU },
        certified,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalClass {
    C,
    E,
    S,
}

impl std::str::FromStr for CriticalClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" | "critical" => Ok(CriticalClass::C),
            "e" | "extrema" => Ok(CriticalClass::E),
            "s" | "saddle" | "saddles" => Ok(CriticalClass::S),
            _ => Err(Error::Config(format!("unknown critical class '{s}' (c, e or s)"))),
        }
    }
}

impl fmt::Display for CriticalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticalClass::C => "c",
            CriticalClass::E => "e",
            CriticalClass::S => "s",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPrediction {
    pub class: CriticalClass,
    pub ell: u32,
    pub u: Threshold,
    pub mean: f64,
    pub var: f64,
}

/// Density of critical values, integrating to 1.
pub fn critical_density_c(t: f64) -> f64 {
    3f64.sqrt() / (8.0 * PI).sqrt() * (2.0 * (-t * t).exp() + t * t - 1.0) * (-t * t / 2.0).exp()
}

/// Density of saddle values, integrating to 1.
pub fn critical_density_s(t: f64) -> f64 {
    3f64.sqrt() / (2.0 * PI).sqrt() * (-1.5 * t * t).exp()
}

/// Density of extremum values, `2 pi_c - pi_s`, integrating to 1.
pub fn critical_density_e(t: f64) -> f64 {
    2.0 * critical_density_c(t) - critical_density_s(t)
}

/// Expected number of critical points of a class with value at least `u`.
///
/// Totals are `(2 / sqrt 3) ell (ell + 1)` for all critical points and half
/// that for saddles; extrema are the difference.
pub fn critical_mean(class: CriticalClass, ell: Multipole, u: Threshold) -> f64 {
    let lambda = ell.lambda();
    let c = || {
        if u.0 == f64::NEG_INFINITY {
            return 2.0 / 3f64.sqrt() * lambda;
        }
        if u.0 == f64::INFINITY {
            return 0.0;
        }
        // int_u^inf e^{-3t^2/2} dt = sqrt(2 pi / 3) P(Z >= sqrt 3 u)
        let g = (2.0 * PI / 3.0).sqrt() * normal_sf(3f64.sqrt() * u.0);
        2.0 / (8.0 * PI).sqrt() * lambda * (2.0 * g + u.0 * (-u.0 * u.0 / 2.0).exp())
    };
    let s = || lambda / 3f64.sqrt() * normal_sf(3f64.sqrt() * u.0);
    match class {
        CriticalClass::C => c(),
        CriticalClass::S => s(),
        CriticalClass::E => c() - s(),
    }
}

/// Leading variance of the count of a class above `u`.
pub fn critical_variance(class: CriticalClass, ell: Multipole, u: Threshold) -> f64 {
    let l = ell.ell as f64;
    if u.0 == f64::INFINITY {
        return 0.0;
    }
    if u.0 == f64::NEG_INFINITY {
        let base = l * l * l.ln() / (PI * PI);
        return match class {
            CriticalClass::C => base / 27.0,
            _ => base / 108.0,
        };
    }
    let u2 = u.0 * u.0;
    let shape = match class {
        CriticalClass::C => (2.0 + u2.exp() * (u2 - 1.0)).powi(2),
        CriticalClass::E => (1.0 + u2.exp() * (u2 - 1.0)).powi(2),
        CriticalClass::S => 1.0,
    };
    l.powi(3) / (8.0 * PI) * (-3.0 * u2).exp() * u2 * shape
}

pub fn critical_prediction(class: CriticalClass, ell: Multipole, u: Threshold) -> CriticalPrediction {
    CriticalPrediction {
        class,
        ell: ell.ell,
        u,
        mean: critical_mean(class, ell, u),
        var: critical_variance(class, ell, u),
    }
}
