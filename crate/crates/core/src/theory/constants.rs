//! Integrals of powers of `J0` and the constants built from them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::quad::integrate;
use crate::error::{Error, Result};
use crate::specfun::{bessel_j0_zero, cosint_ci, j0, sinint_si};

/// Default absolute tolerance for `C_q` integrals.
pub const CQ_TOL: f64 = 1e-6;
/// Default absolute tolerance for `int J0^4 psi`.
pub const J04_TOL: f64 = 1e-5;
/// `log ell` offset in the trispectrum variance, `0.297 * 2 pi^2 / 3`.
pub const TRISPECTRUM_LOG_OFFSET: f64 = 1.9542;

const CACHED_ZEROS: usize = 2048;

fn zeros() -> &'static [f64] {
    static Z: OnceLock<Vec<f64>> = OnceLock::new();
    Z.get_or_init(|| {
        (1..=CACHED_ZEROS as u32)
            .map(|k| bessel_j0_zero(k).expect("k >= 1"))
            .collect()
    })
}

fn zero(k: usize) -> f64 {
    // k is 1-based
    match zeros().get(k - 1) {
        Some(&z) => z,
        None => bessel_j0_zero(k as u32).expect("k >= 1"),
    }
}

/// `int_a^b psi J0(psi)^q` on a panel free of sign changes.
fn piece(q: u32, a: f64, b: f64, tol: f64) -> f64 {
    integrate(|x| x * j0(x).powi(q as i32), a, b, tol)
}

/// `int_0^L psi J0(psi)^q`, split at the zeros of `J0`.
fn power_integral(q: u32, upper: f64, tol: f64) -> f64 {
    let n_pieces = (upper / PI).ceil() + 1.0;
    let per = tol / n_pieces;
    let mut sum = 0.0;
    let mut a = 0.0;
    let mut k = 1;
    while a < upper {
        let b = zero(k).min(upper);
        sum += piece(q, a, b, per);
        a = b;
        k += 1;
    }
    sum
}

/// `S_k = int_0^{z_k} psi J0^q` for the first `n` zeros `z_k`.
fn partial_sums_at_zeros(q: u32, n: usize, tol: f64) -> Vec<f64> {
    let per = tol / n as f64;
    let mut out = Vec::with_capacity(n);
    let (mut a, mut s) = (0.0, 0.0);
    for k in 1..=n {
        let b = zero(k);
        s += piece(q, a, b, per);
        out.push(s);
        a = b;
    }
    out
}

fn check_order(q: u32) -> Result<()> {
    match q {
        0 | 1 | 2 | 4 => Err(Error::domain(
            "cq_constant",
            format!("q = {q}: the integral diverges or belongs to a different variance order"),
        )),
        _ => Ok(()),
    }
}

/// `C_q(L) = int_0^L J0(psi)^q psi dpsi` for `q = 3` or `q >= 5`.
pub fn cq_constant(q: u32, upper: f64) -> Result<f64> {
    cq_constant_with_tol(q, upper, CQ_TOL)
}

pub fn cq_constant_with_tol(q: u32, upper: f64, tol: f64) -> Result<f64> {
    check_order(q)?;
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::domain("cq_constant", format!("upper limit {upper} must be positive")));
    }
    Ok(power_integral(q, upper, tol))
}

// Tail of the non-oscillating part of the asymptotic integrand, even q only.
fn even_tail(q: u32, upper: f64) -> f64 {
    if q % 2 == 1 {
        return 0.0;
    }
    let half = q as f64 / 2.0;
    let mut mean_cos = 1.0; // binom(q, q/2) / 2^q
    for j in 1..=q / 2 {
        mean_cos *= (q / 2 + j) as f64 / j as f64 / 4.0;
    }
    (2.0 / PI).powf(half) * mean_cos * upper.powf(2.0 - half) / (half - 2.0)
}

const LIMIT_ZEROS: usize = 160;
const LIMIT_LEVELS: usize = 14;

fn extrapolate(q: u32, n: usize) -> f64 {
    let sums = partial_sums_at_zeros(q, n, CQ_TOL * 1e-3);
    let start = n - LIMIT_LEVELS - 1;
    let mut row: Vec<f64> = (start..n).map(|k| sums[k] + even_tail(q, zero(k + 1))).collect();
    // repeated averaging cancels the alternating tail
    while row.len() > 1 {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    row[0]
}

/// `C_q = int_0^inf J0^q psi`, from partial integrals at the zeros of `J0`
/// accelerated by repeated averaging. Needed for `q = 3`, where the
/// truncated integral oscillates with amplitude `~ L^{-1/2}`.
pub fn cq_limit(q: u32) -> Result<f64> {
    check_order(q)?;
    const SLOTS: usize = 64;
    static CACHE: [OnceLock<f64>; SLOTS] = [const { OnceLock::new() }; SLOTS];
    let compute = || extrapolate(q, LIMIT_ZEROS);
    Ok(match CACHE.get(q as usize) {
        Some(cell) => *cell.get_or_init(compute),
        None => compute(),
    })
}

/// Uncached limit with fewer zeros; the difference to [`cq_limit`] bounds
/// the extrapolation error.
pub fn cq_limit_coarse(q: u32) -> Result<f64> {
    check_order(q)?;
    Ok(extrapolate(q, LIMIT_ZEROS / 2))
}

/// `a_k = (2k)! / (4^k (k!)^2 (2k + 1))`.
pub fn defect_weight(k: u32) -> f64 {
    let mut c = 1.0;
    for j in 1..=k {
        c *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    c / (2 * k + 1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectConstant {
    /// `sum_{k <= k_max} a_k C_{2k+1}`.
    pub sum: f64,
    /// `32 pi * sum`.
    pub constant: f64,
    /// Running sums, one per `k`.
    pub partial_sums: Vec<f64>,
}

/// Leading constant of the defect variance, truncated at `k_max`.
pub fn defect_constant(k_max: u32) -> Result<DefectConstant> {
    if k_max == 0 {
        return Err(Error::domain("defect_constant", "k_max must be at least 1"));
    }
    let mut partial_sums = Vec::with_capacity(k_max as usize);
    let mut sum = 0.0;
    for k in 1..=k_max {
        sum += defect_weight(k) * cq_limit(2 * k + 1)?;
        partial_sums.push(sum);
    }
    Ok(DefectConstant {
        sum,
        constant: 32.0 * PI * sum,
        partial_sums,
    })
}

/// `int_0^L J0(psi)^4 psi dpsi`.
pub fn j04_integral(upper: f64) -> Result<f64> {
    j04_integral_with_tol(upper, J04_TOL)
}

pub fn j04_integral_with_tol(upper: f64, tol: f64) -> Result<f64> {
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::domain("j04_integral", format!("upper limit {upper} must be positive")));
    }
    Ok(power_integral(4, upper, tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitMethod {
    Quadrature,
    Semianalytic,
}

impl std::str::FromStr for LimitMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(LimitMethod::Quadrature),
            "semianalytic" | "semi-analytic" => Ok(LimitMethod::Semianalytic),
            _ => Err(Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

const LOG_SLOPE: f64 = 3.0 / (2.0 * PI * PI);

/// Upper limits used by the quadrature fit.
pub const FIT_LIMITS: [f64; 10] = [500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0, 4000.0, 4500.0, 5000.0];

fn quadrature_limit() -> f64 {
    // one pass over [0, 5000], recording the running integral at each limit
    let tol = J04_TOL * 0.1 / 1600.0;
    let mut ys = Vec::with_capacity(FIT_LIMITS.len());
    let (mut a, mut s, mut k) = (0.0, 0.0, 1);
    for &l in &FIT_LIMITS {
        while a < l {
            let b = zero(k).min(l);
            s += piece(4, a, b, tol);
            if b == zero(k) {
                k += 1;
            }
            a = b;
        }
        ys.push(s - LOG_SLOPE * (l - 0.5).ln());
    }
    // least squares for y = c + b / L
    let n = ys.len() as f64;
    let xs: Vec<f64> = FIT_LIMITS.iter().map(|l| 1.0 / l).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    my - sxy / sxx * mx
}

fn semianalytic_limit() -> f64 {
    let pi2 = PI * PI;
    power_integral(4, 10.0, 1e-12) - LOG_SLOPE * 10f64.ln() + cosint_ci(40.0).expect("positive") / (2.0 * pi2)
        - 2.0 / pi2 * sinint_si(20.0).expect("finite")
        + 1.0 / PI
}

/// `lim_L (int_0^L J0^4 psi - (3 / 2 pi^2) log L)`.
pub fn trispectrum_limit_constant(method: LimitMethod) -> f64 {
    static QUAD: OnceLock<f64> = OnceLock::new();
    static SEMI: OnceLock<f64> = OnceLock::new();
    match method {
        LimitMethod::Quadrature => *QUAD.get_or_init(quadrature_limit),
        LimitMethod::Semianalytic => *SEMI.get_or_init(semianalytic_limit),
    }
}

/// Variance of `h_{ell,4}`: `576 (log ell + 1.9542) / ell^2`.
pub fn var_h4_prediction(ell: u32) -> Result<f64> {
    let l = check_ell(ell)?;
    Ok(576.0 * (l.ln() + TRISPECTRUM_LOG_OFFSET) / (l * l))
}

/// Variance of the sample trispectrum: `(log ell + 1.9542) / 32`.
pub fn var_trispectrum_prediction(ell: u32) -> Result<f64> {
    let l = check_ell(ell)?;
    Ok((l.ln() + TRISPECTRUM_LOG_OFFSET) / 32.0)
}

fn check_ell(ell: u32) -> Result<f64> {
    if ell < 2 {
        return Err(Error::domain("trispectrum variance", format!("ell = {ell}, need ell >= 2")));
    }
    Ok(ell as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqGap {
    pub q: u32,
    pub cq: f64,
    pub two_over_q: f64,
    pub relative_gap: f64,
}

/// `C_q` against its large-`q` approximation `2 / q`.
pub fn cq_two_over_q_check(qs: &[u32]) -> Result<Vec<CqGap>> {
    qs.iter()
        .map(|&q| {
            if q < 5 {
                return Err(Error::domain("cq_two_over_q_check", format!("q = {q}, need q >= 5")));
            }
            let cq = cq_limit(q)?;
            let two_over_q = 2.0 / q as f64;
            Ok(CqGap {
                q,
                cq,
                two_over_q,
                relative_gap: (cq - two_over_q).abs() / two_over_q,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectTerm {
    pub k: u32,
    pub term: f64,
    /// `1 / (2 sqrt(pi) k^{5/2})`.
    pub stirling: f64,
}

/// Terms `a_k C_{2k+1}` of the defect constant next to their Stirling form.
pub fn defect_terms(k_max: u32) -> Result<Vec<DefectTerm>> {
    (1..=k_max)
        .map(|k| {
            Ok(DefectTerm {
                k,
                term: defect_weight(k) * cq_limit(2 * k + 1)?,
                stirling: 1.0 / (2.0 * PI.sqrt() * (k as f64).powf(2.5)),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRecord {
    pub name: String,
    pub value: f64,
    pub method: String,
    pub tolerance: f64,
}

/// Names accepted by [`constant`].
pub const CONSTANT_NAMES: [&str; 14] = [
    "c3",
    "c5",
    "c10",
    "c25",
    "defect-term1",
    "defect-term2",
    "defect-sum",
    "defect-constant",
    "j04-500",
    "j04-1000",
    "j04-2000",
    "trispectrum-quadrature",
    "trispectrum-semianalytic",
    "log-offset",
];

/// One named constant. `cN` is `C_N` over `[0, L]` with the tabulated upper
/// limit (`c3` uses the limit `L -> inf`). `tol` overrides the quadrature
/// tolerance where one applies.
pub fn constant(name: &str, tol: Option<f64>) -> Result<ConstantRecord> {
    let rec = |value: f64, method: &str, tolerance: f64| ConstantRecord {
        name: name.to_string(),
        value,
        method: method.to_string(),
        tolerance,
    };
    let cq_tol = tol.unwrap_or(CQ_TOL);
    let j_tol = tol.unwrap_or(J04_TOL);
    Ok(match name {
        "c3" => rec(cq_limit(3)?, "averaged partial integrals at J0 zeros", 1e-6),
        "c5" => rec(cq_constant_with_tol(5, 200.0, cq_tol)?, "gauss-kronrod on [0, 200]", cq_tol),
        "c10" => rec(cq_constant_with_tol(10, 100.0, cq_tol)?, "gauss-kronrod on [0, 100]", cq_tol),
        "c25" => rec(cq_constant_with_tol(25, 100.0, cq_tol)?, "gauss-kronrod on [0, 100]", cq_tol),
        "defect-term1" => rec(defect_constant(1)?.sum, "a_1 C_3", 1e-6),
        "defect-term2" => rec(defect_constant(2)?.sum, "a_1 C_3 + a_2 C_5", 1e-6),
        "defect-sum" => rec(defect_constant(20)?.sum, "sum_{k<=20} a_k C_{2k+1}", 1e-6),
        "defect-constant" => rec(defect_constant(20)?.constant, "32 pi sum_{k<=20} a_k C_{2k+1}", 1e-4),
        "j04-500" => rec(j04_integral_with_tol(500.0, j_tol)?, "gauss-kronrod on [0, 500]", j_tol),
        "j04-1000" => rec(j04_integral_with_tol(1000.0, j_tol)?, "gauss-kronrod on [0, 1000]", j_tol),
        "j04-2000" => rec(j04_integral_with_tol(2000.0, j_tol)?, "gauss-kronrod on [0, 2000]", j_tol),
        "trispectrum-quadrature" => rec(
            trispectrum_limit_constant(LimitMethod::Quadrature),
            "fit c + b/L over L = 500..5000",
            5e-3,
        ),
        "trispectrum-semianalytic" => rec(
            trispectrum_limit_constant(LimitMethod::Semianalytic),
            "quadrature on [0, 10] plus asymptotic tail",
            2e-3,
        ),
        "log-offset" => rec(TRISPECTRUM_LOG_OFFSET, "0.297 * 2 pi^2 / 3", 0.0),
        _ => {
            return Err(Error::Config(format!(
                "unknown constant '{name}' (known: {})",
                CONSTANT_NAMES.join(", ")
            )))
        }
    })
}

/// Every named constant, in a fixed order.
pub fn all_constants(tol: Option<f64>) -> Result<Vec<ConstantRecord>> {
    CONSTANT_NAMES.iter().map(|n| constant(n, tol)).collect()
}

pub fn constants_csv(records: &[ConstantRecord]) -> String {
    let mut out = String::from("name,value,method,tolerance\n");
    for r in records {
        out.push_str(&format!("{},{:.6},\"{}\",{:e}\n", r.name, r.value, r.method, r.tolerance));
    }
    out
}
