//! Scalar special functions: normal law, Hermite and Legendre families,
//! Bessel `J0`, incomplete gamma and the sine and cosine integrals.

mod bessel;
mod gamma;
mod normal;
mod poly;

#[cfg(test)]
pub(crate) mod dd;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bessel::{bessel_j0, bessel_j0_zero};
pub use gamma::{cosint_ci, ln_gamma, sinint_si, upper_incomplete_gamma};
pub use normal::{erfc, normal_cdf, normal_pdf, normal_sf};
pub use poly::{assoc_legendre_norm, assoc_legendre_norm_row, hermite, legendre_p, rho};

pub(crate) use bessel::j0;
pub(crate) use poly::hermite_unchecked;

/// A field level `u`. `-inf` and `+inf` are allowed as sentinels.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Threshold(pub f64);

impl Threshold {
    pub const NEG_INFINITY: Threshold = Threshold(f64::NEG_INFINITY);
    pub const POS_INFINITY: Threshold = Threshold(f64::INFINITY);

    pub fn new(u: f64) -> crate::Result<Self> {
        if u.is_nan() {
            return Err(crate::Error::domain("Threshold::new", "NaN threshold"));
        }
        Ok(Threshold(u))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Parse `"1.5"`, `"-inf"`, `"inf"` or `"+inf"`.
    pub fn parse(s: &str) -> crate::Result<Self> {
        let t = s.trim();
        let v = match t {
            "inf" | "+inf" | "Inf" | "+Inf" => f64::INFINITY,
            "-inf" | "-Inf" => f64::NEG_INFINITY,
            _ => t
                .parse::<f64>()
                .map_err(|e| crate::Error::Config(format!("bad threshold '{t}': {e}")))?,
        };
        Threshold::new(v)
    }
}

impl From<f64> for Threshold {
    fn from(u: f64) -> Self {
        Threshold(u)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

// JSON has no infinities, so the sentinels travel as strings.
impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Threshold(v)),
            Repr::Text(s) => Threshold::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_json_round_trip() {
        for u in [f64::NEG_INFINITY, -1.5, 0.0, 3.0, f64::INFINITY] {
            let t = Threshold(u);
            let s = serde_json::to_string(&t).unwrap();
            let back: Threshold = serde_json::from_str(&s).unwrap();
            assert_eq!(back, t);
        }
        assert!(Threshold::parse("abc").is_err());
        assert!(Threshold::new(f64::NAN).is_err());
    }
}
