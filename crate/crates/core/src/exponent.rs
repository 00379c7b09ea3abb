use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational scalar used for exponents and geometry.
pub type Rational = BigRational;

/// Parses `p/q`, integer, or decimal literals (optionally with an `e` exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::ParseExponent(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp10) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = body[i + 1..].parse().map_err(|_| bad())?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
    let shift = exp10 - frac_part.len() as i64;
    if shift.unsigned_abs() > 4096 {
        return Err(bad());
    }
    let ten = BigInt::from(10u32);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let mut value = if shift >= 0 {
        Rational::from_integer(numer * scale)
    } else {
        Rational::new(numer, scale)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Renders a rational as `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exponent vector with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ExponentVector(Vec<Rational>);

impl ExponentVector {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Rational::zero(); n])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self(coords.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn parse<S: AsRef<str>>(coords: &[S]) -> Result<Self> {
        coords
            .iter()
            .map(|c| parse_rational(c.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, c| acc + c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|c| !c.is_negative())
    }

    pub fn is_natural(&self) -> bool {
        self.0.iter().all(|c| c.is_integer() && !c.is_negative())
    }

    /// True when every coordinate is an even nonnegative integer.
    pub fn is_even(&self) -> bool {
        let two = BigInt::from(2);
        self.is_natural() && self.0.iter().all(|c| (c.numer() % &two).is_zero())
    }

    /// Indices of nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| !self.0[j].is_zero()).collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn dot_f64(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, xi)| rational_to_f64(a) * xi).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    /// Coordinates sorted non-increasingly: the canonical orbit representative.
    pub fn sorted_desc(&self) -> Self {
        let mut c = self.0.clone();
        c.sort_by(|a, b| b.cmp(a));
        Self(c)
    }

    /// Applies a permutation: coordinate `j` moves to position `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = self.0.clone();
        for (j, &pj) in perm.iter().enumerate() {
            out[pj] = self.0[j].clone();
        }
        Self(out)
    }

    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut out = self.0.clone();
        out.swap(i, j);
        Self(out)
    }

    /// Integer coordinates, when all coordinates are nonnegative integers that fit.
    pub fn to_naturals(&self) -> Option<Vec<u32>> {
        self.0
            .iter()
            .map(|c| if c.is_integer() && !c.is_negative() { c.to_integer().to_u32() } else { None })
            .collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl Serialize for ExponentVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExponentVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<ExponentLiteral>::deserialize(deserializer)?;
        raw.into_iter()
            .map(|lit| match lit {
                ExponentLiteral::Text(s) => parse_rational(&s),
                ExponentLiteral::Int(i) => Ok(Rational::from_integer(i.into())),
            })
            .collect::<Result<Vec<_>>>()
            .map(ExponentVector)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExponentLiteral {
    Text(String),
    Int(i64),
}

#[allow(dead_code)]
pub(crate) fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[allow(dead_code)]
pub(crate) fn qi(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("1.5e1").unwrap(), qi(15));
        assert_eq!(parse_rational("2e-2").unwrap(), q(1, 50));
        assert_eq!(parse_rational(" 7 ").unwrap(), qi(7));
        for bad in ["", "1/0", "abc", "1.2.3", "-", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_representative_and_permutation() {
        let a = ExponentVector::from_ints(&[0, 4, 2]);
        assert_eq!(a.sorted_desc(), ExponentVector::from_ints(&[4, 2, 0]));
        assert_eq!(a.permuted(&[1, 2, 0]), ExponentVector::from_ints(&[2, 0, 4]));
        assert!(ExponentVector::from_ints(&[4, 0, 2]).is_even());
        assert!(!ExponentVector::from_ints(&[4, 1]).is_even());
    }

    #[test]
    fn serde_accepts_strings_and_ints() {
        let e: ExponentVector = serde_json::from_str(r#"["1/3", 2, "0.5"]"#).unwrap();
        assert_eq!(e, ExponentVector::new(vec![q(1, 3), qi(2), q(1, 2)]));
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"["1/3","2","1/2"]"#);
    }
}

pub(crate) mod serde_q {
    use super::{format_rational, Rational};
    use serde::Serializer;

    pub fn scalar<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(v))
    }

    pub fn vec<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn option<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn pairs<S: Serializer>(v: &[(super::ExponentVector, Rational)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|(e, w)| (e, format_rational(w))))
    }
}
