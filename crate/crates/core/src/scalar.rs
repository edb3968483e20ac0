//! Exact rationals and the small numeric trait shared by the exact and
//! floating-point geometry paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Scalar = BigRational;

/// A point in `Q^n`.
pub type Point = Vec<Scalar>;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

pub fn point(coords: &[(i64, i64)]) -> Point {
    coords.iter().map(|&(p, q)| ratio(p, q)).collect()
}

pub fn ipoint(coords: &[i64]) -> Point {
    coords.iter().map(|&v| int(v)).collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add_points(a: &[Scalar], b: &[Scalar]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_points(a: &[Scalar], b: &[Scalar]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_point(a: &[Scalar], s: &Scalar) -> Point {
    a.iter().map(|x| x * s).collect()
}

pub fn l1_norm(a: &[Scalar]) -> Scalar {
    a.iter().fold(Scalar::zero(), |acc, x| acc + x.abs())
}

pub fn factorial(n: usize) -> Scalar {
    (1..=n as i64).fold(Scalar::one(), |acc, k| acc * int(k))
}

/// Lossy conversion used only for display and float mode.
pub fn to_f64(q: &Scalar) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| {
        // Huge numerator/denominator: scale both down before dividing.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(v: f64) -> Option<Scalar> {
    if !v.is_finite() {
        return None;
    }
    Scalar::from_f64(v)
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_scalar(q: &Scalar) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ScalarParseError(pub String);

/// Parses `"p/q"`, integers, and plain decimals such as `"-0.125"` or
/// `"3e-2"`, all exactly.
pub fn parse_scalar(text: &str) -> Result<Scalar, ScalarParseError> {
    let err = || ScalarParseError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str_radix(p.trim(), 10).map_err(|_| err())?;
        let q = BigInt::from_str_radix(q.trim(), 10).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Scalar::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => {
            let e: i32 = s[idx + 1..].parse().map_err(|_| err())?;
            (&s[..idx], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{whole}{frac}");
    let numer = BigInt::from_str_radix(&all, 10).map_err(|_| err())?;
    let ten = BigInt::from(10);
    let shift = exponent - frac.len() as i32;
    let mut value = Scalar::from_integer(numer);
    if shift >= 0 {
        value *= Scalar::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= Scalar::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Smallest integer `>= q`.
pub fn ceil(q: &Scalar) -> BigInt {
    q.ceil().to_integer()
}

/// Largest integer `<= q`.
pub fn floor(q: &Scalar) -> BigInt {
    q.floor().to_integer()
}

/// Lexicographic comparison of points.
pub fn lex_cmp(a: &[Scalar], b: &[Scalar]) -> std::cmp::Ordering {
    a.cmp(b)
}

/// Ordered field used by the planar kernels. Implemented for exact
/// rationals and for `f64` (float mode of the solver only).
pub trait Field: Num + Signed + Clone + PartialOrd + Debug + Send + Sync {
    fn from_scalar(q: &Scalar) -> Self;
    fn as_f64(&self) -> f64;
    /// Zero test relative to a magnitude `scale`; exact fields ignore
    /// the scale.
    fn negligible(&self, scale: &Self) -> bool;
    /// Storage size in bits; 0 for fixed-size fields.
    fn bits(&self) -> u64 {
        0
    }
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

impl Field for Scalar {
    fn from_scalar(q: &Scalar) -> Self {
        q.clone()
    }
    fn as_f64(&self) -> f64 {
        to_f64(self)
    }
    fn negligible(&self, _scale: &Self) -> bool {
        self.is_zero()
    }
    fn bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
}

/// Relative tolerance for float-mode predicates.
pub const FLOAT_EPS: f64 = 1e-12;

impl Field for f64 {
    fn from_scalar(q: &Scalar) -> Self {
        to_f64(q)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn negligible(&self, scale: &Self) -> bool {
        self.abs() <= FLOAT_EPS * scale.abs().max(1.0)
    }
}
