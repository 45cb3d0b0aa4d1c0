//! Scalar abstraction shared by the exact and floating-point layers.
//!
//! [`Ring`] is the minimum needed to evaluate brackets and group-law
//! polynomials, and is implemented by symbolic polynomials as well as by
//! numbers. [`Scalar`] adds the ordered-field operations used by dilation,
//! moment computations and statistics.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number used by the exact layer.
pub type Rational = BigRational;

pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    /// Add `value` into `sum`, using `comp` as a running compensation term
    /// where the representation is inexact.
    fn compensated_add(sum: &mut Self, _comp: &mut Self, value: Self) {
        let s = std::mem::replace(sum, Self::zero());
        *sum = s + value;
    }

    /// Fold a compensation term back into its sum.
    fn finish_sum(sum: Self, _comp: Self) -> Self {
        sum
    }
}

pub trait Scalar: Ring + PartialOrd + Div<Output = Self> {
    /// True for representations with no rounding.
    const EXACT: bool;

    fn as_f64(&self) -> f64;

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    /// Sum with compensation (Neumaier for floats, plain for exact types).
    fn sum_compensated<I: IntoIterator<Item = Self>>(values: I) -> Self {
        let mut sum = Self::zero();
        let mut comp = Self::zero();
        for v in values {
            Self::compensated_add(&mut sum, &mut comp, v);
        }
        Self::finish_sum(sum, comp)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Ring for $t {
            fn from_rational(r: &Rational) -> Self {
                rational_to_f64(r) as $t
            }

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn compensated_add(sum: &mut Self, comp: &mut Self, value: Self) {
                let t = *sum + value;
                if sum.abs() >= value.abs() {
                    *comp += (*sum - t) + value;
                } else {
                    *comp += (value - t) + *sum;
                }
                *sum = t;
            }

            fn finish_sum(sum: Self, comp: Self) -> Self {
                sum + comp
            }
        }

        impl Scalar for $t {
            const EXACT: bool = false;

            fn as_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

impl Ring for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }
}

/// Nearest double to a big rational, robust to huge numerators/denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down to a representable range.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

/// Shorthand for a small rational `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn rint(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions).
pub fn rational_approx(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    Rational::new(BigInt::from(sign * p1), BigInt::from(q1))
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

/// Parse `"p/q"`, an integer, or a decimal such as `"-0.125"` or `"1e-3"`
/// exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(p) => (&t[..p], t[p + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if digits == "-" || digits == "+" {
        return None;
    }
    let n: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Serde adapters writing rationals as strings (`"3/4"`) and reading
/// strings or JSON numbers.
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Int(i64),
        Float(f64),
    }

    /// Rational as a serde value.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Q(pub Rational);

    impl Serialize for Q {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&self.0.to_string())
        }
    }

    impl<'de> Deserialize<'de> for Q {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let text = match Raw::deserialize(d)? {
                Raw::Text(t) => t,
                Raw::Int(i) => i.to_string(),
                Raw::Float(f) => format!("{f:e}"),
            };
            parse_rational(&text)
                .map(Q)
                .ok_or_else(|| D::Error::custom(format!("not a rational number: {text}")))
        }
    }

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Q(v.clone()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        Ok(Q::deserialize(d)?.0)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|r| Q(r.clone())).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Ok(Vec::<Q>::deserialize(d)?.into_iter().map(|q| q.0).collect())
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|row| row.iter().map(|r| Q(r.clone())).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
            Ok(Vec::<Vec<Q>>::deserialize(d)?
                .into_iter()
                .map(|row| row.into_iter().map(|q| q.0).collect())
                .collect())
        }
    }

    pub mod pairs {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[(Rational, Rational)], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|(a, b)| (Q(a.clone()), Q(b.clone())))
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(Rational, Rational)>, D::Error> {
            Ok(Vec::<(Q, Q)>::deserialize(d)?
                .into_iter()
                .map(|(a, b)| (a.0, b.0))
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/4"), Some(ratio(3, 4)));
        assert_eq!(parse_rational("-2"), Some(rint(-2)));
        assert_eq!(parse_rational("0.125"), Some(ratio(1, 8)));
        assert_eq!(parse_rational("-1.5e-1"), Some(ratio(-3, 20)));
        assert_eq!(parse_rational("1e3"), Some(rint(1000)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        let q: serde_rational::Q = serde_json::from_str("0.1").unwrap();
        assert_eq!(q.0, ratio(1, 10));
        let q: serde_rational::Q = serde_json::from_str("\"-5/10\"").unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), "\"-1/2\"");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1e16, 1.0, -1e16];
        values.extend(std::iter::repeat(1e-3).take(1000));
        let s = f64::sum_compensated(values.iter().copied());
        assert!((s - 2.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn rational_conversion_handles_large_values() {
        let big = Rational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399) * 4);
        assert!((rational_to_f64(&big) - 2.5).abs() < 1e-12);
        assert_eq!(ratio(3, 4).as_f64(), 0.75);
    }

    #[test]
    fn continued_fraction_approximation() {
        assert_eq!(rational_approx(0.75, 100), ratio(3, 4));
        let r = rational_approx(std::f64::consts::PI, 1000);
        assert_eq!(r, ratio(355, 113));
        assert_eq!(rational_approx(-2.0, 10), rint(-2));
    }
}
