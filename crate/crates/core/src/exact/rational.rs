//! Exact arbitrary-precision rationals.
//!
//! A thin newtype over `num_rational::BigRational`. The wrapped value is kept
//! in lowest terms with a positive denominator by the underlying type, so the
//! structural equality derived here is value equality.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dd::Dd;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den`. Panics if `den` is zero.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Rational(BigRational::new(num.into(), den))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Generalized binomial coefficient `binom(r, m)` as the falling-factorial
    /// product `r (r-1) ... (r-m+1) / m!`.
    pub fn binomial(r: &Rational, m: usize) -> Self {
        let mut acc = Rational::one();
        for j in 0..m {
            let factor = r - &Rational::from_integer(j as i64);
            acc = &acc * &factor;
            acc = &acc / &Rational::from_integer(j as i64 + 1);
        }
        acc
    }

    /// Nearest binary64 value.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Double-double approximation with roughly 106 significant bits.
    pub fn to_dd(&self) -> Dd {
        let hi = self.to_f64();
        if !hi.is_finite() || hi == 0.0 {
            return Dd::from(hi);
        }
        let hi_exact = BigRational::from_float(hi).expect("finite float");
        let lo = (&self.0 - hi_exact).to_f64().unwrap_or(0.0);
        Dd::from_parts(hi, lo)
    }

    /// Exact value of a finite binary64 number.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Rational)
            .ok_or_else(|| Error::Domain(format!("{x} is not finite")))
    }

    /// Parses plain decimals and scientific notation (`"-1.25e-3"`) exactly,
    /// as well as fractions of the form `"p/q"`.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a number: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Rational::new(n, d));
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (negative, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all: String = format!("{int_part}{frac_part}");
        let mut num: BigInt = if all.is_empty() {
            BigInt::zero()
        } else {
            all.parse().map_err(|_| bad())?
        };
        if negative {
            num = -num;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            Rational::from_integer(num * num_traits::pow(ten, scale as usize))
        } else {
            Rational::new(num, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(value)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rational::parse_decimal(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Division by zero panics, as for the underlying type.
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Serialized as `["num", "den"]` with decimal-string integers.
impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.numer().to_string(), self.denom().to_string()].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [num, den] = <[String; 2]>::deserialize(deserializer)?;
        parse_parts(&num, &den).map_err(D::Error::custom)
    }
}

pub(crate) fn parse_parts(num: &str, den: &str) -> Result<Rational> {
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator {num:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator {den:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn normalizes_sign_and_gcd() {
        let r = q(6, -8);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(4));
        assert_eq!(r, q(-3, 4));
    }

    #[test]
    fn binomial_quarter() {
        // binom(1/4, 2) = (1/4)(-3/4)/2
        assert_eq!(Rational::binomial(&q(1, 4), 2), q(-3, 32));
        assert_eq!(Rational::binomial(&q(1, 4), 0), Rational::one());
        // binom(-2, 3) = (-2)(-3)(-4)/6 = -4
        assert_eq!(Rational::binomial(&Rational::from(-2), 3), Rational::from(-4));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Rational::parse_decimal("0.5").unwrap(), q(1, 2));
        assert_eq!(Rational::parse_decimal("1e2").unwrap(), Rational::from(100));
        assert_eq!(Rational::parse_decimal("-1.25e-3").unwrap(), q(-1, 800));
        assert_eq!(Rational::parse_decimal("-7245/256").unwrap(), q(-7245, 256));
        assert_eq!(Rational::parse_decimal(".1").unwrap(), q(1, 10));
        assert!(Rational::parse_decimal("abc").is_err());
        assert!(Rational::parse_decimal("1/0").is_err());
        assert!(Rational::parse_decimal("").is_err());
    }

    #[test]
    fn dd_conversion_keeps_extra_bits() {
        let third = q(1, 3).to_dd();
        // 3 * (1/3) should be one to double-double accuracy.
        let err = (third * 3.0 - Dd::ONE).abs().to_f64();
        assert!(err < 1e-31, "{err}");
    }

    #[test]
    fn serde_round_trip_large() {
        let big = Rational::new(BigInt::from(10).pow(40) + 1, BigInt::from(7).pow(30));
        let json = serde_json::to_string(&big).unwrap();
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(big, back);
        assert!(json.starts_with("[\"10000000000000000000000000000000000000001\""));
    }
}
