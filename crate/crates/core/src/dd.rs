//! Double-double floating point.
//!
//! A value is the unevaluated sum `hi + lo` of two binary64 numbers with
//! `|lo| <= ulp(hi) / 2`, giving about 106 significant bits (~32 decimal
//! digits) with the exponent range of `f64`. Arithmetic uses the usual
//! error-free transformations (two-sum, fused-multiply-add two-product).
//!
//! This is the "high-precision float" of the numerical layer: the asymptotic
//! remainders checked at large `t` sit twenty orders of magnitude below the
//! solution itself, well past binary64 resolution.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::Rational;

#[derive(Clone, Copy, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const NAN: Dd = Dd {
        hi: f64::NAN,
        lo: f64::NAN,
    };
    pub const INFINITY: Dd = Dd {
        hi: f64::INFINITY,
        lo: 0.0,
    };

    /// Normalizes an arbitrary pair `hi + lo`.
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn is_nan(self) -> bool {
        self.hi.is_nan()
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn abs(self) -> Dd {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    pub fn max(self, other: Dd) -> Dd {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Dd) -> Dd {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn sqr(self) -> Dd {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    /// Multiplication by an exact power of two.
    pub fn mul_pow2(self, scale: f64) -> Dd {
        Dd {
            hi: self.hi * scale,
            lo: self.lo * scale,
        }
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Dd { hi, lo }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::NAN;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Dd::from(ax);
        ax_dd + (self - ax_dd.sqr()).hi * (x * 0.5)
    }

    /// Fourth root.
    pub fn qrt(self) -> Dd {
        self.sqrt().sqrt()
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::INFINITY;
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2 * k;
        // |r| <= ln2 / 2; scale down by 2^10 so a short Taylor series suffices
        let r = r.mul_pow2(1.0 / 1024.0);
        // expm1(r) by Taylor series
        let mut term = r;
        let mut s = r;
        for n in 2..=12 {
            term = term * r / n as f64;
            s += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // expm1(2r) = 2 expm1(r) + expm1(r)^2
        for _ in 0..10 {
            s = s.mul_pow2(2.0) + s.sqr();
        }
        let result = s + 1.0;
        scale_by_pow2(result, k as i32)
    }

    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::NAN;
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        // Newton on exp(x) = a; each step doubles the number of correct bits.
        let mut x = Dd::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - 1.0;
        }
        x
    }

    pub fn parse(s: &str) -> Result<Dd> {
        Ok(Rational::parse_decimal(s)?.to_dd())
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_sci_string(self, digits: usize) -> String {
        let digits = digits.clamp(1, 34);
        if self.is_nan() {
            return "NaN".into();
        }
        if !self.is_finite() {
            return if self.hi > 0.0 { "inf".into() } else { "-inf".into() };
        }
        if self.hi == 0.0 {
            return format!("{:.*}e0", digits - 1, 0.0);
        }
        let negative = self.is_sign_negative();
        let mut x = self.abs();
        let mut exp10 = x.hi.log10().floor() as i32;
        x /= Dd::from(10.0).powi(exp10);
        if x.hi >= 10.0 {
            x = x / 10.0;
            exp10 += 1;
        } else if x.hi < 1.0 {
            x = x * 10.0;
            exp10 -= 1;
        }
        let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.floor().to_f64().clamp(0.0, 9.0);
            ds.push(d as u8);
            x = (x - d) * 10.0;
        }
        // round half up on the guard digit
        let guard = ds.pop().unwrap_or(0);
        if guard >= 5 {
            let mut i = ds.len();
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.pop();
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push((b'0' + ds[0]) as char);
        if ds.len() > 1 {
            out.push('.');
            for d in &ds[1..] {
                out.push((b'0' + d) as char);
            }
        }
        out.push_str(&format!("e{exp10}"));
        out
    }
}

fn scale_by_pow2(x: Dd, k: i32) -> Dd {
    // split to stay within the range of a single f64 power of two
    let mut x = x;
    let mut k = k;
    while k > 1000 {
        x = x.mul_pow2(2f64.powi(1000));
        k -= 1000;
    }
    while k < -1000 {
        x = x.mul_pow2(2f64.powi(-1000));
        k += 1000;
    }
    x.mul_pow2(2f64.powi(k))
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }
}

impl From<i32> for Dd {
    fn from(x: i32) -> Dd {
        Dd::from(x as f64)
    }
}

impl FromStr for Dd {
    type Err = Error;
    fn from_str(s: &str) -> Result<Dd> {
        Dd::parse(s)
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Dd) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl PartialEq<f64> for Dd {
    fn eq(&self, other: &f64) -> bool {
        *self == Dd::from(*other)
    }
}

impl PartialOrd<f64> for Dd {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Dd::from(*other))
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, b.hi);
        e += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p, mut e) = two_prod(self.hi, b);
        e += self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let mut r = self - b * q1;
        let q2 = r.hi / b.hi;
        r -= b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::from(b)
    }
}

impl Add<Dd> for f64 {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        b + self
    }
}

impl Sub<Dd> for f64 {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        (-b) + self
    }
}

impl Mul<Dd> for f64 {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        b * self
    }
}

impl Div<Dd> for f64 {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        Dd::from(self) / b
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl DivAssign for Dd {
    fn div_assign(&mut self, b: Dd) {
        *self = *self / b;
    }
}

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(32))
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map(|p| p + 1).unwrap_or(32);
        write!(f, "{}", self.to_sci_string(digits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values (hi, lo) computed with 60-digit arithmetic
    const E: (f64, f64) = (std::f64::consts::E, 1.4456468917292502e-16);
    const LN10: (f64, f64) = (std::f64::consts::LN_10, -2.1707562233822494e-16);
    const SQRT2: (f64, f64) = (std::f64::consts::SQRT_2, -9.667293313452913e-17);
    const EXP_M7_5: (f64, f64) = (0.0005530843701478336, -4.382887767098959e-20);

    fn rel(a: Dd, b: (f64, f64)) -> f64 {
        let b = Dd::from_parts(b.0, b.1);
        ((a - b) / b).abs().to_f64()
    }

    #[test]
    fn transcendental_accuracy() {
        assert!(rel(Dd::ONE.exp(), E) < 1e-30);
        assert!(rel(Dd::from(10.0).ln(), LN10) < 1e-30);
        assert!(rel(Dd::from(2.0).sqrt(), SQRT2) < 1e-30);
        assert!(rel(Dd::from(-7.5).exp(), EXP_M7_5) < 1e-30);
        assert!(rel(Dd::from(2.0).ln(), (Dd::LN2.hi, Dd::LN2.lo)) < 1e-31);
    }

    #[test]
    fn exp_ln_round_trip() {
        for x in [1e-8, 0.3, 1.0, 7.25, 123.0, 1e6, 4e6] {
            let d = Dd::from(x);
            let back = d.ln().exp();
            assert!(((back - d) / d).abs().to_f64() < 1e-30, "{x}");
        }
    }

    #[test]
    fn division_and_fourth_root() {
        let x = Dd::from(1.0) / Dd::from(3.0);
        assert!((x * 3.0 - 1.0).abs().to_f64() < 1e-32);
        let r = Dd::from(4e6).qrt();
        assert!(((r.powi(4) - 4e6) / 4e6).abs().to_f64() < 1e-31);
    }

    #[test]
    fn formatting() {
        assert_eq!(Dd::from(1.5).to_sci_string(3), "1.50e0");
        assert_eq!(Dd::from(-0.000123).to_sci_string(2), "-1.2e-4");
        assert_eq!(Dd::from(9.999).to_sci_string(2), "1.0e1");
        let third = Dd::ONE / 3.0;
        assert_eq!(third.to_sci_string(30), "3.33333333333333333333333333333e-1");
    }

    #[test]
    fn parse_is_exact_for_decimal_input() {
        let tenth = Dd::parse("0.1").unwrap();
        // 10 * 0.1 is one to double-double accuracy, unlike the binary64 0.1
        assert!((tenth * 10.0 - 1.0).abs().to_f64() < 1e-32);
    }
}
