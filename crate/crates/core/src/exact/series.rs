//! Truncated formal power series over an exact coefficient ring.
//!
//! `Series<C>` stores coefficients `0..=order`. Binary operations truncate to
//! the smaller order. Powers, compositions and the logarithm / negative-power
//! maps all go through [`PowerTable`], which holds the coefficients
//! `s[m][k]` of `(a_1 x + a_2 x^2 + ...)^m`.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Rational;
use crate::error::{Error, Result};

/// Commutative ring with rational scalars.
///
/// The method names avoid `add`/`mul` so they never collide with the
/// operator traits during method resolution.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn scaled(&self, r: &Rational) -> Self;

    fn accumulate(&mut self, other: &Self) {
        *self = self.plus(other);
    }

    fn from_rational(r: &Rational) -> Self {
        Self::one().scaled(r)
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, r: &Rational) -> Self {
        self * r
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

#[derive(Clone, PartialEq)]
pub struct Series<C> {
    // len = order + 1 >= 1
    coeffs: Vec<C>,
}

pub type TruncatedSeries = Series<Rational>;

impl<C: Ring> Series<C> {
    /// Series with the given coefficients; an empty list is the order-0 zero.
    pub fn new(mut coeffs: Vec<C>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(C::zero());
        }
        Series { coeffs }
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> C) -> Self {
        Series {
            coeffs: (0..=order).map(f).collect(),
        }
    }

    pub fn zero(order: usize) -> Self {
        Series::from_fn(order, |_| C::zero())
    }

    pub fn one(order: usize) -> Self {
        Series::from_fn(order, |k| if k == 0 { C::one() } else { C::zero() })
    }

    /// The series `x` (zero if `order` is 0).
    pub fn x(order: usize) -> Self {
        Series::from_fn(order, |k| if k == 1 { C::one() } else { C::zero() })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of `x^k`; zero beyond the order.
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Series::from_fn(order, |k| self.coeff(k))
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Series::from_fn(n, |k| self.coeffs[k].plus(&other.coeffs[k]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Series::from_fn(n, |k| self.coeffs[k].minus(&other.coeffs[k]))
    }

    pub fn neg(&self) -> Self {
        Series::from_fn(self.order(), |k| self.coeffs[k].negated())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Series::from_fn(self.order(), |k| self.coeffs[k].scaled(r))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![C::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j].accumulate(&a.times(b));
                }
            }
        }
        Series { coeffs: out }
    }

    fn require_no_constant(&self) -> Result<()> {
        if self.coeffs[0].is_zero() {
            Ok(())
        } else {
            Err(Error::Domain(
                "series must have zero constant term for powers and composition".into(),
            ))
        }
    }

    fn power_table(&self) -> PowerTable<C> {
        let mut table = PowerTable::new();
        for a in &self.coeffs[1..] {
            table.push(a.clone());
        }
        table
    }

    /// `self^m`; requires a zero constant term.
    pub fn pow(&self, m: usize) -> Result<Self> {
        self.require_no_constant()?;
        let table = self.power_table();
        Ok(Series::from_fn(self.order(), |k| table.s(m, k)))
    }

    /// `sum_m f_m self^m`, truncated to the smaller of the two orders.
    pub fn compose(&self, f: &TruncatedSeries) -> Result<Self> {
        self.require_no_constant()?;
        let table = self.power_table();
        let n = self.order().min(f.order());
        Ok(Series::from_fn(n, |k| table.compose_at(f.coeffs(), k)))
    }

    /// `ln(1 + self)`.
    pub fn sigma0(&self) -> Result<Self> {
        self.require_no_constant()?;
        let table = self.power_table();
        Ok(Series::from_fn(self.order(), |k| table.sigma0(k)))
    }

    /// `(1 + self)^(-m)` for `m >= 1`.
    pub fn sigma_m(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("sigma_m requires m >= 1".into()));
        }
        self.require_no_constant()?;
        let table = self.power_table();
        let weights = neg_binomials(m, self.order());
        Ok(Series::from_fn(self.order(), |k| table.compose_at(&weights, k)))
    }
}

impl TruncatedSeries {
    pub fn from_integers(coeffs: &[i64]) -> Self {
        Series::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0]
            .recip()
            .map_err(|_| Error::Domain("reciprocal needs a nonzero constant term".into()))?;
        let mut out: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for k in 1..=self.order() {
            let mut acc = Rational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &(&self.coeffs[j] * &out[k - j]);
                }
            }
            out.push(-(acc * &inv0));
        }
        Ok(Series { coeffs: out })
    }

    /// Formal derivative; the result has order `max(order - 1, 0)`.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Series::zero(0);
        }
        Series::from_fn(self.order() - 1, |k| {
            &self.coeffs[k + 1] * &Rational::from(k as i64 + 1)
        })
    }

    /// `x^shift * self`, keeping the order.
    pub fn shift_up(&self, shift: usize) -> Self {
        Series::from_fn(self.order(), |k| {
            if k >= shift {
                self.coeffs[k - shift].clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Coefficients of `ln(1 + x)`.
    pub fn log1p_coeffs(order: usize) -> Self {
        Series::from_fn(order, |k| {
            if k == 0 {
                Rational::zero()
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                Rational::new(sign, k as i64)
            }
        })
    }

    /// Coefficients of `exp(x)`.
    pub fn exp_coeffs(order: usize) -> Self {
        let mut fact = Rational::one();
        Series::from_fn(order, |k| {
            if k > 0 {
                fact = &fact / &Rational::from(k as i64);
            }
            fact.clone()
        })
    }
}

/// `binom(-m, j)` for `j = 0..=order`.
pub(crate) fn neg_binomials(m: usize, order: usize) -> Vec<Rational> {
    let r = Rational::from(-(m as i64));
    (0..=order).map(|j| Rational::binomial(&r, j)).collect()
}

/// Coefficients of `ln(1 + x)` as a plain vector.
pub(crate) fn log1p_weights(order: usize) -> Vec<Rational> {
    TruncatedSeries::log1p_coeffs(order).into_coeffs()
}

/// Incrementally built table of `s[m][k]`, the coefficient of `x^k` in
/// `(a_1 x + a_2 x^2 + ...)^m`.
///
/// Column `k` depends only on `a_1..a_k`, so it is filled as soon as `a_k`
/// is pushed. This lets recursions whose `n`-th term needs `s[.][n]` of the
/// previous terms run in a single pass.
#[derive(Clone, Debug)]
pub struct PowerTable<C> {
    // a[0] is a placeholder zero; a[k] = a_k
    a: Vec<C>,
    // cols[k][m] = s[m][k] for m <= k
    cols: Vec<Vec<C>>,
}

impl<C: Ring> Default for PowerTable<C> {
    fn default() -> Self {
        PowerTable::new()
    }
}

impl<C: Ring> PowerTable<C> {
    pub fn new() -> Self {
        PowerTable {
            a: vec![C::zero()],
            cols: vec![vec![C::one()]],
        }
    }

    /// Largest `k` with column `k` available.
    pub fn len(&self) -> usize {
        self.a.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn args(&self) -> &[C] {
        &self.a[1..]
    }

    /// Appends the next argument `a_k` and fills column `k`.
    pub fn push(&mut self, a_k: C) {
        let k = self.a.len();
        self.a.push(a_k);
        let mut col = Vec::with_capacity(k + 1);
        col.push(C::zero());
        col.push(self.a[k].clone());
        for m in 2..=k {
            let mut acc = C::zero();
            for i in (m - 1)..k {
                let s = &self.cols[i][m - 1];
                let a = &self.a[k - i];
                if !s.is_zero() && !a.is_zero() {
                    acc.accumulate(&s.times(a));
                }
            }
            col.push(acc);
        }
        self.cols.push(col);
    }

    /// `s[m][k]`; zero when `m > k`. Panics if column `k` is not built yet.
    pub fn s(&self, m: usize, k: usize) -> C {
        let col = &self.cols[k];
        col.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// `sum_{m <= k} f_m s[m][k]`.
    pub fn compose_at(&self, f: &[Rational], k: usize) -> C {
        let col = &self.cols[k];
        let mut acc = C::zero();
        for (m, s) in col.iter().enumerate() {
            match f.get(m) {
                Some(fm) if !fm.is_zero() && !s.is_zero() => acc.accumulate(&s.scaled(fm)),
                _ => {}
            }
        }
        acc
    }

    /// Coefficient `k` of `ln(1 + a)`.
    pub fn sigma0(&self, k: usize) -> C {
        if k == 0 {
            return C::zero();
        }
        self.compose_at(&log1p_weights(k), k)
    }

    /// Coefficient `k` of `(1 + a)^(-m)`.
    pub fn sigma_m(&self, m: usize, k: usize) -> C {
        self.compose_at(&neg_binomials(m, k), k)
    }
}

impl<C: Ring> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match k {
                0 => write!(f, "{mag}")?,
                _ if mag.is_one() => write!(f, "x^{k}")?,
                _ => write!(f, "{mag}*x^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr<C> {
    order: usize,
    coeffs: Vec<C>,
}

/// Serialized as `{"order": N, "coeffs": [...]}`.
impl<C: Ring + Serialize> Serialize for Series<C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            order: self.order(),
            coeffs: self.coeffs.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de, C: Ring + Deserialize<'de>> Deserialize<'de> for Series<C> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::<C>::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.order + 1 {
            return Err(D::Error::custom(format!(
                "order {} needs {} coefficients, got {}",
                repr.order,
                repr.order + 1,
                repr.coeffs.len()
            )));
        }
        Ok(Series {
            coeffs: repr.coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ints(v: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_integers(v)
    }

    #[test]
    fn pow_small_cases() {
        let a = ints(&[0, 1, 1, 0, 0]);
        assert_eq!(a.pow(0).unwrap(), TruncatedSeries::one(4));
        assert_eq!(a.pow(1).unwrap(), a);
        assert_eq!(a.pow(2).unwrap(), ints(&[0, 0, 1, 2, 1]));
        assert!(ints(&[1, 1]).pow(2).is_err());
    }

    #[test]
    fn compose_cases() {
        let x = TruncatedSeries::x(3);
        assert_eq!(x.compose(&ints(&[1, 1, 0, 0])).unwrap(), ints(&[1, 1, 0, 0]));
        assert_eq!(x.compose(&ints(&[1, 0, 0, 0])).unwrap(), ints(&[1, 0, 0, 0]));
        assert_eq!(x.compose(&ints(&[1, 1, 1, 1])).unwrap(), ints(&[1, 1, 1, 1]));
        assert!(ints(&[2, 1]).compose(&ints(&[1, 1])).is_err());
    }

    #[test]
    fn sigma0_cases() {
        let ln = TruncatedSeries::x(4).sigma0().unwrap();
        assert_eq!(ln.coeffs(), &[q(0, 1), q(1, 1), q(-1, 2), q(1, 3), q(-1, 4)]);
        let s = ints(&[0, 1, 1]).sigma0().unwrap();
        assert_eq!(s.coeff(1), q(1, 1));
        assert_eq!(s.coeff(2), q(1, 2));
    }

    #[test]
    fn sigma_m_cases() {
        let x = TruncatedSeries::x(4);
        assert_eq!(x.sigma_m(1).unwrap(), ints(&[1, -1, 1, -1, 1]));
        assert_eq!(x.sigma_m(2).unwrap(), ints(&[1, -2, 3, -4, 5]));
        assert_eq!(TruncatedSeries::zero(4).sigma_m(1).unwrap(), TruncatedSeries::one(4));
        assert!(x.sigma_m(0).is_err());
    }

    #[test]
    fn reciprocal_cases() {
        assert_eq!(TruncatedSeries::one(3).reciprocal().unwrap(), TruncatedSeries::one(3));
        assert_eq!(ints(&[1, 1, 0, 0]).reciprocal().unwrap(), ints(&[1, -1, 1, -1]));
        assert!(TruncatedSeries::x(3).reciprocal().is_err());
    }

    #[test]
    fn mul_truncates_to_smaller_order() {
        let a = ints(&[1, 1, 1, 1, 1]);
        let b = ints(&[1, -1]);
        assert_eq!(a.mul(&b), ints(&[1, 0]));
    }

    #[test]
    fn derivative_and_shift() {
        let a = ints(&[5, 1, 3, 2]);
        assert_eq!(a.derivative(), ints(&[1, 6, 6]));
        assert_eq!(a.shift_up(2), ints(&[0, 0, 5, 1]));
    }

    #[test]
    fn json_shape() {
        let a = Series::new(vec![q(1, 1), q(-3, 4)]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"order":1,"coeffs":[["1","1"],["-3","4"]]}"#);
        let back: TruncatedSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<TruncatedSeries>(r#"{"order":2,"coeffs":[["1","1"]]}"#).is_err());
    }

    #[test]
    fn display() {
        let a = Series::new(vec![q(1, 1), q(-3, 4), q(0, 1), q(1, 1)]);
        assert_eq!(a.to_string(), "1 - 3/4*x^1 + x^3 + O(x^4)");
    }
}
