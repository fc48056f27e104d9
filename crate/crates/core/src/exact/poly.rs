//! Sparse bivariate polynomials in `(c, z)` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::parse_parts;
use super::{Rational, Ring};
use crate::dd::Dd;

/// Key is `(c_pow, z_pow)`. No zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        BivariatePoly::default()
    }

    pub fn constant(r: Rational) -> Self {
        BivariatePoly::monomial(r, 0, 0)
    }

    pub fn monomial(r: Rational, c_pow: u32, z_pow: u32) -> Self {
        let mut p = BivariatePoly::zero();
        p.add_term(c_pow, z_pow, &r);
        p
    }

    pub fn c() -> Self {
        BivariatePoly::monomial(Rational::one(), 1, 0)
    }

    pub fn z() -> Self {
        BivariatePoly::monomial(Rational::one(), 0, 1)
    }

    /// Builds a polynomial from `(c_pow, z_pow, coefficient)` triples; repeated
    /// keys are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Rational)>,
    {
        let mut p = BivariatePoly::zero();
        for (i, j, r) in terms {
            p.add_term(i, j, &r);
        }
        p
    }

    fn add_term(&mut self, c_pow: u32, z_pow: u32, r: &Rational) {
        if r.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((c_pow, z_pow)) {
            Entry::Vacant(v) => {
                v.insert(r.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += r;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates `((c_pow, z_pow), coefficient)` in ascending key order.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, c_pow: u32, z_pow: u32) -> Rational {
        self.terms
            .get(&(c_pow, z_pow))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Degree in `z`; `None` for the zero polynomial.
    pub fn z_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn c_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    /// True when no term involves `c`.
    pub fn is_univariate_z(&self) -> bool {
        self.terms.keys().all(|&(i, _)| i == 0)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return BivariatePoly::zero();
        }
        BivariatePoly {
            terms: self.terms.iter().map(|(k, v)| (*k, v * r)).collect(),
        }
    }

    /// Partial derivative in `c`.
    pub fn diff_c(&self) -> Self {
        BivariatePoly::from_terms(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|(&(i, j), v)| (i - 1, j, v * &Rational::from(i as i64))),
        )
    }

    /// Coefficients of `z^j` as polynomials in `c`, indexed by `j`.
    pub fn z_slices(&self) -> Vec<Vec<Rational>> {
        let zdeg = self.z_degree().unwrap_or(0) as usize;
        let mut out: Vec<Vec<Rational>> = vec![Vec::new(); zdeg + 1];
        for (&(i, j), v) in &self.terms {
            let row = &mut out[j as usize];
            if row.len() <= i as usize {
                row.resize(i as usize + 1, Rational::zero());
            }
            row[i as usize] = v.clone();
        }
        out
    }

    pub fn to_numeric(&self) -> NumericPoly {
        let cdeg = self.c_degree().unwrap_or(0) as usize;
        let mut rows: Vec<Vec<Dd>> = vec![Vec::new(); cdeg + 1];
        for (&(i, j), v) in &self.terms {
            let row = &mut rows[i as usize];
            if row.len() <= j as usize {
                row.resize(j as usize + 1, Dd::ZERO);
            }
            row[j as usize] = v.to_dd();
        }
        NumericPoly { rows }
    }

    /// Evaluates at `(c, z)`: Horner in `z` for each power of `c`, then summed.
    pub fn eval(&self, c: Dd, z: Dd) -> Dd {
        self.to_numeric().eval(c, z)
    }

    /// Display in descending powers of `z`, each coefficient a polynomial in
    /// `c` with ascending powers.
    pub fn to_table_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let slices = self.z_slices();
        let mut out = String::new();
        for (j, row) in slices.iter().enumerate().rev() {
            let nonzero: Vec<(usize, &Rational)> =
                row.iter().enumerate().filter(|(_, r)| !r.is_zero()).collect();
            if nonzero.is_empty() {
                continue;
            }
            let zpart = match j {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{j}"),
            };
            if nonzero.len() == 1 {
                let (i, r) = nonzero[0];
                let neg = r.is_negative();
                let mag = r.abs();
                push_sign(&mut out, neg);
                let mut factors = Vec::new();
                let bare = i == 0 && j == 0;
                if !mag.is_one() || bare {
                    factors.push(mag.to_string());
                }
                if i > 0 {
                    factors.push(c_power(i));
                }
                if !zpart.is_empty() {
                    factors.push(zpart);
                }
                out.push_str(&factors.join("*"));
            } else if j == 0 {
                for (i, r) in nonzero {
                    push_sign(&mut out, r.is_negative());
                    out.push_str(&scalar_term(&r.abs(), i));
                }
            } else {
                push_sign(&mut out, false);
                let mut inner = String::new();
                for (i, r) in nonzero {
                    push_sign(&mut inner, r.is_negative());
                    inner.push_str(&scalar_term(&r.abs(), i));
                }
                out.push_str(&format!("({inner})*{zpart}"));
            }
        }
        out
    }
}

fn c_power(i: usize) -> String {
    if i == 1 {
        "c".into()
    } else {
        format!("c^{i}")
    }
}

fn scalar_term(mag: &Rational, i: usize) -> String {
    match (i, mag.is_one()) {
        (0, _) => mag.to_string(),
        (_, true) => c_power(i),
        _ => format!("{mag}*{}", c_power(i)),
    }
}

fn push_sign(out: &mut String, negative: bool) {
    match (out.is_empty(), negative) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
}

/// A [`BivariatePoly`] with coefficients rounded to double-double, laid out
/// densely as `rows[c_pow][z_pow]` for repeated evaluation.
#[derive(Clone, Debug, Default)]
pub struct NumericPoly {
    rows: Vec<Vec<Dd>>,
}

impl NumericPoly {
    fn horner(row: &[Dd], z: Dd) -> Dd {
        row.iter().rev().fold(Dd::ZERO, |acc, &a| acc * z + a)
    }

    pub fn eval(&self, c: Dd, z: Dd) -> Dd {
        self.rows
            .iter()
            .rev()
            .fold(Dd::ZERO, |acc, row| acc * c + NumericPoly::horner(row, z))
    }

    /// Partial derivative in `c` at `(c, z)`.
    pub fn eval_dc(&self, c: Dd, z: Dd) -> Dd {
        let mut acc = Dd::ZERO;
        for (i, row) in self.rows.iter().enumerate().skip(1).rev() {
            acc = acc * c + NumericPoly::horner(row, z) * i as f64;
        }
        acc
    }
}

impl Ring for BivariatePoly {
    fn zero() -> Self {
        BivariatePoly::zero()
    }
    fn one() -> Self {
        BivariatePoly::constant(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
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
        self.scale(r)
    }
    fn accumulate(&mut self, other: &Self) {
        for (&(i, j), v) in &other.terms {
            self.add_term(i, j, v);
        }
    }
    fn from_rational(r: &Rational) -> Self {
        BivariatePoly::constant(r.clone())
    }
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        out.accumulate(rhs);
        out
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (&(i, j), v) in &rhs.terms {
            out.add_term(i, j, &-v);
        }
        out
    }
}

impl BivariatePoly {
    /// `(d, terms)` with `self = terms / d`, `d` the lcm of the denominators.
    fn integer_form(&self) -> (BigInt, Vec<(u32, u32, BigInt)>) {
        let d = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let terms = self
            .terms
            .iter()
            .map(|(&(i, j), v)| (i, j, v.numer() * (&d / v.denom())))
            .collect();
        (d, terms)
    }
}

// Products are accumulated over integers on a dense grid and reduced once per
// output term; multiplying rationals term by term spends most of its time in
// gcd computations.
impl Mul for &BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        if self.is_zero() || rhs.is_zero() {
            return BivariatePoly::zero();
        }
        let (da, ta) = self.integer_form();
        let (db, tb) = rhs.integer_form();
        let zdim = (self.z_degree().unwrap_or(0) + rhs.z_degree().unwrap_or(0)) as usize + 1;
        let cdim = (self.c_degree().unwrap_or(0) + rhs.c_degree().unwrap_or(0)) as usize + 1;
        let mut grid = vec![BigInt::zero(); zdim * cdim];
        for (i1, j1, a) in &ta {
            for (i2, j2, b) in &tb {
                let idx = (i1 + i2) as usize * zdim + (j1 + j2) as usize;
                grid[idx] += a * b;
            }
        }
        let den = da * db;
        let mut terms = BTreeMap::new();
        for (idx, v) in grid.into_iter().enumerate() {
            if !v.is_zero() {
                let key = ((idx / zdim) as u32, (idx % zdim) as u32);
                terms.insert(key, Rational::new(v, den.clone()));
            }
        }
        BivariatePoly { terms }
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        BivariatePoly {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

impl Add for BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: BivariatePoly) -> BivariatePoly {
        &self + &rhs
    }
}

impl Sub for BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: BivariatePoly) -> BivariatePoly {
        &self - &rhs
    }
}

impl Mul for BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: BivariatePoly) -> BivariatePoly {
        &self * &rhs
    }
}

impl Neg for BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        -&self
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table_string())
    }
}

impl fmt::Debug for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table_string())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    c_pow: u32,
    z_pow: u32,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    terms: Vec<TermRepr>,
}

/// Serialized as `{"terms": [{"c_pow", "z_pow", "num", "den"}, ...]}`.
impl Serialize for BivariatePoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            terms: self
                .terms
                .iter()
                .map(|(&(c_pow, z_pow), v)| TermRepr {
                    c_pow,
                    z_pow,
                    num: v.numer().to_string(),
                    den: v.denom().to_string(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BivariatePoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for t in repr.terms {
            let r = parse_parts(&t.num, &t.den).map_err(D::Error::custom)?;
            terms.push((t.c_pow, t.z_pow, r));
        }
        Ok(BivariatePoly::from_terms(terms))
    }
}
