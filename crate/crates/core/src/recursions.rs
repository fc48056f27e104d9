//! The coefficient sequences `alpha_k`, `beta_n` and the polynomial families
//! `p_n(c; z)`, `q_k(c; z)` and the Lambert polynomials `pt_k(z)`.
//!
//! Every generator is exact. The polynomial recursions evaluate the
//! log / negative-power coefficient maps with the family itself as argument
//! list, shifted by one: `a_j := p_{j-1}`.

use crate::exact::{BivariatePoly, PowerTable, Rational, Ring, TruncatedSeries};

/// `alpha_0..alpha_N`: coefficients of the formal solution
/// `sum alpha_k z^k` of `(1 - 3/4 z g - z^2 g') g = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSequence {
    pub values: Vec<Rational>,
}

/// `beta_0..beta_N`: coefficients of the reciprocal of the alpha series.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaSequence {
    pub values: Vec<Rational>,
}

/// A list of polynomials indexed from `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFamily {
    pub start: usize,
    pub polys: Vec<BivariatePoly>,
}

/// `p_0..p_N`.
pub type PPolyFamily = PolyFamily;
/// `q_1..q_N`.
pub type QPolyFamily = PolyFamily;
/// `pt_0..pt_N`, polynomials in `z` only.
pub type LambertPolyFamily = PolyFamily;

impl PolyFamily {
    /// Polynomial with index `i`; `None` outside `start..=last`.
    pub fn get(&self, i: usize) -> Option<&BivariatePoly> {
        i.checked_sub(self.start).and_then(|k| self.polys.get(k))
    }

    /// Highest index held.
    pub fn last_index(&self) -> usize {
        self.start + self.polys.len() - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BivariatePoly)> {
        self.polys.iter().enumerate().map(move |(k, p)| (self.start + k, p))
    }
}

impl AlphaSequence {
    pub fn as_series(&self) -> TruncatedSeries {
        TruncatedSeries::new(self.values.clone())
    }
}

impl BetaSequence {
    pub fn as_series(&self) -> TruncatedSeries {
        TruncatedSeries::new(self.values.clone())
    }
}

pub fn gen_alpha(n: usize) -> AlphaSequence {
    let mut a: Vec<Rational> = vec![Rational::one()];
    for k in 0..n {
        let conv: Rational = (0..=k).map(|j| &a[j] * &a[k - j]).sum();
        // k/2 + 3/4 = (2k + 3)/4
        a.push(conv * Rational::new(2 * k as i64 + 3, 4));
    }
    AlphaSequence { values: a }
}

pub fn gen_beta(n: usize) -> BetaSequence {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for m in 0..n {
        // pairs[s] = sum_{j+k=s, j,k<=m} b_j b_k for s <= m+1
        let pairs: Vec<Rational> = (0..=m + 1)
            .map(|s| {
                let lo = s.saturating_sub(m);
                let hi = s.min(m);
                (lo..=hi).map(|j| &b[j] * &b[s - j]).sum()
            })
            .collect();
        let quad = pairs[m + 1].clone();
        let cubic: Rational = (0..=m).map(|l| &b[l] * &pairs[m + 1 - l]).sum();
        let lin = &b[m] * &Rational::new(4 * m as i64 - 3, 4);
        b.push(lin + quad - cubic);
    }
    BetaSequence { values: b }
}

/// The formal series `sum_{k<=N} alpha_k z^k`.
pub fn g_series(n: usize) -> TruncatedSeries {
    gen_alpha(n).as_series()
}

/// Lowest nonzero order of `(1 - 3/4 z g - z^2 g') g - 1` with `g` the
/// order-`n` truncation of the alpha series. The product is formed exactly,
/// so the return value is at most `2n + 2`.
pub fn ode_residual_order(n: usize) -> usize {
    let full = 2 * n + 2;
    let g = g_series(n).truncate(full);
    let zg = g.shift_up(1).scale(&Rational::new(3, 4));
    let z2dg = g.derivative().truncate(full).shift_up(2);
    let factor = TruncatedSeries::one(full).sub(&zg).sub(&z2dg);
    let residual = factor.mul(&g).sub(&TruncatedSeries::one(full));
    residual.valuation().unwrap_or(full + 1)
}

fn pow4(k: usize) -> Rational {
    Rational::from(4).pow(k as u32)
}

/// Incremental generator for `p_n` and `q_k`, sharing one power table over
/// the arguments `(p_0, p_1, ...)`.
#[derive(Clone, Debug)]
pub struct PolynomialFamilies {
    beta: Vec<Rational>,
    p: Vec<BivariatePoly>,
    q: Vec<BivariatePoly>,
    // arguments pushed: p_0..p_{table.len()-1}
    table: PowerTable<BivariatePoly>,
}

impl Default for PolynomialFamilies {
    fn default() -> Self {
        PolynomialFamilies::new()
    }
}

impl PolynomialFamilies {
    pub fn new() -> Self {
        PolynomialFamilies {
            beta: gen_beta(1).values,
            p: Vec::new(),
            q: Vec::new(),
            table: PowerTable::new(),
        }
    }

    fn ensure_beta(&mut self, n: usize) {
        if self.beta.len() <= n {
            self.beta = gen_beta(n).values;
        }
    }

    fn push_arg(&mut self) {
        let next = self.table.len();
        self.table.push(self.p[next].clone());
    }

    /// Generates `p_0..p_n`.
    pub fn ensure_p(&mut self, n: usize) {
        self.ensure_beta(n + 1);
        while self.p.len() <= n {
            let m = self.p.len();
            let pm = if m == 0 {
                &BivariatePoly::z().scale(&Rational::from(3)) - &BivariatePoly::c()
            } else {
                while self.table.len() < m {
                    self.push_arg();
                }
                let mut acc = self.table.sigma0(m).scale(&Rational::from(3));
                for k in 1..m {
                    let w = &(&pow4(k + 1) * &self.beta[k + 1]) / &Rational::from(k as i64);
                    acc.accumulate(&self.table.sigma_m(k, m - k).scale(&w));
                }
                let tail = &(&pow4(m + 1) * &self.beta[m + 1]) / &Rational::from(m as i64);
                acc.accumulate(&BivariatePoly::constant(tail));
                acc
            };
            self.p.push(pm);
        }
    }

    /// Generates `q_1..q_n`.
    pub fn ensure_q(&mut self, n: usize) {
        if n == 0 {
            return;
        }
        self.ensure_p(n - 1);
        while self.table.len() < n {
            self.push_arg();
        }
        let quarter = Rational::new(1, 4);
        while self.q.len() < n {
            let k = self.q.len() + 1;
            let inv = pow4(k).recip().expect("nonzero");
            let weights: Vec<Rational> = (0..=k)
                .map(|m| {
                    if m == 0 {
                        Rational::zero()
                    } else {
                        &inv * &Rational::binomial(&quarter, m)
                    }
                })
                .collect();
            self.q.push(self.table.compose_at(&weights, k));
        }
    }

    pub fn p(&mut self, n: usize) -> &BivariatePoly {
        self.ensure_p(n);
        &self.p[n]
    }

    pub fn q(&mut self, k: usize) -> &BivariatePoly {
        assert!(k >= 1, "q is indexed from 1");
        self.ensure_q(k);
        &self.q[k - 1]
    }

    pub fn p_family(&mut self, n: usize) -> PPolyFamily {
        self.ensure_p(n);
        PolyFamily {
            start: 0,
            polys: self.p[..=n].to_vec(),
        }
    }

    pub fn q_family(&mut self, n: usize) -> QPolyFamily {
        self.ensure_q(n);
        PolyFamily {
            start: 1,
            polys: self.q[..n].to_vec(),
        }
    }
}

pub fn gen_p(n: usize) -> PPolyFamily {
    PolynomialFamilies::new().p_family(n)
}

/// `q_1..q_n`; for `n = 0` the family is empty.
pub fn gen_q(n: usize) -> QPolyFamily {
    PolynomialFamilies::new().q_family(n)
}

pub fn gen_lambert_p(n: usize) -> LambertPolyFamily {
    let mut table: PowerTable<BivariatePoly> = PowerTable::new();
    let mut polys = vec![BivariatePoly::z()];
    for k in 0..n {
        table.push(polys[k].clone());
        polys.push(table.sigma0(k + 1));
    }
    PolyFamily { start: 0, polys }
}
