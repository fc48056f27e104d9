//! Evaluation of the large-time expansion of `h` and the studies that check
//! it against numerical solutions.
//!
//! `A_n(c; t) = (4t)^{1/4} (1 + sum_{k=1}^n q_k(c; ln 4t) / t^k)`.
//! Remainders are normalized by `(4t)^{1/4} (ln t / t)^{n+1}`.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::exact::{BivariatePoly, NumericPoly, Rational};
use crate::numerics::{
    integrate_h_with_stops, lambert_residual, lambert_wm1_numeric, InitialData, SolverConfig, Trajectory,
};
use crate::recursions::{gen_beta, gen_lambert_p, PPolyFamily, PolynomialFamilies, QPolyFamily};

/// Growth allowed for a normalized remainder between the first and last grid
/// point before the study reports failure.
pub const DEFAULT_GROWTH_LIMIT: f64 = 10.0;

/// Fraction of the remainder scale the integrator error may reach.
pub const ACCURACY_GATE_FRACTION: f64 = 0.01;

const NEWTON_MAX_ITER: usize = 60;

/// Expansion order used by [`fit_c_for_data`].
pub const FIT_ORDER: usize = 10;
/// Fit times used by [`fit_c_for_data`], counted from `max(t0, 0)`.
pub const FIT_TIMES: [f64; 2] = [3e3, 1e4];
/// Largest spread of the fitted values accepted by [`fit_c_for_data`].
pub const FIT_SPREAD_TOL: f64 = 1e-8;

/// The `c`-independent part of the expansion: `p_0..p_N`, `q_1..q_N` and
/// their double-double forms.
#[derive(Debug)]
pub struct ExpansionTerms {
    order: usize,
    p: PPolyFamily,
    q: QPolyFamily,
    p_num: Vec<NumericPoly>,
    q_num: Vec<NumericPoly>,
}

impl ExpansionTerms {
    pub fn new(order: usize) -> Self {
        let mut fam = PolynomialFamilies::new();
        let p = fam.p_family(order);
        let q = fam.q_family(order);
        ExpansionTerms::from_families(p, q)
    }

    /// Uses families generated elsewhere. Both must start at their natural
    /// index and the order is the smaller of the two lengths.
    pub fn from_families(p: PPolyFamily, q: QPolyFamily) -> Self {
        assert_eq!(p.start, 0, "p family starts at p_0");
        assert_eq!(q.start, 1, "q family starts at q_1");
        let order = (p.polys.len() - 1).min(q.polys.len());
        let p_num = p.polys.iter().map(BivariatePoly::to_numeric).collect();
        let q_num = q.polys.iter().map(BivariatePoly::to_numeric).collect();
        ExpansionTerms {
            order,
            p,
            q,
            p_num,
            q_num,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn p_polys(&self) -> &PPolyFamily {
        &self.p
    }

    pub fn q_polys(&self) -> &QPolyFamily {
        &self.q
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.order {
            return Err(Error::Domain(format!(
                "order {n} requested from an expansion of order {}",
                self.order
            )));
        }
        Ok(())
    }

    // (sum_{k=1}^n q_k(c; z) / t^k, its derivative in c)
    fn q_sum(&self, n: usize, c: Dd, t: Dd) -> (Dd, Dd) {
        let z = (t * 4.0).ln();
        let inv = t.recip();
        let (mut s, mut ds) = (Dd::ZERO, Dd::ZERO);
        for k in (1..=n).rev() {
            let q = &self.q_num[k - 1];
            s = (s + q.eval(c, z)) * inv;
            ds = (ds + q.eval_dc(c, z)) * inv;
        }
        (s, ds)
    }
}

/// The expansion with a fixed constant `c`. Cloning shares the polynomials.
#[derive(Clone, Debug)]
pub struct AsymptoticModel {
    c: Dd,
    terms: Arc<ExpansionTerms>,
}

impl AsymptoticModel {
    pub fn new(c: Dd, order: usize) -> Result<Self> {
        AsymptoticModel::from_terms(c, Arc::new(ExpansionTerms::new(order)))
    }

    pub fn from_terms(c: Dd, terms: Arc<ExpansionTerms>) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Domain("c must be finite".into()));
        }
        Ok(AsymptoticModel { c, terms })
    }

    /// Same polynomials, different constant.
    pub fn with_c(&self, c: Dd) -> Result<Self> {
        AsymptoticModel::from_terms(c, Arc::clone(&self.terms))
    }

    pub fn c(&self) -> Dd {
        self.c
    }

    pub fn order(&self) -> usize {
        self.terms.order
    }

    pub fn terms(&self) -> &Arc<ExpansionTerms> {
        &self.terms
    }
}

fn require_positive(name: &str, v: Dd) -> Result<()> {
    if v > Dd::ZERO && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {}", v.to_f64())))
    }
}

/// `A_n(c; t)` with `q_k` evaluated at `ln(4t)`.
#[allow(non_snake_case)]
pub fn eval_A_n(model: &AsymptoticModel, n: usize, t: Dd) -> Result<Dd> {
    model.terms.check_order(n)?;
    require_positive("t", t)?;
    let (s, _) = model.terms.q_sum(n, model.c, t);
    Ok((t * 4.0).qrt() * (s + 1.0))
}

/// `x + sum_{k=0}^n p_k(c; ln x) / x^k`.
#[allow(non_snake_case)]
pub fn eval_Ginv_asympt(model: &AsymptoticModel, n: usize, x: Dd) -> Result<Dd> {
    model.terms.check_order(n)?;
    if !(x > Dd::ONE) || !x.is_finite() {
        return Err(Error::Domain(format!("x must exceed 1, got {}", x.to_f64())));
    }
    let z = x.ln();
    let inv = x.recip();
    let mut s = Dd::ZERO;
    for k in (0..=n).rev() {
        s = s * inv + model.terms.p_num[k].eval(model.c, z);
    }
    Ok(x + s)
}

/// `x - 3 ln x + c - 4 sum_{k=1}^N beta_{k+1} / k (4/x)^k`.
#[allow(non_snake_case)]
pub fn eval_G_asympt(c: Dd, big_n: usize, x: Dd) -> Result<Dd> {
    require_positive("x", x)?;
    let beta = gen_beta(big_n + 1).values;
    let w = Dd::from(4.0) / x;
    let mut s = Dd::ZERO;
    for k in (1..=big_n).rev() {
        let b = (&beta[k + 1] / &Rational::from(k as i64)).to_dd();
        s = (s + b) * w;
    }
    Ok(x - x.ln() * 3.0 + c - s * 4.0)
}

/// A source of `h(t)` values with an optional global error estimate.
pub trait HSampler {
    fn h_at(&self, t: Dd) -> Result<Dd>;

    /// `None` when the sampler carries no estimate.
    fn error_at(&self, t: Dd) -> Option<f64>;
}

impl HSampler for Trajectory {
    fn h_at(&self, t: Dd) -> Result<Dd> {
        self.h(t)
    }

    fn error_at(&self, t: Dd) -> Option<f64> {
        self.error_estimate(t)
    }
}

/// `h := A_n(c; t)` exactly, with zero error.
#[derive(Clone, Debug)]
pub struct SyntheticSolution {
    pub model: AsymptoticModel,
    pub n: usize,
}

impl SyntheticSolution {
    pub fn new(model: AsymptoticModel, n: usize) -> Result<Self> {
        model.terms.check_order(n)?;
        Ok(SyntheticSolution { model, n })
    }
}

impl HSampler for SyntheticSolution {
    fn h_at(&self, t: Dd) -> Result<Dd> {
        eval_A_n(&self.model, self.n, t)
    }

    fn error_at(&self, _t: Dd) -> Option<f64> {
        Some(0.0)
    }
}

/// Solves `A_n(c; t_fit) = h(t_fit)` for `c`, starting from the order-one
/// closed form. For `n <= 1` the closed form is the answer.
pub fn fit_c_from_trajectory<S: HSampler + ?Sized>(
    terms: &ExpansionTerms,
    sampler: &S,
    n: usize,
    t_fit: Dd,
) -> Result<Dd> {
    terms.check_order(n)?;
    require_positive("t_fit", t_fit)?;
    let h = sampler.h_at(t_fit)?;
    let x = t_fit * 4.0;
    let root = x.qrt();
    let mut c = x.ln() * 3.0 - t_fit * 16.0 * (h / root - 1.0);
    if n <= 1 {
        return Ok(c);
    }
    let target = h / root - 1.0;
    for _ in 0..NEWTON_MAX_ITER {
        let (s, ds) = terms.q_sum(n, c, t_fit);
        if ds == Dd::ZERO || !ds.is_finite() {
            break;
        }
        let step = (s - target) / ds;
        c -= step;
        if !c.is_finite() {
            break;
        }
        if step.abs().to_f64() <= 1e-30 * c.abs().to_f64().max(1.0) {
            return Ok(c);
        }
    }
    Err(Error::Convergence {
        what: format!("Newton solve for c at t = {}", t_fit.to_f64()),
        iterations: NEWTON_MAX_ITER,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n: usize,
    pub t_fit: Vec<f64>,
    pub c_values: Vec<f64>,
    /// Fit at the largest `t`.
    pub c: f64,
    pub spread: f64,
    pub spread_tol: f64,
}

/// Fits at every point of `t_fit` and reports the spread. A spread above
/// `spread_tol` is an accuracy error.
pub fn fit_c_report<S: HSampler + ?Sized>(
    terms: &ExpansionTerms,
    sampler: &S,
    n: usize,
    t_fit: &[Dd],
    spread_tol: f64,
) -> Result<(Dd, FitReport)> {
    if t_fit.is_empty() {
        return Err(Error::Domain("no fit points".into()));
    }
    let mut cs = Vec::with_capacity(t_fit.len());
    for &t in t_fit {
        cs.push(fit_c_from_trajectory(terms, sampler, n, t)?);
    }
    let lo = cs.iter().copied().fold(Dd::INFINITY, Dd::min);
    let hi = cs.iter().copied().fold(-Dd::INFINITY, Dd::max);
    let spread = (hi - lo).to_f64();
    let best = cs[cs.len() - 1];
    let report = FitReport {
        n,
        t_fit: t_fit.iter().map(|t| t.to_f64()).collect(),
        c_values: cs.iter().map(|c| c.to_f64()).collect(),
        c: best.to_f64(),
        spread,
        spread_tol,
    };
    if !(spread <= spread_tol) {
        return Err(Error::Accuracy(format!(
            "fitted c varies by {spread:e} across t_fit (allowed {spread_tol:e})"
        )));
    }
    Ok((best, report))
}

/// The fit route for `c`: integrates from `data` past the points of
/// [`FIT_TIMES`] and fits at order [`FIT_ORDER`].
pub fn fit_c_for_data(data: &InitialData, cfg: &SolverConfig) -> Result<(Dd, FitReport)> {
    let base = data.t0.max(Dd::ZERO);
    let times: Vec<Dd> = FIT_TIMES.iter().map(|&t| base + t).collect();
    let traj = integrate_h_with_stops(data, times[times.len() - 1], &times, cfg)?;
    let terms = ExpansionTerms::new(FIT_ORDER);
    fit_c_report(&terms, &traj, FIT_ORDER, &times, FIT_SPREAD_TOL)
}

/// `(4t)^{1/4} (ln t / t)^{n+1}`.
pub fn remainder_scale(n: usize, t: Dd) -> Dd {
    (t * 4.0).qrt() * (t.ln() / t).powi(n as i32 + 1)
}

fn check_grid(name: &str, grid: &[Dd], lower: Dd) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{name} is empty")));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain(format!("{name} must be strictly increasing")));
        }
    }
    if !(grid[0] > lower) || !grid[grid.len() - 1].is_finite() {
        return Err(Error::Domain(format!(
            "{name} entries must be finite and exceed {}",
            lower.to_f64()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderEntry {
    pub n: usize,
    pub t: f64,
    pub h_num: f64,
    pub a_n: f64,
    pub diff: f64,
    pub ratio: f64,
    pub error_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderSummary {
    pub n: usize,
    pub max_ratio: f64,
    /// Ratio at the last grid point over the ratio at the first.
    pub growth: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub c: f64,
    pub growth_limit: f64,
    pub entries: Vec<RemainderEntry>,
    pub summary: Vec<RemainderSummary>,
    pub passed: bool,
}

impl RemainderReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Columns `n,t,h_num,A_n,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t,h_num,A_n,ratio\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e},{:.16e}", e.n, e.t, e.h_num, e.a_n, e.ratio);
        }
        out
    }
}

/// `R_n(t) = |h(t) - A_n(c; t)| / ((4t)^{1/4} (ln t / t)^{n+1})` for
/// `n = 0..=n_max` over `t_grid`.
///
/// Fails with [`Error::AccuracyGate`] when the sampler's error estimate is
/// missing or exceeds 1% of the remainder scale at any grid point.
pub fn remainder_study<S: HSampler + ?Sized>(
    model: &AsymptoticModel,
    sampler: &S,
    n_max: usize,
    t_grid: &[Dd],
    growth_limit: f64,
) -> Result<RemainderReport> {
    model.terms.check_order(n_max)?;
    check_grid("t grid", t_grid, Dd::ONE)?;
    let mut h_vals = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let err = sampler.error_at(t).unwrap_or(f64::INFINITY);
        h_vals.push((sampler.h_at(t)?, err));
    }
    let mut entries = Vec::new();
    let mut summary = Vec::new();
    for n in 0..=n_max {
        let mut ratios = Vec::with_capacity(t_grid.len());
        for (&t, &(h, err)) in t_grid.iter().zip(&h_vals) {
            let scale = remainder_scale(n, t);
            if !(err <= ACCURACY_GATE_FRACTION * scale.to_f64()) {
                return Err(Error::AccuracyGate {
                    n,
                    t: t.to_f64(),
                    estimate: err,
                    scale: scale.to_f64(),
                });
            }
            let a = eval_A_n(model, n, t)?;
            let diff = (h - a).abs();
            let ratio = (diff / scale).to_f64();
            ratios.push(ratio);
            entries.push(RemainderEntry {
                n,
                t: t.to_f64(),
                h_num: h.to_f64(),
                a_n: a.to_f64(),
                diff: diff.to_f64(),
                ratio,
                error_estimate: err,
            });
        }
        let first = ratios[0];
        let last = ratios[ratios.len() - 1];
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        let passed = ratios.iter().all(|r| r.is_finite()) && last <= growth_limit * first;
        summary.push(RemainderSummary {
            n,
            max_ratio,
            growth: last / first,
            passed,
        });
    }
    let passed = summary.iter().all(|s| s.passed);
    Ok(RemainderReport {
        c: model.c.to_f64(),
        growth_limit,
        entries,
        summary,
        passed,
    })
}

/// `|A_n(c; t+s) - A_n(c - 4s; t)| / (t^{1/4} (ln t / t)^{n+1})` per grid
/// point.
pub fn shift_invariance_profile(
    model: &AsymptoticModel,
    n: usize,
    s: Dd,
    t_grid: &[Dd],
) -> Result<Vec<f64>> {
    let lower = if s < Dd::ZERO { (-s).max(Dd::ONE) } else { Dd::ONE };
    check_grid("t grid", t_grid, lower)?;
    let shifted = model.with_c(model.c - s * 4.0)?;
    t_grid
        .iter()
        .map(|&t| {
            let a = eval_A_n(model, n, t + s)?;
            let b = eval_A_n(&shifted, n, t)?;
            let norm = t.qrt() * (t.ln() / t).powi(n as i32 + 1);
            Ok(((a - b).abs() / norm).to_f64())
        })
        .collect()
}

/// Maximum of [`shift_invariance_profile`] over the grid.
pub fn shift_invariance_check(model: &AsymptoticModel, n: usize, s: Dd, t_grid: &[Dd]) -> Result<f64> {
    Ok(shift_invariance_profile(model, n, s, t_grid)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambertRow {
    pub n: usize,
    pub x: f64,
    pub y_numeric: f64,
    pub series: f64,
    /// `|y e^-y - e^-x|` relative to `e^-x`.
    pub residual: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambertReport {
    pub growth_limit: f64,
    pub rows: Vec<LambertRow>,
    pub summary: Vec<RemainderSummary>,
    pub max_residual: f64,
    pub passed: bool,
}

impl LambertReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,y_numeric,series,residual,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n, r.x, r.y_numeric, r.series, r.residual, r.ratio
            );
        }
        out
    }
}

/// Largest root residual accepted by [`lambert_compare`].
pub const LAMBERT_RESIDUAL_TOL: f64 = 1e-12;

/// Compares the larger root of `y - ln y = x` with
/// `x + sum_{k=0}^n pt_k(ln x) / x^k` for `n = 0..=n_max`, normalizing the
/// difference by `(ln x / x)^{n+1}`.
pub fn lambert_compare(n_max: usize, x_grid: &[Dd], growth_limit: f64) -> Result<LambertReport> {
    check_grid("x grid", x_grid, Dd::ONE)?;
    let polys: Vec<NumericPoly> = gen_lambert_p(n_max)
        .polys
        .iter()
        .map(BivariatePoly::to_numeric)
        .collect();
    let mut numeric = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let y = lambert_wm1_numeric(x)?;
        numeric.push((y, lambert_residual(x, y)));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for n in 0..=n_max {
        let mut ratios = Vec::with_capacity(x_grid.len());
        for (&x, &(y, residual)) in x_grid.iter().zip(&numeric) {
            let z = x.ln();
            let inv = x.recip();
            let mut s = Dd::ZERO;
            for k in (0..=n).rev() {
                s = s * inv + polys[k].eval(Dd::ZERO, z);
            }
            let series = x + s;
            let ratio = ((y - series).abs() / (z / x).powi(n as i32 + 1)).to_f64();
            ratios.push(ratio);
            rows.push(LambertRow {
                n,
                x: x.to_f64(),
                y_numeric: y.to_f64(),
                series: series.to_f64(),
                residual,
                ratio,
            });
        }
        let first = ratios[0];
        let last = ratios[ratios.len() - 1];
        summary.push(RemainderSummary {
            n,
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            growth: last / first,
            passed: ratios.iter().all(|r| r.is_finite()) && last <= growth_limit * first,
        });
    }
    let max_residual = numeric.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    let passed = max_residual <= LAMBERT_RESIDUAL_TOL && summary.iter().all(|s| s.passed);
    Ok(LambertReport {
        growth_limit,
        rows,
        summary,
        max_residual,
        passed,
    })
}
