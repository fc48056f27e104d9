//! The reduced first-order problem for `g(z) = h^3 h'` as a function of
//! `z = 4 / h^4`, the function `G` and the constant `c`.
//!
//! With `x = 4 / z` (so `x = h^4` along a solution) the equation
//! `z^2 g' = 1 - 1/g - 3/4 z g` becomes `dg/dx = (1/g - 1 + 3g/x) / 4`, whose
//! linearization decays at rate about `1/4`. It is integrated from `x0`
//! upward to a crossover `x_c`; beyond it `g` is the truncated formal series
//! `sum alpha_k z^k`, and `1/g` the reciprocal series `sum beta_k z^k`.
//!
//! `G(x) = int_{x0}^x ds / g(4/s)` is assembled as
//! `Phi(x) + (x - x0) - 3 ln(x / x0)` with `Phi` the integral of
//! `phi(s) = 1/g(4/s) - 1 + 3/s`, which decays like `s^-2`.

use serde::{Deserialize, Serialize};

use super::quadrature::integrate_adaptive;
use super::taylor::{self, Node, StepStats, TaylorSystem};
use super::trajectory::{integrate_h, InitialData};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::numerics::SolverConfig;
use crate::recursions::{gen_alpha, gen_beta};

const SERIES_ORDER: usize = 40;

struct GSystem;

impl TaylorSystem<1> for GSystem {
    fn expand(&self, x: Dd, s: &[Dd; 1], order: usize, c: &mut [Vec<Dd>; 1]) -> Result<()> {
        let g = &mut c[0];
        g[0] = s[0];
        let inv_g0 = s[0].recip();
        let inv_x = x.recip();
        // v = 1/x about x: v_k = (-1)^k / x^(k+1)
        let mut v = vec![Dd::ZERO; order];
        v[0] = inv_x;
        for k in 1..order {
            v[k] = -v[k - 1] * inv_x;
        }
        // w = 1/g: w_k = -(1/g_0) sum_{j=1}^k g_j w_{k-j}
        let mut w = vec![Dd::ZERO; order];
        w[0] = inv_g0;
        for k in 0..order {
            if k > 0 {
                let mut acc = Dd::ZERO;
                for j in 1..=k {
                    acc += g[j] * w[k - j];
                }
                w[k] = -acc * inv_g0;
            }
            let mut gv = Dd::ZERO;
            for j in 0..=k {
                gv += g[j] * v[k - j];
            }
            let mut rhs = w[k] + gv * 3.0;
            if k == 0 {
                rhs -= Dd::ONE;
            }
            g[k + 1] = rhs / (4.0 * (k + 1) as f64);
        }
        Ok(())
    }

    fn dominant_eigenvalue(&self, x: Dd, s: &[Dd; 1]) -> Option<(f64, f64)> {
        let g = s[0].to_f64();
        let lambda = 0.25 * (3.0 / x.to_f64() - 1.0 / (g * g));
        (lambda < 0.0).then_some((-lambda, std::f64::consts::PI))
    }

    fn check_state(&self, x: Dd, s: &[Dd; 1]) -> Result<()> {
        if s[0] > Dd::ZERO {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "g reached a non-positive value at z = {:e}",
                4.0 / x.to_f64()
            )))
        }
    }
}

/// Numerical representation of `g` on `(0, z0]` and the constant `c`.
#[derive(Clone, Debug)]
pub struct GProblem {
    x0: Dd,
    g0: Dd,
    // time at which (h0, h1) is taken
    time_origin: Dd,
    x_c: Dd,
    // Taylor blocks in x; the last node only marks the end point x_c
    nodes: Vec<Node<1>>,
    // Phi at each node
    cum_phi: Vec<Dd>,
    alpha: Vec<Dd>,
    beta: Vec<Dd>,
    c: Dd,
    stats: StepStats,
    rel_tol: f64,
    abs_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GProblemSummary {
    pub z0: f64,
    pub g0: f64,
    pub c: f64,
    /// `c` with 32 significant digits.
    pub c_digits: String,
    pub crossover: f64,
    pub time_origin: f64,
    pub ode_steps: usize,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Partial sums of `sum coeffs[k] z^k` for `k >= start`, stopped at the
/// smallest term. Returns the sum and the magnitude of the last term used.
fn series_sum(coeffs: &[Dd], z: Dd, start: usize) -> (Dd, f64) {
    let mut acc = Dd::ZERO;
    let mut zk = z.powi(start as i32);
    let mut last = f64::INFINITY;
    for a in &coeffs[start..] {
        let term = *a * zk;
        let mag = term.abs().to_f64();
        if mag > last {
            break;
        }
        acc += term;
        last = mag;
        if mag == 0.0 {
            break;
        }
        zk *= z;
    }
    (acc, last)
}

/// Largest `z` with `|alpha_7 z^7 + alpha_8 z^8| < tol`.
fn series_crossover(alpha: &[Dd], tol: f64) -> f64 {
    let f = |z: f64| (alpha[7].to_f64() * z.powi(7) + alpha[8].to_f64() * z.powi(8)).abs();
    let (mut lo, mut hi) = (0.0, 1.0);
    if f(hi) < tol {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Solves for `g` from `g(z0) = g0` toward `z = 0` and evaluates `c`.
pub fn solve_g(z0: Dd, g0: Dd, cfg: &SolverConfig) -> Result<GProblem> {
    solve_g_at(z0, g0, Dd::ZERO, cfg)
}

fn solve_g_at(z0: Dd, g0: Dd, time_origin: Dd, cfg: &SolverConfig) -> Result<GProblem> {
    cfg.validate()?;
    if !(z0 > Dd::ZERO && z0.is_finite()) {
        return Err(Error::Domain("z0 must be positive".into()));
    }
    if !(g0 > Dd::ZERO && g0.is_finite()) {
        return Err(Error::Domain(
            "g0 = h0^3 h1 must be positive; shift the data past the point where h' > 0".into(),
        ));
    }
    let x0 = Dd::from(4.0) / z0;
    let alpha: Vec<Dd> = gen_alpha(SERIES_ORDER).values.iter().map(|r| r.to_dd()).collect();
    let beta: Vec<Dd> = gen_beta(SERIES_ORDER).values.iter().map(|r| r.to_dd()).collect();

    let tol = cfg.rel_tol;
    let x_series = 4.0 / series_crossover(&alpha, tol);
    // solutions approach each other like exp(-x/4) (x/x0)^(3/4)
    let x0f = x0.to_f64();
    let g0f = g0.to_f64();
    let mut x_c = x_series;
    for _ in 0..3 {
        let transient = 4.0
            * ((1.0 / tol).ln()
                + (2.0 + g0f + 1.0 / g0f).ln()
                + 0.75 * (x_c / x0f).ln().max(0.0)
                + 5.0);
        x_c = x_series.max(x0f + transient);
    }
    let x_c = Dd::from(x_c);

    let (nodes, stats) = taylor::integrate(&GSystem, x0, [g0], x_c, &[], cfg, true)?;

    let mut problem = GProblem {
        x0,
        g0,
        time_origin,
        x_c,
        nodes,
        cum_phi: Vec::new(),
        alpha,
        beta,
        c: Dd::ZERO,
        stats,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
    };

    let g_end = problem.nodes[problem.nodes.len() - 1].state[0];
    let g_series = problem.g_series(Dd::from(4.0) / x_c);
    let mismatch = (g_end - g_series).abs().to_f64();
    if mismatch > 100.0 * (tol + cfg.abs_tol) {
        return Err(Error::Accuracy(format!(
            "numerical g and its series disagree by {mismatch:e} at the crossover z = {:e}",
            4.0 / x_c.to_f64()
        )));
    }

    let mut cum = Vec::with_capacity(problem.nodes.len());
    let mut acc = Dd::ZERO;
    cum.push(acc);
    for i in 0..problem.nodes.len() - 1 {
        let (a, b) = (problem.nodes[i].t, problem.nodes[i + 1].t);
        let tol = problem.quad_tolerance(cfg, a, b);
        acc += integrate_adaptive(|x| Ok(problem.phi_in_step(i, x)), a, b, 0.0, tol)?;
        cum.push(acc);
    }
    problem.cum_phi = cum;
    problem.c = compute_c(&problem, cfg)?;
    Ok(problem)
}

impl GProblem {
    /// Builds the reduced problem for data `(t0, h0, h1)`. If `h1 <= 0` the
    /// solution is first followed until `h' > 0`; `c` always refers to the
    /// time origin of the original data.
    pub fn from_initial_data(data: &InitialData, cfg: &SolverConfig) -> Result<GProblem> {
        let (sigma, h, hp) = if data.h1 > Dd::ZERO {
            (data.t0, data.h0, data.h1)
        } else {
            first_increasing_point(data, cfg)?
        };
        let z0 = Dd::from(4.0) / h.powi(4);
        let g0 = h.powi(3) * hp;
        solve_g_at(z0, g0, sigma, cfg)
    }

    pub fn z0(&self) -> Dd {
        Dd::from(4.0) / self.x0
    }

    pub fn x0(&self) -> Dd {
        self.x0
    }

    pub fn g0(&self) -> Dd {
        self.g0
    }

    pub fn time_origin(&self) -> Dd {
        self.time_origin
    }

    /// Crossover point `z_c` below which the series represents `g`.
    pub fn crossover(&self) -> Dd {
        Dd::from(4.0) / self.x_c
    }

    /// The constant `c` of the expansion, referenced to the data's time origin.
    pub fn c(&self) -> Dd {
        self.c
    }

    pub fn stats(&self) -> &StepStats {
        &self.stats
    }

    // phi is a difference of O(1) terms, so its panels are resolved to an
    // absolute tolerance proportional to their width
    fn quad_tolerance(&self, cfg: &SolverConfig, a: Dd, b: Dd) -> f64 {
        (1e-3 * cfg.rel_tol).max(1e-31) * (b - a).abs().to_f64()
    }

    fn g_series(&self, z: Dd) -> Dd {
        series_sum(&self.alpha, z, 0).0
    }

    fn g_in_step(&self, i: usize, x: Dd) -> Dd {
        let node = &self.nodes[i];
        let dt = x - node.t;
        node.coeffs.iter().rev().fold(Dd::ZERO, |acc, c| acc * dt + c[0])
    }

    fn phi_in_step(&self, i: usize, x: Dd) -> Dd {
        self.g_in_step(i, x).recip() - 1.0 + Dd::from(3.0) / x
    }

    // index of the Taylor block containing x in [x0, x_c]
    fn step_index(&self, x: Dd) -> usize {
        let i = self.nodes.partition_point(|n| n.t <= x);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// `g` as a function of `x = 4/z`, for `x >= x0`.
    pub fn g_at_x(&self, x: Dd) -> Result<Dd> {
        if !(x >= self.x0) {
            return Err(Error::Domain(format!(
                "x = {:e} below x0 = {:e}",
                x.to_f64(),
                self.x0.to_f64()
            )));
        }
        if x >= self.x_c {
            return Ok(self.g_series(Dd::from(4.0) / x));
        }
        Ok(self.g_in_step(self.step_index(x), x))
    }

    /// `g(z)` for `0 < z <= z0`.
    pub fn g(&self, z: Dd) -> Result<Dd> {
        if !(z > Dd::ZERO) {
            return Err(Error::Domain("z must be positive".into()));
        }
        self.g_at_x(Dd::from(4.0) / z)
    }

    /// `phi(x) = 1/g(4/x) - 1 + 3/x`.
    pub fn phi(&self, x: Dd) -> Result<Dd> {
        if x >= self.x_c {
            return Ok(series_sum(&self.beta, Dd::from(4.0) / x, 2).0);
        }
        Ok(self.g_at_x(x)?.recip() - 1.0 + Dd::from(3.0) / x)
    }

    /// `int_{x0}^{x} phi`.
    fn integral_phi(&self, x: Dd, cfg: &SolverConfig) -> Result<Dd> {
        if x >= self.x_c {
            let last = self.cum_phi[self.cum_phi.len() - 1];
            return Ok(last + self.series_phi_integral(self.x_c, x).0);
        }
        let i = self.step_index(x);
        let a = self.nodes[i].t;
        let tol = self.quad_tolerance(cfg, a, x);
        let part = integrate_adaptive(|s| Ok(self.phi_in_step(i, s)), a, x, 0.0, tol)?;
        Ok(self.cum_phi[i] + part)
    }

    /// `int_a^b phi` from the beta series, `a, b >= x_c` (`b` may be infinite).
    /// Returns the value and the magnitude of the last term.
    fn series_phi_integral(&self, a: Dd, b: Dd) -> (Dd, f64) {
        // int_a^inf (4/s)^k ds = 4 (4/a)^(k-1) / (k-1)
        let tail_from = |x: Dd| -> (Dd, f64) {
            let z = Dd::from(4.0) / x;
            let coeffs: Vec<Dd> = (1..self.beta.len())
                .map(|k| if k < 2 { Dd::ZERO } else { self.beta[k] * 4.0 / (k - 1) as f64 })
                .collect();
            series_sum(&coeffs, z, 1)
        };
        let (ta, ea) = tail_from(a);
        if !b.is_finite() {
            return (ta, ea);
        }
        let (tb, eb) = tail_from(b);
        (ta - tb, ea.max(eb))
    }

    pub fn summary(&self) -> GProblemSummary {
        GProblemSummary {
            z0: self.z0().to_f64(),
            g0: self.g0.to_f64(),
            c: self.c.to_f64(),
            c_digits: self.c.to_sci_string(32),
            crossover: self.crossover().to_f64(),
            time_origin: self.time_origin.to_f64(),
            ode_steps: self.stats.steps,
            tolerances: Tolerances {
                rel_tol: self.rel_tol,
                abs_tol: self.abs_tol,
            },
        }
    }
}

fn first_increasing_point(data: &InitialData, cfg: &SolverConfig) -> Result<(Dd, Dd, Dd)> {
    let quiet = SolverConfig {
        estimate_error: false,
        ..cfg.clone()
    };
    let mut horizon = 16.0;
    while horizon <= 4096.0 {
        let traj = integrate_h(data, data.t0 + horizon, &quiet)?;
        let mut positive_since: Option<Dd> = None;
        for s in traj.samples() {
            if s.hprime > Dd::ZERO {
                let since = *positive_since.get_or_insert(s.t);
                // move a unit of time past the sign change so g0 is not tiny
                if s.t - since >= Dd::ONE {
                    return Ok((s.t, s.h, s.hprime));
                }
            } else {
                positive_since = None;
            }
        }
        horizon *= 4.0;
    }
    Err(Error::Convergence {
        what: "search for a time with h' > 0".into(),
        iterations: 0,
    })
}

/// `G(x) = int_{h0^4}^{x} ds / g(4/s)` for `x >= h0^4`.
#[allow(non_snake_case)]
pub fn compute_G(x: Dd, problem: &GProblem, cfg: &SolverConfig) -> Result<Dd> {
    let x0 = problem.x0;
    if !(x >= x0) {
        return Err(Error::Domain(format!(
            "G is defined for x >= h0^4 = {:e}, got {:e}",
            x0.to_f64(),
            x.to_f64()
        )));
    }
    if x == x0 {
        return Ok(Dd::ZERO);
    }
    Ok(problem.integral_phi(x, cfg)? + (x - x0) - (x / x0).ln() * 3.0)
}

/// `c = int_{x0}^inf phi - x0 + 3 ln x0`, plus `4 t_origin` so that it refers
/// to the time origin of the data. The integral is split at `S` (the
/// configured tail split or the crossover); beyond `S` it is summed from the
/// beta series until a term drops below the tolerance.
pub fn compute_c(problem: &GProblem, cfg: &SolverConfig) -> Result<Dd> {
    let split = cfg.tail_split.map(Dd::from).unwrap_or(problem.x_c);
    if !(split > problem.x0) {
        return Err(Error::Config(format!(
            "tail split {:e} must exceed h0^4 = {:e}",
            split.to_f64(),
            problem.x0.to_f64()
        )));
    }
    let body = problem.integral_phi(split, cfg)?;
    let (tail, last_term) = problem.series_phi_integral(split, Dd::INFINITY);
    let limit = 1e-2 * cfg.rel_tol.max(1e-30) * (1.0 + body.abs().to_f64());
    if !(last_term <= limit) {
        return Err(Error::Accuracy(format!(
            "tail series at S = {:e} not converged: smallest term {last_term:e} exceeds {limit:e}",
            split.to_f64()
        )));
    }
    let x0 = problem.x0;
    Ok(body + tail - x0 + x0.ln() * 3.0 + problem.time_origin * 4.0)
}
