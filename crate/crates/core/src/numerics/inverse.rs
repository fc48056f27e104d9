//! Inversion of `G`.
//!
//! For `x > 4` the map `T(y) = x + y - G(y)` is iterated from `y = x`. Its
//! iterates increase monotonically and contract with ratio at most `4/x` once
//! `x` is large enough; both properties are checked on every iteration, and if
//! either fails the inversion falls back to a bracketed Newton/bisection
//! search. Small `x` uses the bracketed search directly.

use serde::{Deserialize, Serialize};

use super::gproblem::{compute_G, GProblem};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::numerics::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InversionRoute {
    FixedPoint,
    Bracketed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion {
    pub y: Dd,
    pub iterations: usize,
    pub route: InversionRoute,
}

/// `y` with `G(y) = x`.
#[allow(non_snake_case)]
pub fn invert_G(x: Dd, problem: &GProblem, cfg: &SolverConfig) -> Result<Dd> {
    Ok(invert_G_detailed(x, problem, cfg)?.y)
}

#[allow(non_snake_case)]
pub fn invert_G_detailed(x: Dd, problem: &GProblem, cfg: &SolverConfig) -> Result<Inversion> {
    if !(x >= Dd::ZERO) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "G maps onto [0, inf); cannot invert {:e}",
            x.to_f64()
        )));
    }
    if x == Dd::ZERO {
        return Ok(Inversion {
            y: problem.x0(),
            iterations: 0,
            route: InversionRoute::Bracketed,
        });
    }
    if x > Dd::from(4.0) && x >= problem.x0() {
        if let Some(inv) = fixed_point(x, problem, cfg)? {
            return Ok(inv);
        }
    }
    bracketed(x, problem, cfg)
}

fn converged(step: Dd, y: Dd, cfg: &SolverConfig) -> bool {
    step.abs().to_f64() <= cfg.fixed_point_tol * y.abs().to_f64().max(1.0)
}

// None when monotonicity or contraction is violated
fn fixed_point(x: Dd, problem: &GProblem, cfg: &SolverConfig) -> Result<Option<Inversion>> {
    let ratio_bound = 4.0 / x.to_f64();
    let slack = 1e-28 * x.to_f64();
    let mut y = x;
    let mut prev_step: Option<f64> = None;
    for n in 1..=cfg.max_fixed_point_iter {
        let step = x - compute_G(y, problem, cfg)?;
        let s = step.to_f64();
        if s < -slack {
            return Ok(None);
        }
        if let Some(p) = prev_step {
            if s.abs() > ratio_bound * p.abs() + slack {
                return Ok(None);
            }
        }
        y += step;
        if converged(step, y, cfg) {
            return Ok(Some(Inversion {
                y,
                iterations: n,
                route: InversionRoute::FixedPoint,
            }));
        }
        prev_step = Some(s);
    }
    Err(Error::Convergence {
        what: "fixed-point inversion of G".into(),
        iterations: cfg.max_fixed_point_iter,
    })
}

fn bracketed(x: Dd, problem: &GProblem, cfg: &SolverConfig) -> Result<Inversion> {
    let x0 = problem.x0();
    let mut lo = x0;
    let mut hi = x0 + x + 1.0;
    let mut expand = 0;
    while compute_G(hi, problem, cfg)? < x {
        lo = hi;
        hi = hi * 2.0 + 1.0;
        expand += 1;
        if expand > 200 {
            return Err(Error::Convergence {
                what: "bracketing G^-1".into(),
                iterations: expand,
            });
        }
    }
    let mut y = (lo + hi).mul_pow2(0.5);
    let limit = 4 * cfg.max_fixed_point_iter;
    for n in 1..=limit {
        let f = compute_G(y, problem, cfg)? - x;
        if f > Dd::ZERO {
            hi = y;
        } else {
            lo = y;
        }
        // G' = 1 / g(4/y)
        let newton = y - f * problem.g_at_x(y)?;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi).mul_pow2(0.5)
        };
        let step = next - y;
        y = next;
        if converged(step, y, cfg) || (hi - lo).to_f64() <= cfg.fixed_point_tol * y.to_f64() {
            return Ok(Inversion {
                y,
                iterations: n,
                route: InversionRoute::Bracketed,
            });
        }
    }
    Err(Error::Convergence {
        what: "bracketed inversion of G".into(),
        iterations: limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (GProblem, SolverConfig) {
        let cfg = SolverConfig {
            fixed_point_tol: 1e-26,
            ..SolverConfig::default().with_tolerances(1e-26, 1e-28)
        };
        (GProblem::from_initial_data(
            &crate::numerics::InitialData::new(0.0, 1.0, 1.0).unwrap(),
            &cfg,
        )
        .unwrap(), cfg)
    }

    #[test]
    fn zero_maps_to_x0() {
        let (p, cfg) = setup();
        assert_eq!(invert_G(Dd::ZERO, &p, &cfg).unwrap(), p.x0());
        assert!(invert_G(Dd::from(-1.0), &p, &cfg).is_err());
    }

    #[test]
    fn round_trip_and_routes() {
        let (p, cfg) = setup();
        for x in [0.5, 3.0, 50.0, 1e3, 1e5] {
            let inv = invert_G_detailed(Dd::from(x), &p, &cfg).unwrap();
            let back = compute_G(inv.y, &p, &cfg).unwrap();
            assert!((back - x).abs().to_f64() < 1e-20 * x.max(1.0), "{x}");
            if x >= 1e3 {
                assert_eq!(inv.route, InversionRoute::FixedPoint);
            }
        }
    }
}
