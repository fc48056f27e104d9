//! Integration of `h^3 (h'' + h') = 1` as the planar system
//! `x' = y, y' = x^-3 - y`.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::taylor::{self, Node, StepStats, TaylorSystem};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::numerics::SolverConfig;

// 2^-104
const DD_EPSILON: f64 = 4.930380657631324e-32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialData {
    pub t0: Dd,
    pub h0: Dd,
    pub h1: Dd,
}

impl InitialData {
    pub fn new(t0: f64, h0: f64, h1: f64) -> Result<Self> {
        InitialData::from_dd(Dd::from(t0), Dd::from(h0), Dd::from(h1))
    }

    pub fn from_dd(t0: Dd, h0: Dd, h1: Dd) -> Result<Self> {
        if !(t0.is_finite() && h0.is_finite() && h1.is_finite()) {
            return Err(Error::Domain("initial data must be finite".into()));
        }
        if h0 <= Dd::ZERO {
            return Err(Error::Domain(format!("h0 must be positive, got {}", h0.to_f64())));
        }
        Ok(InitialData { t0, h0, h1 })
    }
}

pub(crate) struct HSystem;

impl TaylorSystem<2> for HSystem {
    fn expand(&self, _t: Dd, s: &[Dd; 2], order: usize, c: &mut [Vec<Dd>; 2]) -> Result<()> {
        let x0 = s[0];
        // u = x^-3, with x u' = -3 u x'
        let mut u = vec![Dd::ZERO; order];
        let inv_x0 = x0.recip();
        u[0] = inv_x0 * inv_x0 * inv_x0;
        c[0][0] = s[0];
        c[1][0] = s[1];
        for k in 0..order {
            if k > 0 {
                let mut acc = Dd::ZERO;
                for j in 1..=k {
                    acc += c[0][j] * u[k - j] * (k + 2 * j) as f64;
                }
                u[k] = -acc * inv_x0 / k as f64;
            }
            let kp = (k + 1) as f64;
            c[0][k + 1] = c[1][k] / kp;
            c[1][k + 1] = (u[k] - c[1][k]) / kp;
        }
        Ok(())
    }

    fn dominant_eigenvalue(&self, _t: Dd, s: &[Dd; 2]) -> Option<(f64, f64)> {
        // lambda^2 + lambda + 3 / x^4 = 0
        let x = s[0].to_f64();
        let x4 = x.powi(4);
        if x4 < 12.0 {
            let im = (12.0 / x4 - 1.0).sqrt();
            Some((3f64.sqrt() / (x * x), PI - im.atan()))
        } else {
            Some(((1.0 + (1.0 - 12.0 / x4).sqrt()) / 2.0, PI))
        }
    }

    fn check_state(&self, t: Dd, s: &[Dd; 2]) -> Result<()> {
        if s[0] > Dd::ZERO {
            Ok(())
        } else {
            Err(Error::IntegrationFailure {
                t: t.to_f64(),
                reason: "h reached a non-positive value".into(),
            })
        }
    }
}

/// Dense numerical solution `(h, h')` on `[t0, t_max]`.
///
/// Nodes are the step points of the integrator. Off-node values are obtained
/// by re-expanding the Taylor series at the preceding node, so interpolation
/// is as accurate as the step itself.
#[derive(Clone, Debug)]
pub struct Trajectory {
    data: InitialData,
    nodes: Vec<Node<2>>,
    stats: StepStats,
    rel_tol: f64,
    abs_tol: f64,
    order: usize,
    companion: Option<Box<Trajectory>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: Dd,
    pub h: Dd,
    pub hprime: Dd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub t0: f64,
    pub h0: f64,
    pub h1: f64,
    pub t_end: f64,
    pub h_end: f64,
    pub hprime_end: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub taylor_order: usize,
    pub error_estimate_end: Option<f64>,
}

pub fn integrate_h(data: &InitialData, t_max: Dd, cfg: &SolverConfig) -> Result<Trajectory> {
    integrate_h_with_stops(data, t_max, &[], cfg)
}

/// As [`integrate_h`], with nodes placed exactly at each point of `stops`.
pub fn integrate_h_with_stops(
    data: &InitialData,
    t_max: Dd,
    stops: &[Dd],
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_max > data.t0) {
        return Err(Error::Domain("t_max must exceed t0".into()));
    }
    let mut stops: Vec<Dd> = stops.to_vec();
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite stops"));
    stops.dedup();
    let (nodes, stats) = taylor::integrate(
        &HSystem,
        data.t0,
        [data.h0, data.h1],
        t_max,
        &stops,
        cfg,
        false,
    )?;
    let companion = if cfg.estimate_error {
        Some(Box::new(integrate_h_with_stops(data, t_max, &stops, &cfg.companion())?))
    } else {
        None
    };
    Ok(Trajectory {
        data: *data,
        nodes,
        stats,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        order: cfg.taylor_order,
        companion,
    })
}

impl Trajectory {
    pub fn initial_data(&self) -> &InitialData {
        &self.data
    }

    pub fn t_range(&self) -> (Dd, Dd) {
        (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t)
    }

    pub fn stats(&self) -> &StepStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        self.nodes.iter().map(|n| Sample {
            t: n.t,
            h: n.state[0],
            hprime: n.state[1],
        })
    }

    fn range_error(&self, t: Dd) -> Error {
        let (lo, hi) = self.t_range();
        Error::Range {
            t: t.to_f64(),
            lo: lo.to_f64(),
            hi: hi.to_f64(),
        }
    }

    /// `(h(t), h'(t))` from the dense representation.
    pub fn eval(&self, t: Dd) -> Result<(Dd, Dd)> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) {
            return Err(self.range_error(t));
        }
        // last node with node.t <= t
        let i = self.nodes.partition_point(|n| n.t <= t) - 1;
        let node = &self.nodes[i];
        if node.t == t {
            return Ok((node.state[0], node.state[1]));
        }
        let mut coeffs: [Vec<Dd>; 2] = std::array::from_fn(|_| vec![Dd::ZERO; self.order + 1]);
        HSystem.expand(node.t, &node.state, self.order, &mut coeffs)?;
        let v = taylor::eval_taylor(&coeffs, t - node.t);
        Ok((v[0], v[1]))
    }

    pub fn h(&self, t: Dd) -> Result<Dd> {
        Ok(self.eval(t)?.0)
    }

    /// `h''(t)` from the equation itself.
    pub fn hsecond(&self, t: Dd) -> Result<Dd> {
        let (h, hp) = self.eval(t)?;
        Ok(h.powi(-3) - hp)
    }

    /// Estimated global error of `h(t)`: the difference to the companion run
    /// plus a rounding allowance of one double-double unit per step taken.
    /// `None` if no companion was computed.
    pub fn error_estimate(&self, t: Dd) -> Option<f64> {
        let comp = self.companion.as_ref()?;
        let a = self.h(t).ok()?;
        let b = comp.h(t).ok()?;
        let steps = self.nodes.partition_point(|n| n.t <= t) as f64;
        let rounding = steps * DD_EPSILON * a.abs().to_f64();
        Some((a - b).abs().to_f64() + rounding)
    }

    pub fn summary(&self) -> TrajectorySummary {
        let last = &self.nodes[self.nodes.len() - 1];
        TrajectorySummary {
            t0: self.data.t0.to_f64(),
            h0: self.data.h0.to_f64(),
            h1: self.data.h1.to_f64(),
            t_end: last.t.to_f64(),
            h_end: last.state[0].to_f64(),
            hprime_end: last.state[1].to_f64(),
            steps: self.stats.steps,
            rejected_steps: self.stats.rejected,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            taylor_order: self.order,
            error_estimate_end: self.error_estimate(last.t),
        }
    }

    /// CSV with header `t,h,hprime`, one row per node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,h,hprime")?;
        for s in self.samples() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                s.t.to_f64(),
                s.h.to_f64(),
                s.hprime.to_f64()
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialSample {
    pub tau: Dd,
    pub r: Dd,
    pub r_prime: Dd,
}

/// `r(tau) = tau h(ln tau)` and `r'(tau) = h(ln tau) + h'(ln tau)` at the
/// given `tau > 0`. The radial function satisfies `r'' = tau^2 / r^3`.
pub fn map_to_radial(traj: &Trajectory, taus: &[Dd]) -> Result<Vec<RadialSample>> {
    taus.iter()
        .map(|&tau| {
            if !(tau > Dd::ZERO) {
                return Err(Error::Domain("radial time must be positive".into()));
            }
            let (h, hp) = traj.eval(tau.ln())?;
            Ok(RadialSample {
                tau,
                r: tau * h,
                r_prime: h + hp,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default().with_tolerances(1e-24, 1e-26)
    }

    #[test]
    fn initial_condition_and_validation() {
        let data = InitialData::new(0.0, 1.0, 1.0).unwrap();
        let traj = integrate_h(&data, Dd::from(5.0), &cfg()).unwrap();
        let (h, hp) = traj.eval(Dd::ZERO).unwrap();
        assert_eq!((h.to_f64(), hp.to_f64()), (1.0, 1.0));
        assert!(InitialData::new(0.0, 0.0, 1.0).is_err());
        assert!(integrate_h(&data, Dd::ZERO, &cfg()).is_err());
        assert!(matches!(traj.eval(Dd::from(6.0)), Err(Error::Range { .. })));
    }

    #[test]
    fn dense_output_matches_stop_nodes() {
        let data = InitialData::new(0.0, 1.0, 1.0).unwrap();
        let stops = [Dd::from(1.3), Dd::from(2.7)];
        let with = integrate_h_with_stops(&data, Dd::from(4.0), &stops, &cfg()).unwrap();
        let without = integrate_h(&data, Dd::from(4.0), &cfg()).unwrap();
        for s in stops {
            let a = with.h(s).unwrap();
            let b = without.h(s).unwrap();
            assert!((a - b).abs().to_f64() < 1e-22, "{s:?}");
        }
    }

    #[test]
    fn equation_holds_on_dense_output() {
        let data = InitialData::new(0.0, 0.7, -0.4).unwrap();
        let traj = integrate_h(&data, Dd::from(20.0), &cfg()).unwrap();
        for t in [0.05, 1.7, 9.99, 19.5] {
            let t = Dd::from(t);
            let eps = Dd::from(1e-6);
            let (hm, _) = traj.eval(t - eps).unwrap();
            let (h, hp) = traj.eval(t).unwrap();
            let (hq, _) = traj.eval(t + eps).unwrap();
            let h2 = (hq - h * 2.0 + hm) / (eps * eps);
            let residual = h.powi(3) * (h2 + hp) - 1.0;
            assert!(residual.abs().to_f64() < 1e-9, "{}", residual.to_f64());
        }
    }

    #[test]
    fn radial_map() {
        let data = InitialData::new(0.0, 1.0, 1.0).unwrap();
        let traj = integrate_h(&data, Dd::from(3.0), &cfg()).unwrap();
        let e = Dd::ONE.exp();
        let r = map_to_radial(&traj, &[Dd::ONE, e]).unwrap();
        assert_eq!(r[0].r, traj.h(Dd::ZERO).unwrap());
        assert!((r[1].r - e * traj.h(Dd::ONE).unwrap()).abs().to_f64() < 1e-28);
        assert!(map_to_radial(&traj, &[Dd::from(1e3)]).is_err());
    }

    #[test]
    fn csv_format() {
        let data = InitialData::new(0.0, 1.0, 1.0).unwrap();
        let traj = integrate_h(&data, Dd::from(1.0), &cfg()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,h,hprime"));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0")
        );
    }
}
