//! Adaptive Taylor-series integration in double-double arithmetic.
//!
//! Each step expands the solution to order `N` about the current point with
//! the system's own coefficient recurrence. The step length keeps the last two
//! retained terms below the tolerance, and is capped so that `h * lambda` stays
//! inside the stability region of the degree-`N` Taylor polynomial for the
//! dominant linearized eigenvalue `lambda`. Steps land exactly on requested
//! stop points.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::numerics::SolverConfig;

pub(crate) trait TaylorSystem<const D: usize> {
    /// Fills `coeffs[d][0..=order]` with the Taylor coefficients about `(t, state)`.
    fn expand(&self, t: Dd, state: &[Dd; D], order: usize, coeffs: &mut [Vec<Dd>; D])
        -> Result<()>;

    /// Dominant eigenvalue of the linearization as `(modulus, argument)` with
    /// the argument in `[0, pi]`.
    fn dominant_eigenvalue(&self, t: Dd, state: &[Dd; D]) -> Option<(f64, f64)>;

    /// Rejects states outside the domain of the equation.
    fn check_state(&self, t: Dd, state: &[Dd; D]) -> Result<()>;
}

#[derive(Clone, Debug)]
pub(crate) struct Node<const D: usize> {
    pub t: Dd,
    pub state: [Dd; D],
    // empty unless coefficient storage was requested
    pub coeffs: Vec<[Dd; D]>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    pub stability_limited: usize,
}

pub(crate) fn eval_taylor<const D: usize>(coeffs: &[Vec<Dd>; D], dt: Dd) -> [Dd; D] {
    let mut out = [Dd::ZERO; D];
    for d in 0..D {
        out[d] = coeffs[d].iter().rev().fold(Dd::ZERO, |acc, &a| acc * dt + a);
    }
    out
}

fn choose_step<const D: usize>(
    coeffs: &[Vec<Dd>; D],
    state: &[Dd; D],
    order: usize,
    cfg: &SolverConfig,
) -> f64 {
    let scale = state.iter().map(|s| s.abs().to_f64()).fold(0.0, f64::max);
    let tol = cfg.abs_tol + cfg.rel_tol * scale;
    let mut h = f64::INFINITY;
    for k in [order - 1, order] {
        let norm = coeffs
            .iter()
            .map(|c| c[k].abs().to_f64())
            .fold(0.0, f64::max);
        if norm > 0.0 {
            h = h.min((tol / norm).powf(1.0 / k as f64));
        }
    }
    0.9 * h
}

/// Integrates from `(t0, y0)` to `t_end`, landing on every point of `stops`
/// (sorted, inside `(t0, t_end]`). Returns the nodes including both ends.
pub(crate) fn integrate<S, const D: usize>(
    sys: &S,
    t0: Dd,
    y0: [Dd; D],
    t_end: Dd,
    stops: &[Dd],
    cfg: &SolverConfig,
    store_coeffs: bool,
) -> Result<(Vec<Node<D>>, StepStats)>
where
    S: TaylorSystem<D>,
{
    cfg.validate()?;
    let order = cfg.taylor_order;
    let radii = stability_radii(order);
    let mut coeffs: [Vec<Dd>; D] = std::array::from_fn(|_| vec![Dd::ZERO; order + 1]);
    let mut stats = StepStats::default();
    let mut nodes = Vec::new();
    let mut t = t0;
    let mut y = y0;
    sys.check_state(t, &y)?;
    let mut stop_iter = stops.iter().copied().filter(|&s| s > t0 && s < t_end).peekable();

    while t < t_end {
        if stats.steps >= cfg.max_steps {
            return Err(Error::IntegrationFailure {
                t: t.to_f64(),
                reason: format!("step limit {} reached", cfg.max_steps),
            });
        }
        sys.expand(t, &y, order, &mut coeffs)?;
        let mut h = choose_step(&coeffs, &y, order, cfg);
        if let Some((modulus, arg)) = sys.dominant_eigenvalue(t, &y) {
            if modulus > 0.0 && modulus.is_finite() {
                let cap = 0.9 * radii.radius(arg) / modulus;
                if cap < h {
                    h = cap;
                    stats.stability_limited += 1;
                }
            }
        }
        let target = stop_iter.peek().copied().unwrap_or(t_end);
        let remaining = (target - t).to_f64();
        let min_step = 1e-14 * t.abs().to_f64().max(1.0);
        let (dt, hit) = if h >= remaining {
            (target - t, true)
        } else {
            if !(h > min_step) {
                return Err(Error::IntegrationFailure {
                    t: t.to_f64(),
                    reason: format!("step size collapsed to {h:e}"),
                });
            }
            (Dd::from(h), false)
        };
        if store_coeffs {
            nodes.push(Node {
                t,
                state: y,
                coeffs: (0..=order).map(|k| std::array::from_fn(|d| coeffs[d][k])).collect(),
            });
        } else {
            nodes.push(Node {
                t,
                state: y,
                coeffs: Vec::new(),
            });
        }
        let y_new = eval_taylor(&coeffs, dt);
        let t_new = if hit { target } else { t + dt };
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure {
                t: t_new.to_f64(),
                reason: "non-finite state".into(),
            });
        }
        sys.check_state(t_new, &y_new)?;
        stats.steps += 1;
        t = t_new;
        y = y_new;
        if hit && target < t_end {
            stop_iter.next();
        }
    }
    nodes.push(Node {
        t,
        state: y,
        coeffs: Vec::new(),
    });
    Ok((nodes, stats))
}

/// Radii of the stability region `|P_N(w)| <= 1` of the degree-`N` Taylor
/// polynomial along rays `arg w in [pi/2, pi]`.
pub(crate) struct StabilityRadii {
    // radii[i] at angle pi/2 + i * pi / (2 * STEPS)
    radii: Vec<f64>,
}

const ANGLE_STEPS: usize = 90;

impl StabilityRadii {
    fn compute(order: usize) -> Self {
        let radii = (0..=ANGLE_STEPS)
            .map(|i| {
                let theta = PI / 2.0 + PI / 2.0 * i as f64 / ANGLE_STEPS as f64;
                ray_radius(order, theta)
            })
            .collect();
        StabilityRadii { radii }
    }

    /// Conservative radius for `arg` (angles below `pi/2` are clamped).
    pub(crate) fn radius(&self, arg: f64) -> f64 {
        let frac = ((arg - PI / 2.0) / (PI / 2.0)).clamp(0.0, 1.0) * ANGLE_STEPS as f64;
        let i = frac.floor() as usize;
        let lo = i.saturating_sub(1);
        let hi = (i + 2).min(ANGLE_STEPS);
        self.radii[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn poly_abs2(order: usize, r: f64, theta: f64) -> f64 {
    let (wr, wi) = (r * theta.cos(), r * theta.sin());
    let (mut sr, mut si) = (1.0, 0.0);
    let (mut tr, mut ti) = (1.0, 0.0);
    for k in 1..=order {
        let nr = (tr * wr - ti * wi) / k as f64;
        let ni = (tr * wi + ti * wr) / k as f64;
        tr = nr;
        ti = ni;
        sr += tr;
        si += ti;
    }
    sr * sr + si * si
}

fn ray_radius(order: usize, theta: f64) -> f64 {
    let inside = |r: f64| poly_abs2(order, r, theta) <= 1.0 + 1e-12;
    let dr = 1e-3;
    let mut r = dr;
    let r_max = 4.0 * order as f64;
    while r < r_max && inside(r) {
        r += dr;
    }
    let (mut lo, mut hi) = (r - dr, r);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) fn stability_radii(order: usize) -> Arc<StabilityRadii> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<StabilityRadii>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(StabilityRadii::compute(order)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_real_axis_radii() {
        // explicit Euler: |1 + w| <= 1 reaches w = -2
        assert!((ray_radius(1, PI) - 2.0).abs() < 1e-6);
        // classical fourth order: about 2.785
        assert!((ray_radius(4, PI) - 2.785).abs() < 1e-3);
    }

    #[test]
    fn lookup_is_conservative() {
        let r = stability_radii(24);
        for i in 0..=ANGLE_STEPS {
            let theta = PI / 2.0 + PI / 2.0 * i as f64 / ANGLE_STEPS as f64;
            assert!(r.radius(theta) <= r.radii[i]);
        }
        assert!(r.radius(PI) > 5.0);
    }

    struct Decay;

    impl TaylorSystem<1> for Decay {
        fn expand(&self, _t: Dd, state: &[Dd; 1], order: usize, c: &mut [Vec<Dd>; 1]) -> Result<()> {
            c[0][0] = state[0];
            for k in 0..order {
                c[0][k + 1] = -c[0][k] / (k + 1) as f64;
            }
            Ok(())
        }
        fn dominant_eigenvalue(&self, _t: Dd, _s: &[Dd; 1]) -> Option<(f64, f64)> {
            Some((1.0, PI))
        }
        fn check_state(&self, _t: Dd, _s: &[Dd; 1]) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn exponential_decay_hits_stops() {
        let cfg = SolverConfig::default().with_tolerances(1e-28, 1e-30);
        let stops = [Dd::from(1.0), Dd::from(2.5)];
        let (nodes, stats) =
            integrate(&Decay, Dd::ZERO, [Dd::ONE], Dd::from(7.5), &stops, &cfg, false).unwrap();
        assert!(stats.steps > 0);
        assert!(nodes.iter().any(|n| n.t == Dd::from(2.5)));
        let last = nodes.last().unwrap();
        assert_eq!(last.t, Dd::from(7.5));
        let exact = Dd::from(-7.5).exp();
        assert!(((last.state[0] - exact) / exact).abs().to_f64() < 1e-26);
    }
}
