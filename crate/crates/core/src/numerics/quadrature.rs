//! Adaptive Gauss-Legendre quadrature in double-double arithmetic.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::dd::Dd;
use crate::error::{Error, Result};

pub const GL_POINTS: usize = 16;
const MAX_DEPTH: usize = 40;

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<Dd>,
    weights: Vec<Dd>,
}

// (P_n(x), P_n'(x)) by the three-term recurrence
fn legendre(n: usize, x: Dd) -> (Dd, Dd) {
    let mut p0 = Dd::ONE;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = (x * p1 * (2.0 * kf - 1.0) - p0 * (kf - 1.0)) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (x * p1 - p0) * n as f64 / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "need at least two nodes");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 1..=n {
            let mut x = Dd::from((PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos());
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs().to_f64() < 1e-33 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes.push(x);
            weights.push(Dd::from(2.0) / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(GL_POINTS))
    }

    /// Single application of the rule on `[a, b]`.
    pub fn apply<F>(&self, f: &mut F, a: Dd, b: Dd) -> Result<Dd>
    where
        F: FnMut(Dd) -> Result<Dd>,
    {
        let half = (b - a).mul_pow2(0.5);
        let mid = (a + b).mul_pow2(0.5);
        let mut acc = Dd::ZERO;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * *x)?;
        }
        Ok(acc * half)
    }
}

/// Integral of `f` over `[a, b]`, bisecting until the one-panel and two-panel
/// results agree to `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F>(mut f: F, a: Dd, b: Dd, rel_tol: f64, abs_tol: f64) -> Result<Dd>
where
    F: FnMut(Dd) -> Result<Dd>,
{
    if a == b {
        return Ok(Dd::ZERO);
    }
    let rule = GaussLegendre::standard();
    let whole = rule.apply(&mut f, a, b)?;
    refine(&mut f, rule, a, b, whole, rel_tol, abs_tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &mut F,
    rule: &GaussLegendre,
    a: Dd,
    b: Dd,
    whole: Dd,
    rel_tol: f64,
    abs_tol: f64,
    depth: usize,
) -> Result<Dd>
where
    F: FnMut(Dd) -> Result<Dd>,
{
    let mid = (a + b).mul_pow2(0.5);
    let left = rule.apply(f, a, mid)?;
    let right = rule.apply(f, mid, b)?;
    let both = left + right;
    let diff = (both - whole).abs().to_f64();
    if diff <= abs_tol.max(rel_tol * both.abs().to_f64()) {
        return Ok(both);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Accuracy(format!(
            "quadrature on [{}, {}] did not converge (difference {diff:e})",
            a.to_f64(),
            b.to_f64()
        )));
    }
    let l = refine(f, rule, a, mid, left, rel_tol, abs_tol * 0.5, depth + 1)?;
    let r = refine(f, rule, mid, b, right, rel_tol, abs_tol * 0.5, depth + 1)?;
    Ok(l + r)
}
