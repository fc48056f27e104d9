//! The larger root of `y - ln y = x`, i.e. `y = -W_{-1}(-e^{-x})`.

use crate::dd::Dd;
use crate::error::{Error, Result};

const MAX_ITER: usize = 100;

/// Solves `y - ln y = x` on `y > 1` for `x > 1` by Newton's method, keeping
/// every iterate above the branch point `y = 1`.
pub fn lambert_wm1_numeric(x: Dd) -> Result<Dd> {
    if !(x > Dd::ONE) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "the branch y > 1 of y - ln y = x needs x > 1, got {}",
            x.to_f64()
        )));
    }
    // y - ln y - 1 ~ (y - 1)^2 / 2 near the branch point
    let mut y = if x < Dd::from(1.5) {
        1.0 + ((x - 1.0) * 2.0).sqrt()
    } else {
        x + x.ln()
    };
    for _ in 0..MAX_ITER {
        let f = y - y.ln() - x;
        let fp = Dd::ONE - y.recip();
        let mut next = y - f / fp;
        if !(next > Dd::ONE) {
            next = (y + 1.0).mul_pow2(0.5);
        }
        let step = (next - y).abs().to_f64();
        y = next;
        if step <= 1e-31 * y.to_f64() {
            return Ok(y);
        }
    }
    Err(Error::Convergence {
        what: "Newton iteration for y - ln y = x".into(),
        iterations: MAX_ITER,
    })
}

/// Relative residual `|y e^-y - e^-x| / e^-x = |exp(x + ln y - y) - 1|`.
pub fn lambert_residual(x: Dd, y: Dd) -> f64 {
    ((x + y.ln() - y).exp() - 1.0).abs().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    // -W_{-1}(-e^{-x}) from 50-digit arithmetic, as (hi, lo)
    const AT_10: (f64, f64) = (12.527963201982175, -4.698352375482908e-16);
    const AT_1_5: (f64, f64) = (2.357676673945899, -1.3442562430031282e-16);

    #[test]
    fn reference_values() {
        for (x, r) in [(10.0, AT_10), (1.5, AT_1_5)] {
            let y = lambert_wm1_numeric(Dd::from(x)).unwrap();
            let exact = Dd::from_parts(r.0, r.1);
            assert!(((y - exact) / exact).abs().to_f64() < 1e-30, "{x}");
        }
    }

    #[test]
    fn approaches_branch_point() {
        let y = lambert_wm1_numeric(Dd::from(1.0 + 1e-12)).unwrap();
        assert!(y > Dd::ONE && (y - 1.0).to_f64() < 2e-6);
        assert!(lambert_wm1_numeric(Dd::ONE).is_err());
        assert!(lambert_wm1_numeric(Dd::from(0.5)).is_err());
    }

    #[test]
    fn residual_small_across_scales() {
        for x in [1.01, 2.0, 10.0, 1e3, 1e5, 1e8] {
            let y = lambert_wm1_numeric(Dd::from(x)).unwrap();
            assert!(lambert_residual(Dd::from(x), y) < 1e-24, "{x}");
        }
    }
}
