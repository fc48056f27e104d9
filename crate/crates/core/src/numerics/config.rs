use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits shared by the numerical routines.
///
/// `rel_tol`/`abs_tol` drive the ODE step selection, the series crossover for
/// `g`, the quadrature panels and the truncation of tail series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Split point `S` for the improper integral defining `c`; `None` uses the
    /// series crossover of `g`.
    pub tail_split: Option<f64>,
    pub fixed_point_tol: f64,
    pub max_fixed_point_iter: usize,
    /// Order of the Taylor-series integrator.
    pub taylor_order: usize,
    /// Run a companion integration at a thousandth of the tolerance and keep
    /// it as a global error estimate.
    pub estimate_error: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 5_000_000,
            tail_split: None,
            fixed_point_tol: 1e-12,
            max_fixed_point_iter: 200,
            taylor_order: 24,
            estimate_error: false,
        }
    }
}

impl SolverConfig {
    /// Settings that resolve the order-3 remainder of the expansion at
    /// `t = 1e6`, about twenty digits below the solution itself.
    pub fn verification() -> Self {
        SolverConfig {
            rel_tol: 1e-26,
            abs_tol: 1e-28,
            fixed_point_tol: 1e-24,
            estimate_error: true,
            ..SolverConfig::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::Config("tolerances must be positive and finite".into()));
        }
        if !positive(self.fixed_point_tol) {
            return Err(Error::Config("fixed-point tolerance must be positive".into()));
        }
        if self.max_steps == 0 || self.max_fixed_point_iter == 0 {
            return Err(Error::Config("iteration limits must be nonzero".into()));
        }
        if !(4..=60).contains(&self.taylor_order) {
            return Err(Error::Config("taylor_order must lie in 4..=60".into()));
        }
        if let Some(s) = self.tail_split {
            if !positive(s) {
                return Err(Error::Config("tail split must be positive".into()));
            }
        }
        Ok(())
    }

    /// Settings for the companion error-estimate run. The order differs so
    /// that the two runs do not share a step sequence.
    pub(crate) fn companion(&self) -> SolverConfig {
        SolverConfig {
            rel_tol: self.rel_tol * 1e-3,
            abs_tol: self.abs_tol * 1e-3,
            taylor_order: (self.taylor_order + 6).min(60),
            estimate_error: false,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::default().validate().unwrap();
        SolverConfig::verification().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SolverConfig::default().with_tolerances(0.0, 1e-12).validate().is_err());
        let cfg = SolverConfig {
            taylor_order: 2,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig {
            tail_split: Some(-1.0),
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
