//! Double-double numerics: integration of `h` and of the reduced equation for
//! `g`, the function `G` and its inverse, the constant `c`, and the Lambert
//! branch root.

mod config;
mod gproblem;
mod inverse;
mod lambert;
pub mod quadrature;
mod taylor;
mod trajectory;

pub use config::SolverConfig;
pub use gproblem::{compute_G, compute_c, solve_g, GProblem, GProblemSummary, Tolerances};
pub use inverse::{invert_G, invert_G_detailed, Inversion, InversionRoute};
pub use lambert::{lambert_residual, lambert_wm1_numeric};
pub use taylor::StepStats;
pub use trajectory::{
    integrate_h, integrate_h_with_stops, map_to_radial, InitialData, RadialSample, Sample,
    Trajectory, TrajectorySummary,
};
