//! Numerical toolkit for the Lichnerowicz equation of Einstein-scalar field
//! theory with non-constant mean curvature on flat tori: coefficient
//! assembly from constraint data, assumption checking, constant sub- and
//! supersolution brackets, a monotone fixed-point solver, and nonexistence
//! certificates.

pub mod analysis;
pub mod coefficients;
pub mod error;
pub mod grid;
pub mod io;
pub mod nonexistence;
pub mod power;
pub mod solver;
pub mod truncation;

pub use error::{Error, Result};
