//! Numerical laboratory for the critical points of random polynomials whose
//! roots are drawn i.i.d. from a probability measure on the unit circle.
//!
//! The pipeline is: sample roots from a [`CircleMeasure`], wrap them in a
//! coefficient-free [`RootPoly`], find the critical points with the
//! [`differentiator`] (Aberth iteration on the logarithmic derivative, with a
//! dense companion-matrix oracle), then score the result with [`empirics`].
//! The [`lab`] module strings these together into seeded, reproducible
//! experiments with CSV and SVG output.

pub mod companion;
pub mod differentiator;
pub mod empirics;
mod error;
pub mod lab;
pub mod limit_function;
pub mod matching;
pub mod measure;
pub mod root_poly;

pub use companion::StructuredCompanion;
pub use differentiator::{CriticalSet, SolveMethod, SolverOptions};
pub use error::{Error, Result};
pub use limit_function::{LimitFunction, ZeroCount};
pub use measure::{CircleMeasure, MomentVector, RootSample};
pub use root_poly::{LogValue, RootPoly};

pub use num_complex::Complex64;

/// Largest degree for which coefficient expansion and dense eigenvalue
/// oracles are allowed.
pub const ORACLE_MAX_DEGREE: usize = 512;
