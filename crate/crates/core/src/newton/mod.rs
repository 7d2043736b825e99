//! Quadratically convergent Kolmogorov–Newton iterations: scale schedules,
//! convergence reports, the matrix instance and generic drivers.

mod drivers;
mod matrix;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::OperatorError;
use crate::series::{SeriesError, SCALE_CAP};

pub use drivers::{iterate_homogeneous, iterate_parametric, DriverOptions, ParametricStep};
pub use matrix::{
    diagonalize_kolmogorov, kolmogorov_remainder, matrix_kolmogorov_step, offdiag_norm, DiagonalizeOptions,
    Diagonalization,
};
pub use report::{ConvergenceReport, IterationRecord, ReportBuilder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NewtonError {
    #[error("resonance: |d_{j} - d_{i}| = {gap} below threshold")]
    Resonance { i: usize, j: usize, gap: f64 },
    #[error("no convergence after {} iterations (last error {})", .0.iterations.len().saturating_sub(1), .0.last_error())]
    NonConvergence(Box<ConvergenceReport>),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("Borel source must vanish to order 2")]
    SourceOrder,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{0}")]
    Invalid(String),
}

/// Decreasing scales `s_{n+1} = s_n − δ·2^{−n/l}` with floor `s_0 − δ/(1 − 2^{−1/l})`.
///
/// With `δ = 1` and every scale in `(0, 1/2]` that floor is negative, so the
/// step factor is explicit. [`ScaleSchedule::fitted`]
/// picks `δ` so the floor is `s_0/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub s0: f64,
    pub l: f64,
    pub delta: f64,
}

impl ScaleSchedule {
    pub fn new(s0: f64, l: f64, delta: f64) -> Result<Self, NewtonError> {
        if !(s0 > 0.0 && s0 <= SCALE_CAP) {
            return Err(NewtonError::Schedule(format!("s0 = {s0} outside (0, {SCALE_CAP}]")));
        }
        if !(l > 0.0) || !(delta > 0.0) {
            return Err(NewtonError::Schedule(format!("l = {l}, delta = {delta} must be positive")));
        }
        let out = Self { s0, l, delta };
        if !(out.floor() > 0.0) {
            return Err(NewtonError::Schedule(format!("floor {} is not positive", out.floor())));
        }
        Ok(out)
    }

    /// Step factor chosen so that the floor is `s0/2`.
    pub fn fitted(s0: f64, l: f64) -> Result<Self, NewtonError> {
        let ratio = 2f64.powf(-1.0 / l);
        Self::new(s0, l, 0.5 * s0 * (1.0 - ratio))
    }

    /// `s_n`.
    pub fn scale(&self, n: usize) -> f64 {
        let r = 2f64.powf(-1.0 / self.l);
        self.s0 - self.delta * (1.0 - r.powi(n as i32)) / (1.0 - r)
    }

    pub fn floor(&self) -> f64 {
        self.s0 - self.delta / (1.0 - 2f64.powf(-1.0 / self.l))
    }

    /// `(s_{n+1}, s_n)`: the pair step `n` maps between.
    pub fn pair(&self, n: usize) -> (f64, f64) {
        (self.scale(n + 1), self.scale(n))
    }
}
