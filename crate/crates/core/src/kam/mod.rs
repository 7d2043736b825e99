//! Invariant-torus and singular normal-form solvers.

mod homological;
mod singular;
mod torus;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arithmetic::{ArithmeticError, DiophantineCertificate};
use crate::newton::{ConvergenceReport, NewtonError};
use crate::operators::OperatorError;
use crate::series::{Mode, MultiIndex, ScaledSeries, SeriesError, Truncation};

pub use homological::{
    frequency_action_singular, frequency_action_torus, solve_homological_singular, solve_homological_torus,
};
pub use singular::{kam_singular_run, singular_error, SingularHamiltonian, SingularOptions};
pub use torus::{
    decompose_error, frequency_correction, kam_run, kam_step, mean_hessian, mean_linear_coeffs, torus_error,
    ErrorParts, KamOptions, StepOutput, TorusHamiltonian,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KamError {
    #[error("small divisor at index {index:?}: |divisor| = {divisor:e} below floor {floor:e}")]
    Resonance { index: Vec<i32>, divisor: f64, floor: f64, report: Option<Box<ConvergenceReport>> },
    #[error("Hessian is degenerate (condition number {cond:e})")]
    NonDegeneracy { cond: f64, report: Option<Box<ConvergenceReport>> },
    #[error("no convergence after {} steps (last error {:e})", .0.steps(), .0.last_error())]
    NonConvergence(Box<ConvergenceReport>),
    #[error("homological equation needs a zero-mean right-hand side")]
    NonZeroMean,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Newton(NewtonError),
}

impl From<NewtonError> for KamError {
    fn from(e: NewtonError) -> Self {
        match e {
            NewtonError::NonConvergence(r) => KamError::NonConvergence(r),
            other => KamError::Newton(other),
        }
    }
}

impl KamError {
    /// Attaches the iteration ledger to errors raised mid-run.
    fn with_report(self, r: ConvergenceReport) -> Self {
        match self {
            KamError::Resonance { index, divisor, floor, .. } => {
                KamError::Resonance { index, divisor, floor, report: Some(Box::new(r)) }
            }
            KamError::NonDegeneracy { cond, .. } => KamError::NonDegeneracy { cond, report: Some(Box::new(r)) },
            other => other,
        }
    }
}

/// Lower bound imposed on `|(α, k)|` before dividing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivisorFloor {
    Absolute { floor: f64 },
    /// `safety · c / ‖k‖^{n+ν}` (Euclidean norm).
    Diophantine { c: f64, nu: f64, safety: f64 },
}

impl DivisorFloor {
    pub fn from_certificate(cert: &DiophantineCertificate, safety: f64) -> Self {
        DivisorFloor::Diophantine { c: cert.c, nu: cert.nu, safety }
    }

    pub fn floor(&self, k: &[i32]) -> f64 {
        match *self {
            DivisorFloor::Absolute { floor } => floor,
            DivisorFloor::Diophantine { c, nu, safety } => {
                let norm = k.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
                safety * c / norm.powf(k.len() as f64 + nu)
            }
        }
    }

    /// Rejects `divisor` when it is zero or below the floor for `k`.
    pub(crate) fn check(&self, k: &[i32], divisor: f64) -> Result<(), KamError> {
        let floor = self.floor(k);
        if divisor == 0.0 || divisor.abs() < floor {
            return Err(KamError::Resonance { index: k.to_vec(), divisor: divisor.abs(), floor, report: None });
        }
        Ok(())
    }
}

/// One change of variables `exp(−ξ)`, `ξ = {−, h} + Σ a_i ∂_{p_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformStep {
    pub h: ScaledSeries,
    /// `a_i(t)`; empty in the singular case.
    pub shift: Vec<ScaledSeries>,
}

/// Split of the final hamiltonian into normal part and remaining error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub normal: ScaledSeries,
    pub error: ScaledSeries,
    /// Majorant norm of `error` at `scale` (with `t` weighted by the run's `t_value_scale`).
    pub error_norm: f64,
    pub scale: f64,
}

/// Norms recorded for one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepNorms {
    pub error: f64,
    pub h: f64,
    pub shift: f64,
    /// `‖ξ‖/(t−s)` for the Lie series of this step.
    pub nu: f64,
    pub lie_depth: usize,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormResult {
    pub transform_log: Vec<TransformStep>,
    #[serde(rename = "final")]
    pub final_hamiltonian: ScaledSeries,
    pub residual: Residual,
    pub report: ConvergenceReport,
    pub steps: Vec<StepNorms>,
    pub t_value_scale: f64,
    /// Singular runs: coefficient of `q_i p_i` minus `ω_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DiophantineCertificate>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Condition number (spectral) of a complex matrix; `∞` if singular.
pub(crate) fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `Σ c_k t^k` as a pure-`t` series.
pub(crate) fn t_series(dim: usize, mode: Mode, trunc: Truncation, coeffs: &[Complex64], real: bool) -> ScaledSeries {
    let terms = coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as u32 <= trunc.max_tdeg)
        .map(|(k, c)| (MultiIndex::t(dim, k as u32), if real { Complex64::new(c.re, 0.0) } else { *c }));
    ScaledSeries::from_terms(dim, mode, trunc, real, terms).expect("pure t-series index")
}
