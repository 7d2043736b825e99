//! Lie series `exp(ξ) x = Σ ξ^m(x)/m!` for `ξ = {−,h} + Σ a_i(t) ∂_{p_i}`.

use serde::{Deserialize, Serialize};

use super::{OperatorError, ScaledOperator};
use crate::series::{ScalePair, ScaledSeries};

/// Hard cap on the number of Lie-series terms.
pub const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieSeries {
    pub value: ScaledSeries,
    /// Number of terms actually summed beyond the identity.
    pub depth: usize,
    /// `‖ξ‖_t/(t−s)`.
    pub nu: f64,
    /// `ν^{D+1}/(1−ν) |x|_t`, or 0 when the series terminated exactly.
    pub tail_bound: f64,
    pub terminated: bool,
}

/// Truncated Lie series between the scales of `pair`.
///
/// Requires `ν = ‖ξ‖_t/(t−s) < 1`. The depth is the smallest `D` with
/// `ν^{D+1}/(1−ν) ≤ tol`; summation stops early when a term vanishes.
pub fn lie_exp(
    h: &ScaledSeries,
    shift: &[ScaledSeries],
    x: &ScaledSeries,
    pair: &ScalePair,
    tol: f64,
) -> Result<LieSeries, OperatorError> {
    let xi = ScaledOperator::lie_derivation(h.clone(), shift.to_vec());
    let nu = xi.declared_constant(pair.t()) / pair.gap();
    if !(nu < 1.0) {
        return Err(OperatorError::NotExponentiable { nu, s: pair.s(), t: pair.t() });
    }
    let mut depth = 0;
    while depth < MAX_DEPTH && nu.powi(depth as i32 + 1) / (1.0 - nu) > tol {
        depth += 1;
    }
    let (value, used, terminated) = sum(&xi, x, depth)?;
    let tail_bound = if terminated {
        0.0
    } else {
        nu.powi(used as i32 + 1) / (1.0 - nu) * crate::series::norm_majorant(x, pair.t())?
    };
    Ok(LieSeries { value, depth: used, nu, tail_bound, terminated })
}

/// Lie series without a scale check, summed until a term vanishes or
/// `max_depth` terms have been added. Exact for nilpotent derivations.
pub fn lie_exp_unchecked(
    h: &ScaledSeries,
    shift: &[ScaledSeries],
    x: &ScaledSeries,
    max_depth: usize,
) -> Result<LieSeries, OperatorError> {
    let xi = ScaledOperator::lie_derivation(h.clone(), shift.to_vec());
    let (value, used, terminated) = sum(&xi, x, max_depth)?;
    Ok(LieSeries { value, depth: used, nu: f64::NAN, tail_bound: if terminated { 0.0 } else { f64::NAN }, terminated })
}

fn sum(xi: &ScaledOperator, x: &ScaledSeries, depth: usize) -> Result<(ScaledSeries, usize, bool), OperatorError> {
    let mut acc = x.clone();
    let mut term = x.clone();
    for m in 1..=depth {
        term = xi.apply(&term)?.scale_real(1.0 / m as f64);
        if term.is_zero() {
            return Ok((acc, m - 1, true));
        }
        acc = acc.add(&term)?;
    }
    let terminated = xi.apply(&term)?.is_zero();
    Ok((acc, depth, terminated))
}
