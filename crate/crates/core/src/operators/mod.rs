//! k-bounded operators on scaled series.
//!
//! An operator `u` of order `k` carries a declared constant `‖u‖_t` such that
//! for `0 < s < t`
//!
//! ```text
//! |u(x)|_s ≤ ‖u‖_t / (e² (t−s)^k) · |x|_t        (k ≥ 1)
//! |u(x)|_s ≤ ‖u‖_t · |x|_t                          (k = 0)
//! ```
//!
//! The `e²` normalization is the one consumed by the Borel calculus: with it,
//! `ν = ‖u‖_t/(t−s)` controls `Bf(u)` for every `f` with non-negative
//! coefficients. Raw Cauchy constants `K` enter as `‖u‖ = e² K`.

mod certify;
mod lie;

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{
    hadamard_product, norm_majorant, poisson_bracket, Derivative, Mode, PowerSeries, ScalePair,
    ScaledSeries, SeriesError, SCALE_CAP,
};

pub use certify::{certify_bound, BoundCertificate, BoundSample, SamplingDomain};
pub use lie::{lie_exp, lie_exp_unchecked, LieSeries};

pub(crate) const E2: f64 = E * E;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("Borel majorant diverges: nu = {nu} >= radius {radius}")]
    Divergence { nu: f64, radius: f64 },
    #[error("not exponentiable between scales s = {s} and t = {t}: nu = {nu} >= 1")]
    NotExponentiable { nu: f64, s: f64, t: f64 },
    #[error("Borel calculus needs order 0 or 1, got {0}")]
    UnsupportedOrder(u32),
    #[error("rescaling factor {0} outside (0, 1]")]
    Rescale(f64),
    #[error("bound violated: |y|_s = {lhs} > {rhs}")]
    BoundViolated { lhs: f64, rhs: f64 },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Identity,
    Zero,
    Derivation,
    Hadamard,
    PoissonAdjoint,
    PShift,
    LieDerivation,
    Composite,
}

type Action = Arc<dyn Fn(&ScaledSeries) -> Result<ScaledSeries, SeriesError> + Send + Sync>;
type ConstantFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Linear operator with a declared order and a (scale-dependent) constant.
#[derive(Clone)]
pub struct ScaledOperator {
    action: Action,
    order: u32,
    constant: ConstantFn,
    kind: OperatorKind,
    lambda: f64,
}

impl fmt::Debug for ScaledOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaledOperator")
            .field("kind", &self.kind)
            .field("order", &self.order)
            .field("lambda", &self.lambda)
            .field("constant_at_cap", &(self.constant)(SCALE_CAP))
            .finish()
    }
}

/// Declared constant from a raw Cauchy constant.
pub fn declared_from_raw(order: u32, raw: f64) -> f64 {
    if order == 0 {
        raw
    } else {
        E2 * raw
    }
}

fn norm_at(f: &ScaledSeries, t: f64) -> f64 {
    norm_majorant(f, t).unwrap_or(f64::INFINITY)
}

impl ScaledOperator {
    pub fn new(
        kind: OperatorKind,
        order: u32,
        constant: impl Fn(f64) -> f64 + Send + Sync + 'static,
        action: impl Fn(&ScaledSeries) -> Result<ScaledSeries, SeriesError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            action: Arc::new(action),
            order,
            constant: Arc::new(constant),
            kind,
            lambda: 1.0,
        }
    }

    pub fn identity() -> Self {
        Self::new(OperatorKind::Identity, 0, |_| 1.0, |x| Ok(x.clone()))
    }

    pub fn zero() -> Self {
        Self::new(OperatorKind::Zero, 0, |_| 0.0, |x| Ok(x.empty_like()))
    }

    /// Coordinate derivation with its Cauchy constant.
    ///
    /// Raw constants: `q∂_q` → `1/e`; `∂_p` and singular `∂_q` → `1`;
    /// torus `∂_t` → `1` at order 2 (the parameter weight is `s²`).
    pub fn derivation(mode: Mode, which: Derivative) -> Result<Self, OperatorError> {
        let (order, raw) = match (mode, which) {
            (_, Derivative::QLog(_)) => (1, 1.0 / E),
            (_, Derivative::P(_)) => (1, 1.0),
            (Mode::Singular, Derivative::Q(_)) => (1, 1.0),
            (Mode::Torus, Derivative::T) => (2, 1.0),
            (m, _) => return Err(OperatorError::Series(SeriesError::UnsupportedMode(m))),
        };
        let declared = declared_from_raw(order, raw);
        Ok(Self::new(OperatorKind::Derivation, order, move |_| declared, move |x| {
            if x.mode() != mode {
                return Err(SeriesError::ModeMismatch(x.mode(), mode));
            }
            Ok(x.derive(which))
        }))
    }

    /// Hadamard multiplier `x ↦ f ⋆ x` declared `k`-bounded.
    ///
    /// With `A = max_{I≠0} |f_I| / |I|^k` (|I| the Fourier ℓ¹ length on the torus,
    /// the total degree in singular mode), the raw constant is `A (k/e)^k`
    /// (torus) or `A k^k 2^{−k}` (singular), and at least `|f_0| 2^{−k}`.
    pub fn hadamard(f: ScaledSeries, k: u32) -> Self {
        let kf = k as f64;
        let mut a: f64 = 0.0;
        let mut a0: f64 = 0.0;
        for (idx, c) in f.terms() {
            let len = match f.mode() {
                Mode::Torus => idx.fourier_l1(),
                Mode::Singular => idx.total_degree(),
            };
            if len == 0 {
                a0 = a0.max(c.norm());
            } else {
                a = a.max(c.norm() / (len as f64).powi(k as i32));
            }
        }
        let shape = match (f.mode(), k) {
            (_, 0) => 1.0,
            (Mode::Torus, _) => (kf / E).powi(k as i32),
            (Mode::Singular, _) => (kf / 2.0).powi(k as i32),
        };
        let raw = (a * shape).max(a0 * 0.5f64.powi(k as i32));
        let declared = declared_from_raw(k, raw);
        Self::new(OperatorKind::Hadamard, k, move |_| declared, move |x| hadamard_product(&f, x))
    }

    /// `x ↦ {x, h}` declared 1-bounded.
    pub fn poisson_adjoint(h: ScaledSeries) -> Self {
        Self::lie_derivation(h, Vec::new())
    }

    /// `x ↦ Σ_i a_i(t) ∂_{p_i} x`.
    pub fn p_shift(shift: Vec<ScaledSeries>) -> Self {
        let sh = shift.clone();
        let raw = move |t: f64| sh.iter().map(|a| norm_at(a, t)).sum::<f64>();
        Self::new(
            OperatorKind::PShift,
            1,
            move |t| declared_from_raw(1, raw(t)),
            move |x| apply_shift(&shift, x),
        )
    }

    /// `ξ = {−, h} + Σ_i a_i(t) ∂_{p_i}`.
    ///
    /// Raw constant: torus `Σ_i (|q_i∂_{q_i}h|_t + |∂_{p_i}h|_t / e) + Σ_i |a_i|_t`;
    /// singular `Σ_i (|∂_{q_i}h|_t + |∂_{p_i}h|_t)`.
    pub fn lie_derivation(h: ScaledSeries, shift: Vec<ScaledSeries>) -> Self {
        let n = h.dim();
        let mode = h.mode();
        let mut parts: Vec<(ScaledSeries, f64)> = Vec::new();
        for i in 0..n {
            match mode {
                Mode::Torus => {
                    parts.push((h.derive(Derivative::QLog(i)), 1.0));
                    parts.push((h.derive(Derivative::P(i)), 1.0 / E));
                }
                Mode::Singular => {
                    parts.push((h.derive(Derivative::Q(i)), 1.0));
                    parts.push((h.derive(Derivative::P(i)), 1.0));
                }
            }
        }
        for a in &shift {
            parts.push((a.clone(), 1.0));
        }
        let kind = if shift.is_empty() {
            OperatorKind::PoissonAdjoint
        } else {
            OperatorKind::LieDerivation
        };
        let raw = move |t: f64| parts.iter().map(|(g, w)| w * norm_at(g, t)).sum::<f64>();
        Self::new(kind, 1, move |t| declared_from_raw(1, raw(t)), move |x| {
            let (b, _) = poisson_bracket(x, &h)?;
            if shift.is_empty() {
                Ok(b)
            } else {
                b.add(&apply_shift(&shift, x)?)
            }
        })
    }

    pub fn apply(&self, x: &ScaledSeries) -> Result<ScaledSeries, SeriesError> {
        (self.action)(x)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Scale factor of the space the operator is read on (1 unless rescaled).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Declared `‖u‖_t`.
    pub fn declared_constant(&self, t: f64) -> f64 {
        (self.constant)(t)
    }

    /// Raw constant `K` with `|u x|_s ≤ K/(t−s)^k |x|_t`.
    pub fn raw_constant(&self, t: f64) -> f64 {
        if self.order == 0 {
            self.declared_constant(t)
        } else {
            self.declared_constant(t) / E2
        }
    }

    /// Norm of `x` on the (possibly rescaled) space: `|x|'_s = |x|_{λs}`.
    pub fn read_norm(&self, x: &ScaledSeries, s: f64) -> Result<f64, SeriesError> {
        norm_majorant(x, self.lambda * s)
    }

    /// `self ∘ v`, declared `(k+k′)`-bounded with constant `2^{k+k′} C_u C_v`.
    pub fn compose(&self, v: &ScaledOperator) -> Self {
        let (u, w) = (self.clone(), v.clone());
        let (cu, cv) = (self.constant.clone(), v.constant.clone());
        let k = self.order + v.order;
        let factor = 2f64.powi(k as i32);
        let mut out = Self::new(
            OperatorKind::Composite,
            k,
            move |t| factor * cu(t) * cv(t),
            move |x| u.apply(&w.apply(x)?),
        );
        out.lambda = self.lambda;
        out
    }

    /// The same operator read on `E′_s = E_{λs}`: order kept, constant
    /// `λ^{−k} C(λt)`.
    pub fn rescale(&self, lambda: f64) -> Result<Self, OperatorError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(OperatorError::Rescale(lambda));
        }
        let c = self.constant.clone();
        let k = self.order;
        let prev = self.lambda;
        Ok(Self {
            action: self.action.clone(),
            order: k,
            constant: Arc::new(move |t| lambda.powi(-(k as i32)) * c(lambda * t)),
            kind: self.kind,
            lambda: prev * lambda,
        })
    }

    /// `ν` of the Borel calculus between the scales of `pair`.
    pub fn borel_nu(&self, pair: &ScalePair) -> Result<f64, OperatorError> {
        match self.order {
            0 => Ok(self.declared_constant(pair.t())),
            1 => Ok(self.declared_constant(pair.t()) / pair.gap()),
            k => Err(OperatorError::UnsupportedOrder(k)),
        }
    }
}

fn apply_shift(shift: &[ScaledSeries], x: &ScaledSeries) -> Result<ScaledSeries, SeriesError> {
    let mut acc = x.empty_like();
    for (i, a) in shift.iter().enumerate() {
        let (term, _) = a.mul(&x.derive(Derivative::P(i)))?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `y = Bf(u) x = Σ_{m ≤ D} (a_m/m!) u^m(x)` with `bound = f(ν) |x|_t`.
///
/// `|y|_s ≤ bound` is checked and a violation is reported as an error.
pub fn borel_apply(
    f: &PowerSeries,
    u: &ScaledOperator,
    x: &ScaledSeries,
    pair: &ScalePair,
) -> Result<(ScaledSeries, f64), OperatorError> {
    let nu = u.borel_nu(pair)?;
    if nu >= f.radius {
        return Err(OperatorError::Divergence { nu, radius: f.radius });
    }
    let y = borel_sum(f, u, x)?;
    let bound = f.eval_abs(nu) * u.read_norm(x, pair.t())?;
    check_bound(u, &y, pair, bound)?;
    Ok((y, bound))
}

/// Attractor form `f = z^k g`: `bound = g(r) ν^k |x|_t` for `ν ≤ r < radius(g)`.
pub fn borel_apply_attractor(
    g: &PowerSeries,
    k: usize,
    r: f64,
    u: &ScaledOperator,
    x: &ScaledSeries,
    pair: &ScalePair,
) -> Result<(ScaledSeries, f64), OperatorError> {
    let nu = u.borel_nu(pair)?;
    if r >= g.radius {
        return Err(OperatorError::Divergence { nu: r, radius: g.radius });
    }
    if nu > r {
        return Err(OperatorError::Divergence { nu, radius: r });
    }
    let y = borel_sum(&g.shift(k), u, x)?;
    let bound = g.eval_abs(r) * nu.powi(k as i32) * u.read_norm(x, pair.t())?;
    check_bound(u, &y, pair, bound)?;
    Ok((y, bound))
}

fn borel_sum(f: &PowerSeries, u: &ScaledOperator, x: &ScaledSeries) -> Result<ScaledSeries, OperatorError> {
    let b = f.borel();
    let mut y = x.empty_like();
    let mut power = x.clone();
    for (m, &a) in b.coeffs.iter().enumerate() {
        if m > 0 {
            power = u.apply(&power)?;
            if power.is_zero() {
                break;
            }
        }
        if a != 0.0 {
            y = y.add(&power.scale(Complex64::new(a, 0.0)))?;
        }
    }
    Ok(y)
}

fn check_bound(u: &ScaledOperator, y: &ScaledSeries, pair: &ScalePair, bound: f64) -> Result<(), OperatorError> {
    let lhs = u.read_norm(y, pair.s())?;
    if lhs > bound {
        return Err(OperatorError::BoundViolated { lhs, rhs: bound });
    }
    Ok(())
}

#[cfg(test)]
mod tests;
