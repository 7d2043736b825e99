//! Invariant tori: `H = α·p + ½ pᵀβp + R(t,q,p)` is conjugated to `α·p` modulo
//! `ℂ{t} ⊕ I²`, where `I` is the ideal generated by the `p_i`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    condition_number, solve_homological_torus, t_series, DivisorFloor, KamError, NormalFormResult, Residual,
    StepNorms, TransformStep,
};
use crate::arithmetic::best_constant;
use crate::newton::{iterate_parametric, DriverOptions, ReportBuilder, ScaleSchedule};
use crate::operators::{lie_exp, ScaledOperator};
use crate::series::{poisson_bracket, Derivative, Mode, MultiIndex, ScalePair, ScaledSeries, Truncation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusHamiltonian {
    pub alpha: Vec<f64>,
    /// Hessian `∂²_p H` at `p = 0, t = 0`.
    pub beta: Vec<Vec<f64>>,
    /// Divisible by `t`.
    pub remainder: ScaledSeries,
}

impl TorusHamiltonian {
    pub fn new(alpha: Vec<f64>, beta: Vec<Vec<f64>>, remainder: ScaledSeries) -> Result<Self, KamError> {
        let out = Self { alpha, beta, remainder };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), KamError> {
        let n = self.alpha.len();
        if n == 0 || self.remainder.dim() != n || self.remainder.mode() != Mode::Torus {
            return Err(KamError::Invalid("remainder must be a torus series of the frequency's dimension".into()));
        }
        if self.alpha.iter().any(|a| !a.is_finite()) {
            return Err(KamError::Invalid("frequency must be finite".into()));
        }
        if self.beta.len() != n || self.beta.iter().any(|r| r.len() != n) {
            return Err(KamError::Invalid(format!("beta must be {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if self.beta[i][j] != self.beta[j][i] || !self.beta[i][j].is_finite() {
                    return Err(KamError::Invalid("beta must be symmetric and finite".into()));
                }
            }
        }
        if self.remainder.terms().any(|(idx, _)| idx.tdeg == 0) {
            return Err(KamError::Invalid("remainder must vanish at t = 0".into()));
        }
        if self.remainder.trunc().max_momentum_deg < 2 {
            return Err(KamError::Invalid("truncation must keep quadratic momenta".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn trunc(&self) -> Truncation {
        self.remainder.trunc()
    }

    pub fn beta_matrix(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| Complex64::new(self.beta[i][j], 0.0))
    }

    pub fn det_beta(&self) -> f64 {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.beta[i][j]).determinant()
    }

    /// `α·p + ½ pᵀβp + R`.
    pub fn to_series(&self) -> ScaledSeries {
        let n = self.dim();
        let mut terms = Vec::new();
        for (i, a) in self.alpha.iter().enumerate() {
            terms.push((MultiIndex::p(n, i, 1), Complex64::new(*a, 0.0)));
        }
        for i in 0..n {
            terms.push((MultiIndex::p(n, i, 2), Complex64::new(0.5 * self.beta[i][i], 0.0)));
            for j in i + 1..n {
                terms.push((MultiIndex::p(n, i, 1).add(&MultiIndex::p(n, j, 1)), Complex64::new(self.beta[i][j], 0.0)));
            }
        }
        let quad = ScaledSeries::from_terms(n, Mode::Torus, self.trunc(), true, terms).expect("quadratic part fits");
        quad.add(&self.remainder).expect("same shape")
    }
}

/// Coefficient partition of a torus series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorParts {
    /// `I = 0, J = 0`.
    pub pure_t: ScaledSeries,
    /// `I = 0, |J| = 1`.
    pub mean_linear: ScaledSeries,
    /// `I ≠ 0, J = 0`.
    pub osc_const: ScaledSeries,
    /// `I ≠ 0, |J| = 1`.
    pub osc_linear: ScaledSeries,
    /// `|J| ≥ 2`.
    pub higher: ScaledSeries,
}

impl ErrorParts {
    pub fn sum(&self) -> Result<ScaledSeries, KamError> {
        Ok(self
            .pure_t
            .add(&self.mean_linear)?
            .add(&self.osc_const)?
            .add(&self.osc_linear)?
            .add(&self.higher)?)
    }
}

pub fn decompose_error(x: &ScaledSeries) -> Result<ErrorParts, KamError> {
    if x.mode() != Mode::Torus {
        return Err(crate::series::SeriesError::UnsupportedMode(x.mode()).into());
    }
    Ok(ErrorParts {
        pure_t: x.filter(|i| i.is_fourier_zero() && i.momentum_l1() == 0),
        mean_linear: x.filter(|i| i.is_fourier_zero() && i.momentum_l1() == 1),
        osc_const: x.filter(|i| !i.is_fourier_zero() && i.momentum_l1() == 0),
        osc_linear: x.filter(|i| !i.is_fourier_zero() && i.momentum_l1() == 1),
        higher: x.filter(|i| i.momentum_l1() >= 2),
    })
}

/// The part of `x` outside `α·p + ℂ{t} ⊕ I²`: oscillating terms with `|J| ≤ 1`
/// and the `t`-dependent mean linear terms.
pub fn torus_error(x: &ScaledSeries) -> ScaledSeries {
    x.filter(|i| i.momentum_l1() <= 1 && !(i.is_fourier_zero() && (i.momentum_l1() == 0 || i.tdeg == 0)))
}

/// `a_i(t)` coefficients of `Σ a_i(t) p_i` in the `q`-mean of `x`: `out[i][k]`.
pub fn mean_linear_coeffs(x: &ScaledSeries) -> Vec<Vec<Complex64>> {
    let n = x.dim();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); x.trunc().max_tdeg as usize + 1]; n];
    for (idx, c) in x.terms() {
        if idx.is_fourier_zero() && idx.momentum_l1() == 1 {
            let i = idx.momentum.iter().position(|&m| m == 1).expect("one momentum");
            out[i][idx.tdeg as usize] += c;
        }
    }
    out
}

/// `q`-mean of `∂²_p H` at `p = 0`, as matrices indexed by the power of `t`.
pub fn mean_hessian(x: &ScaledSeries) -> Vec<DMatrix<Complex64>> {
    let n = x.dim();
    let mut out = vec![DMatrix::zeros(n, n); x.trunc().max_tdeg as usize + 1];
    for (idx, c) in x.terms() {
        if !idx.is_fourier_zero() || idx.momentum_l1() != 2 {
            continue;
        }
        let m = &mut out[idx.tdeg as usize];
        let nz: Vec<usize> = (0..n).filter(|&i| idx.momentum[i] > 0).collect();
        if nz.len() == 1 {
            m[(nz[0], nz[0])] += c * 2.0;
        } else {
            m[(nz[0], nz[1])] += c;
            m[(nz[1], nz[0])] += c;
        }
    }
    out
}

/// Solves `Hess(t) a(t) = m(t)` order by order in `t`.
///
/// Errors with [`KamError::NonDegeneracy`] when `Hess(0)` has condition number
/// above `cond_cap`.
pub fn frequency_correction(
    mean_linear: &[Vec<Complex64>],
    hessian: &[DMatrix<Complex64>],
    cond_cap: f64,
) -> Result<Vec<Vec<Complex64>>, KamError> {
    let n = mean_linear.len();
    let h0 = hessian.first().ok_or_else(|| KamError::Invalid("empty Hessian".into()))?;
    if h0.nrows() != n || h0.ncols() != n {
        return Err(KamError::Invalid("Hessian and right-hand side disagree in dimension".into()));
    }
    let cond = condition_number(h0);
    if !(cond <= cond_cap) {
        return Err(KamError::NonDegeneracy { cond, report: None });
    }
    let lu = h0.clone().lu();
    let order = mean_linear.iter().map(Vec::len).max().unwrap_or(0);
    let mut a: Vec<DVector<Complex64>> = Vec::with_capacity(order);
    for k in 0..order {
        let mut rhs = DVector::from_fn(n, |i, _| mean_linear[i].get(k).copied().unwrap_or_default());
        for j in 1..=k.min(hessian.len() - 1) {
            rhs -= &hessian[j] * &a[k - j];
        }
        a.push(lu.solve(&rhs).ok_or(KamError::NonDegeneracy { cond: f64::INFINITY, report: None })?);
    }
    Ok((0..n).map(|i| a.iter().map(|v| v[i]).collect()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutput {
    pub state: ScaledSeries,
    pub h: ScaledSeries,
    pub shift: Vec<ScaledSeries>,
    pub norms: StepNorms,
}

/// One Newton step on the full hamiltonian `state`.
///
/// The generator `h = h₀ + h₁` and shift `a(t)` cancel every term of the
/// error that is linear in it: `{α·p, h₀}` removes the oscillating `p`-free
/// part, `a` the mean linear part through the mean Hessian, and `h₁` the
/// oscillating linear part including the coupling `{H₂, h₀} + a·∂_p H₂` with
/// the quadratic part `H₂`. The new state is `exp(−ξ) state`,
/// `ξ = {−, h} + a·∂_p`.
pub fn kam_step(
    state: &ScaledSeries,
    alpha: &[f64],
    floor: &DivisorFloor,
    pair: &ScalePair,
    opts: &KamOptions,
) -> Result<StepOutput, KamError> {
    let n = state.dim();
    let (mode, trunc, real) = (state.mode(), state.trunc(), state.is_real());
    let err = torus_error(state);
    let error = err.norm(pair.t())?;
    let zero_shift = || vec![ScaledSeries::zero(n, mode, trunc); n];
    if err.is_zero() {
        let norms = StepNorms { error, h: 0.0, shift: 0.0, nu: 0.0, lie_depth: 0, tail_bound: 0.0 };
        return Ok(StepOutput { state: state.clone(), h: ScaledSeries::zero(n, mode, trunc), shift: zero_shift(), norms });
    }
    let parts = decompose_error(&err)?;
    let h0 = solve_homological_torus(&parts.osc_const, alpha, floor)?;
    let h2 = state.filter(|i| i.momentum_l1() == 2);
    let coupling = poisson_bracket(&h2, &h0)?.0.filter(|i| i.momentum_l1() == 1);

    let mut rhs = mean_linear_coeffs(&parts.mean_linear.sub(&coupling)?);
    for row in rhs.iter_mut() {
        row[0] = Complex64::new(0.0, 0.0);
    }
    let a = frequency_correction(&rhs, &mean_hessian(state), opts.cond_cap)?;
    let shift: Vec<ScaledSeries> = a.iter().map(|c| t_series(n, mode, trunc, c, real)).collect();

    let mut lin = parts.osc_linear.sub(&coupling)?;
    for (i, ai) in shift.iter().enumerate() {
        if !ai.is_zero() {
            lin = lin.sub(&ai.mul(&h2.derive(Derivative::P(i)))?.0)?;
        }
    }
    let h1 = solve_homological_torus(&lin.oscillating_part()?, alpha, floor)?;
    let h = h0.add(&h1)?;

    let neg_shift: Vec<ScaledSeries> = shift.iter().map(ScaledSeries::neg).collect();
    let lie = lie_exp(&h.neg(), &neg_shift, state, pair, opts.lie_tol)?;
    let xi = ScaledOperator::lie_derivation(h.clone(), shift.clone());
    let norms = StepNorms {
        error,
        h: h.norm(pair.t())?,
        shift: shift_norm(&shift, pair.t())?,
        nu: xi.declared_constant(pair.t()) / pair.gap(),
        lie_depth: lie.depth,
        tail_bound: lie.tail_bound,
    };
    Ok(StepOutput { state: lie.value, h, shift, norms })
}

fn shift_norm(shift: &[ScaledSeries], s: f64) -> Result<f64, KamError> {
    let mut acc = 0.0;
    for a in shift {
        acc += a.norm(s)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KamOptions {
    /// Stop once the error norm is at most this.
    pub tol: f64,
    pub maxiter: usize,
    pub q: f64,
    pub s0: f64,
    pub l: f64,
    /// `t` enters norms with weight `(τ s²)^k`.
    pub t_value_scale: f64,
    /// Target tail for each Lie series.
    pub lie_tol: f64,
    /// Largest admissible condition number of `β`.
    pub cond_cap: f64,
    /// Diophantine exponent and box used to certify the frequency.
    pub nu: f64,
    pub ncut: u64,
    pub floor_safety: f64,
    /// Explicit divisor floor, overriding the certificate-derived one.
    pub floor: Option<DivisorFloor>,
    /// `R` in the drift budget.
    pub radius: f64,
    /// Fits below this error are round-off.
    pub noise_floor: f64,
}

impl Default for KamOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxiter: 30,
            q: 1.9,
            s0: 0.4,
            l: 4.0,
            t_value_scale: 5e-3,
            lie_tol: 1e-16,
            cond_cap: 1e12,
            nu: 1.0,
            ncut: 50,
            floor_safety: 0.5,
            floor: None,
            radius: 1.0,
            noise_floor: 1e-15,
        }
    }
}

/// Newton iteration to the normal form `α·p mod (ℂ{t} ⊕ I²)`.
///
/// The frequency is certified on the box `ncut` first; a small constant only
/// produces a warning. Errors carry the ledger of the steps already taken.
pub fn kam_run(ham: &TorusHamiltonian, opts: &KamOptions) -> Result<NormalFormResult, KamError> {
    ham.validate()?;
    let cond = condition_number(&ham.beta_matrix());
    if !(cond <= opts.cond_cap) {
        return Err(KamError::NonDegeneracy { cond, report: None });
    }
    if !(opts.t_value_scale > 0.0) {
        return Err(KamError::Invalid("t_value_scale must be positive".into()));
    }
    let mut warnings = Vec::new();
    let cert = best_constant(&ham.alpha, opts.nu, opts.ncut)?;
    if cert.c < 1e-6 {
        warnings.push(format!("small Diophantine constant {:e} at ncut {}", cert.c, opts.ncut));
    }
    let floor = opts.floor.unwrap_or_else(|| DivisorFloor::from_certificate(&cert, opts.floor_safety));
    let schedule = ScaleSchedule::fitted(opts.s0, opts.l)?;
    let tau = opts.t_value_scale;
    let x0 = ham.to_series().rescale_t(tau);
    let driver = DriverOptions { q: opts.q, tol: opts.tol, maxiter: opts.maxiter, k: 1, noise_floor: opts.noise_floor };

    let mut ledger = ReportBuilder::new();
    let mut steps = Vec::new();
    let mut log = Vec::new();
    let step = |_: &(), x: &ScaledSeries, (s, t): (f64, f64)| {
        let pair = ScalePair::new(s, t)?;
        match kam_step(x, &ham.alpha, &floor, &pair, opts) {
            Ok(out) => {
                ledger.push(t, out.norms.error, Some(out.norms.shift));
                let drift = out.norms.shift;
                steps.push(out.norms);
                log.push(TransformStep { h: out.h, shift: out.shift });
                Ok(((), out.state, drift))
            }
            Err(e) => {
                ledger.push(t, torus_error(x).norm(t).unwrap_or(f64::NAN), None);
                Err(e.with_report(ledger.finish(opts.q, None, opts.noise_floor, false)))
            }
        }
    };
    let norm = |x: &ScaledSeries, s: f64| torus_error(x).norm(s).unwrap_or(f64::INFINITY);
    let ((), fin, report) = iterate_parametric(step, norm, (), 0.0, x0, &schedule, None, opts.radius, &driver)?;

    let s_end = report.iterations.last().map_or(opts.s0, |r| r.s_n);
    let error = torus_error(&fin);
    let residual = Residual {
        error_norm: error.norm(s_end)?,
        normal: fin.sub(&error)?.rescale_t(1.0 / tau),
        error: error.rescale_t(1.0 / tau),
        scale: s_end,
    };
    let transform_log = log
        .into_iter()
        .map(|st| TransformStep { h: st.h.rescale_t(1.0 / tau), shift: st.shift.iter().map(|a| a.rescale_t(1.0 / tau)).collect() })
        .collect();
    Ok(NormalFormResult {
        transform_log,
        final_hamiltonian: fin.rescale_t(1.0 / tau),
        residual,
        report,
        steps,
        t_value_scale: tau,
        delta_omega: None,
        certificate: Some(cert),
        warnings,
    })
}
