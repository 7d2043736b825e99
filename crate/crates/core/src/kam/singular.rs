//! Singular normal form: `ω·pq + R`, `R ∈ 𝓜³`, is conjugated to `ω·pq`
//! modulo `ℂ ⊕ 𝕀²`, where `𝕀` is generated by the `q_i p_i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{solve_homological_singular, DivisorFloor, KamError, NormalFormResult, Residual, StepNorms, TransformStep};
use crate::arithmetic::best_constant;
use crate::newton::{iterate_parametric, DriverOptions, ReportBuilder, ScaleSchedule};
use crate::operators::{lie_exp, ScaledOperator};
use crate::series::{Mode, MultiIndex, ScalePair, ScaledSeries};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularHamiltonian {
    pub omega: Vec<f64>,
    /// Of order at least 3 at the origin.
    pub remainder: ScaledSeries,
}

impl SingularHamiltonian {
    pub fn new(omega: Vec<f64>, remainder: ScaledSeries) -> Result<Self, KamError> {
        let out = Self { omega, remainder };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), KamError> {
        let n = self.omega.len();
        if n == 0 || self.remainder.dim() != n || self.remainder.mode() != Mode::Singular {
            return Err(KamError::Invalid("remainder must be a singular series of the frequency's dimension".into()));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(KamError::Invalid("frequency must be finite".into()));
        }
        if self.remainder.terms().any(|(idx, _)| idx.total_degree() < 3) {
            return Err(KamError::Invalid("remainder must vanish to order 3".into()));
        }
        if self.remainder.trunc().max_total_degree.is_none() {
            return Err(KamError::Invalid("singular runs need a total-degree truncation".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// `Σ ω_i q_i p_i + R`.
    pub fn to_series(&self) -> ScaledSeries {
        let n = self.dim();
        let quad = ScaledSeries::from_terms(
            n,
            Mode::Singular,
            self.remainder.trunc(),
            true,
            self.omega.iter().enumerate().map(|(i, w)| (qp(n, i), Complex64::new(*w, 0.0))),
        )
        .expect("quadratic part fits");
        quad.add(&self.remainder).expect("same shape")
    }
}

fn qp(n: usize, i: usize) -> MultiIndex {
    MultiIndex::q(n, i, 1).add(&MultiIndex::p(n, i, 1))
}

fn is_qp(idx: &MultiIndex) -> bool {
    idx.total_degree() == 2 && idx.is_diagonal()
}

/// Terms outside `ℂ ⊕ 𝕀²` other than the `q_i p_i`.
pub fn singular_error(x: &ScaledSeries) -> ScaledSeries {
    x.filter(|i| i.resonant_units() <= 1 && i.total_degree() > 0 && !is_qp(i))
}

fn delta_omega(x: &ScaledSeries, omega: &[f64]) -> Vec<f64> {
    let n = omega.len();
    (0..n).map(|i| x.coeff(&qp(n, i)).re - omega[i]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SingularOptions {
    pub tol: f64,
    pub maxiter: usize,
    pub q: f64,
    /// Germ radius: the scales live in `(0, s0]`.
    pub s0: f64,
    pub l: f64,
    pub lie_tol: f64,
    pub nu: f64,
    pub ncut: u64,
    pub floor_safety: f64,
    pub floor: Option<DivisorFloor>,
    pub radius: f64,
    pub noise_floor: f64,
}

impl Default for SingularOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxiter: 30,
            q: 1.9,
            s0: 0.005,
            l: 4.0,
            lie_tol: 1e-16,
            nu: 1.0,
            ncut: 50,
            floor_safety: 0.5,
            floor: None,
            radius: 1.0,
            noise_floor: 1e-15,
        }
    }
}

/// Newton iteration to `ω·pq mod (ℂ ⊕ 𝕀²)`. Any `q_i p_i` coefficient change
/// is reported as `δω`.
pub fn kam_singular_run(ham: &SingularHamiltonian, opts: &SingularOptions) -> Result<NormalFormResult, KamError> {
    ham.validate()?;
    let mut warnings = Vec::new();
    let cert = best_constant(&ham.omega, opts.nu, opts.ncut)?;
    if cert.c < 1e-6 {
        warnings.push(format!("small Diophantine constant {:e} at ncut {}", cert.c, opts.ncut));
    }
    let floor = opts.floor.unwrap_or_else(|| DivisorFloor::from_certificate(&cert, opts.floor_safety));
    let schedule = ScaleSchedule::fitted(opts.s0, opts.l)?;
    let driver = DriverOptions { q: opts.q, tol: opts.tol, maxiter: opts.maxiter, k: 1, noise_floor: opts.noise_floor };

    let mut ledger = ReportBuilder::new();
    let mut steps = Vec::new();
    let mut log = Vec::new();
    let step = |_: &(), x: &ScaledSeries, (s, t): (f64, f64)| {
        let pair = ScalePair::new(s, t)?;
        let res = (|| {
            let err = singular_error(x);
            let error = err.norm(t)?;
            let (h, _) = solve_homological_singular(&err, &ham.omega, &floor)?;
            let lie = lie_exp(&h.neg(), &[], x, &pair, opts.lie_tol)?;
            let xi = ScaledOperator::lie_derivation(h.clone(), Vec::new());
            let norms = StepNorms {
                error,
                h: h.norm(t)?,
                shift: 0.0,
                nu: xi.declared_constant(t) / pair.gap(),
                lie_depth: lie.depth,
                tail_bound: lie.tail_bound,
            };
            Ok::<_, KamError>((lie.value, h, norms))
        })();
        match res {
            Ok((value, h, norms)) => {
                ledger.push(t, norms.error, Some(0.0));
                steps.push(norms);
                log.push(TransformStep { h, shift: Vec::new() });
                Ok(((), value, 0.0))
            }
            Err(e) => {
                ledger.push(t, singular_error(x).norm(t).unwrap_or(f64::NAN), None);
                Err(e.with_report(ledger.finish(opts.q, None, opts.noise_floor, false)))
            }
        }
    };
    let norm = |x: &ScaledSeries, s: f64| singular_error(x).norm(s).unwrap_or(f64::INFINITY);
    let x0 = ham.to_series();
    let ((), fin, report) = iterate_parametric(step, norm, (), 0.0, x0, &schedule, None, opts.radius, &driver)?;

    let s_end = report.iterations.last().map_or(opts.s0, |r| r.s_n);
    let error = singular_error(&fin);
    let residual = Residual { error_norm: error.norm(s_end)?, normal: fin.sub(&error)?, error, scale: s_end };
    let dw = delta_omega(&fin, &ham.omega);
    Ok(NormalFormResult {
        transform_log: log,
        final_hamiltonian: fin,
        residual,
        report,
        steps,
        t_value_scale: 1.0,
        delta_omega: Some(dw),
        certificate: Some(cert),
        warnings,
    })
}
