//! Generic quadratic iterations on a declining scale schedule.

use serde::{Deserialize, Serialize};

use super::{ConvergenceReport, NewtonError, ReportBuilder, ScaleSchedule};
use crate::series::PowerSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverOptions {
    pub q: f64,
    pub tol: f64,
    pub maxiter: usize,
    /// Order `k` of the right inverse `j`.
    pub k: u32,
    /// Errors below this are round-off for the order fit.
    pub noise_floor: f64,
}

impl Default for DriverOptions {
    fn default() -> Self {
        Self { q: 1.9, tol: 1e-12, maxiter: 30, k: 1, noise_floor: 1e-14 }
    }
}

fn check_q_rho(q: f64, rho: f64) -> Result<(), NewtonError> {
    if !(q > 1.0 && q < 2.0) {
        return Err(NewtonError::Invalid(format!("q = {q} outside (1, 2)")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(NewtonError::Invalid(format!("rho = {rho} outside (0, 1)")));
    }
    Ok(())
}

/// `2^{k(n+1)/l} ρ^{(2−q)q^n} ≤ 1` for `n < steps`.
fn sufficient(k: u32, l: f64, rho: f64, q: f64, steps: usize) -> bool {
    (0..steps.max(1)).all(|n| {
        let lhs = (k as f64) * (n as f64 + 1.0) / l * std::f64::consts::LN_2 + (2.0 - q) * q.powi(n as i32) * rho.ln();
        lhs <= 0.0
    })
}

/// Runs `u_{n+1} = step(u_n, f, (s_{n+1}, s_n))`, where `step` realises
/// `j ∘ Bf` for the caller's space, recording `norm(u_n, s_n)`.
///
/// The basin condition `|u_0|² ≤ ρ` and the sufficient envelope condition are
/// evaluated and reported; neither aborts the run.
pub fn iterate_homogeneous<E, S, N>(
    mut step: S,
    norm: N,
    f: &PowerSeries,
    x0: E,
    schedule: &ScaleSchedule,
    rho: f64,
    opts: &DriverOptions,
) -> Result<(E, ConvergenceReport), NewtonError>
where
    S: FnMut(&E, &PowerSeries, (f64, f64)) -> Result<E, NewtonError>,
    N: Fn(&E, f64) -> f64,
{
    check_q_rho(opts.q, rho)?;
    if f.coeff(0) != 0.0 || f.coeff(1) != 0.0 {
        return Err(NewtonError::SourceOrder);
    }
    let mut u = x0;
    let mut builder = ReportBuilder::new();
    let e0 = norm(&u, schedule.scale(0));
    let mut n = 0;
    let converged = loop {
        let s_n = schedule.scale(n);
        let e = if n == 0 { e0 } else { norm(&u, s_n) };
        builder.push(s_n, e, None);
        if e <= opts.tol {
            break true;
        }
        if n >= opts.maxiter {
            break false;
        }
        u = step(&u, f, schedule.pair(n))?;
        n += 1;
    };
    let mut report = builder.finish(opts.q, Some(rho), opts.noise_floor, converged);
    report.basin_ok = Some(e0 * e0 <= rho);
    report.sufficient_condition = Some(sufficient(opts.k, schedule.l, rho, opts.q, report.steps()));
    if !converged {
        return Err(NewtonError::NonConvergence(Box::new(report)));
    }
    Ok((u, report))
}

/// One step of a parametric iteration: returns the new transversal parameter,
/// the new error term and the norm `‖α_n‖` of the transversal correction.
pub type ParametricStep<A, X> = (A, X, f64);

/// Runs `(a_{n+1}, x_{n+1}) = step(a_n, x_n, (s_{n+1}, s_n))`, tracking
/// `e_n = norm(x_n, s_n)` and the accumulated drift `Σ ‖α_n‖`.
///
/// `rho = None` fits `ρ` from the run. `radius` is `R`: the drift budget `R Σ ρ^{2^i}` and `|a_0| ≤ R/2` are
/// evaluated and reported.
#[allow(clippy::too_many_arguments)]
pub fn iterate_parametric<A, X, S, N, E>(
    mut step: S,
    norm: N,
    a0: A,
    a0_norm: f64,
    x0: X,
    schedule: &ScaleSchedule,
    rho: Option<f64>,
    radius: f64,
    opts: &DriverOptions,
) -> Result<(A, X, ConvergenceReport), E>
where
    S: FnMut(&A, &X, (f64, f64)) -> Result<ParametricStep<A, X>, E>,
    N: Fn(&X, f64) -> f64,
    E: From<NewtonError>,
{
    if let Some(rho) = rho {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(NewtonError::Invalid(format!("rho = {rho} outside (0, 1)")).into());
        }
    }
    let mut a = a0;
    let mut x = x0;
    let mut builder = ReportBuilder::new();
    let mut drift = 0.0;
    let mut alpha = None;
    let mut n = 0;
    let converged = loop {
        let s_n = schedule.scale(n);
        let e = norm(&x, s_n);
        builder.push(s_n, e, alpha);
        if e <= opts.tol {
            break true;
        }
        if n >= opts.maxiter {
            break false;
        }
        let (a1, x1, al) = step(&a, &x, schedule.pair(n))?;
        drift += al;
        alpha = Some(al);
        a = a1;
        x = x1;
        n += 1;
    };
    let mut report = builder.finish(opts.q, rho, opts.noise_floor, converged);
    let rho = report.rho;
    let budget = radius * (0..64).map(|i| rho.powf(2f64.powi(i))).sum::<f64>();
    let e0 = report.iterations[0].e_n;
    report.basin_ok = Some(e0 <= rho && a0_norm <= radius / 2.0);
    report.drift_total = Some(drift);
    report.drift_budget = Some(budget);
    report.budget_ok = Some(drift <= budget && a0_norm + drift < radius);
    if !converged {
        return Err(NewtonError::NonConvergence(Box::new(report)).into());
    }
    Ok((a, x, report))
}
