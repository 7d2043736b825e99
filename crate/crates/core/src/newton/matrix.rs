//! Kolmogorov diagonalisation of matrices: `A ↦ e^{−ξ} A e^{ξ}` with `[ξ, D] = X`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ConvergenceReport, NewtonError, ReportBuilder};
use crate::series::PowerSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizeOptions {
    pub tol: f64,
    pub maxiter: usize,
    /// Smallest admissible `|d_j − d_i|`.
    pub gap_threshold: f64,
    pub q: f64,
}

impl Default for DiagonalizeOptions {
    fn default() -> Self {
        Self { tol: 1e-12, maxiter: 30, gap_threshold: 1e-8, q: 1.9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalization {
    /// `g⁻¹ A g = D + O(tol)`; `g` is the product of the `e^{ξ_n}`.
    pub g: DMatrix<Complex64>,
    pub d: DVector<Complex64>,
    pub report: ConvergenceReport,
    pub cond_g: f64,
    /// `‖ξ_n‖` per step.
    pub xi_norms: Vec<f64>,
    /// `‖g_{n+1} − g_n‖` per step.
    pub g_steps: Vec<f64>,
}

/// Spectral norm.
pub(crate) fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn split(a: &DMatrix<Complex64>) -> (DVector<Complex64>, DMatrix<Complex64>) {
    let d = a.diagonal();
    let mut x = a.clone();
    x.fill_diagonal(Complex64::new(0.0, 0.0));
    (d, x)
}

/// Spectral norm of the off-diagonal part.
pub fn offdiag_norm(a: &DMatrix<Complex64>) -> f64 {
    op_norm(&split(a).1)
}

/// `ξ_ij = X_ij / (d_j − d_i)`, i.e. `[ξ, D] = X`.
fn homological(d: &DVector<Complex64>, x: &DMatrix<Complex64>, threshold: f64) -> Result<DMatrix<Complex64>, NewtonError> {
    let n = d.len();
    let mut xi = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let gap = d[j] - d[i];
            if gap.norm() < threshold {
                return Err(NewtonError::Resonance { i, j, gap: gap.norm() });
            }
            xi[(i, j)] = x[(i, j)] / gap;
        }
    }
    Ok(xi)
}

fn check_square(a: &DMatrix<Complex64>) -> Result<(), NewtonError> {
    if !a.is_square() || a.is_empty() {
        return Err(NewtonError::Invalid(format!("matrix must be square and non-empty, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NewtonError::Invalid("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Iterates `A_{n+1} = e^{−ξ_n} A_n e^{ξ_n}` until the off-diagonal spectral
/// norm drops below `tol`.
///
/// Errors with [`NewtonError::Resonance`] when two diagonal entries come within
/// `gap_threshold`, and with [`NewtonError::NonConvergence`] (carrying the
/// report) after `maxiter` steps.
pub fn diagonalize_kolmogorov(a: &DMatrix<Complex64>, opts: &DiagonalizeOptions) -> Result<Diagonalization, NewtonError> {
    check_square(a)?;
    let n = a.nrows();
    let scale = op_norm(a).max(f64::MIN_POSITIVE);
    // Rounding in the off-diagonal block of `e^{−ξ}Ae^{ξ}` scales with
    // `‖A‖‖ξ‖`, and `‖ξ‖` with the initial off-diagonal size.
    let noise = 100.0 * f64::EPSILON * scale.min(op_norm(&split(a).1));
    let mut cur = a.clone();
    let mut g = DMatrix::<Complex64>::identity(n, n);
    let mut builder = ReportBuilder::new();
    let mut xi_norms = Vec::new();
    let mut g_steps = Vec::new();
    loop {
        let (d, x) = split(&cur);
        let e = op_norm(&x);
        builder.push(f64::NAN, e, None);
        if e <= opts.tol {
            let report = builder.finish(opts.q, None, noise, true);
            let sv = g.clone().svd(false, false).singular_values;
            let cond_g = sv.max() / sv.min();
            return Ok(Diagonalization { g, d, report, cond_g, xi_norms, g_steps });
        }
        if builder.len() > opts.maxiter {
            return Err(NewtonError::NonConvergence(Box::new(builder.finish(opts.q, None, noise, false))));
        }
        let xi = homological(&d, &x, opts.gap_threshold)?;
        xi_norms.push(op_norm(&xi));
        let ex = xi.clone().exp();
        let emx = (-xi).exp();
        cur = &emx * &cur * &ex;
        let next = &g * &ex;
        g_steps.push(op_norm(&(&next - &g)));
        g = next;
    }
}

/// `Σ_{m≥2} (−1)^m (1−m) z^m`: `e^{−ad_ξ}(D + X) = D + f(ad_ξ)(D)` when `[ξ, D] = X`.
/// Its Borel transform is `e^{−z}(1+z) − 1`.
pub fn kolmogorov_remainder(degree: usize) -> PowerSeries {
    let mut c = vec![0.0; degree.max(2) + 1];
    for (m, v) in c.iter_mut().enumerate().skip(2) {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *v = sign * (1.0 - m as f64);
    }
    PowerSeries::with_radius(c, 1.0)
}

/// One step `A ↦ D + (Bf)(ad_ξ)(D)` with `ξ = j(X)`, summing the Borel
/// transform of `f` until terms stop contributing.
pub fn matrix_kolmogorov_step(
    a: &DMatrix<Complex64>,
    f: &PowerSeries,
    gap_threshold: f64,
) -> Result<DMatrix<Complex64>, NewtonError> {
    check_square(a)?;
    if f.coeff(0) != 0.0 || f.coeff(1) != 0.0 {
        return Err(NewtonError::SourceOrder);
    }
    let (d, x) = split(a);
    let xi = homological(&d, &x, gap_threshold)?;
    let dm = DMatrix::from_diagonal(&d);
    let bf = f.borel();
    let mut out = dm.clone();
    let mut term = dm;
    for m in 1..=bf.degree() {
        term = &xi * &term - &term * &xi;
        let c = bf.coeff(m);
        if c != 0.0 {
            out += &term * Complex64::new(c, 0.0);
        }
        if op_norm(&term) == 0.0 {
            break;
        }
    }
    Ok(out)
}
