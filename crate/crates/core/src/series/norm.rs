//! Scale-indexed norms.
//!
//! The majorant norm `|f|_s = Σ |a| w_s(index)` realizes the Banach space `E_s`.
//! Torus weight: `e^{s|I|₁} s^{|J|₁} s^{2k}` on the annuli `e^{-s} ≤ |q_i| ≤ e^{s}`,
//! `|p_i| ≤ s`, `|t| ≤ s²`. Singular weight: `s^{|I|₁+|J|₁}` on the polydisk of
//! radius `s`. The L² norm on `1 − s ≤ |z| ≤ 1 + s` is provided for pure Fourier
//! series in one variable.

use super::index::Mode;
use super::{ScaledSeries, SeriesError, SCALE_CAP};

pub(crate) fn check_scale(s: f64) -> Result<(), SeriesError> {
    if s.is_finite() && s > 0.0 && s <= SCALE_CAP {
        Ok(())
    } else {
        Err(SeriesError::Domain { s, cap: SCALE_CAP })
    }
}

/// Majorant weight of a monomial with `|I|₁ = i`, `|J|₁ = j`, `t`-degree `k`.
pub fn monomial_weight(mode: Mode, i: u32, j: u32, k: u32, s: f64) -> f64 {
    match mode {
        Mode::Torus => (s * i as f64).exp() * s.powi(j as i32) * s.powi(2 * k as i32),
        Mode::Singular => s.powi((i + j) as i32),
    }
}

/// Weighted ℓ¹ norm at scale `s`.
pub fn norm_majorant(f: &ScaledSeries, s: f64) -> Result<f64, SeriesError> {
    check_scale(s)?;
    Ok(majorant_unchecked(f, s))
}

pub(crate) fn majorant_unchecked(f: &ScaledSeries, s: f64) -> f64 {
    f.terms()
        .map(|(idx, c)| {
            c.norm() * monomial_weight(f.mode(), idx.fourier_l1(), idx.momentum_l1(), idx.tdeg, s)
        })
        .fold(0.0, |a, b| a + b)
}

/// Majorant norm of a series read on a space rescaled by `lambda`: `|f|'_s = |f|_{λs}`.
pub fn norm_rescaled(f: &ScaledSeries, s: f64, lambda: f64) -> Result<f64, SeriesError> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(SeriesError::Rescale(lambda));
    }
    norm_majorant(f, lambda * s)
}

/// `⟨zⁿ|zⁿ⟩` on the annulus `1 − s ≤ |z| ≤ 1 + s` for the volume form `dx dy / 2π`.
pub fn annulus_inner_product(n: i32, s: f64) -> f64 {
    if n == -1 {
        ((1.0 + s) / (1.0 - s)).ln()
    } else {
        let m = 2 * n + 2;
        ((1.0 + s).powi(m) - (1.0 - s).powi(m)) / m as f64
    }
}

/// L² norm on the annulus `1 − s ≤ |z| ≤ 1 + s`; monomials are orthogonal.
pub fn norm_l2_annulus(f: &ScaledSeries, s: f64) -> Result<f64, SeriesError> {
    check_scale(s)?;
    if f.dim() != 1 || f.mode() != Mode::Torus {
        return Err(SeriesError::UnsupportedShape(
            "L² annulus norm needs a one-variable Fourier series".into(),
        ));
    }
    let mut acc = 0.0;
    for (idx, c) in f.terms() {
        if !idx.is_momentum_zero() || idx.tdeg != 0 {
            return Err(SeriesError::UnsupportedShape(
                "L² annulus norm needs a series without p or t dependence".into(),
            ));
        }
        acc += c.norm_sqr() * annulus_inner_product(idx.fourier[0], s);
    }
    Ok(acc.sqrt())
}

/// `σ⁻¹ · ‖f‖_{L², s+σ}`: bound for `sup |f|` on the `s`-annulus.
pub fn pointwise_bound_from_l2(f: &ScaledSeries, s: f64, sigma: f64) -> Result<f64, SeriesError> {
    check_scale(s)?;
    if !(sigma > 0.0) {
        return Err(SeriesError::Domain { s: sigma, cap: SCALE_CAP });
    }
    check_scale(s + sigma)?;
    Ok(norm_l2_annulus(f, s + sigma)? / sigma)
}

/// Log-log slope of `s ↦ |f|_s` between two scales; recovers the order of
/// vanishing in the filtration `E^(k)` on monomials.
pub fn vanishing_order(f: &ScaledSeries, s1: f64, s2: f64) -> Result<f64, SeriesError> {
    let a = norm_majorant(f, s1)?;
    let b = norm_majorant(f, s2)?;
    Ok((b / a).ln() / (s2 / s1).ln())
}
