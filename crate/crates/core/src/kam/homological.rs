//! Homological equations `{H₀, h} = P` with `H₀ = α·p` (torus) or `ω·pq` (singular).

use num_complex::Complex64;

use super::{DivisorFloor, KamError};
use crate::series::{Mode, MultiIndex, ScaledSeries, SeriesError};

/// `(α, k)` with error-free products and compensated summation, so that
/// near-resonant divisors keep full relative accuracy.
fn divisor(alpha: &[f64], k: impl Iterator<Item = i64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for (a, k) in alpha.iter().zip(k) {
        let kf = k as f64;
        let p = a * kf;
        let p_err = a.mul_add(kf, -p);
        let t = sum + p;
        let z = t - sum;
        comp += (sum - (t - z)) + (p - z) + p_err;
        sum = t;
    }
    sum + comp
}

fn torus_divisor(alpha: &[f64], idx: &MultiIndex) -> f64 {
    divisor(alpha, idx.fourier.iter().map(|&x| x as i64))
}

fn singular_divisor(omega: &[f64], idx: &MultiIndex) -> f64 {
    divisor(omega, idx.fourier.iter().zip(&idx.momentum).map(|(&i, &j)| i as i64 - j as i64))
}

/// `c / (√−1 d)` with one rounding per component.
fn div_i(c: Complex64, d: f64) -> Complex64 {
    Complex64::new(c.im / d, -c.re / d)
}

/// `c · √−1 d` with one rounding per component.
fn mul_i(c: Complex64, d: f64) -> Complex64 {
    Complex64::new(-(c.im * d), c.re * d)
}

/// `{α·p, h}`, computed as the diagonal multiplier `√−1 (α, I)`.
pub fn frequency_action_torus(h: &ScaledSeries, alpha: &[f64]) -> Result<ScaledSeries, KamError> {
    check_dim(h, Mode::Torus, alpha)?;
    Ok(h.map_coeffs(true, |idx, c| mul_i(c, torus_divisor(alpha, idx))))
}

/// `{ω·pq, h}`, computed as the diagonal multiplier `(ω, I − J)`.
pub fn frequency_action_singular(h: &ScaledSeries, omega: &[f64]) -> Result<ScaledSeries, KamError> {
    check_dim(h, Mode::Singular, omega)?;
    Ok(h.map_coeffs(true, |idx, c| c * singular_divisor(omega, idx)))
}

fn check_dim(p: &ScaledSeries, mode: Mode, freq: &[f64]) -> Result<(), KamError> {
    if p.mode() != mode {
        return Err(SeriesError::UnsupportedMode(p.mode()).into());
    }
    if freq.len() != p.dim() {
        return Err(SeriesError::DimMismatch(p.dim(), freq.len()).into());
    }
    Ok(())
}

/// `h` with `{α·p, h} = P`: each coefficient is divided by `√−1 (α, I)`.
///
/// `P` must have zero `q`-mean. Real `P` gives real `h`, since `(α,−I) = −(α,I)`.
pub fn solve_homological_torus(p: &ScaledSeries, alpha: &[f64], floor: &DivisorFloor) -> Result<ScaledSeries, KamError> {
    check_dim(p, Mode::Torus, alpha)?;
    for (idx, _) in p.terms() {
        if idx.is_fourier_zero() {
            return Err(KamError::NonZeroMean);
        }
        floor.check(&idx.fourier, torus_divisor(alpha, idx))?;
    }
    Ok(p.map_coeffs(true, |idx, c| div_i(c, torus_divisor(alpha, idx))))
}

/// `h` with `{ω·pq, h} = P − rejected`: the coefficient at `q^I p^J` is divided
/// by `(ω, I − J)`; monomials with `I = J` are returned in `rejected`.
pub fn solve_homological_singular(
    p: &ScaledSeries,
    omega: &[f64],
    floor: &DivisorFloor,
) -> Result<(ScaledSeries, ScaledSeries), KamError> {
    check_dim(p, Mode::Singular, omega)?;
    for (idx, _) in p.terms() {
        if idx.is_diagonal() {
            continue;
        }
        let k: Vec<i32> = idx.fourier.iter().zip(&idx.momentum).map(|(&i, &j)| i - j as i32).collect();
        floor.check(&k, singular_divisor(omega, idx))?;
    }
    let rejected = p.filter(|idx| idx.is_diagonal());
    let h = p.filter(|idx| !idx.is_diagonal()).map_coeffs(true, |idx, c| c / singular_divisor(omega, idx));
    Ok((h, rejected))
}
