//! Monte Carlo check of the measure estimate for non-Diophantine vectors in the plane.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ArithmeticError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub nu: f64,
    pub c: f64,
    pub n_box: f64,
    pub samples: u64,
    pub ncut: u64,
    pub seed: u64,
    pub violations: u64,
    pub empirical_fraction: f64,
    /// Binomial standard error `sqrt(p̂(1−p̂)/samples)`.
    pub sigma: f64,
    /// Upper bound for `K_ν = Σ_{j≠0} ‖j‖^{−2−ν}`.
    pub k_nu: f64,
    /// `4 K_ν C N / (2N)²`.
    pub paper_bound: f64,
}

/// Rigorous upper bound for `K_ν = Σ_{j ∈ ℤ²∖0} ‖j‖₂^{−2−ν}`.
///
/// Exact partial sum over `‖j‖∞ ≤ m` plus the integral tail
/// `(1 + √2/(2m))^{2+ν} · 2π (m − √2/2)^{−ν} / ν`.
pub fn k_nu(nu: f64, m: u32) -> f64 {
    let m_i = m as i64;
    let e = -(2.0 + nu) / 2.0;
    let mut partial = 0.0;
    // one octant-free quadrant sweep: j1 ≥ 1, j2 ≥ 0 covers ℤ²∖0 four times by rotation
    for j1 in 1..=m_i {
        for j2 in 0..=m_i {
            partial += ((j1 * j1 + j2 * j2) as f64).powf(e);
        }
    }
    let partial = 4.0 * partial;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = m as f64;
    let tail = (1.0 + h / m).powf(2.0 + nu) * std::f64::consts::TAU * (m - h).powf(-nu) / nu;
    partial + tail
}

/// Does `a` violate `|(j,a)| ≥ c/‖j‖^{2+ν}` for some `0 < ‖j‖∞ ≤ ncut`?
fn violates(a: [f64; 2], c: f64, nu: f64, ncut: i64) -> bool {
    if c <= 0.0 {
        return false;
    }
    let (k, o) = if a[0].abs() >= a[1].abs() { (0, 1) } else { (1, 0) };
    let (ak, ao) = (a[k], a[o]);
    let expo = 2.0 + nu;
    let check = |jk: i64, jo: i64| {
        let dot = jk as f64 * ak + jo as f64 * ao;
        let norm = ((jk * jk + jo * jo) as f64).sqrt();
        dot.abs() < c / norm.powf(expo)
    };
    // j_o = 0: |j_k a_k| |j_k|^{2+ν} is increasing in |j_k|
    if check(1, 0) {
        return true;
    }
    if ak == 0.0 {
        return false;
    }
    for jo in -ncut..=ncut {
        if jo == 0 {
            continue;
        }
        let r = jo as f64 * ao;
        let width = c / (jo.abs() as f64).powf(expo) / ak.abs() * (1.0 + 1e-9);
        let centre = -r / ak;
        let lo = ((centre - width).floor() as i64).max(-ncut);
        let hi = ((centre + width).ceil() as i64).min(ncut);
        if (lo..=hi).any(|jk| check(jk, jo)) {
            return true;
        }
    }
    false
}

/// Fraction of the square `[−N, N]²` violating the Diophantine condition with
/// constant `c` on the box `‖j‖∞ ≤ ncut`, against the bound `4 K_ν C N/(2N)²`.
///
/// Sample `i` draws from the ChaCha stream `i` of `seed`, so the result does
/// not depend on thread scheduling.
pub fn measure_estimate(
    nu: f64,
    c: f64,
    n_box: f64,
    samples: u64,
    ncut: u64,
    seed: u64,
) -> Result<MeasureEstimate, ArithmeticError> {
    if !(nu > 0.0) || !(c >= 0.0) || !(n_box > 0.0) || samples == 0 || ncut == 0 {
        return Err(ArithmeticError::InvalidInput(format!(
            "nu={nu}, C={c}, N={n_box}, samples={samples}, ncut={ncut}"
        )));
    }
    let ncut_i = i64::try_from(ncut).map_err(|_| ArithmeticError::Overflow)?;
    let violations = (0..samples)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let a = [rng.gen_range(-n_box..=n_box), rng.gen_range(-n_box..=n_box)];
            violates(a, c, nu, ncut_i)
        })
        .count() as u64;
    let p = violations as f64 / samples as f64;
    let k = k_nu(nu, 400);
    Ok(MeasureEstimate {
        nu,
        c,
        n_box,
        samples,
        ncut,
        seed,
        violations,
        empirical_fraction: p,
        sigma: (p * (1.0 - p) / samples as f64).sqrt(),
        k_nu: k,
        paper_bound: 4.0 * k * c * n_box / (2.0 * n_box).powi(2),
    })
}
