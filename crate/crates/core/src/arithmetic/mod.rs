//! Diophantine conditions: best constants on a finite box, the Liouville
//! counterexample, and a Monte Carlo check of the full-measure estimate.

mod liouville;
mod measure;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use liouville::{liouville_witness, LiouvilleCertificate};
pub use measure::{k_nu, measure_estimate, MeasureEstimate};

/// Largest number of "rest" vectors a scan may visit.
pub const DEFAULT_BOX_LIMIT: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithmeticError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("search box of radius {requested} is too large; largest admissible radius is {partial_radius}")]
    Resource { requested: u64, partial_radius: u64 },
    #[error("integer overflow")]
    Overflow,
}

/// Result of an exhaustive search for the Diophantine constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineCertificate {
    pub alpha: Vec<f64>,
    pub nu: f64,
    /// `min |(j,α)|·‖j‖^{n+ν}` over `0 < ‖j‖∞ ≤ ncut`, Euclidean `‖j‖`.
    pub c: f64,
    pub ncut: u64,
    /// Minimizer; sign normalized so the first nonzero entry is positive, and
    /// lexicographically smallest among exact ties.
    pub worst_j: Vec<i64>,
}

impl DiophantineCertificate {
    pub fn is_resonant(&self) -> bool {
        self.c == 0.0
    }
}

pub fn best_constant(alpha: &[f64], nu: f64, ncut: u64) -> Result<DiophantineCertificate, ArithmeticError> {
    best_constant_with_limit(alpha, nu, ncut, DEFAULT_BOX_LIMIT)
}

/// Exhaustive scan of the box `‖j‖∞ ≤ ncut`.
///
/// The coordinate `k` with the largest `|α_k|` is not enumerated: for each
/// value of the remaining coordinates only the `j_k` that can beat the current
/// best are visited, which is exact because `‖j‖ ≥ ‖rest‖`.
/// `ν = 0` is accepted and gives the Dirichlet quantity `|(j,α)|·‖j‖ⁿ`.
pub fn best_constant_with_limit(
    alpha: &[f64],
    nu: f64,
    ncut: u64,
    box_limit: u64,
) -> Result<DiophantineCertificate, ArithmeticError> {
    let n = alpha.len();
    if n == 0 || alpha.iter().all(|&a| a == 0.0) || alpha.iter().any(|a| !a.is_finite()) {
        return Err(ArithmeticError::InvalidInput("alpha must be finite and nonzero".into()));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(ArithmeticError::InvalidInput(format!("nu = {nu}")));
    }
    if ncut == 0 {
        return Err(ArithmeticError::InvalidInput("ncut must be at least 1".into()));
    }
    let radius = i64::try_from(ncut).map_err(|_| ArithmeticError::Overflow)?;
    let side = radius.checked_mul(2).and_then(|v| v.checked_add(1)).ok_or(ArithmeticError::Overflow)? as u64;
    let rest_count = side.checked_pow((n - 1) as u32);
    if rest_count.map_or(true, |c| c > box_limit) {
        let mut r = ncut;
        while r > 0 && (2 * r + 1).checked_pow((n - 1) as u32).map_or(true, |c| c > box_limit) {
            r /= 2;
        }
        while (2 * (r + 1) + 1).checked_pow((n - 1) as u32).map_or(false, |c| c <= box_limit) {
            r += 1;
        }
        return Err(ArithmeticError::Resource { requested: ncut, partial_radius: r });
    }

    let k = (0..n)
        .max_by(|&a, &b| alpha[a].abs().total_cmp(&alpha[b].abs()).then(b.cmp(&a)))
        .unwrap();
    let ak = alpha[k];
    let expo = n as f64 + nu;
    let value = |j: &[i64]| -> f64 {
        let dot: f64 = j.iter().zip(alpha).map(|(&x, a)| x as f64 * a).sum();
        let norm = (j.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>()).sqrt();
        dot.abs() * norm.powf(expo)
    };
    let canonical = |j: &mut Vec<i64>| {
        if let Some(&first) = j.iter().find(|&&x| x != 0) {
            if first < 0 {
                j.iter_mut().for_each(|x| *x = -*x);
            }
        }
    };

    let mut best_j = vec![0i64; n];
    best_j[k] = 1;
    let mut best = value(&best_j);
    canonical(&mut best_j);
    let consider = |mut j: Vec<i64>, best: &mut f64, best_j: &mut Vec<i64>| {
        let v = value(&j);
        if v <= *best {
            canonical(&mut j);
            if v < *best || j < *best_j {
                *best = v;
                *best_j = j;
            }
        }
    };

    let mut rest = vec![-radius; n - 1];
    loop {
        if rest.iter().any(|&x| x != 0) {
            let mut r = 0.0;
            let mut norm2 = 0.0;
            for (idx, &x) in rest.iter().enumerate() {
                let coord = if idx < k { idx } else { idx + 1 };
                r += x as f64 * alpha[coord];
                norm2 += (x as f64) * (x as f64);
            }
            // |r + j_k α_k| must not exceed best / ‖rest‖^{n+ν}
            let slack = best / norm2.sqrt().powf(expo) * (1.0 + 1e-9) + f64::EPSILON * r.abs();
            let centre = -r / ak;
            let half = slack / ak.abs();
            let lo = ((centre - half).floor() as i64).max(-radius);
            let hi = ((centre + half).ceil() as i64).min(radius);
            for jk in lo..=hi {
                let mut j = Vec::with_capacity(n);
                j.extend_from_slice(&rest[..k]);
                j.push(jk);
                j.extend_from_slice(&rest[k..]);
                consider(j, &mut best, &mut best_j);
            }
        }
        // advance the odometer
        let mut pos = 0;
        loop {
            if pos == rest.len() {
                return Ok(DiophantineCertificate {
                    alpha: alpha.to_vec(),
                    nu,
                    c: best,
                    ncut,
                    worst_j: best_j,
                });
            }
            if rest[pos] < radius {
                rest[pos] += 1;
                break;
            }
            rest[pos] = -radius;
            pos += 1;
        }
    }
}
