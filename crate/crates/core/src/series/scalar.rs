//! One-variable truncated power series, used for majorants in the Borel calculus.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub coeffs: Vec<f64>,
    /// Radius of convergence of the untruncated series.
    #[serde(default = "infinite")]
    pub radius: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

impl PowerSeries {
    /// Polynomial (infinite radius).
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs, radius: f64::INFINITY }
    }

    pub fn with_radius(coeffs: Vec<f64>, radius: f64) -> Self {
        Self { coeffs, radius }
    }

    /// `1/(1−z)` up to degree `n`.
    pub fn geometric(n: usize) -> Self {
        Self::with_radius(vec![1.0; n + 1], 1.0)
    }

    /// `e^z` up to degree `n`.
    pub fn exp(n: usize) -> Self {
        let mut c = Vec::with_capacity(n + 1);
        let mut a = 1.0;
        for k in 0..=n {
            if k > 0 {
                a /= k as f64;
            }
            c.push(a);
        }
        Self::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut c = vec![0.0; k];
        c.extend_from_slice(&self.coeffs);
        Self::with_radius(c, self.radius)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * z + a)
    }

    /// `Σ |a_n| z^n`.
    pub fn eval_abs(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * z + a.abs())
    }

    pub fn borel(&self) -> Self {
        borel_transform(self)
    }
}

/// `Σ a_n z^n ↦ Σ (a_n / n!) z^n`.
pub fn borel_transform(f: &PowerSeries) -> PowerSeries {
    let mut fact = 1.0;
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| {
            if n > 0 {
                fact *= n as f64;
            }
            a / fact
        })
        .collect();
    // a_n/n! has infinite radius whenever Σ a_n z^n has a positive one
    PowerSeries::new(coeffs)
}
