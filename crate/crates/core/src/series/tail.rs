use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::{Mode, MultiIndex};
use super::norm::monomial_weight;

/// Majorant ledger of coefficients discarded by truncation.
///
/// Absolute values are bucketed by `(|I|₁, |J|₁, k)`; the majorant weight of a
/// monomial depends only on those three numbers, so the tail norm at any scale
/// is recovered exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    buckets: BTreeMap<(u32, u32, u32), f64>,
}

impl Tail {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn record(&mut self, idx: &MultiIndex, c: Complex64) {
        let a = c.norm();
        if a > 0.0 {
            *self
                .buckets
                .entry((idx.fourier_l1(), idx.momentum_l1(), idx.tdeg))
                .or_insert(0.0) += a;
        }
    }

    pub fn merge(&mut self, other: &Tail) {
        for (k, v) in &other.buckets {
            *self.buckets.entry(*k).or_insert(0.0) += v;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Majorant norm of the discarded part at scale `s`.
    pub fn norm(&self, mode: Mode, s: f64) -> f64 {
        self.buckets
            .iter()
            .map(|(&(i, j, k), &a)| a * monomial_weight(mode, i, j, k, s))
            .fold(0.0, |acc, x| acc + x)
    }
}
