//! Truncated Fourier–Taylor series on the torus phase space and on the
//! singular (Taylor) phase space.

mod algebra;
mod index;
mod norm;
pub mod sample;
pub mod scalar;
mod tail;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use algebra::{hadamard_product, poisson_bracket, Derivative};
pub use index::{Exponents, IdealClass, Mode, MultiIndex, Truncation};
pub use norm::{
    annulus_inner_product, monomial_weight, norm_l2_annulus, norm_majorant, norm_rescaled,
    pointwise_bound_from_l2, vanishing_order,
};
pub use scalar::{borel_transform, PowerSeries};
pub use tail::Tail;

/// Global cap `S` on scale parameters.
pub const SCALE_CAP: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("scale {s} outside (0, {cap}]")]
    Domain { s: f64, cap: f64 },
    #[error("mode mismatch: {0:?} vs {1:?}")]
    ModeMismatch(Mode, Mode),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("index {0:?} is invalid for this series")]
    InvalidIndex(MultiIndex),
    #[error("index {0:?} exceeds the truncation")]
    Truncated(MultiIndex),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("operation not available in {0:?} mode")]
    UnsupportedMode(Mode),
    #[error("rescaling factor {0} outside (0, 1]")]
    Rescale(f64),
    #[error("reality condition violated at {0:?}")]
    NotReal(MultiIndex),
    #[error("invalid scale pair: need 0 < s < t <= S <= 1/2, got s={s}, t={t}, S={cap}")]
    ScalePair { s: f64, t: f64, cap: f64 },
}

/// Ordered pair `0 < s < t ≤ S ≤ 1/2` for two-scale estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    s: f64,
    t: f64,
    cap: f64,
}

impl ScalePair {
    pub fn new(s: f64, t: f64) -> Result<Self, SeriesError> {
        Self::with_cap(s, t, SCALE_CAP)
    }

    pub fn with_cap(s: f64, t: f64, cap: f64) -> Result<Self, SeriesError> {
        if s > 0.0 && s < t && t <= cap && cap <= SCALE_CAP {
            Ok(Self { s, t, cap })
        } else {
            Err(SeriesError::ScalePair { s, t, cap })
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn gap(&self) -> f64 {
        self.t - self.s
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.s + self.t)
    }
}

/// Sparse truncated series `Σ a_{I,J,k} q^I p^J t^k`.
///
/// Values are immutable after construction; every operation returns a new
/// series. No stored coefficient is exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesFile", into = "SeriesFile")]
pub struct ScaledSeries {
    dim: usize,
    mode: Mode,
    trunc: Truncation,
    real: bool,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl ScaledSeries {
    pub fn zero(dim: usize, mode: Mode, trunc: Truncation) -> Self {
        Self {
            dim,
            mode,
            trunc,
            real: true,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a series from terms; repeated indices are summed.
    ///
    /// With `real = true` the terms must already satisfy the reality condition
    /// up to rounding; they are then symmetrized exactly.
    pub fn from_terms<I>(
        dim: usize,
        mode: Mode,
        trunc: Truncation,
        real: bool,
        terms: I,
    ) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut out = Self::zero(dim, mode, trunc);
        out.real = real;
        for (idx, c) in terms {
            if !idx.valid_for(dim, mode) {
                return Err(SeriesError::InvalidIndex(idx));
            }
            if !trunc.admits(&idx) {
                return Err(SeriesError::Truncated(idx));
            }
            *out.coeffs.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.prune();
        if real {
            out.check_reality(1e-12)?;
            out.enforce_reality();
        }
        Ok(out)
    }

    pub fn monomial(
        dim: usize,
        mode: Mode,
        trunc: Truncation,
        idx: MultiIndex,
        c: Complex64,
    ) -> Result<Self, SeriesError> {
        let real = match mode {
            Mode::Torus => idx.is_fourier_zero() && c.im == 0.0,
            Mode::Singular => c.im == 0.0,
        };
        Self::from_terms(dim, mode, trunc, real, [(idx, c)])
    }

    pub fn constant(dim: usize, mode: Mode, trunc: Truncation, c: f64) -> Self {
        let mut out = Self::zero(dim, mode, trunc);
        out.insert(MultiIndex::zero(dim), Complex64::new(c, 0.0));
        out
    }

    /// `Σ_I z^I` over the whole truncated lattice (unit for the Hadamard product).
    pub fn hadamard_unit(dim: usize, mode: Mode, trunc: Truncation) -> Self {
        let mut out = Self::zero(dim, mode, trunc);
        for idx in trunc.lattice(dim, mode) {
            out.insert(idx, Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Complex64 {
        self.coeffs.get(idx).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(k, v)| (k, *v))
    }

    pub fn norm(&self, s: f64) -> Result<f64, SeriesError> {
        norm_majorant(self, s)
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same coefficients under a different truncation; keys outside it go to the tail.
    pub fn retruncate(&self, trunc: Truncation) -> (Self, Tail) {
        let mut out = Self::zero(self.dim, self.mode, trunc);
        out.real = self.real;
        let mut tail = Tail::new();
        for (idx, c) in self.terms() {
            if trunc.admits(idx) {
                out.coeffs.insert(idx.clone(), c);
            } else {
                tail.record(idx, c);
            }
        }
        (out, tail)
    }

    /// Keeps the terms whose index satisfies `pred`.
    pub fn filter(&self, pred: impl Fn(&MultiIndex) -> bool) -> Self {
        let mut out = self.empty_like();
        out.real = self.real;
        for (idx, c) in self.terms() {
            if pred(idx) {
                out.coeffs.insert(idx.clone(), c);
            }
        }
        out
    }

    /// Maps each coefficient; `keeps_real` states whether the map preserves the
    /// reality condition.
    pub fn map_coeffs(
        &self,
        keeps_real: bool,
        f: impl Fn(&MultiIndex, Complex64) -> Complex64,
    ) -> Self {
        let mut out = self.empty_like();
        out.real = self.real && keeps_real;
        for (idx, c) in self.terms() {
            out.insert(idx.clone(), f(idx, c));
        }
        if out.real {
            out.enforce_reality();
        }
        out
    }

    /// Substitutes `t ↦ λ t` (coefficient at `t^k` multiplied by `λ^k`).
    pub fn rescale_t(&self, lambda: f64) -> Self {
        self.map_coeffs(true, |idx, c| c * lambda.powi(idx.tdeg as i32))
    }

    /// Evaluates at a point. Torus: `q ∈ (ℂ*)ⁿ`, `p ∈ ℂⁿ`, `t ∈ ℂ`.
    /// Singular: `q, p ∈ ℂⁿ`, `t` ignored.
    pub fn eval(&self, q: &[Complex64], p: &[Complex64], t: Complex64) -> Complex64 {
        self.terms()
            .map(|(idx, c)| {
                let mut v = c;
                for i in 0..self.dim {
                    v *= q[i].powi(idx.fourier[i]) * p[i].powu(idx.momentum[i]);
                }
                v * t.powu(idx.tdeg)
            })
            .sum()
    }

    /// Max deviation from the reality condition.
    pub fn reality_defect(&self) -> f64 {
        match self.mode {
            Mode::Singular => self.coeffs.values().map(|c| c.im.abs()).fold(0.0, f64::max),
            Mode::Torus => self
                .terms()
                .map(|(idx, c)| (c - self.coeff(&idx.conjugate()).conj()).norm())
                .fold(0.0, f64::max),
        }
    }

    fn check_reality(&self, rel_tol: f64) -> Result<(), SeriesError> {
        let scale = self.max_coeff().max(f64::MIN_POSITIVE);
        for (idx, c) in self.terms() {
            let partner = match self.mode {
                Mode::Torus => self.coeff(&idx.conjugate()).conj(),
                Mode::Singular => c.conj(),
            };
            if (c - partner).norm() > rel_tol * scale {
                return Err(SeriesError::NotReal(idx.clone()));
            }
        }
        Ok(())
    }

    pub(crate) fn empty_like(&self) -> Self {
        Self::zero(self.dim, self.mode, self.trunc)
    }

    /// Adds `c` at `idx`, assuming `idx` is admitted.
    pub(crate) fn insert(&mut self, idx: MultiIndex, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.coeffs.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v == Complex64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub(crate) fn set_real(&mut self, real: bool) {
        self.real = real;
        if real {
            self.enforce_reality();
        }
    }

    pub(crate) fn prune(&mut self) {
        self.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    }

    /// Symmetrizes coefficients so the reality condition holds exactly.
    pub(crate) fn enforce_reality(&mut self) {
        match self.mode {
            Mode::Singular => {
                for c in self.coeffs.values_mut() {
                    c.im = 0.0;
                }
            }
            Mode::Torus => {
                let keys: Vec<MultiIndex> = self.coeffs.keys().cloned().collect();
                for idx in keys {
                    let conj = idx.conjugate();
                    if conj < idx {
                        continue;
                    }
                    let a = self.coeff(&idx);
                    if conj == idx {
                        self.coeffs.insert(idx, Complex64::new(a.re, 0.0));
                    } else {
                        let b = self.coeff(&conj);
                        let avg = (a + b.conj()) * 0.5;
                        self.coeffs.insert(idx, avg);
                        self.coeffs.insert(conj, avg.conj());
                    }
                }
            }
        }
        self.prune();
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if self.mode != other.mode {
            return Err(SeriesError::ModeMismatch(self.mode, other.mode));
        }
        if self.dim != other.dim {
            return Err(SeriesError::DimMismatch(self.dim, other.dim));
        }
        Ok(())
    }
}

/// On-disk form: a header plus one record per monomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesFile {
    pub dim: usize,
    pub mode: Mode,
    pub trunc: Truncation,
    pub real: bool,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord {
    pub fourier: Vec<i32>,
    pub momentum: Vec<u32>,
    #[serde(default)]
    pub tdeg: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ScaledSeries> for SeriesFile {
    fn from(s: ScaledSeries) -> Self {
        SeriesFile {
            dim: s.dim,
            mode: s.mode,
            trunc: s.trunc,
            real: s.real,
            terms: s
                .coeffs
                .into_iter()
                .map(|(idx, c)| TermRecord {
                    fourier: idx.fourier.to_vec(),
                    momentum: idx.momentum.to_vec(),
                    tdeg: idx.tdeg,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<SeriesFile> for ScaledSeries {
    type Error = SeriesError;

    fn try_from(f: SeriesFile) -> Result<Self, Self::Error> {
        ScaledSeries::from_terms(
            f.dim,
            f.mode,
            f.trunc,
            f.real,
            f.terms.into_iter().map(|r| {
                (
                    MultiIndex::new(r.fourier, r.momentum, r.tdeg),
                    Complex64::new(r.re, r.im),
                )
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = sample::random_series(&mut rng, 2, Mode::Torus, Truncation::new(3, 2, 2), 0.3, true);
        let text = serde_json::to_string(&f).unwrap();
        let g: ScaledSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn construction_is_validated() {
        let tr = Truncation::new(2, 1, 0);
        let bad_len = MultiIndex::new(vec![1], vec![0, 0], 0);
        assert!(matches!(
            ScaledSeries::from_terms(2, Mode::Torus, tr, false, [(bad_len, Complex64::new(1.0, 0.0))]),
            Err(SeriesError::InvalidIndex(_))
        ));
        let negative = MultiIndex::new(vec![-1], vec![0], 0);
        assert!(matches!(
            ScaledSeries::from_terms(1, Mode::Singular, tr, false, [(negative, Complex64::new(1.0, 0.0))]),
            Err(SeriesError::InvalidIndex(_))
        ));
        let big = MultiIndex::q(1, 0, 3);
        assert!(matches!(
            ScaledSeries::from_terms(1, Mode::Torus, tr, false, [(big, Complex64::new(1.0, 0.0))]),
            Err(SeriesError::Truncated(_))
        ));
        let lonely = MultiIndex::q(1, 0, 1);
        assert!(matches!(
            ScaledSeries::from_terms(1, Mode::Torus, tr, true, [(lonely, Complex64::new(1.0, 0.0))]),
            Err(SeriesError::NotReal(_))
        ));
        // exact cancellation leaves nothing stored
        let z = ScaledSeries::from_terms(
            1,
            Mode::Torus,
            tr,
            true,
            [
                (MultiIndex::zero(1), Complex64::new(1.0, 0.0)),
                (MultiIndex::zero(1), Complex64::new(-1.0, 0.0)),
            ],
        )
        .unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn scale_pairs() {
        assert!(ScalePair::new(0.1, 0.2).is_ok());
        assert!(ScalePair::new(0.2, 0.2).is_err());
        assert!(ScalePair::new(0.1, 0.6).is_err());
        assert!(ScalePair::with_cap(0.1, 0.3, 0.25).is_err());
    }
}
