//! Empirical certification of operator bounds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ScaledOperator, E2};
use crate::series::sample::{random_index, random_series};
use crate::series::{Mode, ScaledSeries, SeriesError, Truncation, SCALE_CAP};

/// Where test vectors are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingDomain {
    pub dim: usize,
    pub mode: Mode,
    pub trunc: Truncation,
    /// Probability that a lattice point is populated in dense samples.
    pub density: f64,
}

impl SamplingDomain {
    pub fn torus(dim: usize) -> Self {
        Self {
            dim,
            mode: Mode::Torus,
            trunc: Truncation::new(3, 2, 1),
            density: 0.1,
        }
    }

    pub fn singular(dim: usize) -> Self {
        Self {
            dim,
            mode: Mode::Singular,
            trunc: Truncation::total_degree(5),
            density: 0.2,
        }
    }

    /// Even trials use a single monomial (extremal for diagonal operators),
    /// odd trials a dense random series.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, trial: u64) -> ScaledSeries {
        if trial % 2 == 0 {
            let idx = random_index(rng, self.dim, self.mode, self.trunc);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            ScaledSeries::from_terms(self.dim, self.mode, self.trunc, false, [(idx, c)])
                .expect("index drawn from the lattice")
        } else {
            random_series(rng, self.dim, self.mode, self.trunc, self.density, false)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub s: f64,
    pub t: f64,
    /// `|u(x)|_s (t−s)^k e² / |x|_t` (no `e²` for `k = 0`).
    pub ratio: f64,
    /// Declared constant at `t`.
    pub declared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub order: u32,
    /// Smallest constant consistent with all samples.
    pub c_emp: f64,
    /// Largest declared constant over the sampled scales.
    pub declared: f64,
    pub samples: Vec<BoundSample>,
    /// Every sample satisfies `ratio ≤ declared(t)`.
    pub pass: bool,
}

/// Relative slack allowed when comparing a sample against its declared constant.
const SLACK: f64 = 4.0 * f64::EPSILON;

/// Samples `trials` pairs (series, scales) and records the ratios for order `k`.
///
/// For `k = 0` the scales coincide (`s = t`), which is the extremal case.
/// Trial `i` uses ChaCha stream `i` of `seed`, so results do not depend on threads.
pub fn certify_bound(
    u: &ScaledOperator,
    k: u32,
    trials: u64,
    seed: u64,
    domain: &SamplingDomain,
) -> Result<BoundCertificate, SeriesError> {
    let samples: Vec<Option<BoundSample>> = (0..trials.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let x = domain.draw(&mut rng, i);
            let t = rng.gen_range(0.02..=SCALE_CAP);
            let s = if k == 0 { t } else { t * rng.gen_range(0.01..0.999) };
            let xt = u.read_norm(&x, t)?;
            if xt == 0.0 {
                return Ok(None);
            }
            let y = u.apply(&x)?;
            let ys = u.read_norm(&y, s)?;
            let ratio = if k == 0 {
                ys / xt
            } else {
                ys * (t - s).powi(k as i32) * E2 / xt
            };
            Ok(Some(BoundSample { s, t, ratio, declared: u.declared_constant(t) }))
        })
        .collect::<Result<_, SeriesError>>()?;
    let samples: Vec<BoundSample> = samples.into_iter().flatten().collect();
    let c_emp = samples.iter().map(|b| b.ratio).fold(0.0, f64::max);
    let declared = samples.iter().map(|b| b.declared).fold(0.0, f64::max);
    let pass = samples.iter().all(|b| b.ratio <= b.declared * (1.0 + SLACK));
    Ok(BoundCertificate { order: k, c_emp, declared, samples, pass })
}
