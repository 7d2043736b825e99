//! Ring operations, brackets and derivations on `ScaledSeries`.
//!
//! Binary operations truncate to the tighter of the two truncations; whatever
//! falls outside is reported as a `Tail`.

use num_complex::Complex64;

use super::index::{Mode, MultiIndex};
use super::tail::Tail;
use super::{ScaledSeries, SeriesError};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Coordinate derivations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// `q_i ∂_{q_i}` (multiplies the coefficient by `I_i`).
    QLog(usize),
    /// `∂_{q_i}`.
    Q(usize),
    /// `∂_{p_i}`.
    P(usize),
    /// `∂_t`.
    T,
}

impl ScaledSeries {
    fn combine(&self, other: &Self, sign: f64) -> Result<(Self, Tail), SeriesError> {
        self.check_compatible(other)?;
        let trunc = self.trunc().tighter(&other.trunc());
        let mut out = Self::zero(self.dim(), self.mode(), trunc);
        let mut tail = Tail::new();
        for (idx, c) in self.terms() {
            if trunc.admits(idx) {
                out.insert(idx.clone(), c);
            } else {
                tail.record(idx, c);
            }
        }
        for (idx, c) in other.terms() {
            if trunc.admits(idx) {
                out.insert(idx.clone(), c * sign);
            } else {
                tail.record(idx, c);
            }
        }
        out.set_real(self.is_real() && other.is_real());
        Ok((out, tail))
    }

    /// `self + other` together with the truncation tail.
    pub fn add_with_tail(&self, other: &Self) -> Result<(Self, Tail), SeriesError> {
        self.combine(other, 1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.combine(other, 1.0)?.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.combine(other, -1.0)?.0)
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(true, |_, c| -c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coeffs(c.im == 0.0, |_, a| a * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_coeffs(true, |_, a| a * c)
    }

    /// Product, truncated, with the discarded tail.
    pub fn mul(&self, other: &Self) -> Result<(Self, Tail), SeriesError> {
        self.check_compatible(other)?;
        let trunc = self.trunc().tighter(&other.trunc());
        let mut out = Self::zero(self.dim(), self.mode(), trunc);
        let mut tail = Tail::new();
        for (ia, a) in self.terms() {
            for (ib, b) in other.terms() {
                let idx = ia.add(ib);
                if trunc.admits(&idx) {
                    out.insert(idx, a * b);
                } else {
                    tail.record(&idx, a * b);
                }
            }
        }
        out.set_real(self.is_real() && other.is_real());
        Ok((out, tail))
    }

    /// Exact coefficientwise derivative.
    pub fn derive(&self, which: Derivative) -> Self {
        let mut out = self.empty_like();
        for (idx, c) in self.terms() {
            match which {
                Derivative::QLog(i) => {
                    out.insert(idx.clone(), c * idx.fourier[i] as f64);
                }
                Derivative::Q(i) => {
                    let e = idx.fourier[i];
                    if e != 0 {
                        let mut k = idx.clone();
                        k.fourier[i] -= 1;
                        out.insert(k, c * e as f64);
                    }
                }
                Derivative::P(i) => {
                    let e = idx.momentum[i];
                    if e != 0 {
                        let mut k = idx.clone();
                        k.momentum[i] -= 1;
                        out.insert(k, c * e as f64);
                    }
                }
                Derivative::T => {
                    if idx.tdeg != 0 {
                        let mut k = idx.clone();
                        k.tdeg -= 1;
                        out.insert(k, c * idx.tdeg as f64);
                    }
                }
            }
        }
        // q∂_q (and ∂_q) anticommute with the torus involution; only √−1·q∂_q is real.
        let keeps = match (self.mode(), which) {
            (Mode::Torus, Derivative::QLog(_) | Derivative::Q(_)) => false,
            _ => true,
        };
        out.set_real(self.is_real() && keeps);
        out
    }

    /// Projection onto the Fourier index `I = 0`.
    pub fn mean_over_q(&self) -> Result<Self, SeriesError> {
        if self.mode() != Mode::Torus {
            return Err(SeriesError::UnsupportedMode(self.mode()));
        }
        Ok(self.filter(|idx| idx.is_fourier_zero()))
    }

    /// `self − mean(self)`.
    pub fn oscillating_part(&self) -> Result<Self, SeriesError> {
        if self.mode() != Mode::Torus {
            return Err(SeriesError::UnsupportedMode(self.mode()));
        }
        Ok(self.filter(|idx| !idx.is_fourier_zero()))
    }
}

/// Poisson bracket with the truncation tail.
///
/// Torus: `{f,g} = √−1 Σ_i (∂_{p_i}f · q_i∂_{q_i}g − q_i∂_{q_i}f · ∂_{p_i}g)`, so
/// `{α·p, q^I} = √−1 (α,I) q^I`. Singular: `{f,g} = Σ_i ∂_{p_i}f ∂_{q_i}g − ∂_{q_i}f ∂_{p_i}g`.
pub fn poisson_bracket(
    f: &ScaledSeries,
    g: &ScaledSeries,
) -> Result<(ScaledSeries, Tail), SeriesError> {
    f.check_compatible(g)?;
    let trunc = f.trunc().tighter(&g.trunc());
    let mode = f.mode();
    let mut out = ScaledSeries::zero(f.dim(), mode, trunc);
    let mut tail = Tail::new();
    for (ia, a) in f.terms() {
        for (ib, b) in g.terms() {
            let base = ia.add(ib);
            for i in 0..f.dim() {
                let w = ia.momentum[i] as f64 * ib.fourier[i] as f64
                    - ia.fourier[i] as f64 * ib.momentum[i] as f64;
                if w == 0.0 {
                    continue;
                }
                let mut idx: MultiIndex = base.clone();
                idx.momentum[i] -= 1;
                let c = match mode {
                    Mode::Torus => I * (a * b * w),
                    Mode::Singular => {
                        idx.fourier[i] -= 1;
                        a * b * w
                    }
                };
                if trunc.admits(&idx) {
                    out.insert(idx, c);
                } else {
                    tail.record(&idx, c);
                }
            }
        }
    }
    out.set_real(f.is_real() && g.is_real());
    Ok((out, tail))
}

/// Coefficientwise product.
pub fn hadamard_product(
    f: &ScaledSeries,
    g: &ScaledSeries,
) -> Result<ScaledSeries, SeriesError> {
    f.check_compatible(g)?;
    let trunc = f.trunc().tighter(&g.trunc());
    let mut out = ScaledSeries::zero(f.dim(), f.mode(), trunc);
    let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    for (idx, a) in small.terms() {
        let b = large.coeff(idx);
        out.insert(idx.clone(), a * b);
    }
    out.set_real(f.is_real() && g.is_real());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::sample::random_series;
    use crate::series::{norm_majorant, Truncation};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tr() -> Truncation {
        Truncation::new(6, 4, 3)
    }

    fn mono(dim: usize, idx: MultiIndex, a: Complex64) -> ScaledSeries {
        let mut s = ScaledSeries::zero(dim, Mode::Torus, tr());
        s.insert(idx, a);
        s.set_real(false);
        s
    }

    #[test]
    fn bracket_momentum_fourier() {
        let q1 = mono(2, MultiIndex::q(2, 0, 1), c(1.0));
        let p1 = mono(2, MultiIndex::p(2, 0, 1), c(1.0));
        let (b, tail) = poisson_bracket(&p1, &q1).unwrap();
        assert!(tail.is_empty());
        assert_eq!(b.len(), 1);
        assert_eq!(b.coeff(&MultiIndex::q(2, 0, 1)), I);
        let (b2, _) = poisson_bracket(&q1, &p1).unwrap();
        assert_eq!(b2.coeff(&MultiIndex::q(2, 0, 1)), -I);
    }

    #[test]
    fn bracket_with_linear_frequency() {
        let alpha = [0.7, -1.3];
        let h = ScaledSeries::from_terms(
            2,
            Mode::Torus,
            tr(),
            true,
            [
                (MultiIndex::p(2, 0, 1), c(alpha[0])),
                (MultiIndex::p(2, 1, 1), c(alpha[1])),
            ],
        )
        .unwrap();
        let idx = MultiIndex::new(vec![2, -3], vec![1, 0], 1);
        let g = mono(2, idx.clone(), Complex64::new(0.4, 0.2));
        let (b, _) = poisson_bracket(&h, &g).unwrap();
        let expected = I * (alpha[0] * 2.0 + alpha[1] * -3.0) * Complex64::new(0.4, 0.2);
        assert_eq!(b.len(), 1);
        assert_relative_eq!((b.coeff(&idx) - expected).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_bracket_on_quadratic() {
        let tr = Truncation::total_degree(6);
        let h = ScaledSeries::from_terms(
            1,
            Mode::Singular,
            tr,
            true,
            [(MultiIndex::new(vec![1], vec![1], 0), c(1.5))],
        )
        .unwrap();
        let idx = MultiIndex::new(vec![3], vec![1], 0);
        let g = ScaledSeries::from_terms(1, Mode::Singular, tr, true, [(idx.clone(), c(1.0))]).unwrap();
        let (b, _) = poisson_bracket(&h, &g).unwrap();
        // {ω pq, q^I p^J} = ω (I − J) q^I p^J
        assert_eq!(b.coeff(&idx), c(1.5 * 2.0));
        let (qp, _) = poisson_bracket(
            &ScaledSeries::from_terms(1, Mode::Singular, tr, true, [(MultiIndex::p(1, 0, 1), c(1.0))]).unwrap(),
            &ScaledSeries::from_terms(1, Mode::Singular, tr, true, [(MultiIndex::q(1, 0, 1), c(1.0))]).unwrap(),
        )
        .unwrap();
        assert_eq!(qp.coeff(&MultiIndex::zero(1)), c(1.0));
    }

    #[test]
    fn bracket_truncation_reports_tail() {
        let t = Truncation::new(2, 1, 0);
        let a = ScaledSeries::from_terms(
            1,
            Mode::Torus,
            t,
            false,
            [(MultiIndex::new(vec![2], vec![1], 0), c(1.0))],
        )
        .unwrap();
        let b = ScaledSeries::from_terms(
            1,
            Mode::Torus,
            t,
            false,
            [(MultiIndex::new(vec![1], vec![1], 0), c(1.0))],
        )
        .unwrap();
        let (r, tail) = poisson_bracket(&a, &b).unwrap();
        // coefficient (1·1 − 2·1) at q³p: outside max_fourier = 2
        assert!(r.is_zero());
        assert_relative_eq!(tail.norm(Mode::Torus, 0.1), (0.3f64).exp() * 0.1, epsilon = 1e-15);
    }

    #[test]
    fn hadamard_examples() {
        let t = Truncation::new(3, 0, 0);
        let f = ScaledSeries::from_terms(
            1,
            Mode::Singular,
            Truncation::total_degree(3),
            true,
            [(MultiIndex::q(1, 0, 1), c(2.0)), (MultiIndex::q(1, 0, 2), c(3.0))],
        )
        .unwrap();
        let g = ScaledSeries::from_terms(
            1,
            Mode::Singular,
            Truncation::total_degree(3),
            true,
            [(MultiIndex::q(1, 0, 1), c(5.0)), (MultiIndex::q(1, 0, 3), c(7.0))],
        )
        .unwrap();
        let h = hadamard_product(&f, &g).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.coeff(&MultiIndex::q(1, 0, 1)), c(10.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_series(&mut rng, 2, Mode::Torus, t, 0.5, true);
        let unit = ScaledSeries::hadamard_unit(2, Mode::Torus, t);
        assert_eq!(hadamard_product(&r, &unit).unwrap(), r);
        let z = ScaledSeries::zero(2, Mode::Torus, t);
        assert!(hadamard_product(&r, &z).unwrap().is_zero());
    }

    #[test]
    fn derivative_examples() {
        let q3 = mono(1, MultiIndex::q(1, 0, 3), c(1.0));
        assert_eq!(q3.derive(Derivative::QLog(0)).coeff(&MultiIndex::q(1, 0, 3)), c(3.0));
        let p2 = mono(1, MultiIndex::p(1, 0, 2), c(1.0));
        assert_eq!(p2.derive(Derivative::P(0)).coeff(&MultiIndex::p(1, 0, 1)), c(2.0));
        let t2 = mono(1, MultiIndex::t(1, 2), c(1.0));
        assert_eq!(t2.derive(Derivative::T).coeff(&MultiIndex::t(1, 1)), c(2.0));
    }

    #[test]
    fn mean_examples() {
        let f = ScaledSeries::from_terms(
            1,
            Mode::Torus,
            tr(),
            true,
            [
                (MultiIndex::zero(1), c(3.0)),
                (MultiIndex::q(1, 0, 1), c(1.0)),
                (MultiIndex::q(1, 0, -1), c(1.0)),
            ],
        )
        .unwrap();
        let m = f.mean_over_q().unwrap();
        assert_eq!(m, ScaledSeries::constant(1, Mode::Torus, tr(), 3.0));
        assert_eq!(m.mean_over_q().unwrap(), m);
        let s = ScaledSeries::zero(1, Mode::Singular, tr());
        assert!(matches!(s.mean_over_q(), Err(SeriesError::UnsupportedMode(_))));
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let a = ScaledSeries::zero(1, Mode::Torus, tr());
        let b = ScaledSeries::zero(1, Mode::Singular, tr());
        assert!(matches!(poisson_bracket(&a, &b), Err(SeriesError::ModeMismatch(..))));
        assert!(matches!(a.mul(&b), Err(SeriesError::ModeMismatch(..))));
    }

    fn pair(seed: u64, mode: Mode, real: bool) -> (ScaledSeries, ScaledSeries) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = match mode {
            Mode::Torus => Truncation::new(3, 2, 1),
            Mode::Singular => Truncation::total_degree(5),
        };
        (
            random_series(&mut rng, 2, mode, t, 0.3, real),
            random_series(&mut rng, 2, mode, t, 0.3, real),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn submultiplicative(seed in any::<u64>(), s in 0.01f64..0.5, torus in any::<bool>()) {
            let mode = if torus { Mode::Torus } else { Mode::Singular };
            let (f, g) = pair(seed, mode, false);
            let (fg, tail) = f.mul(&g).unwrap();
            let lhs = norm_majorant(&fg, s).unwrap() + tail.norm(mode, s);
            let rhs = norm_majorant(&f, s).unwrap() * norm_majorant(&g, s).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }

        #[test]
        fn monotone_in_scale(seed in any::<u64>(), a in 0.01f64..0.5, b in 0.01f64..0.5) {
            let (f, _) = pair(seed, Mode::Torus, true);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(norm_majorant(&f, lo).unwrap() <= norm_majorant(&f, hi).unwrap());
        }

        #[test]
        fn reality_closure(seed in any::<u64>(), torus in any::<bool>()) {
            let mode = if torus { Mode::Torus } else { Mode::Singular };
            let (f, g) = pair(seed, mode, true);
            for r in [f.mul(&g).unwrap().0, poisson_bracket(&f, &g).unwrap().0, hadamard_product(&f, &g).unwrap()] {
                prop_assert!(r.is_real());
                prop_assert!(r.reality_defect() == 0.0);
            }
        }

        #[test]
        fn bracket_antisymmetric(seed in any::<u64>(), torus in any::<bool>()) {
            let mode = if torus { Mode::Torus } else { Mode::Singular };
            let (f, g) = pair(seed, mode, false);
            prop_assert!(poisson_bracket(&f, &f).unwrap().0.max_coeff() <= 1e-12 * (1.0 + f.max_coeff().powi(2)));
            let fg = poisson_bracket(&f, &g).unwrap().0;
            let gf = poisson_bracket(&g, &f).unwrap().0;
            prop_assert!(fg.add(&gf).unwrap().max_coeff() <= 1e-12 * (1.0 + fg.max_coeff()));
        }

        #[test]
        fn cauchy_inequalities(seed in any::<u64>(), s in 0.01f64..0.49, frac in 0.01f64..1.0) {
            let t = s + frac * (0.5 - s);
            let (f, _) = pair(seed, Mode::Torus, false);
            let ft = norm_majorant(&f, t).unwrap();
            for i in 0..2 {
                let dq = norm_majorant(&f.derive(Derivative::QLog(i)), s).unwrap();
                prop_assert!(dq <= ft / (std::f64::consts::E * (t - s)) * (1.0 + 1e-12));
                let dp = norm_majorant(&f.derive(Derivative::P(i)), s).unwrap();
                prop_assert!(dp <= ft / (t - s) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn mean_never_increases_norm(seed in any::<u64>(), s in 0.01f64..0.5) {
            let (f, _) = pair(seed, Mode::Torus, true);
            let m = f.mean_over_q().unwrap();
            prop_assert!(norm_majorant(&m, s).unwrap() <= norm_majorant(&f, s).unwrap());
            prop_assert_eq!(m.mean_over_q().unwrap(), m);
        }
    }
}
