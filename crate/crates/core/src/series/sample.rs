//! Random series for tests and benchmarks.

use num_complex::Complex64;
use rand::Rng;

use super::index::{Mode, MultiIndex, Truncation};
use super::ScaledSeries;

/// Random series with each lattice point kept with probability `density`.
///
/// Coefficients are uniform in the unit square (unit interval when real in
/// singular mode). With `real` the torus coefficients are made conjugate-symmetric.
pub fn random_series<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    mode: Mode,
    trunc: Truncation,
    density: f64,
    real: bool,
) -> ScaledSeries {
    let mut out = ScaledSeries::zero(dim, mode, trunc);
    for idx in trunc.lattice(dim, mode) {
        if real && mode == Mode::Torus && idx.conjugate() < idx {
            continue;
        }
        if !rng.gen_bool(density.clamp(0.0, 1.0)) {
            continue;
        }
        let re = rng.gen_range(-1.0..1.0);
        let im = if real && (mode == Mode::Singular || idx.is_fourier_zero()) {
            0.0
        } else {
            rng.gen_range(-1.0..1.0)
        };
        let c = Complex64::new(re, im);
        if real && mode == Mode::Torus {
            let conj = idx.conjugate();
            if conj != idx {
                out.insert(conj, c.conj());
            }
        }
        out.insert(idx, c);
    }
    out.set_real(real);
    out
}

/// Uniform point of the scale-`s` domain: `|log|q_i|| ≤ s`, `|p_i| ≤ s`, `|t| ≤ s²`
/// (torus) or the polydisk of radius `s` (singular).
pub fn random_point<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    mode: Mode,
    s: f64,
) -> (Vec<Complex64>, Vec<Complex64>, Complex64) {
    let mut disk = |r: f64| Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    let p: Vec<Complex64> = (0..dim).map(|_| disk(s)).collect();
    let t = disk(s * s);
    let q: Vec<Complex64> = match mode {
        Mode::Torus => (0..dim)
            .map(|_| {
                let rho = rng.gen_range(-s..=s);
                Complex64::from_polar(rho.exp(), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect(),
        Mode::Singular => (0..dim).map(|_| disk(s)).collect(),
    };
    (q, p, t)
}

/// Random exponent admitted by `trunc`.
pub fn random_index<R: Rng + ?Sized>(rng: &mut R, dim: usize, mode: Mode, trunc: Truncation) -> MultiIndex {
    let lat = trunc.lattice(dim, mode);
    lat[rng.gen_range(0..lat.len())].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::norm_majorant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_real_series_are_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mode in [Mode::Torus, Mode::Singular] {
            let f = random_series(&mut rng, 2, mode, Truncation::new(3, 2, 1), 0.4, true);
            assert!(f.is_real());
            assert_eq!(f.reality_defect(), 0.0);
        }
    }

    #[test]
    fn majorant_dominates_sampled_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (mode, tr) in [
            (Mode::Torus, Truncation::new(3, 2, 1)),
            (Mode::Singular, Truncation::total_degree(5)),
        ] {
            for _ in 0..20 {
                let f = random_series(&mut rng, 2, mode, tr, 0.3, false);
                let s = rng.gen_range(0.05..0.5);
                let bound = norm_majorant(&f, s).unwrap();
                for _ in 0..200 {
                    let (q, p, t) = random_point(&mut rng, 2, mode, s);
                    assert!(f.eval(&q, &p, t).norm() <= bound * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn torus_weight_matches_sup_of_a_monomial() {
        // 3 q1 q2^{-1} p1 at s = 0.2: sup attained at |q1| = e^s, |q2| = e^{-s}, |p1| = s
        let f = ScaledSeries::from_terms(
            2,
            Mode::Torus,
            Truncation::new(2, 2, 0),
            false,
            [(MultiIndex::new(vec![1, -1], vec![1, 0], 0), Complex64::new(3.0, 0.0))],
        )
        .unwrap();
        let s: f64 = 0.2;
        let expected = 3.0 * (0.4f64).exp() * 0.2;
        assert!((norm_majorant(&f, s).unwrap() - expected).abs() < 1e-14);
        let q = [Complex64::new(s.exp(), 0.0), Complex64::new((-s).exp(), 0.0)];
        let p = [Complex64::new(s, 0.0), Complex64::new(0.0, 0.0)];
        let v = f.eval(&q, &p, Complex64::new(0.0, 0.0)).norm();
        assert!((v - expected).abs() < 1e-14);
    }
}
