use super::*;
use crate::series::sample::random_series;
use crate::series::{MultiIndex, Truncation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn torus1() -> Truncation {
    Truncation::new(6, 4, 3)
}

fn series(dim: usize, terms: &[(MultiIndex, Complex64)]) -> ScaledSeries {
    ScaledSeries::from_terms(dim, Mode::Torus, torus1(), false, terms.iter().cloned()).unwrap()
}

#[test]
fn identity_has_unit_constant() {
    let cert = certify_bound(&ScaledOperator::identity(), 0, 200, 1, &SamplingDomain::torus(2)).unwrap();
    assert!(cert.pass);
    assert_eq!(cert.c_emp, 1.0);
}

#[test]
fn derivations_certify_with_their_cauchy_constants() {
    let dom = SamplingDomain::torus(2);
    for (which, k) in [(Derivative::QLog(0), 1), (Derivative::QLog(1), 1), (Derivative::P(0), 1), (Derivative::T, 2)] {
        let u = ScaledOperator::derivation(Mode::Torus, which).unwrap();
        let cert = certify_bound(&u, k, 400, 7, &dom).unwrap();
        assert!(cert.pass, "{which:?}: {} > {}", cert.c_emp, cert.declared);
        assert!(cert.c_emp > 0.05 * cert.declared, "{which:?} constant far from sharp");
    }
    let q = ScaledOperator::derivation(Mode::Torus, Derivative::QLog(0)).unwrap();
    assert!((q.declared_constant(0.3) - E).abs() < 1e-15);
    let sdom = SamplingDomain::singular(2);
    for which in [Derivative::QLog(0), Derivative::Q(1), Derivative::P(0)] {
        let u = ScaledOperator::derivation(Mode::Singular, which).unwrap();
        assert!(certify_bound(&u, 1, 400, 8, &sdom).unwrap().pass, "{which:?}");
    }
    assert!(ScaledOperator::derivation(Mode::Singular, Derivative::T).is_err());
    assert!(ScaledOperator::derivation(Mode::Torus, Derivative::Q(0)).is_err());
}

#[test]
fn derivation_fails_at_order_zero() {
    let u = ScaledOperator::derivation(Mode::Torus, Derivative::QLog(0)).unwrap();
    assert!(!certify_bound(&u, 0, 200, 2, &SamplingDomain::torus(2)).unwrap().pass);
}

#[test]
fn hadamard_multiplier_by_length() {
    let dom = SamplingDomain::torus(2);
    let f = ScaledSeries::from_terms(
        2,
        Mode::Torus,
        dom.trunc,
        true,
        dom.trunc
            .lattice(2, Mode::Torus)
            .into_iter()
            .filter(|i| i.fourier_l1() > 0)
            .map(|i| {
                let l = i.fourier_l1() as f64;
                (i, c(l))
            }),
    )
    .unwrap();
    let u = ScaledOperator::hadamard(f, 1);
    let cert = certify_bound(&u, 1, 400, 3, &dom).unwrap();
    assert!(cert.pass);
    assert!(!certify_bound(&u, 0, 400, 3, &dom).unwrap().pass);
}

#[test]
fn composition_law() {
    let dom = SamplingDomain::torus(2);
    let q = ScaledOperator::derivation(Mode::Torus, Derivative::QLog(0)).unwrap();
    let id = ScaledOperator::identity();
    let a = certify_bound(&q, 1, 100, 4, &dom).unwrap();
    let b = certify_bound(&id.compose(&q), 1, 100, 4, &dom).unwrap();
    assert_eq!(a.c_emp, b.c_emp);
    assert!(b.pass);

    let qq = q.compose(&q);
    assert_eq!(qq.order(), 2);
    assert!((qq.declared_constant(0.2) - 4.0 * E * E).abs() < 1e-12);
    assert!(certify_bound(&qq, 2, 400, 5, &dom).unwrap().pass);

    let z = q.compose(&ScaledOperator::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.3, false);
    assert!(z.apply(&x).unwrap().is_zero());
}

#[test]
fn rescaling() {
    let dom = SamplingDomain::torus(2);
    let q = ScaledOperator::derivation(Mode::Torus, Derivative::P(1)).unwrap();
    let same = q.rescale(1.0).unwrap();
    assert_eq!(same.declared_constant(0.3), q.declared_constant(0.3));
    for lambda in [0.9, 0.5, 0.25] {
        let r = q.rescale(lambda).unwrap();
        assert_eq!(r.order(), 1);
        assert!((r.declared_constant(0.3) - q.declared_constant(0.3) / lambda).abs() < 1e-12);
        assert!(certify_bound(&r, 1, 300, 6, &dom).unwrap().pass);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.3, false);
        assert_eq!(r.read_norm(&x, 0.4).unwrap(), norm_majorant(&x, lambda * 0.4).unwrap());
    }
    assert!(matches!(q.rescale(0.0), Err(OperatorError::Rescale(_))));
    assert!(matches!(q.rescale(1.5), Err(OperatorError::Rescale(_))));
}

#[test]
fn rescaled_projector_is_2k_bounded() {
    // p-degree projector onto |J|₁ ≥ 2, read on a rescaled space, loses at most λ^{-2}
    let dom = SamplingDomain::torus(2);
    let proj = ScaledOperator::new(OperatorKind::Composite, 0, |_| 1.0, |x: &ScaledSeries| {
        Ok(x.filter(|i| i.momentum_l1() >= 2))
    });
    for lambda in [1.0, 0.5] {
        assert!(certify_bound(&proj.rescale(lambda).unwrap(), 0, 200, 9, &dom).unwrap().pass);
    }
}

#[test]
fn linearity_of_builtin_operators() {
    let dom = SamplingDomain::torus(2);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.2, true);
    let ops = [
        ScaledOperator::poisson_adjoint(h.clone()),
        ScaledOperator::derivation(Mode::Torus, Derivative::T).unwrap(),
        ScaledOperator::hadamard(h.clone(), 0),
    ];
    for u in &ops {
        for _ in 0..20 {
            let f = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.3, false);
            let g = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.3, false);
            let lam = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let lhs = u.apply(&f.add(&g.scale(lam)).unwrap()).unwrap();
            let rhs = u.apply(&f).unwrap().add(&u.apply(&g).unwrap().scale(lam)).unwrap();
            let diff = lhs.sub(&rhs).unwrap().max_coeff();
            assert!(diff <= 1e-12 * (1.0 + lhs.max_coeff()));
        }
    }
}

#[test]
fn poisson_adjoint_certifies() {
    for (dom, seed) in [(SamplingDomain::torus(2), 11), (SamplingDomain::singular(2), 12)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let h = random_series(&mut rng, 2, dom.mode, dom.trunc, 0.1, true);
            let u = ScaledOperator::poisson_adjoint(h);
            let cert = certify_bound(&u, 1, 200, seed, &dom).unwrap();
            assert!(cert.pass, "{:?}: {} > {}", dom.mode, cert.c_emp, cert.declared);
        }
    }
}

#[test]
fn borel_of_zero_operator() {
    let x = series(1, &[(MultiIndex::q(1, 0, 2), c(1.5))]);
    let pair = ScalePair::new(0.1, 0.3).unwrap();
    let f = PowerSeries::new(vec![2.0, 5.0, 7.0]);
    let (y, bound) = borel_apply(&f, &ScaledOperator::zero(), &x, &pair).unwrap();
    assert_eq!(y, x.scale_real(2.0));
    assert_eq!(bound, 2.0 * norm_majorant(&x, 0.3).unwrap());
}

#[test]
fn borel_divergence() {
    let q = ScaledOperator::derivation(Mode::Torus, Derivative::QLog(0)).unwrap();
    let x = series(1, &[(MultiIndex::q(1, 0, 1), c(1.0))]);
    let pair = ScalePair::new(0.3, 0.4).unwrap();
    let r = borel_apply(&PowerSeries::geometric(10), &q, &x, &pair);
    assert!(matches!(r, Err(OperatorError::Divergence { .. })));
    let dt = ScaledOperator::derivation(Mode::Torus, Derivative::T).unwrap();
    assert!(matches!(borel_apply(&PowerSeries::geometric(10), &dt, &x, &pair), Err(OperatorError::UnsupportedOrder(2))));
}

/// Operator `ε·{−,h}` with `ν` at the pair tuned to `target`.
fn tuned_bracket(rng: &mut ChaCha8Rng, dom: &SamplingDomain, pair: &ScalePair, target: f64) -> ScaledOperator {
    let h = random_series(rng, dom.dim, dom.mode, dom.trunc, 0.1, false);
    let base = ScaledOperator::poisson_adjoint(h.clone());
    let nu0 = base.borel_nu(pair).unwrap();
    ScaledOperator::poisson_adjoint(h.scale_real(target / nu0))
}

#[test]
fn borel_exponential_estimate() {
    let dom = SamplingDomain::torus(2);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let t = rng.gen_range(0.1..0.5);
        let pair = ScalePair::new(t * rng.gen_range(0.1..0.9), t).unwrap();
        let nu = rng.gen_range(0.05..0.9);
        let u = tuned_bracket(&mut rng, &dom, &pair, nu);
        let x = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.1, false);
        let (y, bound) = borel_apply(&PowerSeries::geometric(16), &u, &x, &pair).unwrap();
        let expected = norm_majorant(&x, pair.t()).unwrap() / (1.0 - u.borel_nu(&pair).unwrap());
        assert!(bound <= expected * (1.0 + 1e-12));
        assert!(norm_majorant(&y, pair.s()).unwrap() <= bound);
    }
}

#[test]
fn borel_attractor_estimate() {
    let dom = SamplingDomain::torus(2);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let pair = ScalePair::new(0.2, 0.4).unwrap();
    let u = tuned_bracket(&mut rng, &dom, &pair, 0.3);
    let x = random_series(&mut rng, 2, Mode::Torus, dom.trunc, 0.1, false);
    let g = PowerSeries::geometric(16);
    let (y, bound) = borel_apply_attractor(&g, 2, 0.5, &u, &x, &pair).unwrap();
    let nu = u.borel_nu(&pair).unwrap();
    assert!((bound - g.eval(0.5) * nu * nu * norm_majorant(&x, 0.4).unwrap()).abs() <= 1e-12 * bound);
    assert!(norm_majorant(&y, 0.2).unwrap() <= bound);
    assert!(borel_apply_attractor(&g, 2, 0.2, &u, &x, &pair).is_err());
}

#[test]
fn lie_exp_trivial_cases() {
    let pair = ScalePair::new(0.2, 0.4).unwrap();
    let x = series(1, &[(MultiIndex::p(1, 0, 1), c(1.0)), (MultiIndex::q(1, 0, -2), c(0.5))]);
    let zero = ScaledSeries::zero(1, Mode::Torus, torus1());
    let r = lie_exp(&zero, &[], &x, &pair, 1e-14).unwrap();
    assert_eq!(r.value, x);

    let a = ScaledSeries::constant(1, Mode::Torus, torus1(), 0.01);
    let p1 = series(1, &[(MultiIndex::p(1, 0, 1), c(1.0))]);
    let r = lie_exp(&zero, &[a], &p1, &pair, 1e-14).unwrap();
    assert_eq!(r.value, series(1, &[(MultiIndex::p(1, 0, 1), c(1.0)), (MultiIndex::zero(1), c(0.01))]));
    assert!(r.terminated);
}

#[test]
fn lie_exp_matches_closed_form_flow() {
    // h = εq: the flow of ẋ = {x, h} is q ↦ q, p ↦ p + √−1 ε q
    let eps = 0.01;
    let i = Complex64::new(0.0, 1.0);
    let pair = ScalePair::new(0.2, 0.4).unwrap();
    let h = series(1, &[(MultiIndex::q(1, 0, 1), c(eps))]);
    let p = series(1, &[(MultiIndex::p(1, 0, 1), c(1.0))]);
    let r = lie_exp(&h, &[], &p, &pair, 1e-14).unwrap();
    let expected = series(1, &[(MultiIndex::p(1, 0, 1), c(1.0)), (MultiIndex::q(1, 0, 1), i * eps)]);
    assert_eq!(r.value, expected);

    let p2 = series(1, &[(MultiIndex::p(1, 0, 2), c(1.0))]);
    let r2 = lie_exp(&h, &[], &p2, &pair, 1e-14).unwrap();
    let expected2 = series(
        1,
        &[
            (MultiIndex::p(1, 0, 2), c(1.0)),
            (MultiIndex::new(vec![1], vec![1], 0), i * 2.0 * eps),
            (MultiIndex::q(1, 0, 2), c(-eps * eps)),
        ],
    );
    assert!(r2.value.sub(&expected2).unwrap().max_coeff() <= 1e-17);
}

#[test]
fn lie_exp_rejects_large_generators() {
    let pair = ScalePair::new(0.2, 0.25).unwrap();
    let h = series(1, &[(MultiIndex::q(1, 0, 1), c(1.0))]);
    let x = series(1, &[(MultiIndex::p(1, 0, 1), c(1.0))]);
    match lie_exp(&h, &[], &x, &pair, 1e-14) {
        Err(OperatorError::NotExponentiable { s, t, .. }) => assert_eq!((s, t), (0.2, 0.25)),
        other => panic!("{other:?}"),
    }
}

fn small_generator(rng: &mut ChaCha8Rng, scale: f64) -> ScaledSeries {
    // t-divisible generator: the Lie series terminates and truncation is exact
    let tr = Truncation::new(8, 4, 2);
    let h = random_series(rng, 1, Mode::Torus, Truncation::new(1, 1, 1), 0.6, true);
    let h = h.filter(|i| i.tdeg >= 1).scale_real(scale);
    h.retruncate(tr).0
}

#[test]
fn exp_of_minus_xi_inverts() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let pair = ScalePair::new(0.2, 0.4).unwrap();
    for _ in 0..10 {
        let h = small_generator(&mut rng, 0.01);
        let x = random_series(&mut rng, 1, Mode::Torus, Truncation::new(3, 2, 2), 0.4, true)
            .retruncate(Truncation::new(8, 4, 2))
            .0;
        let y = lie_exp(&h, &[], &x, &pair, 1e-15).unwrap();
        assert!(y.terminated);
        let back = lie_exp(&h.neg(), &[], &y.value, &pair, 1e-15).unwrap();
        assert!(back.value.sub(&x).unwrap().max_coeff() <= 1e-14);
    }
}

#[test]
fn lie_exp_is_a_poisson_automorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let pair = ScalePair::new(0.2, 0.4).unwrap();
    let tr = Truncation::new(8, 4, 2);
    for _ in 0..10 {
        let h = small_generator(&mut rng, 0.01);
        let x = random_series(&mut rng, 1, Mode::Torus, Truncation::new(2, 1, 0), 0.5, true).retruncate(tr).0;
        let y = random_series(&mut rng, 1, Mode::Torus, Truncation::new(2, 1, 0), 0.5, true).retruncate(tr).0;
        let xy = poisson_bracket(&x, &y).unwrap().0;
        let lhs = lie_exp(&h, &[], &xy, &pair, 1e-15).unwrap().value;
        let ex = lie_exp(&h, &[], &x, &pair, 1e-15).unwrap().value;
        let ey = lie_exp(&h, &[], &y, &pair, 1e-15).unwrap().value;
        let rhs = poisson_bracket(&ex, &ey).unwrap().0;
        assert!(lhs.sub(&rhs).unwrap().max_coeff() <= 1e-13);
    }
}

#[test]
fn products_of_exponentials_are_cauchy() {
    // ξ_i = {−, 2^{-i} h_i}: Σ‖ξ_i‖ < ∞, so partial products converge
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let pair = ScalePair::new(0.2, 0.4).unwrap();
    let x = random_series(&mut rng, 1, Mode::Torus, Truncation::new(2, 2, 0), 0.5, true)
        .retruncate(Truncation::new(8, 4, 2))
        .0;
    let mut current = x.clone();
    let mut steps = Vec::new();
    for i in 0..12 {
        let h = small_generator(&mut rng, 0.01 * 0.5f64.powi(i));
        let next = lie_exp(&h, &[], &current, &pair, 1e-15).unwrap().value;
        steps.push(norm_majorant(&next.sub(&current).unwrap(), pair.s()).unwrap());
        current = next;
    }
    let tail: f64 = steps[6..].iter().sum();
    let head: f64 = steps[..6].iter().sum();
    assert!(tail < 0.05 * head, "{steps:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn compose_random_derivations(a in 0usize..4, b in 0usize..4, seed in any::<u64>()) {
        let ds = [Derivative::QLog(0), Derivative::QLog(1), Derivative::P(0), Derivative::P(1)];
        let u = ScaledOperator::derivation(Mode::Torus, ds[a]).unwrap();
        let v = ScaledOperator::derivation(Mode::Torus, ds[b]).unwrap();
        let cert = certify_bound(&u.compose(&v), 2, 50, seed, &SamplingDomain::torus(2)).unwrap();
        prop_assert!(cert.pass);
    }
}
