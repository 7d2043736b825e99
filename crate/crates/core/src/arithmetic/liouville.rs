//! The Liouville vector `α = (1, l)`, `l = Σ_{n≥1} 10^{−n!}`, and its
//! near-resonances `β_N`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ArithmeticError;

/// Exact certificate for `|(α, β_N)| ≤ 2‖β_N‖^{−N}`.
///
/// `|(α, β_N)|` is enclosed in `[lower, upper]` using `α_trunc = (1, l_M)`,
/// `M = N + 2`, and the tail bound `0 ≤ l − l_M ≤ 2·10^{−(M+1)!}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleCertificate {
    pub n: u32,
    /// Decimal strings of the two components.
    pub beta: [String; 2],
    pub truncation_depth: u32,
    /// Inequality with the sup norm: `Some(true)` certified, `Some(false)`
    /// refuted, `None` undecided by the enclosure.
    pub holds_sup: Option<bool>,
    /// Same inequality with the Euclidean norm.
    pub holds_euclidean: Option<bool>,
    /// `log10` of the enclosure midpoint and of the sup-norm bound, for display.
    pub log10_pairing: f64,
    pub log10_bound_sup: f64,
    #[serde(skip)]
    pub beta_exact: [BigInt; 2],
}

fn factorial(n: u32) -> u32 {
    (1..=n).product()
}

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), e as usize)
}

/// `l_M = Σ_{n=1}^{M} 10^{−n!}`.
fn l_partial(m: u32) -> BigRational {
    let den = pow10(factorial(m));
    let num: BigInt = (1..=m).map(|n| pow10(factorial(m) - factorial(n))).sum();
    BigRational::new(num, den)
}

fn log10(x: &BigRational) -> f64 {
    let digits = |b: &BigInt| {
        let s = b.abs().to_string();
        let lead: f64 = s[..s.len().min(17)].parse().unwrap();
        lead.log10() + (s.len() - s.len().min(17)) as f64
    };
    digits(x.numer()) - digits(x.denom())
}

/// `β_N = (−Σ_{n=1}^{N} 10^{N!−n!}, 10^{N!})`, so that `(α, β_N) = Σ_{n>N} 10^{N!−n!}`.
pub fn liouville_witness(n: u32) -> Result<LiouvilleCertificate, ArithmeticError> {
    if !(2..=4).contains(&n) {
        return Err(ArithmeticError::InvalidInput(format!("N = {n} outside 2..=4")));
    }
    let nf = factorial(n);
    let b2 = pow10(nf);
    let b1: BigInt = -(1..=n).map(|k| pow10(nf - factorial(k))).sum::<BigInt>();

    let m = n + 2;
    let lm = l_partial(m);
    let pairing = BigRational::from_integer(b1.clone()) + lm * BigRational::from_integer(b2.clone());
    let tail = BigRational::new(BigInt::from(2) * b2.clone(), pow10(factorial(m + 1)));
    // (α,β) = pairing + b2 (l − l_M), with 0 ≤ l − l_M ≤ 2·10^{−(M+1)!}
    let lo_signed = pairing.clone();
    let hi_signed = pairing.clone() + tail;
    let (lower, upper) = if lo_signed.is_negative() && hi_signed.is_positive() {
        (BigRational::zero(), lo_signed.abs().max(hi_signed.abs()))
    } else {
        let (a, b) = (lo_signed.abs(), hi_signed.abs());
        if a <= b { (a, b) } else { (b, a) }
    };

    let two = BigRational::from_integer(BigInt::from(2));
    // sup norm
    let sup = b1.abs().max(b2.clone());
    let sup_pow = BigRational::from_integer(num_traits::pow(sup, n as usize));
    let bound_sup = two.clone() / sup_pow;
    let holds_sup = decide(&lower, &upper, &bound_sup);

    // Euclidean: compare x² ‖β‖₂^{2N} with 4
    let e2 = BigRational::from_integer(&b1 * &b1 + &b2 * &b2);
    let e2n = num_traits::pow(e2, n as usize);
    let four = &two * &two;
    let holds_euclidean = if &upper * &upper * &e2n <= four {
        Some(true)
    } else if &lower * &lower * &e2n > four {
        Some(false)
    } else {
        None
    };

    let mid = (&lower + &upper) / &two;
    Ok(LiouvilleCertificate {
        n,
        beta: [b1.to_string(), b2.to_string()],
        truncation_depth: m,
        holds_sup,
        holds_euclidean,
        log10_pairing: log10(&mid),
        log10_bound_sup: log10(&bound_sup),
        beta_exact: [b1, b2],
    })
}

fn decide(lower: &BigRational, upper: &BigRational, bound: &BigRational) -> Option<bool> {
    if upper <= bound {
        Some(true)
    } else if lower > bound {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_components() {
        let c = liouville_witness(2).unwrap();
        // l_2 = 0.11, 100·l_2 = 11
        assert_eq!(c.beta, ["-11".to_string(), "100".to_string()]);
        let c3 = liouville_witness(3).unwrap();
        assert_eq!(c3.beta, ["-110001".to_string(), "1000000".to_string()]);
    }

    #[test]
    fn sup_norm_inequality_is_certified() {
        for n in 2..=4 {
            let c = liouville_witness(n).unwrap();
            assert_eq!(c.holds_sup, Some(true), "N = {n}");
            // ‖β_N‖ ≥ 10^{N!}
            assert!(c.beta_exact[1] >= pow10(factorial(n)));
            assert!(c.log10_pairing <= c.log10_bound_sup);
        }
    }

    #[test]
    fn euclidean_norm_inequality_also_holds() {
        for n in 2..=4 {
            assert_eq!(liouville_witness(n).unwrap().holds_euclidean, Some(true), "N = {n}");
        }
    }

    #[test]
    fn pairing_matches_float_estimate() {
        // (α, β_2) ≈ 10^{2−6} + 10^{2−24}
        let c = liouville_witness(2).unwrap();
        assert!((c.log10_pairing - (-4.0)).abs() < 1e-9);
    }

    #[test]
    fn out_of_range() {
        assert!(liouville_witness(1).is_err());
        assert!(liouville_witness(5).is_err());
    }
}
