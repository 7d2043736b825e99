use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Inline exponent storage; no allocation up to four degrees of freedom.
pub type Exponents<T> = SmallVec<[T; 4]>;

/// Which phase space a series lives on.
///
/// `Torus`: Fourier in `q` (exponents in ℤⁿ), Taylor in `p`, and a passive
/// parameter `t`. `Singular`: Taylor in both `q` and `p` at the origin, no `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Torus,
    Singular,
}

/// Exponent of one monomial `q^I p^J t^k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub fourier: Exponents<i32>,
    pub momentum: Exponents<u32>,
    pub tdeg: u32,
}

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self {
            fourier: SmallVec::from_elem(0, dim),
            momentum: SmallVec::from_elem(0, dim),
            tdeg: 0,
        }
    }

    pub fn new(
        fourier: impl Into<Exponents<i32>>,
        momentum: impl Into<Exponents<u32>>,
        tdeg: u32,
    ) -> Self {
        Self {
            fourier: fourier.into(),
            momentum: momentum.into(),
            tdeg,
        }
    }

    /// `q_i^e`.
    pub fn q(dim: usize, i: usize, e: i32) -> Self {
        let mut idx = Self::zero(dim);
        idx.fourier[i] = e;
        idx
    }

    /// `p_i^e`.
    pub fn p(dim: usize, i: usize, e: u32) -> Self {
        let mut idx = Self::zero(dim);
        idx.momentum[i] = e;
        idx
    }

    /// `t^k`.
    pub fn t(dim: usize, k: u32) -> Self {
        let mut idx = Self::zero(dim);
        idx.tdeg = k;
        idx
    }

    pub fn with_tdeg(mut self, k: u32) -> Self {
        self.tdeg = k;
        self
    }

    pub fn dim(&self) -> usize {
        self.fourier.len()
    }

    pub fn fourier_l1(&self) -> u32 {
        self.fourier.iter().map(|e| e.unsigned_abs()).sum()
    }

    pub fn fourier_sup(&self) -> u32 {
        self.fourier.iter().map(|e| e.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn momentum_l1(&self) -> u32 {
        self.momentum.iter().sum()
    }

    /// Total Taylor degree `|I|₁ + |J|₁` (meaningful in singular mode).
    pub fn total_degree(&self) -> u32 {
        self.fourier_l1() + self.momentum_l1()
    }

    pub fn is_fourier_zero(&self) -> bool {
        self.fourier.iter().all(|&e| e == 0)
    }

    pub fn is_momentum_zero(&self) -> bool {
        self.momentum.iter().all(|&e| e == 0)
    }

    /// Exponent sum (monomial product).
    pub fn add(&self, other: &Self) -> Self {
        Self {
            fourier: self
                .fourier
                .iter()
                .zip(&other.fourier)
                .map(|(a, b)| a + b)
                .collect(),
            momentum: self
                .momentum
                .iter()
                .zip(&other.momentum)
                .map(|(a, b)| a + b)
                .collect(),
            tdeg: self.tdeg + other.tdeg,
        }
    }

    /// Fourier part negated, i.e. the index paired with `self` by the real structure.
    pub fn conjugate(&self) -> Self {
        Self {
            fourier: self.fourier.iter().map(|e| -e).collect(),
            momentum: self.momentum.clone(),
            tdeg: self.tdeg,
        }
    }

    /// Σ min(I_i, J_i): how many `q_i p_i` factors can be extracted.
    pub fn resonant_units(&self) -> u32 {
        self.fourier
            .iter()
            .zip(&self.momentum)
            .map(|(&i, &j)| (i.max(0) as u32).min(j))
            .sum()
    }

    /// `I = J` coordinatewise (singular-mode kernel of the quadratic part).
    pub fn is_diagonal(&self) -> bool {
        self.fourier
            .iter()
            .zip(&self.momentum)
            .all(|(&i, &j)| i >= 0 && i as u32 == j)
    }

    pub(crate) fn valid_for(&self, dim: usize, mode: Mode) -> bool {
        self.fourier.len() == dim
            && self.momentum.len() == dim
            && match mode {
                Mode::Torus => true,
                Mode::Singular => self.tdeg == 0 && self.fourier.iter().all(|&e| e >= 0),
            }
    }
}

/// Truncation caps. Every stored key must respect all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// Cap on each `|I_i|`.
    pub max_fourier: u32,
    /// Cap on `|J|₁`.
    pub max_momentum_deg: u32,
    pub max_tdeg: u32,
    /// Optional cap on `|I|₁ + |J|₁`; used for singular germs, where truncation
    /// by total degree is compatible with the bracket filtration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_degree: Option<u32>,
}

impl Truncation {
    pub fn new(max_fourier: u32, max_momentum_deg: u32, max_tdeg: u32) -> Self {
        Self {
            max_fourier,
            max_momentum_deg,
            max_tdeg,
            max_total_degree: None,
        }
    }

    /// Truncation of a singular germ at total degree `degree`.
    pub fn total_degree(degree: u32) -> Self {
        Self {
            max_fourier: degree,
            max_momentum_deg: degree,
            max_tdeg: 0,
            max_total_degree: Some(degree),
        }
    }

    pub fn admits(&self, idx: &MultiIndex) -> bool {
        idx.fourier_sup() <= self.max_fourier
            && idx.momentum_l1() <= self.max_momentum_deg
            && idx.tdeg <= self.max_tdeg
            && self.max_total_degree.map_or(true, |d| idx.total_degree() <= d)
    }

    /// Componentwise tighter of two truncations.
    pub fn tighter(&self, other: &Self) -> Self {
        Self {
            max_fourier: self.max_fourier.min(other.max_fourier),
            max_momentum_deg: self.max_momentum_deg.min(other.max_momentum_deg),
            max_tdeg: self.max_tdeg.min(other.max_tdeg),
            max_total_degree: match (self.max_total_degree, other.max_total_degree) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }

    /// Every multi-index admitted by the truncation, in canonical order.
    pub fn lattice(&self, dim: usize, mode: Mode) -> Vec<MultiIndex> {
        let fourier_range: Vec<i32> = match mode {
            Mode::Torus => (-(self.max_fourier as i32)..=self.max_fourier as i32).collect(),
            Mode::Singular => (0..=self.max_fourier as i32).collect(),
        };
        let max_t = match mode {
            Mode::Torus => self.max_tdeg,
            Mode::Singular => 0,
        };
        let fouriers = cartesian(&vec![fourier_range; dim]);
        let momenta: Vec<Vec<u32>> = compositions_up_to(dim, self.max_momentum_deg);
        let mut out = Vec::new();
        for f in &fouriers {
            for m in &momenta {
                for k in 0..=max_t {
                    let idx = MultiIndex::new(f.clone(), m.clone(), k);
                    if self.admits(&idx) {
                        out.push(idx);
                    }
                }
            }
        }
        out.sort();
        out
    }
}

/// Membership in the ideal classes used to split hamiltonians into normal
/// part, transversal and error.
///
/// Torus: 𝕀 is generated by the `p_i`. Singular: 𝕀 is generated by the `q_i p_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdealClass {
    pub mode: Mode,
}

impl IdealClass {
    pub fn new(mode: Mode) -> Self {
        Self { mode }
    }

    pub fn in_ideal(&self, idx: &MultiIndex) -> bool {
        match self.mode {
            Mode::Torus => idx.momentum_l1() >= 1,
            Mode::Singular => idx.resonant_units() >= 1,
        }
    }

    pub fn in_ideal_squared(&self, idx: &MultiIndex) -> bool {
        match self.mode {
            Mode::Torus => idx.momentum_l1() >= 2,
            Mode::Singular => idx.resonant_units() >= 2,
        }
    }

    /// Pure functions of `t` (torus) or constants (singular).
    pub fn is_scalar(&self, idx: &MultiIndex) -> bool {
        idx.is_fourier_zero() && idx.is_momentum_zero()
    }

    /// Lies in the transversal `ℂ{t} ⊕ 𝕀²`.
    pub fn in_transversal(&self, idx: &MultiIndex) -> bool {
        self.is_scalar(idx) || self.in_ideal_squared(idx)
    }
}

fn cartesian(ranges: &[Vec<i32>]) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for prefix in &out {
            for &v in r {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All `J ∈ ℕ^dim` with `|J|₁ ≤ max`.
pub(crate) fn compositions_up_to(dim: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u32 = prefix.iter().sum();
            for v in 0..=(max - used) {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_classes_torus() {
        let c = IdealClass::new(Mode::Torus);
        let p1 = MultiIndex::p(2, 0, 1);
        assert!(c.in_ideal(&p1) && !c.in_ideal_squared(&p1));
        let p1p2 = p1.add(&MultiIndex::p(2, 1, 1));
        assert!(c.in_ideal_squared(&p1p2));
        assert!(c.is_scalar(&MultiIndex::t(2, 3)));
        assert!(!c.is_scalar(&MultiIndex::q(2, 0, 1)));
    }

    #[test]
    fn ideal_classes_singular() {
        let c = IdealClass::new(Mode::Singular);
        // q1 p2 is not in the ideal generated by the q_i p_i
        let q1p2 = MultiIndex::new(vec![1, 0], vec![0, 1], 0);
        assert!(!c.in_ideal(&q1p2));
        let q1p1 = MultiIndex::new(vec![1, 0], vec![1, 0], 0);
        assert!(c.in_ideal(&q1p1) && !c.in_ideal_squared(&q1p1));
        let q1sq_p1_p2q2 = MultiIndex::new(vec![2, 1], vec![1, 1], 0);
        assert!(c.in_ideal_squared(&q1sq_p1_p2q2));
    }

    #[test]
    fn lattice_respects_truncation() {
        let tr = Truncation::new(2, 1, 1);
        let lat = tr.lattice(1, Mode::Torus);
        // 5 Fourier modes × 2 momenta × 2 t-degrees
        assert_eq!(lat.len(), 20);
        assert!(lat.iter().all(|i| tr.admits(i)));
        let sing = Truncation::total_degree(3).lattice(1, Mode::Singular);
        assert_eq!(sing.len(), 10);
    }
}
