//! `GSp_2n` with `J = [[0, I], [-I, 0]]`: roots, torus, Iwahori membership, sampling.

pub mod cosets;
pub mod intmat;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::padic::rational::{is_p_integral, p_pow, q, vp, vp_i64, ExtQ, Q};

/// A root of `Sp_2n`; indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Root {
    /// `ε_i - ε_j`, `i != j`.
    Diff(usize, usize),
    /// `ε_i + ε_j`, `i < j`.
    Sum(usize, usize),
    /// `-ε_i - ε_j`, `i < j`.
    NegSum(usize, usize),
    /// `2ε_i`.
    Long(usize),
    /// `-2ε_i`.
    NegLong(usize),
}

impl Root {
    /// Positivity is read off the root table: `ε_i - ε_j` is positive for `j < i`.
    pub fn is_positive(&self) -> bool {
        match *self {
            Root::Diff(i, j) => j < i,
            Root::Sum(..) | Root::Long(_) => true,
            Root::NegSum(..) | Root::NegLong(_) => false,
        }
    }

    pub fn negate(&self) -> Root {
        match *self {
            Root::Diff(i, j) => Root::Diff(j, i),
            Root::Sum(i, j) => Root::NegSum(i, j),
            Root::NegSum(i, j) => Root::Sum(i, j),
            Root::Long(i) => Root::NegLong(i),
            Root::NegLong(i) => Root::Long(i),
        }
    }

    /// Non-zero entries `(row, col, coefficient)` of the root vector `X_α`.
    pub fn entries(&self, n: usize) -> Vec<(usize, usize, i64)> {
        match *self {
            Root::Diff(i, j) => vec![(i, j, 1), (j + n, i + n, -1)],
            Root::Sum(i, j) => vec![(i, n + j, 1), (j, n + i, 1)],
            Root::NegSum(i, j) => vec![(n + i, j, 1), (n + j, i, 1)],
            Root::Long(i) => vec![(i, n + i, 1)],
            Root::NegLong(i) => vec![(n + i, i, 1)],
        }
    }

    pub fn x_alpha(&self, n: usize) -> QMatrix {
        let mut m = QMatrix::zeros(2 * n, 2 * n);
        for (r, c, v) in self.entries(n) {
            m.set(r, c, q(v));
        }
        m
    }

    /// `exp(t X_α) = 1 + t X_α` (the root vectors square to zero).
    pub fn exp(&self, n: usize, t: &Q) -> QMatrix {
        QMatrix::identity(2 * n).add(&self.x_alpha(n).scale(t))
    }

    /// The root as a character of the torus: `(ε-coefficients, ν-exponent)`.
    pub fn as_character(&self, n: usize) -> (Vec<i64>, i64) {
        let mut e = vec![0i64; n];
        let c = match *self {
            Root::Diff(i, j) => {
                e[i] += 1;
                e[j] -= 1;
                0
            }
            Root::Sum(i, j) => {
                e[i] += 1;
                e[j] += 1;
                -1
            }
            Root::NegSum(i, j) => {
                e[i] -= 1;
                e[j] -= 1;
                1
            }
            Root::Long(i) => {
                e[i] += 2;
                -1
            }
            Root::NegLong(i) => {
                e[i] -= 2;
                1
            }
        };
        (e, c)
    }

    /// `α(t)` via the adjoint action on `X_α`.
    pub fn value(&self, t: &TorusElement) -> Q {
        let d = t.diagonal();
        let (r, c, _) = self.entries(t.n)[0];
        &d[r] / &d[c]
    }

    pub fn label(&self) -> String {
        match *self {
            Root::Diff(i, j) => format!("e{}-e{}", i + 1, j + 1),
            Root::Sum(i, j) => format!("e{}+e{}", i + 1, j + 1),
            Root::NegSum(i, j) => format!("-e{}-e{}", i + 1, j + 1),
            Root::Long(i) => format!("2e{}", i + 1),
            Root::NegLong(i) => format!("-2e{}", i + 1),
        }
    }
}

/// All roots in table order.
pub fn all_roots(n: usize) -> Vec<Root> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..i {
            out.push(Root::Diff(i, j));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(Root::Diff(i, j));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(Root::Sum(i, j));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(Root::NegSum(i, j));
        }
    }
    for i in 0..n {
        out.push(Root::Long(i));
    }
    for i in 0..n {
        out.push(Root::NegLong(i));
    }
    out
}

pub fn positive_roots(n: usize) -> Vec<Root> {
    all_roots(n).into_iter().filter(Root::is_positive).collect()
}

/// Negative roots in table order (this fixes the product order in `V_s`).
pub fn negative_roots(n: usize) -> Vec<Root> {
    all_roots(n).into_iter().filter(|r| !r.is_positive()).collect()
}

/// Simple roots `2ε_1, ε_{i+1} - ε_i`.
pub fn simple_roots(n: usize) -> Vec<Root> {
    let mut out = vec![Root::Long(0)];
    for i in 0..n.saturating_sub(1) {
        out.push(Root::Diff(i + 1, i));
    }
    out
}

/// `diag(α_1..α_n, ν/α_1..ν/α_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusElement {
    pub n: usize,
    pub alphas: Vec<Q>,
    pub nu: Q,
}

impl TorusElement {
    pub fn new(alphas: Vec<Q>, nu: Q) -> Result<Self> {
        if alphas.iter().any(|a| a.is_zero()) || nu.is_zero() {
            return Err(Error::InvalidInput("torus coordinates must be non-zero".into()));
        }
        Ok(TorusElement { n: alphas.len(), alphas, nu })
    }

    pub fn identity(n: usize) -> Self {
        TorusElement { n, alphas: vec![Q::one(); n], nu: Q::one() }
    }

    /// `h_p = diag(p, p^2, ..., p^n, 1, p^-1, ..., p^{1-n})`, similitude `p`.
    pub fn h_p(n: usize, p: u64) -> Self {
        TorusElement { n, alphas: (1..=n as i64).map(|i| p_pow(p, i)).collect(), nu: q(p as i64) }
    }

    /// Read a diagonal matrix back as a torus element.
    pub fn from_diagonal(d: &[Q]) -> Result<Self> {
        if d.len() % 2 != 0 || d.is_empty() {
            return Err(Error::InvalidInput("diagonal of odd length".into()));
        }
        let n = d.len() / 2;
        let nu = &d[0] * &d[n];
        if (0..n).any(|i| &d[i] * &d[n + i] != nu) {
            return Err(Error::NotSymplectic);
        }
        Self::new(d[..n].to_vec(), nu)
    }

    pub fn diagonal(&self) -> Vec<Q> {
        let mut d = self.alphas.clone();
        d.extend(self.alphas.iter().map(|a| &self.nu / a));
        d
    }

    pub fn matrix(&self) -> QMatrix {
        QMatrix::diag(&self.diagonal())
    }

    pub fn mul(&self, o: &Self) -> Self {
        TorusElement {
            n: self.n,
            alphas: self.alphas.iter().zip(&o.alphas).map(|(a, b)| a * b).collect(),
            nu: &self.nu * &o.nu,
        }
    }

    pub fn inverse(&self) -> Self {
        TorusElement {
            n: self.n,
            alphas: self.alphas.iter().map(|a| Q::one() / a).collect(),
            nu: Q::one() / &self.nu,
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        (0..e.unsigned_abs()).fold(Self::identity(self.n), |acc, _| acc.mul(&base))
    }

    /// Integer `p`-valuations of the diagonal entries.
    pub fn valuations(&self, p: u64) -> Vec<i64> {
        self.diagonal().iter().map(|x| vp_i64(x, p).expect("non-zero")).collect()
    }
}

/// The standard alternating form.
pub fn j_matrix(n: usize) -> QMatrix {
    let mut j = QMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j.set(i, n + i, q(1));
        j.set(n + i, i, q(-1));
    }
    j
}

/// The multiplier `ν` with `g^t J g = ν J`, or `NotSymplectic`.
pub fn similitude(g: &QMatrix) -> Result<Q> {
    if !g.is_square() || g.rows() % 2 != 0 {
        return Err(Error::NotSymplectic);
    }
    let n = g.rows() / 2;
    let j = j_matrix(n);
    let lhs = g.transpose().mul(&j).mul(g);
    let nu = lhs.get(0, n).clone();
    if nu.is_zero() || lhs != j.scale(&nu) {
        return Err(Error::NotSymplectic);
    }
    Ok(nu)
}

/// `s ∈ T^+`: `v_ℓ(α(s)) >= 0` for every simple root.
pub fn t_plus_member(s: &TorusElement, ell: u64) -> bool {
    simple_roots(s.n).iter().all(|a| vp(&a.value(s), ell) >= ExtQ::from(0))
}

/// Membership in the Iwahori subgroup attached to the negative Borel.
///
/// Entries must be p-integral (else `NotIntegral`), the multiplier a unit, and the
/// positive-root positions (lower part of the upper-left block, the whole upper-right
/// block, the strict upper part of the lower-right block) divisible by `p`.
pub fn iwahori_member(g: &QMatrix, p: u64) -> Result<bool> {
    if let Some(x) = g.entries().find(|x| !is_p_integral(x, p)) {
        return Err(Error::NotIntegral(crate::padic::rational::fmt_q(x)));
    }
    let nu = similitude(g)?;
    if vp(&nu, p) != ExtQ::from(0) {
        return Ok(false);
    }
    let n = g.rows() / 2;
    let div = |x: &Q| vp(x, p) >= ExtQ::from(1);
    for i in 0..n {
        for j in 0..n {
            if i > j && !div(g.get(i, j)) {
                return Ok(false);
            }
            if !div(g.get(i, n + j)) {
                return Ok(false);
            }
            if i < j && !div(g.get(n + i, n + j)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sign-unit torus elements `diag(ε, ε)` with `ε_i = ±1`.
fn sign_torus(n: usize, signs: &[bool]) -> QMatrix {
    let d: Vec<Q> = (0..2 * n).map(|k| if signs[k % n] { q(-1) } else { q(1) }).collect();
    QMatrix::diag(&d)
}

/// A random word in the generators of `Γ = Sp_2n(Z) ∩ ℐ`.
///
/// Letters are `exp(t X_α)` (with `t ∈ pZ` for positive `α`) and sign-unit torus elements.
pub fn sample_gamma<R: Rng>(n: usize, p: u64, word_length: usize, rng: &mut R) -> QMatrix {
    let roots = all_roots(n);
    let mut g = QMatrix::identity(2 * n);
    for _ in 0..word_length {
        let k = rng.gen_range(0..roots.len() + 1);
        let letter = if k == roots.len() {
            let signs: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            sign_torus(n, &signs)
        } else {
            let r = roots[k];
            let mut t = [-2i64, -1, 1, 2][rng.gen_range(0..4)];
            if r.is_positive() {
                t *= p as i64;
            }
            r.exp(n, &q(t))
        };
        g = g.mul(&letter);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_generators_are_symplectic() {
        for n in 1..=3 {
            for r in all_roots(n) {
                for t in [1, 3, -2] {
                    assert_eq!(similitude(&r.exp(n, &q(t))).unwrap(), q(1), "{}", r.label());
                }
            }
            assert_eq!(similitude(&TorusElement::h_p(n, 3).matrix()).unwrap(), q(3));
        }
    }

    #[test]
    fn root_counts() {
        for n in 1..=4 {
            assert_eq!(all_roots(n).len(), 2 * n * n);
            assert_eq!(positive_roots(n).len(), n * n);
        }
    }

    #[test]
    fn simple_roots_on_h_p_equal_p() {
        for n in 1..=3 {
            let h = TorusElement::h_p(n, 5);
            for a in simple_roots(n) {
                assert_eq!(a.value(&h), q(5));
            }
            for a in positive_roots(n) {
                assert!(vp(&a.value(&h), 5) >= ExtQ::from(1));
            }
        }
    }

    #[test]
    fn root_values_match_character_coordinates() {
        let t = TorusElement::new(vec![q(2), q(7)], q(5)).unwrap();
        for r in all_roots(2) {
            let (e, c) = r.as_character(2);
            let mut v = Q::one();
            for (i, k) in e.iter().enumerate() {
                v *= pow_q(&t.alphas[i], *k);
            }
            v *= pow_q(&t.nu, c);
            assert_eq!(v, r.value(&t), "{}", r.label());
        }
    }

    fn pow_q(x: &Q, k: i64) -> Q {
        let b = num_traits::pow(x.clone(), k.unsigned_abs() as usize);
        if k < 0 {
            Q::one() / b
        } else {
            b
        }
    }

    #[test]
    fn iwahori_examples() {
        let n = 2;
        let mut g = QMatrix::identity(4);
        g.set(0, n, q(1));
        assert!(!iwahori_member(&g, 3).unwrap());
        g.set(0, n, q(3));
        assert!(iwahori_member(&g, 3).unwrap());
        let mut h = QMatrix::identity(4);
        h.set(0, 0, crate::padic::rational::qf(1, 3));
        assert!(matches!(iwahori_member(&h, 3), Err(Error::NotIntegral(_))));
    }

    #[test]
    fn t_plus_example() {
        let s = TorusElement::new(vec![p_pow(7, 2)], q(1)).unwrap();
        assert!(t_plus_member(&s, 7));
        assert!(!t_plus_member(&s.inverse(), 7));
    }

    #[test]
    fn gamma_samples_are_iwahori() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            for _ in 0..5 {
                let g = sample_gamma(n, 3, 8, &mut rng);
                assert_eq!(similitude(&g).unwrap(), q(1));
                assert!(iwahori_member(&g, 3).unwrap());
                for i in 0..2 * n {
                    assert_eq!(vp(g.get(i, i), 3), ExtQ::from(0));
                }
            }
        }
    }
}
