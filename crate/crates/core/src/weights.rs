//! Characters of the diagonal torus of `GSp_2n`, the Weyl group of type `C_n`,
//! the dot action and Weyl character values.
//!
//! A weight `(λ_1..λ_n; λ_0)` sends `diag(a_1..a_n, ν/a_1..ν/a_n)` to `∏ a_i^{λ_i} ν^{λ_0}`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::padic::rational::{vp, ExtQ, Q};
use crate::padic::CappedPadic;
use crate::symplectic::{all_roots, positive_roots, simple_roots, Root};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub eps: Vec<i64>,
    pub central: i64,
}

impl Weight {
    pub fn new(eps: Vec<i64>, central: i64) -> Self {
        Weight { eps, central }
    }

    pub fn zero(n: usize) -> Self {
        Weight { eps: vec![0; n], central: 0 }
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    pub fn of_root(r: &Root, n: usize) -> Self {
        let (eps, central) = r.as_character(n);
        Weight { eps, central }
    }

    pub fn add(&self, o: &Self) -> Self {
        Weight {
            eps: self.eps.iter().zip(&o.eps).map(|(a, b)| a + b).collect(),
            central: self.central + o.central,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Self {
        Weight { eps: self.eps.iter().map(|a| a * k).collect(), central: self.central * k }
    }

    /// All `n + 1` coordinates.
    pub fn coords(&self) -> Vec<i64> {
        let mut c = self.eps.clone();
        c.push(self.central);
        c
    }

    /// `⟨λ, α⟩` through the coroot of `α` in `Sp_2n`; the central exponent does not enter.
    pub fn pairing(&self, r: &Root) -> i64 {
        match *r {
            Root::Diff(i, j) => self.eps[i] - self.eps[j],
            Root::Sum(i, j) => self.eps[i] + self.eps[j],
            Root::NegSum(i, j) => -(self.eps[i] + self.eps[j]),
            Root::Long(i) => self.eps[i],
            Root::NegLong(i) => -self.eps[i],
        }
    }

    /// Non-negative pairing with every simple root.
    pub fn is_dominant(&self) -> bool {
        simple_roots(self.n()).iter().all(|a| self.pairing(a) >= 0)
    }

    /// Smallest pairing with a simple root.
    pub fn min_simple_pairing(&self) -> i64 {
        simple_roots(self.n()).iter().map(|a| self.pairing(a)).min().unwrap_or(0)
    }

    /// Evaluate at a torus point.
    pub fn eval<S: TorusScalar>(&self, t: &TorusPoint<S>) -> Result<S> {
        let mut acc = t.nu.powi(self.central)?;
        for (x, &k) in t.xs.iter().zip(&self.eps) {
            if k != 0 {
                acc = acc.mul(&x.powi(k)?);
            }
        }
        Ok(acc)
    }

    /// Residues of the coordinates modulo `p - 1`: the class in `X / (p-1)X`.
    pub fn class_mod(&self, p: u64) -> Vec<i64> {
        let m = p as i64 - 1;
        self.coords().iter().map(|c| c.rem_euclid(m.max(1))).collect()
    }
}

/// Largest `m` with `λ - λ' ∈ p^m X`; `+inf` when equal.
pub fn vp_weight(a: &Weight, b: &Weight, p: u64) -> Result<ExtQ> {
    if a.n() != b.n() {
        return Err(Error::InvalidInput("weights of different rank".into()));
    }
    Ok(a.sub(b).coords().iter().map(|&c| vp(&Q::from_integer(c.into()), p)).min().unwrap_or(ExtQ::PosInf))
}

/// `λ ≡ λ' (mod (p-1) p^m X)`.
pub fn weights_congruent(a: &Weight, b: &Weight, p: u64, m: u32) -> bool {
    let modulus = (p as i128 - 1) * (p as i128).pow(m);
    a.sub(b).coords().iter().all(|&c| (c as i128) % modulus == 0)
}

/// A weight with doubled coordinates, used for `ρ` (whose central part is half-integral).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfWeight {
    pub eps2: Vec<i64>,
    pub central2: i64,
}

impl HalfWeight {
    pub fn from_weight(w: &Weight) -> Self {
        let d = w.scale(2);
        HalfWeight { eps2: d.eps, central2: d.central }
    }

    /// `Some` when all coordinates are even.
    pub fn to_weight(&self) -> Option<Weight> {
        if self.eps2.iter().all(|c| c % 2 == 0) && self.central2 % 2 == 0 {
            Some(Weight { eps: self.eps2.iter().map(|c| c / 2).collect(), central: self.central2 / 2 })
        } else {
            None
        }
    }

    fn as_doubled(&self) -> Weight {
        Weight { eps: self.eps2.clone(), central: self.central2 }
    }
}

/// Half the sum of the positive roots, stored doubled.
pub fn rho(n: usize) -> HalfWeight {
    let sum = positive_roots(n).iter().fold(Weight::zero(n), |acc, r| acc.add(&Weight::of_root(r, n)));
    HalfWeight { eps2: sum.eps, central2: sum.central }
}

/// A signed permutation: `λ ↦ μ` with `μ_{σ(i)} = ±λ_i`, and the central part shifted by
/// the flipped coordinates (a flip trades `a_i` for `ν / a_i`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub flips: Vec<bool>,
}

impl WeylElement {
    pub fn identity(n: usize) -> Self {
        WeylElement { perm: (0..n).collect(), flips: vec![false; n] }
    }

    pub fn new(perm: Vec<usize>, flips: Vec<bool>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &s in &perm {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        if flips.len() != n {
            return Err(Error::InvalidInput("sign vector has the wrong length".into()));
        }
        Ok(WeylElement { perm, flips })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &s)| i == s) && self.flips.iter().all(|f| !f)
    }

    /// All `2^n n!` elements.
    pub fn all(n: usize) -> Vec<WeylElement> {
        let mut perms: Vec<Vec<usize>> = vec![vec![]];
        for k in 0..n {
            let mut next = Vec::new();
            for p in &perms {
                for pos in 0..=k {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    next.push(q);
                }
            }
            perms = next;
        }
        perms.sort();
        let mut out = Vec::new();
        for p in perms {
            for mask in 0u32..(1 << n) {
                out.push(WeylElement { perm: p.clone(), flips: (0..n).map(|i| mask >> i & 1 == 1).collect() });
            }
        }
        out
    }

    pub fn act(&self, w: &Weight) -> Weight {
        let n = self.n();
        let mut eps = vec![0i64; n];
        let mut central = w.central;
        for i in 0..n {
            if self.flips[i] {
                eps[self.perm[i]] = -w.eps[i];
                central += w.eps[i];
            } else {
                eps[self.perm[i]] = w.eps[i];
            }
        }
        Weight { eps, central }
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &Self) -> Self {
        let n = self.n();
        let perm = (0..n).map(|i| self.perm[o.perm[i]]).collect();
        let flips = (0..n).map(|i| self.flips[o.perm[i]] ^ o.flips[i]).collect();
        WeylElement { perm, flips }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut flips = vec![false; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            flips[self.perm[i]] = self.flips[i];
        }
        WeylElement { perm, flips }
    }

    /// `w·λ = w(λ + ρ) - ρ`, computed on doubled coordinates.
    pub fn dot(&self, w: &Weight) -> Weight {
        let r = rho(w.n()).as_doubled();
        let moved = self.act(&w.scale(2).add(&r)).sub(&r);
        HalfWeight { eps2: moved.eps, central2: moved.central }
            .to_weight()
            .expect("dot action preserves integrality")
    }

    /// Number of positive roots sent to negative roots.
    pub fn length(&self) -> usize {
        let n = self.n();
        let lookup: HashMap<Weight, Root> = all_roots(n).into_iter().map(|r| (Weight::of_root(&r, n), r)).collect();
        positive_roots(n)
            .iter()
            .filter(|r| {
                let img = self.act(&Weight::of_root(r, n));
                !lookup.get(&img).expect("Weyl group permutes roots").is_positive()
            })
            .count()
    }

    /// `(-1)^{ℓ(w)}`.
    pub fn sign(&self) -> i64 {
        if self.length() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Act on a torus point so that `(wλ)(t) = λ(w⁻¹ t)` holds for the returned point.
    pub fn act_point<S: TorusScalar>(&self, t: &TorusPoint<S>) -> Result<TorusPoint<S>> {
        // w^{-1} t: coordinates a'_i with λ(a') = (wλ)(a).
        let n = self.n();
        let mut xs = Vec::with_capacity(n);
        for i in 0..n {
            let src = &t.xs[self.perm[i]];
            xs.push(if self.flips[i] { t.nu.mul(&src.inv()?) } else { src.clone() });
        }
        Ok(TorusPoint { xs, nu: t.nu.clone() })
    }
}

/// Coefficients `c_α ≥ 0` with `w·λ = λ - Σ c_α α` over the simple roots, plus a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DotExpansion {
    /// Indexed like `simple_roots(n)`: `2ε_1, ε_2 - ε_1, ...`.
    pub coeffs: Vec<i64>,
    /// A simple root index with `2 c_α ≥ ⟨λ, α⟩`.
    pub witness: usize,
}

pub fn lemma73_coeffs(w: &WeylElement, lambda: &Weight) -> Result<DotExpansion> {
    let n = lambda.n();
    if w.n() != n {
        return Err(Error::InvalidInput("Weyl element and weight of different rank".into()));
    }
    if w.is_identity() {
        return Err(Error::InvalidInput("identity has no expansion witness".into()));
    }
    if !lambda.is_dominant() {
        return Err(Error::PreconditionViolated("weight is not dominant".into()));
    }
    let d = lambda.sub(&w.dot(lambda));
    // Σ c α has ε-part (2c_1 - c_2, c_2 - c_3, ..., c_n) and central part -c_1.
    let mut c = vec![0i64; n];
    c[n - 1] = d.eps[n - 1];
    for i in (1..n.saturating_sub(1)).rev() {
        c[i] = d.eps[i] + c[i + 1];
    }
    if n >= 2 {
        let two_c1 = d.eps[0] + c[1];
        if two_c1 % 2 != 0 {
            return Err(Error::NotExpressible(format!("odd first coordinate for {w:?}")));
        }
        c[0] = two_c1 / 2;
    } else {
        if d.eps[0] % 2 != 0 {
            return Err(Error::NotExpressible(format!("odd first coordinate for {w:?}")));
        }
        c[0] = d.eps[0] / 2;
    }
    if d.central != -c[0] {
        return Err(Error::NotExpressible("central part inconsistent with the root expansion".into()));
    }
    if c.iter().any(|&x| x < 0) {
        return Err(Error::NotExpressible(format!("negative coefficient {c:?}")));
    }
    // Round trip.
    let simple = simple_roots(n);
    let back = simple
        .iter()
        .zip(&c)
        .fold(Weight::zero(n), |acc, (r, &k)| acc.add(&Weight::of_root(r, n).scale(k)));
    if back != d {
        return Err(Error::NotExpressible("expansion does not reproduce λ - w·λ".into()));
    }
    let witness = simple
        .iter()
        .zip(&c)
        .position(|(r, &k)| 2 * k >= lambda.pairing(r))
        .ok_or_else(|| Error::NotExpressible(format!("no witnessing simple root for {w:?}")))?;
    Ok(DotExpansion { coeffs: c, witness })
}

/// Scalars the Weyl character formula can be evaluated in.
pub trait TorusScalar: Clone + Send + Sync {
    fn one_like(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn powi(&self, k: i64) -> Result<Self>;
    /// Certify `self != 1`.
    fn certified_ne_one(&self) -> Result<bool>;
}

impl TorusScalar for Q {
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("inverting zero".into()));
        }
        Ok(self.recip())
    }
    fn powi(&self, k: i64) -> Result<Self> {
        if k < 0 && self.is_zero() {
            return Err(Error::InvalidInput("inverting zero".into()));
        }
        let k32 = i32::try_from(k).map_err(|_| Error::InvalidInput("exponent too large".into()))?;
        Ok(self.pow(k32))
    }
    fn certified_ne_one(&self) -> Result<bool> {
        Ok(!self.is_one())
    }
}

impl TorusScalar for CappedPadic {
    fn one_like(&self) -> Self {
        CappedPadic::one(self.prime(), self.rel_precision().unwrap_or(crate::padic::DEFAULT_PRECISION).max(1))
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn neg(&self) -> Self {
        self.neg_ref()
    }
    fn inv(&self) -> Result<Self> {
        CappedPadic::inv(self)
    }
    fn powi(&self, k: i64) -> Result<Self> {
        self.pow(k)
    }
    fn certified_ne_one(&self) -> Result<bool> {
        if self.valuation()? != ExtQ::from(0) {
            return Ok(true);
        }
        let d = self.sub_ref(&self.one_like());
        match d.valuation() {
            Ok(ExtQ::PosInf) => Ok(false),
            Ok(_) => Ok(true),
            Err(e) => Err(e),
        }
    }
}

/// `diag(x_1..x_n, ν/x_1..ν/x_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusPoint<S> {
    pub xs: Vec<S>,
    pub nu: S,
}

impl<S: TorusScalar> TorusPoint<S> {
    pub fn new(xs: Vec<S>, nu: S) -> Self {
        TorusPoint { xs, nu }
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn root_value(&self, r: &Root) -> Result<S> {
        Weight::of_root(r, self.n()).eval(self)
    }

    /// Every root value certified different from 1.
    pub fn check_regular(&self) -> Result<()> {
        for r in all_roots(self.n()) {
            if !self.root_value(&r)?.certified_ne_one()? {
                return Err(Error::NotRegular);
            }
        }
        Ok(())
    }

    /// `Δ(t) = ∏_{α>0} (1 - α(t)^{-1})`.
    pub fn weyl_denominator(&self) -> Result<S> {
        let mut acc: Option<S> = None;
        for r in positive_roots(self.n()) {
            let a = self.root_value(&r)?;
            let f = a.one_like().sub(&a.inv()?);
            acc = Some(match acc {
                None => f,
                Some(x) => x.mul(&f),
            });
        }
        match acc {
            Some(x) => Ok(x),
            None => Ok(self.nu.one_like()),
        }
    }
}

/// The numerator `Σ_w (-1)^{ℓ(w)} (w·λ)(t)`.
pub fn weyl_numerator<S: TorusScalar>(lambda: &Weight, t: &TorusPoint<S>) -> Result<S> {
    let ws = WeylElement::all(lambda.n());
    let terms: Vec<Result<S>> = par_map(&ws, |w| {
        let v = w.dot(lambda).eval(t)?;
        Ok(if w.sign() < 0 { v.neg() } else { v })
    });
    let mut acc: Option<S> = None;
    for term in terms {
        let term = term?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.ok_or_else(|| Error::InvalidInput("empty Weyl group".into()))
}

/// Trace of the irreducible representation of highest weight `λ` at a regular torus point.
pub fn weyl_char_value<S: TorusScalar>(lambda: &Weight, t: &TorusPoint<S>) -> Result<S> {
    if lambda.n() != t.n() {
        return Err(Error::InvalidInput("weight and torus point of different rank".into()));
    }
    if !lambda.is_dominant() {
        return Err(Error::PreconditionViolated("weight is not dominant".into()));
    }
    t.check_regular()?;
    let num = weyl_numerator(lambda, t)?;
    let den = t.weyl_denominator()?;
    Ok(num.mul(&den.inv()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::{q, qf};

    #[test]
    fn rho_matches_root_table() {
        let r1 = rho(1);
        assert_eq!((r1.eps2.clone(), r1.central2), (vec![2], -1));
        let r2 = rho(2);
        assert_eq!(r2.eps2, vec![2, 4]);
        assert!(r2.to_weight().is_none());
    }

    #[test]
    fn dominance_examples() {
        assert!(Weight::zero(2).is_dominant());
        assert!(Weight::new(vec![2, 5], 0).is_dominant());
        assert!(!Weight::new(vec![5, 2], 0).is_dominant());
        assert_eq!(Weight::new(vec![7], 3).pairing(&Root::Long(0)), 7);
    }

    #[test]
    fn group_axioms() {
        for n in 1..=3 {
            let all = WeylElement::all(n);
            assert_eq!(all.len(), (1 << n) * (1..=n).product::<usize>());
            let lam = Weight::new((1..=n as i64).map(|i| 3 * i + 1).collect(), -2);
            for a in &all {
                assert!(a.compose(&a.inverse()).is_identity());
                for b in all.iter().take(8) {
                    assert_eq!(a.compose(b).act(&lam), a.act(&b.act(&lam)));
                }
            }
        }
    }

    #[test]
    fn sign_is_determinant() {
        for n in 1..=3 {
            for w in WeylElement::all(n) {
                let mut inv = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if w.perm[i] > w.perm[j] {
                            inv += 1;
                        }
                    }
                }
                let flips = w.flips.iter().filter(|f| **f).count();
                let det = if (inv + flips) % 2 == 0 { 1 } else { -1 };
                assert_eq!(w.sign(), det);
            }
        }
    }

    #[test]
    fn dot_action_n1() {
        let k = 5;
        let w = WeylElement::new(vec![0], vec![true]).unwrap();
        let lam = Weight::new(vec![k], 0);
        let d = w.dot(&lam);
        // λ - (k+1)·2ε_1 with the root's central part.
        assert_eq!(d, lam.sub(&Weight::new(vec![2], -1).scale(k + 1)));
        let e = lemma73_coeffs(&w, &lam).unwrap();
        assert_eq!(e.coeffs, vec![k + 1]);
    }

    #[test]
    fn lemma73_exhaustive_small() {
        for n in 1..=3 {
            for l in [vec![0i64, 0, 0], vec![1, 1, 4], vec![3, 7, 7], vec![2, 9, 20]] {
                let lam = Weight::new(l[..n].to_vec(), 1);
                for w in WeylElement::all(n).into_iter().filter(|w| !w.is_identity()) {
                    let e = lemma73_coeffs(&w, &lam).unwrap();
                    assert!(e.coeffs.iter().all(|&c| c >= 0));
                }
            }
        }
    }

    #[test]
    fn denominator_identity() {
        // Σ sgn(w) (w·0)(t) = Δ(t).
        let t = TorusPoint::new(vec![q(3), qf(5, 2)], q(7));
        let num = weyl_numerator(&Weight::zero(2), &t).unwrap();
        assert_eq!(num, t.weyl_denominator().unwrap());
    }

    #[test]
    fn trivial_rep_and_invariance() {
        let t = TorusPoint::new(vec![q(2), q(5)], q(3));
        assert_eq!(weyl_char_value(&Weight::zero(2), &t).unwrap(), q(1));
        let lam = Weight::new(vec![1, 3], -1);
        let v = weyl_char_value(&lam, &t).unwrap();
        for w in WeylElement::all(2) {
            let tw = w.act_point(&t).unwrap();
            assert_eq!(weyl_char_value(&lam, &tw).unwrap(), v);
        }
    }

    #[test]
    fn vp_weight_examples() {
        let a = Weight::new(vec![9, 81], 0);
        assert_eq!(vp_weight(&a, &Weight::zero(2), 3).unwrap(), ExtQ::from(2));
        assert_eq!(vp_weight(&a, &a, 3).unwrap(), ExtQ::PosInf);
        assert!(weights_congruent(&Weight::new(vec![1, 13], 0), &Weight::new(vec![1, 1], 0), 3, 1));
        assert!(!weights_congruent(&Weight::new(vec![1, 4], 0), &Weight::new(vec![1, 1], 0), 3, 1));
    }
}
