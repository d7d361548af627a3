//! Dense univariate polynomials (ascending coefficients) and the slope `S(f)`.

use num_traits::{One, Zero};

use super::capped::CappedPadic;
use super::rational::{vp, ExtQ, Q};
use crate::error::Result;

/// Coefficients that know their own p-adic valuation.
pub trait Valued {
    fn valuation_at(&self, p: u64) -> Result<ExtQ>;
}

impl Valued for Q {
    fn valuation_at(&self, p: u64) -> Result<ExtQ> {
        Ok(vp(self, p))
    }
}

impl Valued for CappedPadic {
    fn valuation_at(&self, p: u64) -> Result<ExtQ> {
        debug_assert_eq!(p, self.prime());
        self.valuation()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T> Poly<T> {
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Poly<U> {
        Poly { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl Poly<Q> {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    /// The monomial `X`.
    pub fn x() -> Self {
        Self::new(vec![Q::zero(), Q::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.len().max(o.len());
        Self::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.len().max(o.len());
        Self::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.len() + o.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Q::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// `∏ (X - r)`.
    pub fn from_roots(roots: &[Q]) -> Self {
        roots.iter().fold(Self::one(), |acc, r| {
            acc.mul(&Self::new(vec![-r.clone(), Q::one()]))
        })
    }

    pub fn to_padic(&self, p: u64, prec: u32) -> Poly<CappedPadic> {
        Poly { coeffs: self.coeffs.iter().map(|c| CappedPadic::from_q(c, p, prec)).collect() }
    }
}

impl Poly<CappedPadic> {
    pub fn from_coeffs(coeffs: Vec<CappedPadic>) -> Self {
        Poly { coeffs }
    }

    pub fn eval(&self, x: &CappedPadic) -> CappedPadic {
        let mut acc = CappedPadic::zero(x.prime());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(c);
        }
        acc
    }
}

/// `S(f) = sup { s : v_p(a_i) >= s*i for all i }`.
///
/// `-inf` when the constant term is not integral, `+inf` for the zero polynomial
/// and for integral constants.
pub fn poly_slope<T: Valued>(f: &Poly<T>, p: u64) -> Result<ExtQ> {
    let mut best = ExtQ::PosInf;
    for (i, c) in f.coeffs().iter().enumerate() {
        let v = c.valuation_at(p)?;
        if i == 0 {
            if v < ExtQ::from(0) {
                return Ok(ExtQ::NegInf);
            }
            continue;
        }
        if let ExtQ::Finite(v) = v {
            let s = v / Q::from_integer((i as i64).into());
            best = best.min(ExtQ::Finite(s));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::{q, qf};

    fn poly(cs: &[(i64, i64)]) -> Poly<Q> {
        Poly::new(cs.iter().map(|&(n, d)| qf(n, d)).collect())
    }

    #[test]
    fn arithmetic() {
        let f = Poly::from_roots(&[q(1), q(3)]);
        assert_eq!(f, poly(&[(3, 1), (-4, 1), (1, 1)]));
        assert_eq!(f.eval(&q(3)), q(0));
        assert_eq!(f.derivative(), poly(&[(-4, 1), (2, 1)]));
        assert_eq!(f.pow(2), f.mul(&f));
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn slope_examples() {
        // 1 - X/9 over p = 3: slope -2.
        assert_eq!(poly_slope(&poly(&[(1, 1), (-1, 9)]), 3).unwrap(), ExtQ::from(-2));
        assert_eq!(poly_slope(&Poly::<Q>::zero(), 3).unwrap(), ExtQ::PosInf);
        assert_eq!(poly_slope(&poly(&[(5, 1)]), 3).unwrap(), ExtQ::PosInf);
        assert_eq!(poly_slope(&poly(&[(1, 3), (1, 1)]), 3).unwrap(), ExtQ::NegInf);
        // 9X^2: slope 1.
        assert_eq!(poly_slope(&poly(&[(0, 1), (0, 1), (9, 1)]), 3).unwrap(), ExtQ::from(1));
    }
}
