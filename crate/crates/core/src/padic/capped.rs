//! Capped-relative-precision p-adic numbers.
//!
//! A value is stored as `p^val * unit` with the unit known modulo `p^prec`.
//! `prec == 0` encodes a value only known to be `0 mod p^val`; asking for its
//! valuation yields `InsufficientPrecision`.  Exact zero is a separate state.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::rational::{big_pow, fmt_q, mod_inverse, p_pow, vp_int, ExtQ, Q};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 64;
pub const DEFAULT_PRECISION_CAP: u32 = 4096;
pub const PRECISION_CAP_ENV: &str = "MODPC_PRECISION_CAP";

/// Precision ceiling for the doubling protocol; the environment overrides the default.
pub fn precision_cap() -> u32 {
    std::env::var(PRECISION_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_PRECISION_CAP)
}

/// Run `f` at precision `start`, doubling on `InsufficientPrecision` until the cap.
pub fn with_precision<T>(start: u32, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
    let cap = precision_cap();
    let mut n = start.max(1).min(cap);
    loop {
        match f(n) {
            Err(Error::InsufficientPrecision(msg)) => {
                if n >= cap {
                    return Err(Error::InsufficientPrecision(format!("{msg} (cap {cap} reached)")));
                }
                n = (n * 2).min(cap);
            }
            other => return other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Zero,
    Approx { val: i64, unit: BigInt, prec: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CappedPadic {
    p: u64,
    repr: Repr,
}

impl CappedPadic {
    pub fn zero(p: u64) -> Self {
        CappedPadic { p, repr: Repr::Zero }
    }

    /// Value known only modulo `p^abs`.
    pub fn vague(p: u64, abs: i64) -> Self {
        CappedPadic {
            p,
            repr: Repr::Approx { val: abs, unit: BigInt::zero(), prec: 0 },
        }
    }

    pub fn from_q(x: &Q, p: u64, prec: u32) -> Self {
        if x.is_zero() {
            return Self::zero(p);
        }
        let vn = vp_int(x.numer(), p);
        let vd = vp_int(x.denom(), p);
        let pb = BigInt::from(p);
        let n = x.numer() / pb.pow(vn as u32);
        let d = x.denom() / pb.pow(vd as u32);
        let m = big_pow(p, prec);
        let unit = if prec == 0 {
            BigInt::zero()
        } else {
            (n * mod_inverse(&d, &m).expect("unit denominator")).mod_floor(&m)
        };
        CappedPadic { p, repr: Repr::Approx { val: vn - vd, unit, prec } }
    }

    pub fn from_i64(x: i64, p: u64, prec: u32) -> Self {
        Self::from_q(&Q::from_integer(BigInt::from(x)), p, prec)
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_i64(1, p, prec)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// Exact valuation, or `InsufficientPrecision` when the value is indistinguishable from zero.
    pub fn valuation(&self) -> Result<ExtQ> {
        match &self.repr {
            Repr::Zero => Ok(ExtQ::PosInf),
            Repr::Approx { prec: 0, val, .. } => Err(Error::InsufficientPrecision(format!(
                "value is O({}^{val})",
                self.p
            ))),
            Repr::Approx { val, .. } => Ok(ExtQ::from(*val)),
        }
    }

    /// Certified lower bound on the valuation.
    pub fn valuation_lower_bound(&self) -> ExtQ {
        match &self.repr {
            Repr::Zero => ExtQ::PosInf,
            Repr::Approx { val, .. } => ExtQ::from(*val),
        }
    }

    /// Absolute precision (`None` for exact zero).
    pub fn abs_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Approx { val, prec, .. } => Some(val + *prec as i64),
        }
    }

    pub fn rel_precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Approx { prec, .. } => Some(*prec),
        }
    }

    pub fn unit(&self) -> Option<&BigInt> {
        match &self.repr {
            Repr::Approx { unit, prec, .. } if *prec > 0 => Some(unit),
            _ => None,
        }
    }

    /// The canonical rational representative `p^val * unit`.
    pub fn to_q(&self) -> Q {
        match &self.repr {
            Repr::Zero => Q::zero(),
            Repr::Approx { val, unit, .. } => p_pow(self.p, *val) * Q::from_integer(unit.clone()),
        }
    }

    /// Drop relative precision to at most `prec`.
    pub fn truncate(&self, prec: u32) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Approx { val, unit, prec: pr } => {
                let np = (*pr).min(prec);
                CappedPadic {
                    p: self.p,
                    repr: Repr::Approx {
                        val: *val,
                        unit: unit.mod_floor(&big_pow(self.p, np)),
                        prec: np,
                    },
                }
            }
        }
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing p-adic numbers for different primes");
    }

    fn parts(&self) -> (i64, BigInt, u32) {
        match &self.repr {
            Repr::Zero => unreachable!(),
            Repr::Approx { val, unit, prec } => (*val, unit.clone(), *prec),
        }
    }

    fn normalise(p: u64, vmin: i64, s: BigInt, abs: i64) -> Self {
        let k = (abs - vmin) as u32;
        let m = big_pow(p, k);
        let s = s.mod_floor(&m);
        if s.is_zero() {
            return Self::vague(p, abs);
        }
        let w = vp_int(&s, p);
        let prec = k - w as u32;
        let unit = (s / big_pow(p, w as u32)).mod_floor(&big_pow(p, prec));
        CappedPadic { p, repr: Repr::Approx { val: vmin + w, unit, prec } }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        self.check_prime(o);
        if self.is_exact_zero() {
            return o.clone();
        }
        if o.is_exact_zero() {
            return self.clone();
        }
        let (v1, u1, p1) = self.parts();
        let (v2, u2, p2) = o.parts();
        let abs = (v1 + p1 as i64).min(v2 + p2 as i64);
        // Terms already below the absolute precision contribute nothing.
        let live: Vec<(i64, BigInt)> =
            [(v1, u1), (v2, u2)].into_iter().filter(|(v, _)| *v < abs).collect();
        let Some(vmin) = live.iter().map(|(v, _)| *v).min() else {
            return Self::vague(self.p, abs);
        };
        let pb = BigInt::from(self.p);
        let s: BigInt = live.into_iter().map(|(v, u)| u * pb.pow((v - vmin) as u32)).sum();
        Self::normalise(self.p, vmin, s, abs)
    }

    pub fn neg_ref(&self) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Approx { val, unit, prec } => CappedPadic {
                p: self.p,
                repr: Repr::Approx {
                    val: *val,
                    unit: (-unit).mod_floor(&big_pow(self.p, *prec)),
                    prec: *prec,
                },
            },
        }
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        self.check_prime(o);
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::zero(self.p);
        }
        let (v1, u1, p1) = self.parts();
        let (v2, u2, p2) = o.parts();
        let prec = p1.min(p2);
        if prec == 0 {
            return Self::vague(self.p, v1 + v2);
        }
        CappedPadic {
            p: self.p,
            repr: Repr::Approx {
                val: v1 + v2,
                unit: (u1 * u2).mod_floor(&big_pow(self.p, prec)),
                prec,
            },
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero => Err(Error::InvalidInput("division by exact zero".into())),
            Repr::Approx { prec: 0, val, .. } => Err(Error::InsufficientPrecision(format!(
                "cannot invert O({}^{val})",
                self.p
            ))),
            Repr::Approx { val, unit, prec } => {
                let m = big_pow(self.p, *prec);
                let inv = mod_inverse(unit, &m).expect("unit is invertible");
                Ok(CappedPadic { p: self.p, repr: Repr::Approx { val: -val, unit: inv, prec: *prec } })
            }
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul_ref(&o.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul_ref(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        Ok(acc.unwrap_or_else(|| {
            let prec = self.rel_precision().unwrap_or(DEFAULT_PRECISION).max(1);
            Self::one(self.p, prec)
        }))
    }

    pub fn mul_q(&self, x: &Q) -> Self {
        let prec = self.rel_precision().unwrap_or(DEFAULT_PRECISION).max(1);
        // Exact rational factors never limit precision.
        let big = prec + 64;
        self.mul_ref(&Self::from_q(x, self.p, big))
    }

    /// Decide `self ≡ other (mod p^t)`; undecidable cases raise `InsufficientPrecision`.
    pub fn congruent(&self, other: &Self, t: &Q) -> Result<bool> {
        let d = self.sub_ref(other);
        match &d.repr {
            Repr::Zero => Ok(true),
            Repr::Approx { val, prec: 0, .. } => {
                if Q::from_integer(BigInt::from(*val)) >= *t {
                    Ok(true)
                } else {
                    Err(Error::InsufficientPrecision(format!(
                        "difference is O({}^{val}), cannot decide modulo p^{}",
                        self.p,
                        fmt_q(t)
                    )))
                }
            }
            Repr::Approx { val, .. } => Ok(Q::from_integer(BigInt::from(*val)) >= *t),
        }
    }

    /// True iff `self` is a unit (valuation exactly zero).
    pub fn is_unit(&self) -> Result<bool> {
        Ok(self.valuation()? == ExtQ::from(0))
    }
}

impl fmt::Display for CappedPadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Approx { val, prec: 0, .. } => write!(f, "O({}^{})", self.p, val),
            Repr::Approx { val, unit, prec } => {
                write!(f, "{}^{} * {} + O({}^{})", self.p, val, unit, self.p, val + *prec as i64)
            }
        }
    }
}

impl<'a> Add<&'a CappedPadic> for &'a CappedPadic {
    type Output = CappedPadic;
    fn add(self, o: &CappedPadic) -> CappedPadic {
        self.add_ref(o)
    }
}

impl<'a> Sub<&'a CappedPadic> for &'a CappedPadic {
    type Output = CappedPadic;
    fn sub(self, o: &CappedPadic) -> CappedPadic {
        self.sub_ref(o)
    }
}

impl<'a> Mul<&'a CappedPadic> for &'a CappedPadic {
    type Output = CappedPadic;
    fn mul(self, o: &CappedPadic) -> CappedPadic {
        self.mul_ref(o)
    }
}

impl Neg for &CappedPadic {
    type Output = CappedPadic;
    fn neg(self) -> CappedPadic {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::{q, qf};

    #[test]
    fn roundtrip_and_valuation() {
        let x = CappedPadic::from_q(&qf(18, 7), 3, 10);
        assert_eq!(x.valuation().unwrap(), ExtQ::from(2));
        assert_eq!(x.abs_precision(), Some(12));
        // 18/7 - representative is divisible by 3^12
        let d = x.to_q() - qf(18, 7);
        assert!(crate::padic::rational::vp(&d, 3).ge_q(&q(12)));
    }

    #[test]
    fn cancellation_loses_precision() {
        let a = CappedPadic::from_q(&q(1), 3, 5);
        let b = CappedPadic::from_q(&q(1 + 81), 3, 5);
        let d = a.sub_ref(&b);
        // 1 - 82 = -81: valuation 4 known, relative precision 1.
        assert_eq!(d.valuation().unwrap(), ExtQ::from(4));
        assert_eq!(d.rel_precision(), Some(1));
        let e = a.sub_ref(&a);
        assert!(e.valuation().is_err());
        assert!(e.congruent(&CappedPadic::zero(3), &q(5)).unwrap());
        assert!(e.congruent(&CappedPadic::zero(3), &q(6)).is_err());
    }

    #[test]
    fn inverse_and_power() {
        let x = CappedPadic::from_q(&qf(6, 5), 3, 20);
        let y = x.inv().unwrap();
        let one = x.mul_ref(&y);
        assert!(one.congruent(&CappedPadic::one(3, 20), &q(20)).unwrap());
        let x3 = x.pow(3).unwrap();
        let exact = CappedPadic::from_q(&qf(216, 125), 3, 20);
        assert!(x3.congruent(&exact, &q(23)).unwrap());
        let xm2 = x.pow(-2).unwrap();
        assert_eq!(xm2.valuation().unwrap(), ExtQ::from(-2));
    }

    #[test]
    fn retry_doubles_until_success() {
        let mut seen = vec![];
        let r = with_precision(64, |n| {
            seen.push(n);
            if n < 256 {
                Err(Error::InsufficientPrecision("more".into()))
            } else {
                Ok(n)
            }
        });
        assert_eq!(r.unwrap(), 256);
        assert_eq!(seen, vec![64, 128, 256]);
    }
}
