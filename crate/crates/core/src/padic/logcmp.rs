//! Exact arithmetic on thresholds of the form `q + r * log_p(M)`.
//!
//! Comparisons clear denominators and compare integer powers `p^a` and `M^b`,
//! so no floating point enters a verdict.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::rational::{fmt_q, q, q_to_f64, Q};

/// Exponent size beyond which we refuse to materialise powers.
const MAX_EXACT_EXPONENT: u64 = 200_000;

/// `log_p M` when it is rational (i.e. `M` is a power of `p`).
pub fn log_rational(p: u64, m: u64) -> Option<Q> {
    let mut k = 0i64;
    let mut x = m;
    if x == 0 {
        return None;
    }
    while x % p == 0 {
        x /= p;
        k += 1;
    }
    (x == 1).then(|| q(k))
}

/// Sign of `x - r * log_p M`.
fn sign_vs_log(x: &Q, r: &Q, p: u64, m: u64) -> Ordering {
    if r.is_zero() || m == 1 {
        return x.cmp(&Q::zero());
    }
    if let Some(l) = log_rational(p, m) {
        return x.cmp(&(r * l));
    }
    let d = x.denom().lcm(r.denom());
    let a = (x.numer() * (&d / x.denom())).clone();
    let b = (r.numer() * (&d / r.denom())).clone();
    // Compare p^a against M^b.
    let fa = a.to_f64().unwrap_or(f64::INFINITY) * (p as f64).ln();
    let fb = b.to_f64().unwrap_or(f64::INFINITY) * (m as f64).ln();
    let scale = fa.abs().max(fb.abs()).max(1.0);
    if fa.is_finite() && fb.is_finite() && (fa - fb).abs() > 1e-9 * scale {
        // The gap is far larger than any rounding error in two logarithms.
        return fa.partial_cmp(&fb).unwrap();
    }
    let ua = a.abs().to_u64().filter(|&v| v <= MAX_EXACT_EXPONENT);
    let ub = b.abs().to_u64().filter(|&v| v <= MAX_EXACT_EXPONENT);
    let (ua, ub) = match (ua, ub) {
        (Some(x), Some(y)) => (x as u32, y as u32),
        _ => panic!("log threshold comparison with exponents beyond {MAX_EXACT_EXPONENT}"),
    };
    let pb = BigInt::from(p);
    let mb = BigInt::from(m);
    // p^a >= M^b  <=>  p^{a+} M^{b-} >= p^{a-} M^{b+}
    let (mut lhs, mut rhs) = (BigInt::one(), BigInt::one());
    if a.is_positive() {
        lhs *= pb.pow(ua);
    } else {
        rhs *= pb.pow(ua);
    }
    if b.is_positive() {
        rhs *= mb.pow(ub);
    } else {
        lhs *= mb.pow(ub);
    }
    lhs.cmp(&rhs)
}

/// Decide `v >= q + r * log_p M` exactly.
pub fn vp_compare_log_threshold(v: &Q, q0: &Q, r: &Q, m: u64, p: u64) -> bool {
    sign_vs_log(&(v - q0), r, p, m) != Ordering::Less
}

/// The quantity `q + r * log_p(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogExpr {
    pub q: Q,
    pub r: Q,
    pub p: u64,
    pub m: u64,
}

impl LogExpr {
    pub fn rational(x: Q, p: u64) -> Self {
        LogExpr { q: x, r: Q::zero(), p, m: 1 }
    }

    /// `log_p M` itself.
    pub fn log(p: u64, m: u64) -> Self {
        LogExpr { q: Q::zero(), r: Q::one(), p, m }
    }

    pub fn new(q0: Q, r: Q, p: u64, m: u64) -> Self {
        LogExpr { q: q0, r, p, m }
    }

    fn same_base(&self, o: &Self) -> bool {
        self.p == o.p && (self.m == o.m || self.r.is_zero() || o.r.is_zero())
    }

    fn merged_m(&self, o: &Self) -> u64 {
        if self.r.is_zero() {
            o.m
        } else {
            self.m
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.same_base(o), "adding logarithms to different bases/arguments");
        LogExpr { q: &self.q + &o.q, r: &self.r + &o.r, p: self.p, m: self.merged_m(o) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        LogExpr { q: -&self.q, r: -&self.r, p: self.p, m: self.m }
    }

    pub fn add_q(&self, x: &Q) -> Self {
        LogExpr { q: &self.q + x, ..self.clone() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        LogExpr { q: &self.q * c, r: &self.r * c, p: self.p, m: self.m }
    }

    /// Rational value when the logarithm is rational.
    pub fn as_rational(&self) -> Option<Q> {
        if self.r.is_zero() || self.m == 1 {
            return Some(self.q.clone());
        }
        log_rational(self.p, self.m).map(|l| &self.q + &self.r * l)
    }

    /// Exact comparison of a rational with this expression.
    pub fn cmp_q(&self, v: &Q) -> Ordering {
        // sign(v - q - r l)
        sign_vs_log(&(v - &self.q), &self.r, self.p, self.m).reverse()
    }

    /// `v >= self`.
    pub fn le_q(&self, v: &Q) -> bool {
        self.cmp_q(v) != Ordering::Greater
    }

    /// `v > self`.
    pub fn lt_q(&self, v: &Q) -> bool {
        self.cmp_q(v) == Ordering::Less
    }

    pub fn cmp_expr(&self, o: &Self) -> Ordering {
        let d = self.sub(o);
        // sign of d.q + d.r l = sign(d.q - (-d.r) l)
        sign_vs_log(&d.q, &(-&d.r), d.p, d.m)
    }

    pub fn to_f64(&self) -> f64 {
        let l = if self.m <= 1 { 0.0 } else { (self.m as f64).ln() / (self.p as f64).ln() };
        q_to_f64(&self.q) + q_to_f64(&self.r) * l
    }

    /// A rational `u` with `self <= u <= self + eps` (bisection on exact comparisons).
    pub fn upper_rational(&self, eps: &Q) -> Q {
        if let Some(x) = self.as_rational() {
            return x;
        }
        let guess = self.to_f64().floor() as i64;
        let mut lo = q(guess - 1);
        let mut hi = q(guess + 2);
        while self.cmp_q(&lo) != Ordering::Greater {
            lo -= q(1);
        }
        while self.cmp_q(&hi) == Ordering::Greater {
            hi += q(1);
        }
        while &hi - &lo > *eps {
            let mid = (&lo + &hi) / q(2);
            if self.cmp_q(&mid) == Ordering::Greater {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// A rational `u` with `self - eps <= u <= self`.
    pub fn lower_rational(&self, eps: &Q) -> Q {
        -self.neg().upper_rational(eps)
    }
}

impl fmt::Display for LogExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r.is_zero() || self.m == 1 {
            return write!(f, "{}", fmt_q(&self.q));
        }
        write!(f, "{} + {}*log_{}({})", fmt_q(&self.q), fmt_q(&self.r), self.p, self.m)
    }
}

impl Serialize for LogExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::qf;

    #[test]
    fn rational_logs() {
        assert_eq!(log_rational(3, 27), Some(q(3)));
        assert_eq!(log_rational(3, 6), None);
        assert!(vp_compare_log_threshold(&q(3), &q(1), &q(1), 9, 3));
        assert!(!vp_compare_log_threshold(&q(2), &q(1), &q(1), 27, 3));
    }

    #[test]
    fn irrational_logs() {
        // log_3 4 = 1.2618...
        let l = LogExpr::log(3, 4);
        assert_eq!(l.cmp_q(&qf(126, 100)), Ordering::Greater);
        assert_eq!(l.cmp_q(&qf(127, 100)), Ordering::Less);
        let u = l.upper_rational(&qf(1, 1000));
        assert!(l.le_q(&u) && &u - qf(1, 1000) <= qf(12619, 10000));
        let lo = l.lower_rational(&qf(1, 1000));
        assert!(!l.lt_q(&lo));
    }

    #[test]
    fn near_ties_fall_back_to_integers() {
        // 2 * log_2 3 vs log_2 9: exactly equal.
        assert!(vp_compare_log_threshold(&q(0), &q(0), &q(1), 9, 2)
            == (LogExpr::log(2, 9).cmp_q(&q(0)) != Ordering::Greater));
        let a = LogExpr::new(q(0), q(2), 2, 3);
        let b = LogExpr::new(q(0), q(1), 2, 9);
        // Different arguments cannot be added; compare via floats of each.
        assert!((a.to_f64() - b.to_f64()).abs() < 1e-12);
    }
}
