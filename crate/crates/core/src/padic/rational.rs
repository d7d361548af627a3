//! Exact rationals, p-adic valuations and the extended value line.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

/// `p^k` for a possibly negative exponent.
pub fn p_pow(p: u64, k: i64) -> Q {
    let base = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Q::from_integer(base)
    } else {
        Q::new(BigInt::one(), base)
    }
}

pub fn big_pow(p: u64, k: u32) -> BigInt {
    BigInt::from(p).pow(k)
}

/// Number of times `p` divides a non-zero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (quo, rem) = n.div_rem(&pb);
        if !rem.is_zero() {
            return k;
        }
        n = quo;
        k += 1;
    }
}

/// Point of the extended line `{-inf} ∪ Q ∪ {+inf}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtQ {
    NegInf,
    Finite(Q),
    PosInf,
}

impl ExtQ {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtQ::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, ExtQ::PosInf)
    }

    /// `self >= t` for a finite threshold.
    pub fn ge_q(&self, t: &Q) -> bool {
        match self {
            ExtQ::NegInf => false,
            ExtQ::Finite(x) => x >= t,
            ExtQ::PosInf => true,
        }
    }

    pub fn min(self, other: ExtQ) -> ExtQ {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtQ {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtQ::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtQ::NegInf => write!(f, "-inf"),
            ExtQ::PosInf => write!(f, "+inf"),
            ExtQ::Finite(x) => write!(f, "{}", fmt_q(x)),
        }
    }
}

impl From<Q> for ExtQ {
    fn from(x: Q) -> Self {
        ExtQ::Finite(x)
    }
}

impl From<i64> for ExtQ {
    fn from(x: i64) -> Self {
        ExtQ::Finite(q(x))
    }
}

/// p-adic valuation of a rational; `+inf` at zero.
pub fn vp(x: &Q, p: u64) -> ExtQ {
    if x.is_zero() {
        return ExtQ::PosInf;
    }
    ExtQ::Finite(q(vp_int(x.numer(), p) - vp_int(x.denom(), p)))
}

/// Valuation of a non-zero rational as an integer.
pub fn vp_i64(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(vp_int(x.numer(), p) - vp_int(x.denom(), p))
    }
}

pub fn is_p_integral(x: &Q, p: u64) -> bool {
    vp(x, p) >= ExtQ::from(0)
}

/// `a ≡ b (mod p^t)` for rationals.
pub fn congruent(a: &Q, b: &Q, t: &Q, p: u64) -> bool {
    vp(&(a - b), p).ge_q(t)
}

/// Render `n` or `n/d`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `n`, `n/d` or a plain decimal like `0.25`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((i, frac)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let ip: BigInt = if i.is_empty() || i == "-" {
            BigInt::zero()
        } else {
            i.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let fp: BigInt = frac.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let f = Q::new(fp, den);
        let ipq = Q::from_integer(ip.abs());
        let mag = ipq + f;
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

pub fn q_to_f64(x: &Q) -> f64 {
    let n = x.numer().to_f64().unwrap_or(f64::NAN);
    let d = x.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // Very large parts: scale through the bit length.
        let nb = x.numer().bits() as i64;
        let db = x.denom().bits() as i64;
        let shift = (nb - db) as i32;
        let approx = (x * p_pow(2, -(shift as i64))).to_f64().unwrap_or(f64::NAN);
        approx * 2f64.powi(shift)
    }
}

/// Ceiling of a rational as `i64`.
pub fn ceil_i64(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().expect("ceiling fits in i64")
}

pub fn floor_i64(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("floor fits in i64")
}

/// Inverse of `a` modulo `m` (gcd must be one).
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Reduce a p-integral rational to an integer modulo `p^k`.
pub fn residue(x: &Q, p: u64, k: u32) -> Result<BigInt> {
    if !is_p_integral(x, p) {
        return Err(Error::NotIntegral(fmt_q(x)));
    }
    let m = big_pow(p, k);
    let inv = mod_inverse(x.denom(), &m).ok_or_else(|| Error::NotIntegral(fmt_q(x)))?;
    Ok((x.numer() * inv).mod_floor(&m))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{p} is not prime")))
    }
}

/// Serde helpers storing rationals as `"n/d"` strings.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&fmt_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_q(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations_of_rationals() {
        assert_eq!(vp(&qf(18, 5), 3), ExtQ::from(2));
        assert_eq!(vp(&qf(5, 27), 3), ExtQ::from(-3));
        assert_eq!(vp(&q(0), 3), ExtQ::PosInf);
        assert_eq!(vp(&q(7), 3), ExtQ::from(0));
    }

    #[test]
    fn ext_order() {
        assert!(ExtQ::NegInf < ExtQ::from(-100));
        assert!(ExtQ::from(100) < ExtQ::PosInf);
        assert!(ExtQ::PosInf.ge_q(&q(5)));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/6").unwrap(), qf(1, 2));
        assert_eq!(parse_q("-0.25").unwrap(), qf(-1, 4));
        assert_eq!(parse_q("12").unwrap(), q(12));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn residues() {
        // 1/2 mod 9 = 5
        assert_eq!(residue(&qf(1, 2), 3, 2).unwrap(), BigInt::from(5));
        assert!(residue(&qf(1, 3), 3, 2).is_err());
    }
}
