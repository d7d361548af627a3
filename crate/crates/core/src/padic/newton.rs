//! Newton polygons and Hensel lifting along simple segments.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::capped::CappedPadic;
use super::poly::{Poly, Valued};
use super::rational::{big_pow, fmt_q, mod_inverse, p_pow, ExtQ, Q};
use crate::error::{Error, Result};

/// One edge of the lower convex hull.
///
/// `slope` is reported as the valuation of the roots on this edge, i.e. the
/// negated geometric slope, so segments are listed in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(with = "super::rational::serde_q")]
    pub slope: Q,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    pub segments: Vec<Segment>,
    /// Multiplicity of the root `0` (lowest index with a non-zero coefficient).
    pub zero_roots: usize,
    pub degree: usize,
}

impl NewtonPolygon {
    /// Root valuations with multiplicity, in increasing order (finite part only).
    pub fn slopes_with_multiplicity(&self) -> Vec<Q> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat(s.slope.clone()).take(s.length))
            .collect()
    }
}

fn cross(o: &(i64, Q), a: &(i64, Q), b: &(i64, Q)) -> Q {
    // (a - o) x (b - o); non-positive means a is not strictly below the chord.
    let ax = Q::from_integer((a.0 - o.0).into());
    let bx = Q::from_integer((b.0 - o.0).into());
    ax * (&b.1 - &o.1) - bx * (&a.1 - &o.1)
}

/// Lower convex hull of `(i, v_p(a_i))` over the non-zero coefficients.
pub fn newton_polygon<T: Valued>(f: &Poly<T>, p: u64) -> Result<NewtonPolygon> {
    let mut pts: Vec<(i64, Q)> = Vec::new();
    for (i, c) in f.coeffs().iter().enumerate() {
        match c.valuation_at(p)? {
            ExtQ::Finite(v) => pts.push((i as i64, v)),
            ExtQ::PosInf => {}
            ExtQ::NegInf => unreachable!("coefficient valuations are never -inf"),
        }
    }
    if pts.is_empty() {
        return Err(Error::InvalidInput("Newton polygon of the zero polynomial".into()));
    }
    let degree = pts.last().unwrap().0 as usize;
    let zero_roots = pts[0].0 as usize;
    let mut hull: Vec<(i64, Q)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &pt) <= Q::zero() {
            hull.pop();
        }
        hull.push(pt);
    }
    let mut segments: Vec<Segment> = hull
        .windows(2)
        .map(|w| {
            let len = (w[1].0 - w[0].0) as usize;
            let geo = (&w[1].1 - &w[0].1) / Q::from_integer((len as i64).into());
            Segment { slope: -geo, length: len }
        })
        .collect();
    segments.reverse();
    Ok(NewtonPolygon { segments, zero_roots, degree })
}

fn eval_mod(h: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in h.iter().rev() {
        acc = (acc * x + c).mod_floor(m);
    }
    acc
}

fn deriv(h: &[BigInt]) -> Vec<BigInt> {
    h.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Lift the unique root of valuation `seed` to relative precision `target`.
///
/// Requires a Newton segment of that slope with length one.
pub fn hensel_root(f: &Poly<CappedPadic>, seed: &Q, target: u32) -> Result<CappedPadic> {
    let p = f
        .coeffs()
        .first()
        .map(|c| c.prime())
        .ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
    let np = newton_polygon(f, p)?;
    let seg = np
        .segments
        .iter()
        .find(|s| &s.slope == seed)
        .ok_or_else(|| Error::NoSimpleSegment(fmt_q(seed)))?;
    if seg.length != 1 || !seed.is_integer() {
        return Err(Error::NoSimpleSegment(fmt_q(seed)));
    }
    let s = seed.to_integer().to_i64().expect("slope fits in i64");
    // mu = min_i v(a_i) + i*s
    let mut mu: Option<i64> = None;
    for (i, c) in f.coeffs().iter().enumerate() {
        if let ExtQ::Finite(v) = c.valuation()? {
            let w = v.to_integer().to_i64().unwrap() + i as i64 * s;
            mu = Some(mu.map_or(w, |m: i64| m.min(w)));
        }
    }
    let mu = mu.unwrap();
    let modulus = big_pow(p, target);
    // h(Y) = f(p^s Y) / p^mu, integral, known modulo p^target.
    let mut h = Vec::with_capacity(f.len());
    for (i, c) in f.coeffs().iter().enumerate() {
        let scaled = c.mul_q(&p_pow(p, i as i64 * s - mu));
        match scaled.abs_precision() {
            None => h.push(BigInt::zero()),
            Some(a) if a < target as i64 => {
                return Err(Error::InsufficientPrecision(format!(
                    "coefficient {i} known to p^{a}, need p^{target}"
                )))
            }
            Some(_) => {
                let r = scaled.to_q();
                debug_assert!(r.is_integer());
                h.push(r.to_integer().mod_floor(&modulus));
            }
        }
    }
    let dh = deriv(&h);
    let pb = BigInt::from(p);
    if p > 1_000_000 {
        return Err(Error::InvalidInput("residue search limited to p <= 10^6".into()));
    }
    let mut y = (1..p)
        .map(BigInt::from)
        .find(|r| eval_mod(&h, r, &pb).is_zero() && !eval_mod(&dh, r, &pb).is_zero())
        .ok_or_else(|| Error::NoSimpleSegment(fmt_q(seed)))?;
    let mut k = 1u32;
    while k < target {
        k = (2 * k).min(target);
        let m = big_pow(p, k);
        let hv = eval_mod(&h, &y, &m);
        let dv = eval_mod(&dh, &y, &m);
        let inv = mod_inverse(&dv, &m).expect("derivative is a unit");
        y = (&y - hv * inv).mod_floor(&m);
    }
    debug_assert!(eval_mod(&h, &y, &modulus).is_zero());
    Ok(CappedPadic::from_q(&(p_pow(p, s) * Q::from_integer(y)), p, target))
}

/// Convenience wrapper for exact rational polynomials.
pub fn hensel_root_exact(f: &Poly<Q>, p: u64, seed: &Q, target: u32) -> Result<CappedPadic> {
    hensel_root(&f.to_padic(p, target + 8), seed, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::q;

    #[test]
    fn spec_example_polygon() {
        // (T - 1)(T - 3) over p = 3.
        let f = Poly::from_roots(&[q(1), q(3)]);
        let np = newton_polygon(&f, 3).unwrap();
        assert_eq!(
            np.segments,
            vec![Segment { slope: q(0), length: 1 }, Segment { slope: q(1), length: 1 }]
        );
        let r = hensel_root_exact(&f, 3, &q(1), 20).unwrap();
        assert!(r.congruent(&CappedPadic::from_i64(3, 3, 20), &q(21)).unwrap());
    }

    #[test]
    fn monomial_has_no_segments() {
        let f = Poly::new(vec![q(0), q(0), q(1)]);
        let np = newton_polygon(&f, 3).unwrap();
        assert!(np.segments.is_empty());
        assert_eq!(np.zero_roots, 2);
        assert!(matches!(hensel_root_exact(&f, 3, &q(0), 10), Err(Error::NoSimpleSegment(_))));
    }

    #[test]
    fn double_segment_refused() {
        // (T-1)(T-4) over p = 3: both roots are units, one segment of length 2.
        let f = Poly::from_roots(&[q(1), q(4)]);
        assert!(matches!(hensel_root_exact(&f, 3, &q(0), 10), Err(Error::NoSimpleSegment(_))));
    }

    #[test]
    fn lift_is_stable_under_more_precision() {
        // x^2 - 7 over p = 3 has a unit root congruent to 1 mod 3 (7 = 1 mod 3).
        // Put a p-adic factor on it to separate the roots: (x^2 - 7)(x - 9).
        let f = Poly::new(vec![q(-7), q(0), q(1)]).mul(&Poly::new(vec![q(-9), q(1)]));
        let np = newton_polygon(&f, 3).unwrap();
        assert_eq!(np.segments[0], Segment { slope: q(0), length: 2 });
        let r1 = hensel_root_exact(&f, 3, &q(2), 16).unwrap();
        let r2 = hensel_root_exact(&f, 3, &q(2), 32).unwrap();
        assert!(r1.congruent(&r2, &q(18)).unwrap());
        assert!(r2.congruent(&CappedPadic::from_i64(9, 3, 32), &q(34)).unwrap());
    }
}
