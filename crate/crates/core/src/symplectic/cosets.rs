//! Coset representatives `V_s` for `(s^-1 ℐ s ∩ ℐ) \ ℐ` and the product identity
//! `V_{s1 s2} = Ad(s2^-1)(V_{s1}) V_{s2}`.
//!
//! Cosets of elements of the negative unipotent radical are compared through a
//! canonical form: conjugate by `s`, reorder the basis so the radical is lower
//! unitriangular, then reduce each sub-diagonal entry modulo `Z_p` by integral
//! row operations.  Two elements share a coset iff the reduced forms agree.

use std::collections::HashSet;

use serde::Serialize;

use super::intmat::IntMatrix;
use super::{negative_roots, t_plus_member, Root, TorusElement};
use crate::error::{Error, Result};
use crate::exec::par_map as map_vec;
use crate::padic::rational::vp_i64;

/// Enumeration ceiling for desk-scale runs.
pub const MAX_ENUMERATION: u128 = 50_000_000;

#[derive(Clone, Debug)]
pub struct CosetSpace {
    pub n: usize,
    pub p: u64,
    /// `v_p` of the diagonal of `s`.
    pub d: Vec<i64>,
    /// Negative roots in table order with `k_α = -v_p(α(s))`.
    pub params: Vec<(Root, u32)>,
}

fn ipow(p: u64, k: u32) -> i128 {
    (p as i128).pow(k)
}

impl CosetSpace {
    pub fn new(s: &TorusElement, p: u64) -> Result<Self> {
        if !t_plus_member(s, p) {
            return Err(Error::NotPlus);
        }
        let n = s.n;
        let params = negative_roots(n)
            .into_iter()
            .map(|r| {
                let v = vp_i64(&r.value(s), p).expect("non-zero");
                (r, (-v) as u32)
            })
            .collect();
        Ok(CosetSpace { n, p, d: s.valuations(p), params })
    }

    /// `|V_s| = prod_α p^{k_α}`.
    pub fn cardinality(&self) -> u128 {
        self.params.iter().map(|&(_, k)| ipow(self.p, k) as u128).product()
    }

    /// The element with the given parameter tuple: ordered product of `1 + t_α X_α`.
    pub fn element(&self, ts: &[u64]) -> IntMatrix {
        let mut g = IntMatrix::identity(2 * self.n);
        for ((r, _), &t) in self.params.iter().zip(ts) {
            g.mul_unipotent(&r.entries(self.n), t as i128);
        }
        g
    }

    /// Inverse of [`Self::element`]: reversed product of `1 - t_α X_α`.
    pub fn element_inverse(&self, ts: &[u64]) -> IntMatrix {
        let mut g = IntMatrix::identity(2 * self.n);
        for ((r, _), &t) in self.params.iter().zip(ts).rev() {
            g.mul_unipotent(&r.entries(self.n), -(t as i128));
        }
        g
    }

    /// Mixed-radix decoding of an index into a parameter tuple.
    pub fn params_of(&self, mut idx: u128) -> Vec<u64> {
        self.params
            .iter()
            .map(|&(_, k)| {
                let base = ipow(self.p, k) as u128;
                let t = idx % base;
                idx /= base;
                t as u64
            })
            .collect()
    }

    pub fn enumerate(&self) -> Result<Vec<Vec<u64>>> {
        let card = self.cardinality();
        if card > MAX_ENUMERATION {
            return Err(Error::PreconditionViolated(format!("|V_s| = {card} exceeds enumeration cap")));
        }
        Ok((0..card).map(|i| self.params_of(i)).collect())
    }

    fn order(&self) -> Vec<usize> {
        let n = self.n;
        (0..n).rev().chain(n..2 * n).collect()
    }

    /// Canonical key of the coset `(s^-1 ℐ s ∩ ℐ) g` for `g` in the negative radical.
    pub fn key(&self, g: &IntMatrix) -> Result<u128> {
        canonical_key(g, &self.d, &self.order(), self.p)
    }
}

fn canonical_key(g: &IntMatrix, d: &[i64], order: &[usize], p: u64) -> Result<u128> {
    let m = order.len();
    let mut kmax = 0i64;
    for a in 0..m {
        for b in 0..a {
            kmax = kmax.max(d[order[b]] - d[order[a]]);
        }
    }
    let pk = ipow(p, kmax as u32);
    let mut y = vec![0i128; m * m];
    for a in 0..m {
        for b in 0..m {
            let (i, j) = (order[a], order[b]);
            let v = g.get(i, j);
            if b > a && v != 0 {
                return Err(Error::InvalidInput("element is not in the negative radical".into()));
            }
            if a == b && v != 1 {
                return Err(Error::InvalidInput("element is not unipotent".into()));
            }
            if b <= a && v != 0 {
                let e = kmax + d[i] - d[j];
                if e < 0 {
                    return Err(Error::InvalidInput("entry below the lattice".into()));
                }
                y[a * m + b] = v * ipow(p, e as u32);
            }
        }
    }
    for a in 1..m {
        for b in (0..a).rev() {
            let qt = y[a * m + b].div_euclid(pk);
            if qt != 0 {
                for c in 0..=b {
                    y[a * m + c] -= qt * y[b * m + c];
                }
            }
        }
    }
    let bits = 128 - (pk.max(1) as u128).leading_zeros();
    let count = m * (m - 1) / 2;
    if count as u32 * bits > 128 {
        return Err(Error::PreconditionViolated("coset key does not fit in 128 bits".into()));
    }
    let mut key: u128 = 0;
    for a in 1..m {
        for b in 0..a {
            key = (key << bits) | y[a * m + b] as u128;
        }
    }
    Ok(key)
}

/// Equation-(3)-style test: `w v^-1 ∈ s^-1 ℐ s ∩ ℐ` via entry valuations.
pub fn same_coset_entrywise(space: &CosetSpace, g: &IntMatrix) -> bool {
    let n = space.n;
    let divisible = |x: i128, k: u32| x % ipow(space.p, k) == 0;
    for &(r, k) in &space.params {
        for (row, col, _) in r.entries(n) {
            if !divisible(g.get(row, col), k) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinctnessReport {
    pub cardinality: u128,
    pub predicted: u128,
    pub distinct_keys: usize,
    pub pairwise_checked: bool,
}

/// Enumerate `V_s` and certify that its elements lie in pairwise distinct cosets.
///
/// Distinctness always uses canonical keys; the entrywise criterion is also applied
/// to every pair when `|V_s| <= pairwise_cap`.
pub fn coset_reps_check(space: &CosetSpace, pairwise_cap: u128) -> Result<DistinctnessReport> {
    let params = space.enumerate()?;
    let keys: Vec<u128> = map_vec(&params, |ts| space.key(&space.element(ts))).into_iter().collect::<Result<_>>()?;
    let distinct: HashSet<u128> = keys.iter().copied().collect();
    let predicted = space.cardinality();
    if distinct.len() as u128 != predicted {
        return Err(Error::IdentityFailed(format!(
            "{} distinct cosets among {} representatives",
            distinct.len(),
            predicted
        )));
    }
    let pairwise = predicted <= pairwise_cap;
    if pairwise {
        let elems: Vec<IntMatrix> = params.iter().map(|t| space.element(t)).collect();
        let invs: Vec<IntMatrix> = params.iter().map(|t| space.element_inverse(t)).collect();
        let idx: Vec<usize> = (0..elems.len()).collect();
        let clash = map_vec(&idx, |&a| {
            (a + 1..elems.len()).find(|&b| same_coset_entrywise(space, &elems[b].mul(&invs[a])))
        });
        if let Some((a, b)) = clash.iter().enumerate().find_map(|(a, b)| b.map(|b| (a, b))) {
            return Err(Error::IdentityFailed(format!("representatives {a} and {b} share a coset")));
        }
    }
    Ok(DistinctnessReport {
        cardinality: params.len() as u128,
        predicted,
        distinct_keys: distinct.len(),
        pairwise_checked: pairwise,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductIdentityReport {
    pub lhs_size: u128,
    pub rhs_products: u128,
    pub rhs_distinct: usize,
    pub equal: bool,
}

/// `Ad(s^-1)(g) = s^-1 g s` for `g` in the negative radical (stays integral for `s ∈ T^+`).
pub fn ad_inverse(g: &IntMatrix, d: &[i64], p: u64) -> Result<IntMatrix> {
    let m = g.size();
    let mut out = g.clone();
    for i in 0..m {
        for j in 0..m {
            let v = g.get(i, j);
            if v == 0 || i == j {
                continue;
            }
            let e = d[j] - d[i];
            if e < 0 {
                return Err(Error::InvalidInput("Ad(s^-1) leaves the lattice".into()));
            }
            out.set(i, j, v * ipow(p, e as u32));
        }
    }
    Ok(out)
}

/// Verify `V_{s1 s2} = Ad(s2^-1)(V_{s1}) V_{s2}` as sets of cosets, bijectively.
pub fn check_product_identity(s1: &TorusElement, s2: &TorusElement, p: u64) -> Result<ProductIdentityReport> {
    let sp1 = CosetSpace::new(s1, p)?;
    let sp2 = CosetSpace::new(s2, p)?;
    let s12 = s1.mul(s2);
    let sp12 = CosetSpace::new(&s12, p)?;
    let rhs_total = sp1.cardinality() * sp2.cardinality();
    if rhs_total > MAX_ENUMERATION {
        return Err(Error::PreconditionViolated(format!("{rhs_total} products exceed enumeration cap")));
    }
    let lhs: HashSet<u128> = map_vec(&sp12.enumerate()?, |ts| sp12.key(&sp12.element(ts)))
        .into_iter()
        .collect::<Result<_>>()?;
    let left: Vec<IntMatrix> = sp1
        .enumerate()?
        .iter()
        .map(|ts| ad_inverse(&sp1.element(ts), &sp2.d, p))
        .collect::<Result<_>>()?;
    let right: Vec<IntMatrix> = sp2.enumerate()?.iter().map(|ts| sp2.element(ts)).collect();
    let per_left: Vec<Result<Vec<u128>>> =
        map_vec(&left, |u| right.iter().map(|w| sp12.key(&u.mul(w))).collect());
    let mut rhs: HashSet<u128> = HashSet::with_capacity(rhs_total as usize);
    for ks in per_left {
        rhs.extend(ks?);
    }
    let equal = rhs.len() as u128 == rhs_total && rhs == lhs;
    Ok(ProductIdentityReport {
        lhs_size: lhs.len() as u128,
        rhs_products: rhs_total,
        rhs_distinct: rhs.len(),
        equal,
    })
}

/// `|V_{h_p^e}|` predicted in closed form: `p^{e * sum_{α<0} -v_p(α(h_p))}`.
pub fn predicted_count_h_p(n: usize, p: u64, e: u32) -> u128 {
    let h = TorusElement::h_p(n, p);
    let total: i64 = negative_roots(n)
        .iter()
        .map(|r| -vp_i64(&r.value(&h), p).unwrap())
        .sum();
    (p as u128).pow(e * total as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::q;
    use crate::symplectic::similitude;

    #[test]
    fn n1_counts_and_identity() {
        for e in 1..=3u32 {
            let s = TorusElement::h_p(1, 3).pow(e as i64);
            let sp = CosetSpace::new(&s, 3).unwrap();
            assert_eq!(sp.cardinality(), 3u128.pow(e));
            let r = coset_reps_check(&sp, 10_000).unwrap();
            assert!(r.pairwise_checked);
        }
        let h = TorusElement::h_p(1, 3);
        let r = check_product_identity(&h, &h, 3).unwrap();
        assert!(r.equal);
        assert_eq!(r.rhs_products, 9);
    }

    #[test]
    fn elements_are_symplectic_and_inverses_match() {
        let sp = CosetSpace::new(&TorusElement::h_p(2, 3), 3).unwrap();
        for idx in [0u128, 1, 17, 500, 2186] {
            let ts = sp.params_of(idx);
            let g = sp.element(&ts);
            assert_eq!(similitude(&g.to_qmatrix()).unwrap(), q(1));
            assert_eq!(g.mul(&sp.element_inverse(&ts)), IntMatrix::identity(4));
        }
    }

    #[test]
    fn not_plus_rejected() {
        let s = TorusElement::h_p(2, 3).inverse();
        assert!(matches!(CosetSpace::new(&s, 3), Err(Error::NotPlus)));
    }

    #[test]
    fn key_agrees_with_entrywise_criterion_on_samples() {
        let sp = CosetSpace::new(&TorusElement::h_p(2, 3), 3).unwrap();
        let card = sp.cardinality();
        for a in (0..card).step_by(97) {
            for b in (0..card).step_by(131) {
                let (ta, tb) = (sp.params_of(a), sp.params_of(b));
                let same_key = sp.key(&sp.element(&ta)).unwrap() == sp.key(&sp.element(&tb)).unwrap();
                let g = sp.element(&tb).mul(&sp.element_inverse(&ta));
                assert_eq!(same_key, same_coset_entrywise(&sp, &g), "{a} {b}");
            }
        }
    }
}
