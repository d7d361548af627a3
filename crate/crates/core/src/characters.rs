//! Characters of a commutative algebra generated by finitely many labelled operators.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::rational::{fmt_q, serde_q, vp, ExtQ, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSet {
    labels: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Arc<Self>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidInput(format!("duplicate generator label `{l}`")));
            }
        }
        Ok(Arc::new(GeneratorSet { labels }))
    }

    /// `prefix0, prefix1, ...`
    pub fn numbered(prefix: &str, n: usize) -> Arc<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}"))).expect("labels are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A ring homomorphism to `O`, recorded by its values on the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub prime: u64,
    gens: Arc<GeneratorSet>,
    values: Vec<Q>,
}

impl Serialize for Character {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Serialisable view with generator labels inline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharacterJson {
    pub prime: u64,
    pub generators: Vec<String>,
    #[serde(with = "serde_q::vec")]
    pub values: Vec<Q>,
}

impl Character {
    pub fn new(prime: u64, gens: Arc<GeneratorSet>, values: Vec<Q>) -> Result<Self> {
        if values.len() != gens.len() {
            return Err(Error::GeneratorMismatch(format!(
                "{} values for {} generators",
                values.len(),
                gens.len()
            )));
        }
        for v in &values {
            if vp(v, prime) < ExtQ::from(0) {
                return Err(Error::NotIntegral(fmt_q(v)));
            }
        }
        Ok(Character { prime, gens, values })
    }

    pub fn generators(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &Q {
        &self.values[i]
    }

    pub fn value_of(&self, label: &str) -> Option<&Q> {
        self.gens.index_of(label).map(|i| &self.values[i])
    }

    /// Same generators, new values (integrality re-checked).
    pub fn with_values(&self, values: Vec<Q>) -> Result<Self> {
        Self::new(self.prime, self.gens.clone(), values)
    }

    pub fn to_json(&self) -> CharacterJson {
        CharacterJson {
            prime: self.prime,
            generators: self.gens.labels().to_vec(),
            values: self.values.clone(),
        }
    }

    pub fn from_json(j: &CharacterJson) -> Result<Self> {
        Self::new(j.prime, GeneratorSet::new(j.generators.clone())?, j.values.clone())
    }

    fn compatible(&self, o: &Self) -> Result<()> {
        if self.prime != o.prime || self.gens.labels() != o.gens.labels() {
            return Err(Error::GeneratorMismatch(format!(
                "{:?}/p={} vs {:?}/p={}",
                self.gens.labels(),
                self.prime,
                o.gens.labels(),
                o.prime
            )));
        }
        Ok(())
    }
}

/// `min_l v_p(Θ(T_l))`; `+inf` for an empty generator set.
pub fn char_vp(c: &Character) -> ExtQ {
    c.values.iter().map(|v| vp(v, c.prime)).min().unwrap_or(ExtQ::PosInf)
}

/// `v_p(Θ - μ) = min_l v_p(Θ(T_l) - μ(T_l))`.
pub fn char_distance(a: &Character, b: &Character) -> Result<ExtQ> {
    a.compatible(b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| vp(&(x - y), a.prime))
        .min()
        .unwrap_or(ExtQ::PosInf))
}

/// `Θ ≡ μ (mod p^t)` on every generator.
pub fn char_congruent(a: &Character, b: &Character, t: &Q) -> Result<bool> {
    Ok(char_distance(a, b)?.ge_q(t))
}

/// A surjective assignment of source generators to target generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMap {
    source: Arc<GeneratorSet>,
    target: Arc<GeneratorSet>,
    assign: Vec<usize>,
}

impl GeneratorMap {
    pub fn new(source: Arc<GeneratorSet>, target: Arc<GeneratorSet>, assign: Vec<usize>) -> Result<Self> {
        if assign.len() != source.len() {
            return Err(Error::GeneratorMismatch("assignment length differs from source".into()));
        }
        let mut hit = vec![false; target.len()];
        for &a in &assign {
            *hit.get_mut(a).ok_or_else(|| Error::GeneratorMismatch(format!("target index {a}")))? = true;
        }
        if !hit.iter().all(|&h| h) {
            return Err(Error::GeneratorMismatch("generator map is not surjective".into()));
        }
        Ok(GeneratorMap { source, target, assign })
    }

    pub fn identity(gens: Arc<GeneratorSet>) -> Self {
        let n = gens.len();
        GeneratorMap { source: gens.clone(), target: gens, assign: (0..n).collect() }
    }

    pub fn source(&self) -> &Arc<GeneratorSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GeneratorSet> {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    /// Some source generator mapped onto target index `t`.
    pub fn preimage(&self, t: usize) -> Option<usize> {
        self.assign.iter().position(|&a| a == t)
    }
}

/// `Φ^∨(μ)(T') = μ(Φ(T'))`.
pub fn dual_map(phi: &GeneratorMap, mu: &Character) -> Result<Character> {
    if mu.gens.labels() != phi.target.labels() {
        return Err(Error::GeneratorMismatch("character does not live on the map's target".into()));
    }
    let values = phi.assign.iter().map(|&t| mu.values[t].clone()).collect();
    Character::new(mu.prime, phi.source.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::q;

    fn ch(p: u64, vals: &[i64]) -> Character {
        Character::new(p, GeneratorSet::numbered("T", vals.len()), vals.iter().map(|&v| q(v)).collect()).unwrap()
    }

    #[test]
    fn spec_congruence_example() {
        let theta = ch(3, &[1, 2]);
        let mu = ch(3, &[10, 2]);
        assert!(char_congruent(&theta, &mu, &q(2)).unwrap());
        assert!(!char_congruent(&theta, &mu, &q(3)).unwrap());
    }

    #[test]
    fn integrality_is_enforced() {
        let g = GeneratorSet::numbered("T", 1);
        assert!(matches!(
            Character::new(3, g, vec![crate::padic::rational::qf(1, 3)]),
            Err(Error::NotIntegral(_))
        ));
    }

    #[test]
    fn mismatched_generators() {
        let a = ch(3, &[1, 2]);
        let b = ch(3, &[1]);
        assert!(matches!(char_congruent(&a, &b, &q(1)), Err(Error::GeneratorMismatch(_))));
        assert_eq!(char_vp(&ch(3, &[])), ExtQ::PosInf);
        assert_eq!(char_vp(&ch(3, &[9, 6])), ExtQ::from(1));
    }

    #[test]
    fn dual_map_pulls_back() {
        let tgt = GeneratorSet::numbered("T", 2);
        let src = GeneratorSet::numbered("S", 3);
        let phi = GeneratorMap::new(src, tgt.clone(), vec![0, 1, 0]).unwrap();
        let mu = Character::new(5, tgt, vec![q(7), q(11)]).unwrap();
        let pulled = dual_map(&phi, &mu).unwrap();
        assert_eq!(pulled.values(), &[q(7), q(11), q(7)]);
        let bad = GeneratorMap::new(GeneratorSet::numbered("S", 2), GeneratorSet::numbered("T", 2), vec![0, 0]);
        assert!(bad.is_err());
    }
}
