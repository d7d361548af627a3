//! Synthetic Hecke modules with known generalised eigenspace decompositions.
//!
//! Each block is `Θ(T) I + N_T` with `N_T` strictly upper triangular; the whole
//! module is conjugated by an integral unimodular matrix so the ground truth is
//! hidden from the matrices the oracles look at.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::characters::{char_distance, Character, GeneratorMap, GeneratorSet};
use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::padic::rational::{fmt_q, is_p_integral, q, ExtQ, Q};
use crate::padic::Poly;

/// One generalised eigenspace: a character, a dimension and a nilpotent pattern per generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub character: Character,
    pub dim: usize,
    /// Row-major `dim x dim` 0/1 masks, one per generator, strictly upper triangular.
    pub masks: Vec<Vec<bool>>,
}

impl BlockSpec {
    /// Semisimple block.
    pub fn diagonal(character: Character, dim: usize) -> Self {
        let g = character.generators().len();
        BlockSpec { character, dim, masks: vec![vec![false; dim * dim]; g] }
    }

    /// Nilpotent parts are sums of powers of the shift; `bands[g]` lists the powers used.
    /// Such blocks always commute.
    pub fn toeplitz(character: Character, dim: usize, bands: &[Vec<usize>]) -> Self {
        let masks = bands
            .iter()
            .map(|ks| {
                let mut m = vec![false; dim * dim];
                for &k in ks {
                    for i in 0..dim.saturating_sub(k) {
                        if k >= 1 {
                            m[i * dim + i + k] = true;
                        }
                    }
                }
                m
            })
            .collect();
        BlockSpec { character, dim, masks }
    }

    pub fn generator_matrix(&self, g: usize) -> QMatrix {
        let mut m = QMatrix::scalar(self.dim, self.character.value(g));
        for i in 0..self.dim {
            for j in 0..self.dim {
                if self.masks[g][i * self.dim + j] {
                    m.set(i, j, q(1) + m.get(i, j));
                }
            }
        }
        m
    }

    fn validate(&self) -> Result<()> {
        let g = self.character.generators().len();
        if self.dim == 0 {
            return Err(Error::InvalidInput("empty block".into()));
        }
        if self.masks.len() != g || self.masks.iter().any(|m| m.len() != self.dim * self.dim) {
            return Err(Error::InvalidInput("mask shape does not match block".into()));
        }
        for m in &self.masks {
            for i in 0..self.dim {
                for j in 0..=i {
                    if m[i * self.dim + j] {
                        return Err(Error::InvalidInput("mask is not strictly upper triangular".into()));
                    }
                }
            }
        }
        let mats: Vec<QMatrix> = (0..g).map(|i| self.generator_matrix(i)).collect();
        for a in 0..g {
            for b in a + 1..g {
                if !mats[a].commutes_with(&mats[b]) {
                    return Err(Error::NonCommuting(format!(
                        "generators {} and {}",
                        self.character.generators().labels()[a],
                        self.character.generators().labels()[b]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A product of elementary integral matrices: determinant `±1`.
pub fn random_unimodular<R: Rng>(n: usize, steps: usize, rng: &mut R) -> QMatrix {
    let mut s = QMatrix::identity(n);
    if n < 2 {
        return s;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = [-2i64, -1, 1, 2][rng.gen_range(0..4)];
        // row_i += c * row_j
        for k in 0..n {
            let v = s.get(i, k) + q(c) * s.get(j, k);
            s.set(i, k, v);
        }
    }
    if rng.gen_bool(0.5) {
        let r = rng.gen_range(0..n);
        for k in 0..n {
            let v = -s.get(r, k);
            s.set(r, k, v);
        }
    }
    s
}

#[derive(Clone, Debug)]
pub struct SyntheticHeckeModule {
    pub prime: u64,
    gens: Arc<GeneratorSet>,
    blocks: Vec<BlockSpec>,
    matrices: Vec<QMatrix>,
}

impl SyntheticHeckeModule {
    pub fn new(prime: u64, gens: Arc<GeneratorSet>, blocks: Vec<BlockSpec>, scrambler: &QMatrix) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("module needs at least one block".into()));
        }
        for b in &blocks {
            if b.character.prime != prime || b.character.generators().labels() != gens.labels() {
                return Err(Error::GeneratorMismatch("block character does not match module".into()));
            }
            b.validate()?;
        }
        let dim: usize = blocks.iter().map(|b| b.dim).sum();
        if scrambler.rows() != dim || !scrambler.is_square() {
            return Err(Error::InvalidInput("scrambler has the wrong size".into()));
        }
        if !scrambler.entries().all(|x| x.is_integer()) || !{ let d = scrambler.det(); d.is_one() || (-d).is_one() } {
            return Err(Error::InvalidInput("scrambler must be integral and unimodular".into()));
        }
        let inv = scrambler.inverse()?;
        let matrices = (0..gens.len())
            .map(|g| {
                let bd = QMatrix::block_diag(&blocks.iter().map(|b| b.generator_matrix(g)).collect::<Vec<_>>());
                scrambler.mul(&bd).mul(&inv)
            })
            .collect();
        Ok(SyntheticHeckeModule { prime, gens, blocks, matrices })
    }

    /// Build with a random scrambler.
    pub fn synth<R: Rng>(prime: u64, gens: Arc<GeneratorSet>, blocks: Vec<BlockSpec>, rng: &mut R) -> Result<Self> {
        let dim: usize = blocks.iter().map(|b| b.dim).sum();
        let s = random_unimodular(dim, 3 * dim, rng);
        Self::new(prime, gens, blocks, &s)
    }

    pub fn generators(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// The scrambled action of generator `g`.
    pub fn matrix(&self, g: usize) -> &QMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[QMatrix] {
        &self.matrices
    }

    /// Replace one scrambled matrix without touching the declared ground truth.
    pub fn with_tampered_matrix(&self, g: usize, m: QMatrix) -> Self {
        let mut out = self.clone();
        out.matrices[g] = m;
        out
    }

    /// Ground-truth eigencharacters with multiplicity (blocks with equal characters merged).
    pub fn eigencharacters(&self) -> Vec<(Character, usize)> {
        let mut out: Vec<(Character, usize)> = Vec::new();
        for b in &self.blocks {
            match out.iter_mut().find(|(c, _)| c == &b.character) {
                Some((_, d)) => *d += b.dim,
                None => out.push((b.character.clone(), b.dim)),
            }
        }
        out
    }

    /// Cross-check the declared decomposition against the scrambled matrices.
    ///
    /// Two independent checks: each characteristic polynomial equals the product
    /// predicted by the blocks, and each declared character's simultaneous
    /// generalised kernel has the declared dimension.
    pub fn verify_against_oracle(&self) -> Result<()> {
        let n = self.dim();
        for (g, m) in self.matrices.iter().enumerate() {
            if !m.entries().all(|x| is_p_integral(x, self.prime)) {
                return Err(Error::OracleMismatch(format!("generator {g} does not preserve the lattice")));
            }
            for h in g + 1..self.matrices.len() {
                if !m.commutes_with(&self.matrices[h]) {
                    return Err(Error::OracleMismatch(format!("generators {g} and {h} do not commute")));
                }
            }
            let predicted = self.blocks.iter().fold(Poly::one(), |acc, b| {
                acc.mul(&Poly::new(vec![-b.character.value(g).clone(), Q::one()]).pow(b.dim as u32))
            });
            if m.charpoly() != predicted {
                return Err(Error::OracleMismatch(format!(
                    "characteristic polynomial of {} disagrees",
                    self.gens.labels()[g]
                )));
            }
        }
        let mut total = 0;
        for (c, d) in self.eigencharacters() {
            let stacked: Vec<QMatrix> = self
                .matrices
                .iter()
                .enumerate()
                .map(|(g, m)| m.shift(c.value(g)).pow(n as u32))
                .collect();
            let k = if stacked.is_empty() { n } else { QMatrix::vstack(&stacked).nullity() };
            if k != d {
                return Err(Error::OracleMismatch(format!(
                    "generalised kernel of {:?} has dim {k}, declared {d}",
                    c.values().iter().map(fmt_q).collect::<Vec<_>>()
                )));
            }
            total += k;
        }
        if total != n {
            return Err(Error::OracleMismatch(format!("kernels span {total} of {n}")));
        }
        Ok(())
    }

    /// `m_H(Θ, c)`: total dimension of eigencharacters congruent to `Θ` mod `p^c`.
    pub fn reduced_multiplicity(&self, theta: &Character, c: &ExtQ) -> Result<usize> {
        let mut m = 0;
        for (mu, d) in self.eigencharacters() {
            if char_distance(&mu, theta)? >= *c {
                m += d;
            }
        }
        Ok(m)
    }

    /// Trace through the scrambled matrices.
    pub fn trace(&self, e: &AlgebraElement) -> Result<Q> {
        self.check_gens(e)?;
        Ok(e.eval_matrices(&self.matrices).trace())
    }

    /// Trace read off the ground truth: `sum_blocks dim * e(Θ)`.
    pub fn trace_ground_truth(&self, e: &AlgebraElement) -> Result<Q> {
        self.check_gens(e)?;
        Ok(self
            .blocks
            .iter()
            .map(|b| e.eval_character(&b.character) * q(b.dim as i64))
            .sum())
    }

    /// Trace of `e` on each block, computed from the unscrambled block matrices.
    pub fn block_traces(&self, e: &AlgebraElement) -> Result<Vec<Q>> {
        self.check_gens(e)?;
        Ok(self
            .blocks
            .iter()
            .map(|b| {
                let mats: Vec<QMatrix> = (0..self.gens.len()).map(|g| b.generator_matrix(g)).collect();
                e.eval_matrices(&mats).trace()
            })
            .collect())
    }

    fn check_gens(&self, e: &AlgebraElement) -> Result<()> {
        if e.gens.labels() != self.gens.labels() {
            return Err(Error::GeneratorMismatch("element lives on a different algebra".into()));
        }
        Ok(())
    }

    /// Serializable summary of the ground truth.
    pub fn summary(&self) -> ModuleSummary {
        ModuleSummary {
            prime: self.prime,
            generators: self.gens.labels().to_vec(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockSummary {
                    dim: b.dim,
                    character: b.character.values().iter().map(fmt_q).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockSummary {
    pub dim: usize,
    pub character: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuleSummary {
    pub prime: u64,
    pub generators: Vec<String>,
    pub blocks: Vec<BlockSummary>,
}

/// A polynomial in the generators with rational coefficients, divided by `denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    gens: Arc<GeneratorSet>,
    terms: BTreeMap<Vec<u32>, Q>,
    denominator: Q,
}

impl AlgebraElement {
    pub fn constant(gens: Arc<GeneratorSet>, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; gens.len()], c);
        }
        AlgebraElement { gens, terms, denominator: Q::one() }
    }

    pub fn one(gens: Arc<GeneratorSet>) -> Self {
        Self::constant(gens, Q::one())
    }

    pub fn generator(gens: Arc<GeneratorSet>, g: usize) -> Self {
        let mut e = vec![0; gens.len()];
        e[g] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, Q::one());
        AlgebraElement { gens, terms, denominator: Q::one() }
    }

    /// `T_g - c`.
    pub fn linear(gens: Arc<GeneratorSet>, g: usize, c: &Q) -> Self {
        Self::generator(gens.clone(), g).add(&Self::constant(gens, -c.clone()))
    }

    /// `f(T_g)` for a univariate polynomial.
    pub fn univariate(gens: Arc<GeneratorSet>, g: usize, f: &Poly<Q>) -> Self {
        let mut terms = BTreeMap::new();
        for (k, c) in f.coeffs().iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; gens.len()];
                e[g] = k as u32;
                terms.insert(e, c.clone());
            }
        }
        AlgebraElement { gens, terms, denominator: Q::one() }
    }

    pub fn from_terms(gens: Arc<GeneratorSet>, terms: Vec<(Vec<u32>, Q)>) -> Result<Self> {
        let mut out = Self::constant(gens.clone(), Q::zero());
        for (e, c) in terms {
            if e.len() != gens.len() {
                return Err(Error::GeneratorMismatch("exponent vector length".into()));
            }
            *out.terms.entry(e).or_insert_with(Q::zero) += c;
        }
        out.terms.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    pub fn generators(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn denominator(&self) -> &Q {
        &self.denominator
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    /// Divide by `d` (accumulates into the symbolic denominator).
    pub fn divide_by(&self, d: &Q) -> Self {
        AlgebraElement { denominator: &self.denominator * d, ..self.clone() }
    }

    /// The element with its denominator cleared.
    pub fn numerator(&self) -> Self {
        AlgebraElement { denominator: Q::one(), ..self.clone() }
    }

    fn normalised_terms(&self) -> BTreeMap<Vec<u32>, Q> {
        self.terms.iter().map(|(e, c)| (e.clone(), c / &self.denominator)).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.gens.labels(), o.gens.labels());
        let mut terms = self.normalised_terms();
        for (e, c) in o.normalised_terms() {
            *terms.entry(e).or_insert_with(Q::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        AlgebraElement { gens: self.gens.clone(), terms, denominator: Q::one() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut terms: BTreeMap<Vec<u32>, Q> = self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect();
        terms.retain(|_, c| !c.is_zero());
        AlgebraElement { gens: self.gens.clone(), terms, denominator: self.denominator.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.gens.labels(), o.gens.labels());
        let mut terms: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        AlgebraElement { gens: self.gens.clone(), terms, denominator: &self.denominator * &o.denominator }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.gens.clone()), |acc, _| acc.mul(self))
    }

    /// Push forward along a generator map (source generators to target generators).
    pub fn map(&self, phi: &GeneratorMap) -> Result<Self> {
        if self.gens.labels() != phi.source().labels() {
            return Err(Error::GeneratorMismatch("element does not live on the map's source".into()));
        }
        let nt = phi.target().len();
        let mut terms: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut f = vec![0u32; nt];
            for (s, &k) in e.iter().enumerate() {
                f[phi.assignment()[s]] += k;
            }
            *terms.entry(f).or_insert_with(Q::zero) += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(AlgebraElement { gens: phi.target().clone(), terms, denominator: self.denominator.clone() })
    }

    /// All numerator coefficients p-integral.
    pub fn numerator_is_integral(&self, p: u64) -> bool {
        self.terms.values().all(|c| is_p_integral(c, p))
    }

    pub fn eval_character(&self, chi: &Character) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (g, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= num_traits::pow(chi.value(g).clone(), k as usize);
                }
            }
            acc += t;
        }
        acc / &self.denominator
    }

    pub fn eval_matrices(&self, mats: &[QMatrix]) -> QMatrix {
        let n = mats.first().map_or(0, |m| m.rows());
        let mut cache: HashMap<(usize, u32), QMatrix> = HashMap::new();
        let mut acc = QMatrix::zeros(n, n);
        for (e, c) in &self.terms {
            let mut t = QMatrix::scalar(n, c);
            for (g, &k) in e.iter().enumerate() {
                if k > 0 {
                    let pw = cache.entry((g, k)).or_insert_with(|| mats[g].pow(k));
                    t = t.mul(pw);
                }
            }
            acc = acc.add(&t);
        }
        acc.scale(&(Q::one() / &self.denominator))
    }
}
