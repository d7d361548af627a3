//! Congruence transfer between two Hecke modules linked by a generator map.
//!
//! `Φ` sends generators of `H'` onto generators of `H`; characters of `H` pull
//! back along `Φ^∨`.  Everything here is exact: traces are rationals and every
//! threshold involving `log_p M` goes through [`LogExpr`].

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::characters::{char_distance, dual_map, Character, GeneratorMap, GeneratorSet};
use crate::error::{Error, Result};
use crate::hecke::{AlgebraElement, BlockSpec, SyntheticHeckeModule};
use crate::padic::rational::{fmt_q, p_pow, q, qf, vp, ExtQ, Q};
use crate::padic::LogExpr;
use crate::weights::{vp_weight, Weight};

#[derive(Clone, Debug)]
pub struct TransferInstance {
    pub h: SyntheticHeckeModule,
    pub h_prime: SyntheticHeckeModule,
    pub phi: GeneratorMap,
    pub m_bound: u64,
}

impl TransferInstance {
    /// `phi` must map the generators of `h_prime` onto those of `h`, and both
    /// dimensions must be at most `M/2`.
    pub fn new(h: SyntheticHeckeModule, h_prime: SyntheticHeckeModule, phi: GeneratorMap, m_bound: u64) -> Result<Self> {
        if h.prime != h_prime.prime {
            return Err(Error::GeneratorMismatch("modules over different primes".into()));
        }
        if phi.source().labels() != h_prime.generators().labels() || phi.target().labels() != h.generators().labels() {
            return Err(Error::GeneratorMismatch("map does not go from H' generators to H generators".into()));
        }
        if m_bound == 0 || 2 * h.dim() as u64 > m_bound || 2 * h_prime.dim() as u64 > m_bound {
            return Err(Error::PreconditionViolated(format!(
                "dims {} and {} exceed M/2 with M = {m_bound}",
                h.dim(),
                h_prime.dim()
            )));
        }
        Ok(TransferInstance { h, h_prime, phi, m_bound })
    }

    pub fn prime(&self) -> u64 {
        self.h.prime
    }

    /// `l = log_p M`.
    pub fn l(&self) -> LogExpr {
        LogExpr::log(self.prime(), self.m_bound)
    }

    pub fn pull_back(&self, theta: &Character) -> Result<Character> {
        dual_map(&self.phi, theta)
    }

    /// `Ω`: distances from `Θ` to `ℰ(H)` and from `Φ^∨Θ` to `ℰ(H')`.
    pub fn obstruction_set(&self, theta: &Character) -> Result<Vec<ExtQ>> {
        let pt = self.pull_back(theta)?;
        let mut out = Vec::new();
        for (mu, _) in self.h.eigencharacters() {
            out.push(char_distance(&mu, theta)?);
        }
        for (mu, _) in self.h_prime.eigencharacters() {
            out.push(char_distance(&mu, &pt)?);
        }
        Ok(out)
    }

    /// Replace the character of block `block` of `H'` by `f(value)` on generator `g`,
    /// rebuilding the module with the same scrambling pattern.
    pub fn with_mutated_h_prime<R: Rng>(&self, block: usize, g: usize, delta: &Q, rng: &mut R) -> Result<Self> {
        let mut blocks = self.h_prime.blocks().to_vec();
        let b = blocks
            .get_mut(block)
            .ok_or_else(|| Error::InvalidInput(format!("no block {block}")))?;
        let mut vals = b.character.values().to_vec();
        vals[g] += delta;
        b.character = b.character.with_values(vals)?;
        let hp = SyntheticHeckeModule::synth(self.prime(), self.h_prime.generators().clone(), blocks, rng)?;
        TransferInstance::new(self.h.clone(), hp, self.phi.clone(), self.m_bound)
    }
}

/// `c` is forbidden when some `ω ∈ Ω` lies in `[c, c + l]`.
fn forbidden(c: &Q, omega: &[Q], l: &LogExpr) -> bool {
    omega.iter().any(|w| w >= c && !l.lt_q(&(w - c)))
}

/// A `c ≤ m` with `[c, c + l] ∩ Ω = ∅`, as large as the breakpoint rule allows.
///
/// If `m` itself is free it is returned.  Otherwise the cluster of `Ω` blocking
/// `m` is followed downwards and `c` is placed just below its lower edge.
pub fn find_gap(omega: &[ExtQ], m: &Q, big_m: u64, p: u64) -> Result<Q> {
    let l = LogExpr::log(p, big_m);
    let mut pts: Vec<Q> = omega.iter().filter_map(|w| w.finite().cloned()).collect();
    pts.sort();
    pts.dedup();
    let c = if !forbidden(m, &pts, &l) {
        m.clone()
    } else {
        // Lowest point blocking m, then walk down while points stay within l.
        let mut low = pts
            .iter()
            .find(|w| *w >= m && !l.lt_q(&(*w - m)))
            .cloned()
            .expect("m is forbidden");
        let mut below = None;
        let start = low.clone();
        for w in pts.iter().rev().filter(|w| **w < start) {
            if !l.lt_q(&(&low - w)) {
                low = w.clone();
            } else {
                below = Some(w.clone());
                break;
            }
        }
        let l_lo = l.lower_rational(&qf(1, 1000));
        let quarter = if l_lo.is_positive() { &l_lo / q(4) } else { qf(1, 4) };
        let mut eps = quarter.clone();
        let mut u = l.upper_rational(&eps);
        if let Some(b) = &below {
            while &low - &u <= *b {
                eps /= q(2);
                u = l.upper_rational(&eps);
            }
        }
        let top = &low - &u;
        let delta = match &below {
            Some(b) => std::cmp::min((&top - b) / q(2), quarter),
            None => quarter,
        };
        &top - delta
    };
    if forbidden(&c, &pts, &l) {
        return Err(Error::NoGap(format!("candidate {} meets Ω", fmt_q(&c))));
    }
    let floor = l.scale(&-(q(big_m as i64) + qf(3, 2))).add_q(m);
    if !floor.le_q(&c) {
        return Err(Error::NoGap(format!("candidate {} below {}", fmt_q(&c), floor)));
    }
    Ok(c)
}

pub fn find_gap_c(inst: &TransferInstance, theta: &Character, m: &Q) -> Result<Q> {
    let n_chars = inst.h.eigencharacters().len() + inst.h_prime.eigencharacters().len();
    if n_chars as u64 > inst.m_bound {
        return Err(Error::PreconditionViolated(format!("{n_chars} characters exceed M = {}", inst.m_bound)));
    }
    find_gap(&inst.obstruction_set(theta)?, m, inst.m_bound, inst.prime())
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Index of the excluded character in `ℰ(H)` or `ℰ(H')`.
    pub character: usize,
    pub generator: String,
    pub difference: String,
}

#[derive(Clone, Debug)]
pub struct EThetaCertificate {
    pub m: Q,
    pub c: Q,
    pub witnesses_h: Vec<Witness>,
    pub witnesses_h_prime: Vec<Witness>,
    pub xi: Q,
    pub e: AlgebraElement,
}

impl EThetaCertificate {
    pub fn xi_valuation(&self, p: u64) -> ExtQ {
        vp(&self.xi, p)
    }
}

fn below_c(d: &ExtQ, c: &Q) -> bool {
    !d.ge_q(c)
}

pub fn build_e_theta(inst: &TransferInstance, theta: &Character, m: &Q) -> Result<EThetaCertificate> {
    let c = find_gap_c(inst, theta, m)?;
    let p = inst.prime();
    let gens_hp = inst.h_prime.generators().clone();
    let pt = inst.pull_back(theta)?;
    let mut e = AlgebraElement::one(gens_hp.clone());
    let mut xi = Q::one();
    let mut witnesses_h = Vec::new();
    let mut witnesses_h_prime = Vec::new();

    for (i, (mu, _)) in inst.h.eigencharacters().iter().enumerate() {
        if !below_c(&char_distance(mu, theta)?, &c) {
            continue;
        }
        let pm = inst.pull_back(mu)?;
        let g = (0..gens_hp.len())
            .find(|&g| below_c(&vp(&(pm.value(g) - pt.value(g)), p), &c))
            .ok_or_else(|| Error::WitnessNotFound(format!("character {i} of H")))?;
        let d = pt.value(g) - pm.value(g);
        e = e.mul(&AlgebraElement::linear(gens_hp.clone(), g, pm.value(g)));
        witnesses_h.push(Witness { character: i, generator: gens_hp.labels()[g].clone(), difference: fmt_q(&d) });
        xi *= d;
    }
    for (i, (mu, _)) in inst.h_prime.eigencharacters().iter().enumerate() {
        if !below_c(&char_distance(mu, &pt)?, &c) {
            continue;
        }
        let g = (0..gens_hp.len())
            .find(|&g| below_c(&vp(&(mu.value(g) - pt.value(g)), p), &c))
            .ok_or_else(|| Error::WitnessNotFound(format!("character {i} of H'")))?;
        let d = pt.value(g) - mu.value(g);
        e = e.mul(&AlgebraElement::linear(gens_hp.clone(), g, mu.value(g)));
        witnesses_h_prime.push(Witness {
            character: i,
            generator: gens_hp.labels()[g].clone(),
            difference: fmt_q(&d),
        });
        xi *= d;
    }
    Ok(EThetaCertificate { m: m.clone(), c, witnesses_h, witnesses_h_prime, e: e.divide_by(&xi), xi })
}

#[derive(Clone, Debug, Serialize)]
pub struct EThetaReport {
    pub c: String,
    pub m: String,
    pub xi_valuation: String,
    pub xi_bound: String,
    pub interval_floor: String,
    pub trace_h_prime: String,
    pub trace_h: String,
    pub mult_h_prime: usize,
    pub mult_h: usize,
    /// `v_p(tr - m)` for H' and H; required to be at least `log_p M`.
    pub valuation_h_prime: String,
    pub valuation_h: String,
    pub threshold: String,
    pub blocks_checked: usize,
}

/// Valuation of `x - k`, required to reach `l`.
fn congruent_to(x: &Q, k: usize, p: u64, l: &LogExpr) -> (ExtQ, bool) {
    let v = vp(&(x - q(k as i64)), p);
    let ok = match &v {
        ExtQ::PosInf => true,
        ExtQ::Finite(f) => l.le_q(f),
        ExtQ::NegInf => false,
    };
    (v, ok)
}

pub fn verify_e_theta(inst: &TransferInstance, theta: &Character, cert: &EThetaCertificate) -> Result<EThetaReport> {
    let p = inst.prime();
    let l = inst.l();
    let big_m = q(inst.m_bound as i64);
    let pt = inst.pull_back(theta)?;
    let fail = |s: String| Err(Error::CongruenceFailed(s));

    let vxi = cert.xi_valuation(p);
    let bound = &big_m * &cert.m;
    if !matches!(&vxi, ExtQ::Finite(v) if *v <= bound) {
        return fail(format!("v_p(xi) = {vxi} exceeds {}", fmt_q(&bound)));
    }
    let floor = l.scale(&-(&big_m + qf(3, 2))).add_q(&cert.m);
    if cert.c > cert.m || !floor.le_q(&cert.c) {
        return fail(format!("c = {} outside [{floor}, {}]", fmt_q(&cert.c), fmt_q(&cert.m)));
    }
    let omega: Vec<Q> = inst.obstruction_set(theta)?.iter().filter_map(|w| w.finite().cloned()).collect();
    if forbidden(&cert.c, &omega, &l) {
        return fail(format!("[c, c + l] meets Ω at c = {}", fmt_q(&cert.c)));
    }

    let ext_c = ExtQ::Finite(cert.c.clone());
    let e_h = cert.e.map(&inst.phi)?;
    let tr_hp = inst.h_prime.trace(&cert.e)?;
    let tr_h = inst.h.trace(&e_h)?;
    let mult_hp = inst.h_prime.reduced_multiplicity(&pt, &ext_c)?;
    let mult_h = inst.h.reduced_multiplicity(theta, &ext_c)?;
    let (v_hp, ok_hp) = congruent_to(&tr_hp, mult_hp, p, &l);
    let (v_h, ok_h) = congruent_to(&tr_h, mult_h, p, &l);
    if !ok_hp {
        return fail(format!("tr(e|H') = {} vs m = {mult_hp}: valuation {v_hp} < {l}", fmt_q(&tr_hp)));
    }
    if !ok_h {
        return fail(format!("tr(Φe|H) = {} vs m = {mult_h}: valuation {v_h} < {l}", fmt_q(&tr_h)));
    }

    // Block dichotomy: exactly zero away from Θ, close to the dimension near it.
    let mut checked = 0;
    for (module, elt, target) in [(&inst.h_prime, &cert.e, &pt), (&inst.h, &e_h, theta)] {
        for (b, tr) in module.blocks().iter().zip(module.block_traces(elt)?) {
            checked += 1;
            if char_distance(&b.character, target)?.ge_q(&cert.c) {
                let (v, ok) = congruent_to(&tr, b.dim, p, &l);
                if !ok {
                    return fail(format!("congruent block trace {} vs dim {}: valuation {v}", fmt_q(&tr), b.dim));
                }
            } else if !tr.is_zero() {
                return fail(format!("non-congruent block has trace {}", fmt_q(&tr)));
            }
        }
    }

    Ok(EThetaReport {
        c: fmt_q(&cert.c),
        m: fmt_q(&cert.m),
        xi_valuation: vxi.to_string(),
        xi_bound: fmt_q(&bound),
        interval_floor: floor.to_string(),
        trace_h_prime: fmt_q(&tr_hp),
        trace_h: fmt_q(&tr_h),
        mult_h_prime: mult_hp,
        mult_h,
        valuation_h_prime: v_hp.to_string(),
        valuation_h: v_h.to_string(),
        threshold: l.to_string(),
        blocks_checked: checked,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferVerdict {
    pub s: String,
    pub m: String,
    pub c: String,
    pub c_floor: String,
    pub mult_h: usize,
    pub mult_h_prime: usize,
    pub probes: usize,
    pub min_probe_valuation: String,
    /// Closest eigencharacter of H' to `Φ^∨Θ`, when one is congruent mod `p^c`.
    pub matching: Option<Vec<String>>,
    #[serde(skip)]
    pub c_value: Q,
}

/// The unique `k ≤ M/2` with `v_p(x - k) ≥ l`, if any.
fn trace_multiplicity(x: &Q, half: usize, p: u64, l: &LogExpr) -> Option<usize> {
    (0..=half).find(|&k| congruent_to(x, k, p, l).1)
}

/// Random probes: small integral polynomials in the generators of `H'`.
pub fn random_probes<R: Rng>(gens: &std::sync::Arc<GeneratorSet>, count: usize, rng: &mut R) -> Vec<AlgebraElement> {
    (0..count)
        .map(|_| {
            let terms: Vec<(Vec<u32>, Q)> = (0..3)
                .map(|_| {
                    let e: Vec<u32> = (0..gens.len()).map(|_| rng.gen_range(0..3)).collect();
                    (e, q(rng.gen_range(-5..=5)))
                })
                .collect();
            AlgebraElement::from_terms(gens.clone(), terms).expect("exponent shape")
        })
        .collect()
}

/// Does a mod `p^c` transfer exist at `Θ`, given the trace hypothesis with exponent `s`?
///
/// The hypothesis is probed on the numerator of `e(Θ)`, on each generator and on
/// the supplied extra probes.  Multiplicities are computed twice: from the traces
/// of `e(Θ)` and directly from the eigencharacters.
pub fn transfer_exists(
    inst: &TransferInstance,
    theta: &Character,
    s: &Q,
    extra_probes: &[AlgebraElement],
) -> Result<TransferVerdict> {
    let p = inst.prime();
    if inst.m_bound % 2 != 0 {
        return Err(Error::PreconditionViolated(format!("M = {} must be even", inst.m_bound)));
    }
    let l = inst.l();
    let big_m = q(inst.m_bound as i64);
    let u = l.upper_rational(&qf(1, 1000));
    if *s < u {
        return Err(Error::PreconditionViolated(format!("s = {} below log_p M", fmt_q(s))));
    }
    let m = (s - &u) / &big_m;
    let cert = build_e_theta(inst, theta, &m)?;
    verify_e_theta(inst, theta, &cert)?;

    let gens_hp = inst.h_prime.generators().clone();
    let mut probes = vec![cert.e.numerator()];
    probes.extend((0..gens_hp.len()).map(|g| AlgebraElement::generator(gens_hp.clone(), g)));
    probes.extend(extra_probes.iter().cloned());
    let mut min_v = ExtQ::PosInf;
    for pr in &probes {
        let d = inst.h.trace(&pr.map(&inst.phi)?)? - inst.h_prime.trace(pr)?;
        let v = vp(&d, p);
        if !v.ge_q(s) {
            return Err(Error::HypothesisFailed(format!("probe trace difference has valuation {v} < {}", fmt_q(s))));
        }
        min_v = min_v.min(v);
    }

    let pt = inst.pull_back(theta)?;
    let half = (inst.m_bound / 2) as usize;
    let tr_h = inst.h.trace(&cert.e.map(&inst.phi)?)?;
    let tr_hp = inst.h_prime.trace(&cert.e)?;
    let ext_c = ExtQ::Finite(cert.c.clone());
    let direct_h = inst.h.reduced_multiplicity(theta, &ext_c)?;
    let direct_hp = inst.h_prime.reduced_multiplicity(&pt, &ext_c)?;
    let via_h = trace_multiplicity(&tr_h, half, p, &l);
    let via_hp = trace_multiplicity(&tr_hp, half, p, &l);
    if via_h != Some(direct_h) || via_hp != Some(direct_hp) {
        return Err(Error::RouteMismatch(format!(
            "traces give {via_h:?}/{via_hp:?}, eigencharacters give {direct_h}/{direct_hp}"
        )));
    }
    if direct_h != direct_hp {
        return Err(Error::CongruenceFailed(format!("m_H = {direct_h} but m_H' = {direct_hp}")));
    }
    let c_floor = l.scale(&-(&big_m + q(2))).add_q(&(s / &big_m));
    if !c_floor.le_q(&cert.c) {
        return Err(Error::CongruenceFailed(format!("c = {} below {c_floor}", fmt_q(&cert.c))));
    }
    let matching = if direct_hp > 0 {
        let best = closest(&inst.h_prime.eigencharacters(), &pt)?;
        match best {
            Some((chi, d)) if d.ge_q(&cert.c) => Some(chi.values().iter().map(fmt_q).collect()),
            _ => return Err(Error::NoCongruentCharacter("no eigencharacter of H' within p^c".into())),
        }
    } else {
        None
    };
    Ok(TransferVerdict {
        s: fmt_q(s),
        m: fmt_q(&m),
        c: fmt_q(&cert.c),
        c_floor: c_floor.to_string(),
        mult_h: direct_h,
        mult_h_prime: direct_hp,
        probes: probes.len(),
        min_probe_valuation: min_v.to_string(),
        matching,
        c_value: cert.c,
    })
}

/// Run [`transfer_exists`] at every eigencharacter of `H`.
pub fn transfer_map(inst: &TransferInstance, s: &Q, extra_probes: &[AlgebraElement]) -> Result<Vec<TransferVerdict>> {
    inst.h
        .eigencharacters()
        .iter()
        .map(|(mu, _)| transfer_exists(inst, mu, s, extra_probes))
        .collect()
}

/// The character in `chars` closest to `target` (first one on ties).
fn closest(chars: &[(Character, usize)], target: &Character) -> Result<Option<(Character, ExtQ)>> {
    let mut best: Option<(Character, ExtQ)> = None;
    for (c, _) in chars {
        let d = char_distance(c, target)?;
        if best.as_ref().map_or(true, |(_, bd)| d > *bd) {
            best = Some((c.clone(), d));
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Families over weights

/// Threshold `𝖺 (w + 1) + 𝖻` for a pair at weight distance `w`.
pub fn family_threshold(a: &Q, b: &LogExpr, w: &Q) -> LogExpr {
    b.add_q(&(a * (w + q(1))))
}

fn meets(d: &ExtQ, t: &LogExpr) -> bool {
    match d {
        ExtQ::PosInf => true,
        ExtQ::Finite(v) => t.le_q(v),
        ExtQ::NegInf => false,
    }
}

/// Index classes of weights modulo `(p-1) X(T)`, in order of first appearance.
pub fn weight_classes(weights: &[Weight], p: u64) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let key = w.class_mod(p);
        match classes.get(&key) {
            Some(&k) => out[k].push(i),
            None => {
                classes.insert(key, out.len());
                out.push(vec![i]);
            }
        }
    }
    out
}

fn weight_distance(a: &Weight, b: &Weight, p: u64) -> Result<ExtQ> {
    vp_weight(a, b, p)
}

/// Choose one eigencharacter per weight so that congruent weights carry congruent characters.
///
/// Inside each class the weights are visited in order (starting from `λ₀` in its
/// class); each new weight is attached to the earlier one it is closest to.
pub fn build_family(
    weights: &[Weight],
    modules: &[SyntheticHeckeModule],
    theta0: &Character,
    idx0: usize,
    a: &Q,
    b: &LogExpr,
) -> Result<Vec<Character>> {
    if weights.len() != modules.len() || idx0 >= weights.len() {
        return Err(Error::InvalidInput("weights and modules do not line up".into()));
    }
    if !modules[idx0].eigencharacters().iter().any(|(c, _)| c == theta0) {
        return Err(Error::PreconditionViolated("Θ₀ is not an eigencharacter at λ₀".into()));
    }
    let p = modules[idx0].prime;
    let mut out: Vec<Option<Character>> = vec![None; weights.len()];
    for class in weight_classes(weights, p) {
        let mut order = class.clone();
        if let Some(pos) = order.iter().position(|&i| i == idx0) {
            order.remove(pos);
            order.insert(0, idx0);
            out[idx0] = Some(theta0.clone());
        } else {
            out[order[0]] = Some(modules[order[0]].eigencharacters()[0].0.clone());
        }
        for k in 1..order.len() {
            let i = order[k];
            let mut anchor = order[0];
            let mut best = weight_distance(&weights[i], &weights[anchor], p)?;
            for &j in &order[1..k] {
                let d = weight_distance(&weights[i], &weights[j], p)?;
                if d > best {
                    best = d;
                    anchor = j;
                }
            }
            let target = out[anchor].clone().expect("anchor assigned");
            let (chi, dist) = closest(&modules[i].eigencharacters(), &target)?
                .ok_or_else(|| Error::NoCongruentCharacter("empty module".into()))?;
            let ok = match &best {
                ExtQ::Finite(w) => meets(&dist, &family_threshold(a, b, w)),
                _ => dist == ExtQ::PosInf,
            };
            if !ok {
                return Err(Error::NoCongruentCharacter(format!(
                    "weight {i} has no character close enough to weight {anchor}"
                )));
            }
            out[i] = Some(chi);
        }
    }
    Ok(out.into_iter().map(|c| c.expect("every weight assigned")).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub weights: usize,
    pub classes: usize,
    pub pairs_checked: usize,
    /// Smallest `v_p(Θ_λ - Θ_λ') - threshold` over pairs with finite distance.
    pub min_margin: Option<LogExpr>,
}

/// Exhaustive pairwise check of the family congruences.
pub fn verify_family(weights: &[Weight], family: &[Character], a: &Q, b: &LogExpr) -> Result<FamilyReport> {
    let p = family.first().map_or(2, |c| c.prime);
    let classes = weight_classes(weights, p);
    let mut pairs = 0;
    let mut min_margin: Option<LogExpr> = None;
    for class in &classes {
        for (x, &i) in class.iter().enumerate() {
            for &j in &class[x + 1..] {
                pairs += 1;
                let w = weight_distance(&weights[i], &weights[j], p)?;
                let d = char_distance(&family[i], &family[j])?;
                let ok = match &w {
                    ExtQ::Finite(w) => {
                        let t = family_threshold(a, b, w);
                        if let ExtQ::Finite(dv) = &d {
                            let m = t.neg().add_q(dv);
                            min_margin = Some(match min_margin {
                                Some(x) if x.cmp_expr(&m).is_le() => x,
                                _ => m,
                            });
                        }
                        meets(&d, &t)
                    }
                    _ => d == ExtQ::PosInf,
                };
                if !ok {
                    return Err(Error::CongruenceFailed(format!(
                        "weights {i} and {j} at distance {w}: characters only congruent to order {d}"
                    )));
                }
            }
        }
    }
    Ok(FamilyReport { weights: weights.len(), classes: classes.len(), pairs_checked: pairs, min_margin })
}

// ---------------------------------------------------------------------------
// Synthetic instance generators

fn random_surjection<R: Rng>(k_src: usize, k_tgt: usize, rng: &mut R) -> Vec<usize> {
    let mut a: Vec<usize> = (0..k_src).map(|i| if i < k_tgt { i } else { rng.gen_range(0..k_tgt) }).collect();
    // Shuffle so the identity prefix is not always the witness.
    for i in (1..a.len()).rev() {
        let j = rng.gen_range(0..=i);
        a.swap(i, j);
    }
    a
}

fn random_unit<R: Rng>(p: u64, rng: &mut R) -> i64 {
    loop {
        let x = rng.gen_range(-40i64..=40);
        if x.rem_euclid(p as i64) != 0 {
            return x;
        }
    }
}

/// A value `base + p^d * unit` with `d` drawn from `0..=spread`.
fn near<R: Rng>(base: &Q, p: u64, spread: i64, rng: &mut R) -> Q {
    let d = rng.gen_range(0..=spread);
    base + p_pow(p, d) * q(random_unit(p, rng))
}

fn partition<R: Rng>(total: usize, rng: &mut R) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = total;
    while left > 0 {
        let k = rng.gen_range(1..=left);
        parts.push(k);
        left -= k;
    }
    parts
}

fn random_block<R: Rng>(character: Character, dim: usize, rng: &mut R) -> BlockSpec {
    let g = character.generators().len();
    if dim > 1 && rng.gen_bool(0.5) {
        let bands: Vec<Vec<usize>> = (0..g).map(|_| if rng.gen_bool(0.5) { vec![1] } else { vec![] }).collect();
        BlockSpec::toeplitz(character, dim, &bands)
    } else {
        BlockSpec::diagonal(character, dim)
    }
}

/// A random instance for the certificate suite, with characters clustered
/// `p`-adically around a common centre so `Ω` is non-trivial.  Returns the
/// instance, a character `Θ` of `H` and an integer `m`.
pub fn random_lemma_instance<R: Rng>(p: u64, m_bound: u64, max_dim: usize, rng: &mut R) -> Result<(TransferInstance, Character, Q)> {
    let half = ((m_bound / 2) as usize).min(max_dim).max(1);
    let k = rng.gen_range(1..=2usize);
    let kp = k + rng.gen_range(0..=1usize);
    let gens_h = GeneratorSet::numbered("T", k);
    let gens_hp = GeneratorSet::numbered("S", kp);
    let phi = GeneratorMap::new(gens_hp.clone(), gens_h.clone(), random_surjection(kp, k, rng))?;
    let centre: Vec<Q> = (0..k).map(|_| q(rng.gen_range(-30..=30))).collect();
    let spread = 5;

    let dim_h = rng.gen_range(1..=half);
    let mut blocks_h = Vec::new();
    for d in partition(dim_h, rng) {
        let vals = centre.iter().map(|c| near(c, p, spread, rng)).collect();
        blocks_h.push(random_block(Character::new(p, gens_h.clone(), vals)?, d, rng));
    }
    let centre_hp: Vec<Q> = phi.assignment().iter().map(|&t| centre[t].clone()).collect();
    let dim_hp = rng.gen_range(1..=half);
    let mut blocks_hp = Vec::new();
    for d in partition(dim_hp, rng) {
        let vals = centre_hp.iter().map(|c| near(c, p, spread, rng)).collect();
        blocks_hp.push(random_block(Character::new(p, gens_hp.clone(), vals)?, d, rng));
    }
    let h = SyntheticHeckeModule::synth(p, gens_h, blocks_h, rng)?;
    let hp = SyntheticHeckeModule::synth(p, gens_hp, blocks_hp, rng)?;
    let theta = if rng.gen_bool(0.7) {
        let chars = h.eigencharacters();
        chars[rng.gen_range(0..chars.len())].0.clone()
    } else {
        let vals = centre.iter().map(|c| near(c, p, spread, rng)).collect();
        Character::new(p, h.generators().clone(), vals)?
    };
    let m = q(rng.gen_range(1..=4));
    Ok((TransferInstance::new(h, hp, phi, m_bound)?, theta, m))
}

/// An instance satisfying the trace hypothesis with exponent `t`: each block of
/// `H` is matched in `H'` by blocks of the same total dimension whose characters
/// are `Φ^∨μ + p^t * noise`.
pub fn random_hypothesis_instance<R: Rng>(p: u64, m_bound: u64, t: i64, rng: &mut R) -> Result<TransferInstance> {
    let half = (m_bound / 2) as usize;
    let k = rng.gen_range(1..=2usize);
    let kp = k + rng.gen_range(0..=1usize);
    let gens_h = GeneratorSet::numbered("T", k);
    let gens_hp = GeneratorSet::numbered("S", kp);
    let phi = GeneratorMap::new(gens_hp.clone(), gens_h.clone(), random_surjection(kp, k, rng))?;
    let centre: Vec<Q> = (0..k).map(|_| q(rng.gen_range(-30..=30))).collect();
    let dim = rng.gen_range(1..=half);
    let mut blocks_h = Vec::new();
    let mut blocks_hp = Vec::new();
    for d in partition(dim, rng) {
        let vals: Vec<Q> = centre.iter().map(|c| near(c, p, 3, rng)).collect();
        let mu = Character::new(p, gens_h.clone(), vals)?;
        let pm = dual_map(&phi, &mu)?;
        for dd in partition(d, rng) {
            let vals = pm
                .values()
                .iter()
                .map(|v| v + p_pow(p, t) * q(rng.gen_range(-3..=3)))
                .collect();
            blocks_hp.push(random_block(pm.with_values(vals)?, dd, rng));
        }
        blocks_h.push(random_block(mu, d, rng));
    }
    let h = SyntheticHeckeModule::synth(p, gens_h, blocks_h, rng)?;
    let hp = SyntheticHeckeModule::synth(p, gens_hp, blocks_hp, rng)?;
    TransferInstance::new(h, hp, phi, m_bound)
}

fn pow_mod(base: i64, exp: i64, modulus: &num_bigint::BigInt) -> num_bigint::BigInt {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let b = BigInt::from(base).mod_floor(modulus);
    if exp >= 0 {
        b.modpow(&BigInt::from(exp), modulus)
    } else {
        // Inverse via Fermat-Euler is awkward for prime powers; use extended gcd.
        let g = b.extended_gcd(modulus);
        let inv = g.x.mod_floor(modulus);
        inv.modpow(&BigInt::from(-exp), modulus)
    }
}

/// Parameters of a synthetic weight family.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    /// `T`-adic valuation of each block (the slope).
    pub slopes: Vec<i64>,
    pub dims: Vec<usize>,
    /// `units[j][g]`, `exps[j][g]`: block `j` sends generator `g` to `units^⟨λ, exps⟩`.
    pub units: Vec<Vec<i64>>,
    pub exps: Vec<Vec<Vec<i64>>>,
    /// Digits kept by the reduction `mod p^digits`.
    pub digits: u32,
}

impl FamilySpec {
    /// Random spec with `blocks` blocks over `gens` generators.  Generator 0 is the
    /// slope operator; generator 1 carries a label distinguishing blocks mod `p`.
    pub fn random<R: Rng>(p: u64, n: usize, blocks: usize, gens: usize, rng: &mut R) -> Result<Self> {
        if gens < 2 || blocks as u64 >= p {
            return Err(Error::InvalidInput("family needs two generators and fewer blocks than p".into()));
        }
        let mut units = Vec::new();
        let mut exps = Vec::new();
        for j in 0..blocks {
            let mut u = Vec::new();
            let mut ex = Vec::new();
            for g in 0..gens {
                if g == 1 {
                    u.push(j as i64 + 1);
                    ex.push(vec![0; n + 1]);
                } else {
                    u.push(random_unit(p, rng));
                    ex.push((0..=n).map(|_| rng.gen_range(-2..=2)).collect());
                }
            }
            units.push(u);
            exps.push(ex);
        }
        Ok(FamilySpec {
            slopes: (0..blocks).map(|_| rng.gen_range(0..=3)).collect(),
            dims: (0..blocks).map(|_| rng.gen_range(1..=2)).collect(),
            units,
            exps,
            digits: 24,
        })
    }

    pub fn character(&self, j: usize, lambda: &Weight, p: u64, gens: &std::sync::Arc<GeneratorSet>) -> Result<Character> {
        let modulus = num_bigint::BigInt::from(p).pow(self.digits);
        let coords = lambda.coords();
        let vals = (0..gens.len())
            .map(|g| {
                let k: i64 = self.exps[j][g].iter().zip(&coords).map(|(a, b)| a * b).sum();
                let v = Q::from_integer(pow_mod(self.units[j][g], k, &modulus));
                if g == 0 {
                    v * p_pow(p, self.slopes[j])
                } else {
                    v
                }
            })
            .collect();
        Character::new(p, gens.clone(), vals)
    }

    /// The module at weight `λ`; `active(j, λ)` decides which blocks are present.
    pub fn module<R: Rng>(
        &self,
        lambda: &Weight,
        p: u64,
        gens: &std::sync::Arc<GeneratorSet>,
        active: impl Fn(usize) -> bool,
        rng: &mut R,
    ) -> Result<SyntheticHeckeModule> {
        let mut blocks = Vec::new();
        for j in 0..self.slopes.len() {
            if active(j) {
                blocks.push(random_block(self.character(j, lambda, p, gens)?, self.dims[j], rng));
            }
        }
        SyntheticHeckeModule::synth(p, gens.clone(), blocks, rng)
    }
}

/// Thirteen weights for `n = 1` spread over four classes modulo `p - 1`, with
/// modules from one random [`FamilySpec`].
pub fn random_family_fixture<R: Rng>(p: u64, rng: &mut R) -> Result<(Vec<Weight>, Vec<SyntheticHeckeModule>)> {
    let gens = GeneratorSet::numbered("T", 3);
    let spec = FamilySpec::random(p, 1, 3, 3, rng)?;
    let weights: Vec<Weight> = [4i64, 8, 24, 104, 5, 9, 25, 6, 10, 7, 11, 27, 504]
        .iter()
        .map(|&k| Weight::new(vec![k], 0))
        .collect();
    let modules = weights.iter().map(|w| spec.module(w, p, &gens, |_| true, rng)).collect::<Result<_>>()?;
    Ok((weights, modules))
}
