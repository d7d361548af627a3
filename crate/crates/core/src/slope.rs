//! Slope decompositions with respect to a designated generator and the
//! approximate idempotents cutting out low-slope parts.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::GeneratorMap;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hecke::{AlgebraElement, SyntheticHeckeModule};
use crate::linalg::QMatrix;
use crate::padic::rational::{ceil_i64, fmt_q, q, vp, ExtQ, Q};
use crate::padic::{LogExpr, Poly};
use crate::transfer::{build_family, transfer_exists, verify_family, weight_classes, FamilyReport, TransferInstance};
use crate::weights::{vp_weight, Weight};

/// `α ↦ M(α)`: a non-decreasing step function with positive values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MBound {
    /// `(start, value)`: `M(α) = value` for the last `start ≤ α`.  Sorted, first start `≤ 0`.
    steps: Vec<(Q, u64)>,
}

impl MBound {
    pub fn constant(m: u64) -> Self {
        MBound { steps: vec![(Q::zero(), m)] }
    }

    pub fn table(steps: Vec<(Q, u64)>) -> Result<Self> {
        if steps.is_empty() || steps[0].0 > Q::zero() {
            return Err(Error::InvalidInput("M-table must start at or below 0".into()));
        }
        for w in steps.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidInput("M-table must be increasing in α and non-decreasing in value".into()));
            }
        }
        if steps.iter().any(|s| s.1 == 0) {
            return Err(Error::InvalidInput("M-table values must be positive".into()));
        }
        Ok(MBound { steps })
    }

    pub fn at(&self, alpha: &Q) -> u64 {
        self.steps.iter().rev().find(|(s, _)| s <= alpha).map_or(self.steps[0].1, |(_, v)| *v)
    }

    /// `M(α)` when it is even, as the slope and transfer statements require.
    pub fn even_at(&self, alpha: &Q) -> Result<u64> {
        let m = self.at(alpha);
        if m % 2 != 0 {
            return Err(Error::PreconditionViolated(format!("M({}) = {m} is odd", fmt_q(alpha))));
        }
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeMode {
    Exact,
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeSubspace {
    pub dim: usize,
    /// Distinct eigenvalues of `T` on the subspace, in block order.
    pub eigenvalues: Vec<Q>,
    /// Indices of the contributing blocks.
    pub blocks: Vec<usize>,
}

fn slope_of(x: &Q, p: u64) -> ExtQ {
    vp(x, p)
}

fn selected(v: &ExtQ, alpha: &Q, mode: SlopeMode) -> bool {
    match (v, mode) {
        (ExtQ::Finite(v), SlopeMode::Exact) => v == alpha,
        (ExtQ::Finite(v), SlopeMode::AtMost) => v <= alpha,
        _ => false,
    }
}

/// `H^α` or `H^{≤α}` with respect to generator `t`, read from the ground truth.
pub fn slope_subspace(h: &SyntheticHeckeModule, t: usize, alpha: &Q, mode: SlopeMode) -> Result<SlopeSubspace> {
    if t >= h.generators().len() {
        return Err(Error::InvalidInput(format!("no generator {t}")));
    }
    let mut out = SlopeSubspace { dim: 0, eigenvalues: Vec::new(), blocks: Vec::new() };
    for (i, b) in h.blocks().iter().enumerate() {
        let mu = b.character.value(t);
        if selected(&slope_of(mu, h.prime), alpha, mode) {
            out.dim += b.dim;
            out.blocks.push(i);
            if !out.eigenvalues.contains(mu) {
                out.eigenvalues.push(mu.clone());
            }
        }
    }
    Ok(out)
}

/// The submodule of blocks with slope exactly `α` (or at most `α`), unscrambled.
pub fn restrict(h: &SyntheticHeckeModule, t: usize, alpha: &Q, mode: SlopeMode) -> Result<Option<SyntheticHeckeModule>> {
    let sub = slope_subspace(h, t, alpha, mode)?;
    if sub.dim == 0 {
        return Ok(None);
    }
    let blocks = sub.blocks.iter().map(|&i| h.blocks()[i].clone()).collect();
    SyntheticHeckeModule::new(h.prime, h.generators().clone(), blocks, &QMatrix::identity(sub.dim)).map(Some)
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeRow {
    pub eigenvalue: String,
    pub valuation: String,
    pub dim: usize,
}

/// Eigenvalues of `t` with their valuations and multiplicities.
pub fn slope_profile(h: &SyntheticHeckeModule, t: usize) -> Vec<SlopeRow> {
    let mut rows: Vec<(Q, usize)> = Vec::new();
    for b in h.blocks() {
        let mu = b.character.value(t).clone();
        match rows.iter_mut().find(|(x, _)| *x == mu) {
            Some((_, d)) => *d += b.dim,
            None => rows.push((mu, b.dim)),
        }
    }
    rows.into_iter()
        .map(|(mu, dim)| SlopeRow { valuation: slope_of(&mu, h.prime).to_string(), eigenvalue: fmt_q(&mu), dim })
        .collect()
}

pub fn slope_profile_csv(rows: &[SlopeRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn same_algebra(h: &SyntheticHeckeModule, hp: &SyntheticHeckeModule) -> Result<()> {
    if h.prime != hp.prime || h.generators().labels() != hp.generators().labels() {
        return Err(Error::GeneratorMismatch("modules over different algebras".into()));
    }
    Ok(())
}

/// `Φ_H^{≤α} ∪ Φ_{H'}^{≤α}` in a fixed order.
pub fn low_slope_union(h: &SyntheticHeckeModule, hp: &SyntheticHeckeModule, t: usize, alpha: &Q) -> Result<Vec<Q>> {
    same_algebra(h, hp)?;
    let mut out: Vec<Q> = Vec::new();
    for m in [h, hp] {
        for mu in slope_subspace(m, t, alpha, SlopeMode::AtMost)?.eigenvalues {
            if !out.contains(&mu) {
                out.push(mu);
            }
        }
    }
    Ok(out)
}

/// `1 - ∏_μ (X - μ)/(-μ)` over the low-slope eigenvalues of both modules.
pub fn idempotent_poly(mus: &[Q]) -> Result<Poly<Q>> {
    let mut prod = Poly::one();
    for mu in mus {
        if mu.is_zero() {
            return Err(Error::ZeroEigenvalue);
        }
        let inv = -(Q::one() / mu);
        prod = prod.mul(&Poly::new(vec![-mu.clone(), Q::one()]).scale(&inv));
    }
    Ok(Poly::one().sub(&prod))
}

pub fn approx_idempotent(h: &SyntheticHeckeModule, hp: &SyntheticHeckeModule, t: usize, alpha: &Q) -> Result<Poly<Q>> {
    idempotent_poly(&low_slope_union(h, hp, t, alpha)?)
}

/// `𝐒(f) = min_{h ≥ 1} v_p(b_h)/h`; `+∞` when `f` is constant.
pub fn s_invariant(f: &Poly<Q>, p: u64) -> ExtQ {
    f.coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(h, c)| vp(c, p).finite().map(|v| v / q(h as i64)))
        .min()
        .map_or(ExtQ::PosInf, ExtQ::Finite)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma33Report {
    pub alpha: String,
    pub degree: usize,
    pub m_alpha: u64,
    pub m_alpha_next: u64,
    pub high_blocks: usize,
    pub low_blocks: usize,
    /// Smallest `v_p(ζ)` over high-slope blocks.
    pub min_zeta_valuation: String,
    pub zeta_threshold: String,
    pub s_invariant: String,
    pub powers_checked: u32,
}

fn require_dims(m: &SyntheticHeckeModule, t: usize, alpha: &Q, bound: u64) -> Result<()> {
    let d = slope_subspace(m, t, alpha, SlopeMode::AtMost)?.dim as u64;
    if 2 * d > bound {
        return Err(Error::PreconditionViolated(format!("dim H^(<={}) = {d} exceeds M/2 = {}", fmt_q(alpha), bound / 2)));
    }
    Ok(())
}

/// Check the five properties of the approximate idempotent on both modules.
pub fn check_lemma33(
    h: &SyntheticHeckeModule,
    hp: &SyntheticHeckeModule,
    t: usize,
    alpha: &Q,
    mb: &MBound,
    max_power: u32,
) -> Result<Lemma33Report> {
    same_algebra(h, hp)?;
    let p = h.prime;
    let a1 = alpha + q(1);
    let m_a = mb.at(alpha);
    let m_a1 = mb.at(&a1);
    for m in [h, hp] {
        require_dims(m, t, alpha, m_a)?;
        require_dims(m, t, &a1, m_a1)?;
        // Slopes up to α+1 must be multiples of 2/M(α+1).
        let quantum = q(2) / q(m_a1 as i64);
        for b in m.blocks() {
            if let ExtQ::Finite(v) = slope_of(b.character.value(t), p) {
                if v <= a1 && !(&v / &quantum).is_integer() {
                    return Err(Error::PreconditionViolated(format!("slope {} not a multiple of {}", fmt_q(&v), fmt_q(&quantum))));
                }
            }
        }
    }
    let mus = low_slope_union(h, hp, t, alpha)?;
    let f = idempotent_poly(&mus)?;
    let fail = |s: String| Err(Error::PropertyFailed(s));

    let zeta_floor = q(2) / q(m_a1 as i64);
    let mut min_zeta = ExtQ::PosInf;
    let (mut high, mut low) = (0, 0);
    for m in [h, hp] {
        for b in m.blocks() {
            let mu = b.character.value(t);
            let img = b.generator_matrix(t).eval_poly(&f);
            if !img.is_upper_triangular() {
                return fail("image of a block is not upper triangular".into());
            }
            let diag: Vec<Q> = (0..b.dim).map(|i| img.get(i, i).clone()).collect();
            if selected(&slope_of(mu, p), alpha, SlopeMode::AtMost) {
                low += 1;
                if diag.iter().any(|d| !d.is_one()) {
                    return fail(format!("low-slope block at eigenvalue {} has diagonal != 1", fmt_q(mu)));
                }
            } else {
                high += 1;
                let zeta = f.eval(mu);
                if diag.iter().any(|d| *d != zeta) {
                    return fail("high-slope block diagonal is not constant".into());
                }
                let v = vp(&zeta, p);
                if !v.ge_q(&zeta_floor) {
                    return fail(format!("v_p(ζ) = {v} below {}", fmt_q(&zeta_floor)));
                }
                min_zeta = min_zeta.min(v);
            }
        }
    }
    let deg = f.degree().unwrap_or(0);
    let sizes = slope_subspace(h, t, alpha, SlopeMode::AtMost)?.eigenvalues.len()
        + slope_subspace(hp, t, alpha, SlopeMode::AtMost)?.eigenvalues.len();
    if deg != mus.len() || deg > sizes || deg as u64 > m_a {
        return fail(format!("degree {deg} with {} roots and M(α) = {m_a}", mus.len()));
    }
    if !f.coeff(0).is_zero() {
        return fail(format!("constant term {}", fmt_q(&f.coeff(0))));
    }
    let s = s_invariant(&f, p);
    if !matches!(&s, ExtQ::PosInf) && !s.ge_q(&-alpha.clone()) {
        return fail(format!("S(p) = {s} below -α"));
    }
    for l in 1..=max_power {
        let fl = f.pow(l);
        for (hh, b) in fl.coeffs().iter().enumerate() {
            if (hh as u32) < l {
                if !b.is_zero() {
                    return fail(format!("power {l} has nonzero coefficient in degree {hh}"));
                }
            } else if !vp(b, p).ge_q(&-(alpha * q(hh as i64))) {
                return fail(format!("power {l}: v_p(b_{hh}) below -{hh}α"));
            }
        }
    }
    Ok(Lemma33Report {
        alpha: fmt_q(alpha),
        degree: deg,
        m_alpha: m_a,
        m_alpha_next: m_a1,
        high_blocks: high,
        low_blocks: low,
        min_zeta_valuation: min_zeta.to_string(),
        zeta_threshold: fmt_q(&zeta_floor),
        s_invariant: s.to_string(),
        powers_checked: max_power,
    })
}

/// `tr(f(T)^L x | H)` on the scrambled matrices; the power is taken after evaluating `f`.
pub fn trace_with_idempotent(m: &SyntheticHeckeModule, t: usize, f: &Poly<Q>, power: u32, x: &AlgebraElement) -> Result<Q> {
    if x.generators().labels() != m.generators().labels() {
        return Err(Error::GeneratorMismatch("operator lives on a different algebra".into()));
    }
    let e = m.matrix(t).eval_poly(f).pow(power);
    Ok(e.mul(&x.eval_matrices(m.matrices())).trace())
}

/// `tr(x | H^{≤α})` from the unscrambled blocks.
pub fn trace_on_low(h: &SyntheticHeckeModule, t: usize, x: &AlgebraElement, alpha: &Q, mode: SlopeMode) -> Result<Q> {
    let sub = slope_subspace(h, t, alpha, mode)?;
    let tr = h.block_traces(x)?;
    Ok(sub.blocks.iter().map(|&i| tr[i].clone()).sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace34Record {
    pub module: &'static str,
    pub power: u32,
    pub lhs: String,
    pub rhs: String,
    pub valuation: String,
    pub threshold: String,
}

/// `tr(x e^L | H) ≡ tr(x | H^{≤α})` modulo `p^{2L/M(α+1)}`, on both modules.
pub fn trace_congruence_34(
    h: &SyntheticHeckeModule,
    hp: &SyntheticHeckeModule,
    t: usize,
    x: &AlgebraElement,
    alpha: &Q,
    power: u32,
    mb: &MBound,
) -> Result<Vec<Trace34Record>> {
    if !x.numerator_is_integral(h.prime) || !x.denominator().is_one() {
        return Err(Error::PreconditionViolated("operator must have integral coefficients".into()));
    }
    let f = approx_idempotent(h, hp, t, alpha)?;
    let m1 = mb.at(&(alpha + q(1)));
    let threshold = q(2 * power as i64) / q(m1 as i64);
    let mut out = Vec::new();
    for (name, m) in [("H", h), ("H'", hp)] {
        let lhs = trace_with_idempotent(m, t, &f, power, x)?;
        let rhs = trace_on_low(m, t, x, alpha, SlopeMode::AtMost)?;
        let v = vp(&(&lhs - &rhs), m.prime);
        if !v.ge_q(&threshold) {
            return Err(Error::CongruenceFailed(format!(
                "{name}: valuation {v} below {} at L = {power}",
                fmt_q(&threshold)
            )));
        }
        out.push(Trace34Record {
            module: name,
            power,
            lhs: fmt_q(&lhs),
            rhs: fmt_q(&rhs),
            valuation: v.to_string(),
            threshold: fmt_q(&threshold),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Family pipeline

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineParams {
    pub alpha: Q,
    pub a_prime: Q,
    pub a: Q,
    pub b: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub a_bar: String,
    pub d: String,
    pub family_a: String,
    pub family_b: String,
    pub pairs: usize,
    pub constancy_pairs: usize,
    pub probe_checks: usize,
    pub transfers: usize,
    pub slopes_below: Vec<String>,
    pub family: Option<FamilyReport>,
}

fn integral_probes(gens: &std::sync::Arc<crate::characters::GeneratorSet>) -> Vec<AlgebraElement> {
    let mut out = vec![AlgebraElement::one(gens.clone())];
    for g in 0..gens.len() {
        out.push(AlgebraElement::generator(gens.clone(), g));
    }
    if gens.len() >= 2 {
        let x = AlgebraElement::generator(gens.clone(), 0);
        let y = AlgebraElement::generator(gens.clone(), 1);
        out.push(x.mul(&y).add(&x.pow(2).scale(&q(3))).add(&AlgebraElement::constant(gens.clone(), q(-2))));
    }
    out
}

/// Distinct finite slopes `≤ α` appearing anywhere in the family.
fn slopes_upto(modules: &[SyntheticHeckeModule], t: usize, alpha: &Q) -> Vec<Q> {
    let mut set = BTreeSet::new();
    for m in modules {
        for b in m.blocks() {
            if let ExtQ::Finite(v) = slope_of(b.character.value(t), m.prime) {
                if v <= *alpha {
                    set.insert(v);
                }
            }
        }
    }
    set.into_iter().collect()
}

/// Run the local-constancy and family construction for slope `α`.
///
/// `transfer_pairs` caps how many same-class pairs go through the full transfer
/// check; constancy and the probe hypothesis are checked on every pair.
#[allow(clippy::too_many_arguments)]
pub fn pipeline_37(
    weights: &[Weight],
    modules: &[SyntheticHeckeModule],
    t: usize,
    params: &PipelineParams,
    mb: &MBound,
    idx0: usize,
    transfer_pairs: usize,
    exec: Exec,
) -> Result<PipelineReport> {
    if weights.len() != modules.len() || modules.is_empty() || idx0 >= weights.len() {
        return Err(Error::InvalidInput("weights and modules do not line up".into()));
    }
    let p = modules[0].prime;
    let alpha = &params.alpha;
    if params.b > Q::zero() || params.a <= Q::zero() || params.a_prime <= Q::zero() {
        return Err(Error::PreconditionViolated("need a', a > 0 and b <= 0".into()));
    }
    let m_a = mb.even_at(alpha)?;
    let m_a1 = mb.at(&(alpha + q(1)));
    let a_bar = std::cmp::min(q(2) * &params.a_prime / q(m_a1 as i64), params.a.clone());
    // D = (log_p M(α) - b)/ā - 1
    let d = LogExpr::new(-&params.b / &a_bar - q(1), Q::one() / &a_bar, p, m_a);
    let fam_a = &a_bar / q(m_a as i64);
    let fam_b = LogExpr::new(&params.b / q(m_a as i64), -q(m_a as i64 + 2), p, m_a);

    let mut pairs = Vec::new();
    for class in weight_classes(weights, p) {
        for (x, &i) in class.iter().enumerate() {
            for &j in &class[x + 1..] {
                pairs.push((i, j, vp_weight(&weights[i], &weights[j], p)?));
            }
        }
    }
    let below = slopes_upto(modules, t, alpha);
    let beta = below.iter().filter(|s| *s < alpha).max().cloned();

    // Hypothesis probes, constancy and the exact-slope trace congruence, pair by pair.
    let checks = exec.map(&pairs, |(i, j, w)| -> Result<(usize, bool)> {
        let (hi, hj) = (&modules[*i], &modules[*j]);
        let w = match w {
            ExtQ::Finite(w) => w.clone(),
            _ => return Err(Error::InvalidInput(format!("weights {i} and {j} coincide"))),
        };
        let need = &params.a * (&w + q(1)) + &params.b;
        let power = ceil_i64(&(&params.a_prime * (&w + q(1)))).max(1) as u32;
        let f = approx_idempotent(hi, hj, t, alpha)?;
        let probes = integral_probes(hi.generators());
        for x in &probes {
            let diff = trace_with_idempotent(hi, t, &f, power, x)? - trace_with_idempotent(hj, t, &f, power, x)?;
            let v = vp(&diff, p);
            if !v.ge_q(&need) {
                return Err(Error::HypothesisFailed(format!(
                    "weights {i},{j}: probe difference valuation {v} below {}",
                    fmt_q(&need)
                )));
            }
        }
        let s = &a_bar * (&w + q(1)) + &params.b;
        for x in &probes {
            let diff = trace_on_low(hi, t, x, alpha, SlopeMode::Exact)? - trace_on_low(hj, t, x, alpha, SlopeMode::Exact)?;
            if diff.is_zero() {
                continue;
            }
            let v = vp(&diff, p);
            if !v.ge_q(&s) {
                return Err(Error::CongruenceFailed(format!(
                    "weights {i},{j}: slope-α traces differ at valuation {v} below {}",
                    fmt_q(&s)
                )));
            }
        }
        let constant = d.le_q(&w);
        if constant {
            for (mode, a) in [(SlopeMode::Exact, alpha.clone()), (SlopeMode::AtMost, alpha.clone())] {
                let di = slope_subspace(hi, t, &a, mode)?.dim;
                let dj = slope_subspace(hj, t, &a, mode)?.dim;
                if di != dj {
                    return Err(Error::ConstancyFailed(format!(
                        "weights {i},{j} at distance {} >= D = {d}: dims {di} vs {dj}",
                        fmt_q(&w)
                    )));
                }
            }
            let si = slopes_upto(std::slice::from_ref(hi), t, alpha);
            let sj = slopes_upto(std::slice::from_ref(hj), t, alpha);
            if si != sj {
                return Err(Error::ConstancyFailed(format!("weights {i},{j}: slope sets differ")));
            }
        }
        Ok((probes.len(), constant))
    });
    let mut probe_checks = 0;
    let mut constancy_pairs = 0;
    for c in checks {
        let (n, k) = c?;
        probe_checks += n;
        constancy_pairs += k as usize;
    }

    // Transfer between the exact-slope parts.
    let restricted: Vec<Option<SyntheticHeckeModule>> =
        modules.iter().map(|m| restrict(m, t, alpha, SlopeMode::Exact)).collect::<Result<_>>()?;
    let l_up = LogExpr::log(p, m_a).upper_rational(&crate::padic::rational::qf(1, 1000));
    let mut transfers = 0;
    for (i, j, w) in &pairs {
        if transfers >= transfer_pairs {
            break;
        }
        let (Some(ri), Some(rj), ExtQ::Finite(w)) = (&restricted[*i], &restricted[*j], w) else { continue };
        let s = &a_bar * (w + q(1)) + &params.b;
        if s < l_up {
            continue;
        }
        let inst = TransferInstance::new(ri.clone(), rj.clone(), GeneratorMap::identity(ri.generators().clone()), m_a)?;
        for (theta, _) in ri.eigencharacters() {
            let v = transfer_exists(&inst, &theta, &s, &integral_probes(ri.generators()))?;
            let floor = fam_b.add_q(&(&fam_a * (w + q(1))));
            if !floor.le_q(&v.c_value) {
                return Err(Error::CongruenceFailed(format!("transfer c = {} below {floor}", v.c)));
            }
        }
        transfers += 1;
    }

    // Family through λ₀ on the weights where the slope-α part is present.
    let family = match &restricted[idx0] {
        None => None,
        Some(r0) => {
            let keep: Vec<usize> = (0..weights.len()).filter(|&k| restricted[k].is_some()).collect();
            let ws: Vec<Weight> = keep.iter().map(|&k| weights[k].clone()).collect();
            let ms: Vec<SyntheticHeckeModule> = keep.iter().map(|&k| restricted[k].clone().unwrap()).collect();
            let pos0 = keep.iter().position(|&k| k == idx0).unwrap();
            let theta0 = r0.eigencharacters()[0].0.clone();
            let fam = build_family(&ws, &ms, &theta0, pos0, &fam_a, &fam_b)?;
            for (chi, m) in fam.iter().zip(&ms) {
                if slope_of(chi.value(t), p) != ExtQ::Finite(alpha.clone()) || !m.eigencharacters().iter().any(|(c, _)| c == chi) {
                    return Err(Error::CongruenceFailed("family member is not a slope-α eigencharacter".into()));
                }
            }
            Some(verify_family(&ws, &fam, &fam_a, &fam_b)?)
        }
    };

    Ok(PipelineReport {
        a_bar: fmt_q(&a_bar),
        d: d.to_string(),
        family_a: fmt_q(&fam_a),
        family_b: fam_b.to_string(),
        pairs: pairs.len(),
        constancy_pairs,
        probe_checks,
        transfers,
        slopes_below: below.iter().map(fmt_q).chain(beta.map(|b| format!("beta={}", fmt_q(&b)))).collect(),
        family,
    })
}

/// A twelve-weight family over `p = 5` with slopes `0, 1, 2` on generator 0.
///
/// With `extra`, the slope-1 block is dropped for weights `≡ 1 mod 5`; the
/// dimension jump then only separates pairs at weight distance 0.
pub fn constructed_family<R: rand::Rng>(rng: &mut R, extra: bool) -> Result<(Vec<Weight>, Vec<SyntheticHeckeModule>)> {
    let p = 5;
    let gens = crate::characters::GeneratorSet::numbered("T", 3);
    let mut spec = crate::transfer::FamilySpec::random(p, 1, 3, 3, rng)?;
    spec.slopes = vec![0, 1, 2];
    spec.dims = vec![1, 2, 1];
    spec.digits = 12;
    let weights: Vec<Weight> = [4i64, 104, 204, 8, 9, 109, 5, 30, 6, 106, 7, 11]
        .iter()
        .map(|&k| Weight::new(vec![k], 0))
        .collect();
    let modules = weights
        .iter()
        .map(|w| {
            let shifted = w.eps[0].rem_euclid(5) == 1;
            spec.module(w, p, &gens, |j| j != 1 || !extra || !shifted, rng)
        })
        .collect::<Result<_>>()?;
    Ok((weights, modules))
}

/// A random module over `p = 3` with two generators: generator 0 has slopes in
/// `0..=4`, generator 1 is a small integer.  Blocks are 2-dimensional with a
/// nilpotent part on generator 0.
pub fn random_slope_module<R: rand::Rng>(gens: &std::sync::Arc<crate::characters::GeneratorSet>, rng: &mut R) -> Result<SyntheticHeckeModule> {
    use crate::characters::Character;
    use crate::hecke::BlockSpec;
    use crate::padic::rational::p_pow;
    let blocks = (0..rng.gen_range(1..=2))
        .map(|_| {
            let s = rng.gen_range(0..=4);
            let u = [1i64, 2, 4, 5, 7][rng.gen_range(0..5)];
            let c = Character::new(3, gens.clone(), vec![p_pow(3, s) * q(u), q(rng.gen_range(-5..5))])?;
            Ok(BlockSpec::toeplitz(c, 2, &[vec![1], vec![]]))
        })
        .collect::<Result<Vec<_>>>()?;
    SyntheticHeckeModule::synth(3, gens.clone(), blocks, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{Character, GeneratorSet};
    use crate::hecke::BlockSpec;
    use crate::padic::rational::qf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_module(p: u64, eigs: &[Q]) -> SyntheticHeckeModule {
        let g = GeneratorSet::numbered("T", 1);
        let blocks = eigs
            .iter()
            .map(|e| BlockSpec::diagonal(Character::new(p, g.clone(), vec![e.clone()]).unwrap(), 1))
            .collect();
        SyntheticHeckeModule::new(p, g, blocks, &QMatrix::identity(eigs.len())).unwrap()
    }

    #[test]
    fn subspace_examples() {
        let h = diag_module(3, &[q(1), q(9)]);
        let s = slope_subspace(&h, 0, &q(0), SlopeMode::Exact).unwrap();
        assert_eq!((s.dim, s.eigenvalues.clone()), (1, vec![q(1)]));
        assert_eq!(slope_subspace(&h, 0, &q(50), SlopeMode::AtMost).unwrap().dim, 2);
        let total: usize = (0..=2).map(|a| slope_subspace(&h, 0, &q(a), SlopeMode::Exact).unwrap().dim).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn idempotent_examples() {
        assert_eq!(idempotent_poly(&[q(1)]).unwrap(), Poly::x());
        assert!(idempotent_poly(&[]).unwrap().is_zero());
        let f = idempotent_poly(&[q(1), q(3)]).unwrap();
        assert_eq!(f.degree(), Some(2));
        assert!(f.coeff(0).is_zero());
        assert!(s_invariant(&f, 3).ge_q(&q(-1)));
        assert_eq!(idempotent_poly(&[q(0)]), Err(Error::ZeroEigenvalue));
    }

    #[test]
    fn trace_example() {
        // T = diag(1, 9), α = 1, M(2) = 2, L = 1, x = T: 1 + 3^4 against 1.
        let h = diag_module(3, &[q(1), q(9)]);
        let mb = MBound::constant(2);
        let x = AlgebraElement::generator(h.generators().clone(), 0);
        let recs = trace_congruence_34(&h, &h, 0, &x, &q(1), 1, &mb).unwrap();
        assert_eq!(recs[0].lhs, "82");
        assert_eq!(recs[0].rhs, "1");
        assert_eq!(recs[0].valuation, "4");
    }

    #[test]
    fn lemma33_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GeneratorSet::numbered("T", 2);
        let mb = MBound::table(vec![(q(0), 8), (q(1), 12), (q(2), 16)]).unwrap();
        for _ in 0..20 {
            let h = random_slope_module(&g, &mut rng).unwrap();
            let hp = random_slope_module(&g, &mut rng).unwrap();
            for a in [q(0), q(1), qf(3, 2)] {
                check_lemma33(&h, &hp, 0, &a, &mb, 3).unwrap();
                let x = AlgebraElement::generator(g.clone(), 1);
                for l in 1..=4 {
                    trace_congruence_34(&h, &hp, 0, &x, &a, l, &mb).unwrap();
                }
            }
        }
    }

    #[test]
    fn csv_profile() {
        let h = diag_module(3, &[q(1), q(9), q(9)]);
        let csv = slope_profile_csv(&slope_profile(&h, 0)).unwrap();
        assert_eq!(csv, "eigenvalue,valuation,dim\n1,0,1\n9,2,2\n");
    }

    #[test]
    fn m_bound_lookup() {
        let mb = MBound::table(vec![(q(0), 4), (q(2), 8)]).unwrap();
        assert_eq!(mb.at(&q(1)), 4);
        assert_eq!(mb.at(&q(2)), 8);
        assert!(MBound::table(vec![(q(0), 8), (q(1), 4)]).is_err());
        assert!(MBound::constant(9).even_at(&q(0)).is_err());
    }

    fn pipeline_fixture(rng: &mut ChaCha8Rng, extra: bool) -> (Vec<Weight>, Vec<SyntheticHeckeModule>) {
        constructed_family(rng, extra).unwrap()
    }

    #[test]
    fn pipeline_on_constructed_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (weights, modules) = pipeline_fixture(&mut rng, true);
        let mb = MBound::constant(12);
        let params = PipelineParams { alpha: q(1), a_prime: q(6), a: q(1), b: q(-1) };
        let rep = pipeline_37(&weights, &modules, 0, &params, &mb, 0, 4, Exec::Parallel).unwrap();
        assert_eq!(rep.a_bar, "1");
        assert!(rep.constancy_pairs > 0);
        assert!(rep.family.is_some());
    }

    #[test]
    fn pipeline_detects_broken_constancy() {
        // Dimension jumps between weights congruent mod 5^2 must be caught.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let (weights, mut modules) = pipeline_fixture(&mut rng, false);
        let gens = modules[1].generators().clone();
        let mut blocks = modules[1].blocks().to_vec();
        blocks.retain(|b| vp(b.character.value(0), 5) != ExtQ::from(1));
        modules[1] = SyntheticHeckeModule::synth(5, gens, blocks, &mut rng).unwrap();
        let mb = MBound::constant(12);
        let params = PipelineParams { alpha: q(1), a_prime: q(6), a: q(1), b: q(-1) };
        let err = pipeline_37(&weights, &modules, 0, &params, &mb, 0, 0, Exec::Sequential).unwrap_err();
        assert!(err.is_falsification(), "{err}");
    }
}
