//! Congruences between character values of different highest weights, and the
//! formal geometric sides built from them.

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::padic::rational::{ceil_i64, fmt_q, p_pow, q, vp, ExtQ, Q};
use crate::padic::{hensel_root_exact, newton_polygon, with_precision, CappedPadic, LogExpr, Poly};
use crate::slope::idempotent_poly;
use crate::symplectic::{iwahori_member, sample_gamma, similitude, simple_roots, t_plus_member, TorusElement};
use crate::weights::{weights_congruent, weyl_char_value, TorusPoint, Weight};

/// The diagonalised form `ξ` of `h^{-1} h_p^{-e} γ^{-1}` together with the data certifying it.
#[derive(Clone, Debug)]
pub struct XiClass {
    pub n: usize,
    pub p: u64,
    pub e: u32,
    pub charpoly: Poly<Q>,
    /// `v_p(c_i)` for `i = 1..2n`.
    pub coeff_valuations: Vec<i64>,
    pub slopes: Vec<Q>,
    pub xi: TorusPoint<CappedPadic>,
    /// Valuations of the `2n` diagonal entries of `ξ`.
    pub profile: Vec<i64>,
    pub nu: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct XiSummary {
    pub coeff_valuations: Vec<i64>,
    pub slopes: Vec<String>,
    pub profile: Vec<i64>,
}

impl XiClass {
    pub fn summary(&self) -> XiSummary {
        XiSummary {
            coeff_valuations: self.coeff_valuations.clone(),
            slopes: self.slopes.iter().map(fmt_q).collect(),
            profile: self.profile.clone(),
        }
    }
}

fn mismatch(s: String) -> Error {
    Error::ValuationMismatch(s)
}

fn is_unit_torus(h: &TorusElement, p: u64) -> bool {
    h.alphas.iter().chain(std::iter::once(&h.nu)).all(|x| vp(x, p) == ExtQ::from(0))
}

/// `diag(p^{(n-1)e}, ..., p^0, p^{ne}, ..., p^{(2n-1)e})`: `h_p^{-e}` scaled to be integral.
pub fn scaled_h_p_inverse(n: usize, p: u64, e: u32) -> QMatrix {
    let e = e as i64;
    let n_i = n as i64;
    let d: Vec<Q> = (0..n_i)
        .map(|i| p_pow(p, (n_i - 1 - i) * e))
        .chain((0..n_i).map(|i| p_pow(p, (n_i + i) * e)))
        .collect();
    QMatrix::diag(&d)
}

/// Exact valuations of the characteristic polynomial of `h^{-1} h_p^{-e} γ^{-1}`
/// (scaled), its Newton polygon, and the lifted roots arranged as a torus point.
pub fn check_lemma71(gamma: &QMatrix, h: &TorusElement, p: u64, e: u32, prec: u32) -> Result<XiClass> {
    let n = h.n;
    if e == 0 {
        return Err(Error::PreconditionViolated("e must be at least 1".into()));
    }
    if gamma.rows() != 2 * n || similitude(gamma)? != Q::one() || !iwahori_member(gamma, p)? {
        return Err(Error::PreconditionViolated("γ is not in the Iwahori level group".into()));
    }
    if !is_unit_torus(h, p) {
        return Err(Error::PreconditionViolated("h must have unit entries at p".into()));
    }
    let a = h.inverse().matrix().mul(&scaled_h_p_inverse(n, p, e)).mul(&gamma.inverse()?);
    let chi = a.charpoly();
    let deg = 2 * n;
    let ei = e as i64;
    let mut coeff_valuations = Vec::with_capacity(deg);
    for i in 1..=deg {
        let v = vp(&chi.coeff(deg - i), p);
        let want = ei * (i * (i - 1) / 2) as i64;
        if v != ExtQ::from(want) {
            return Err(mismatch(format!("v_p(c_{i}) = {v}, expected {want}")));
        }
        coeff_valuations.push(want);
    }
    let slopes = newton_polygon(&chi, p)?.slopes_with_multiplicity();
    let expected: Vec<Q> = (0..deg as i64).map(|k| q(k * ei)).collect();
    if slopes != expected {
        return Err(mismatch(format!("Newton slopes {:?}", slopes.iter().map(fmt_q).collect::<Vec<_>>())));
    }
    // Roots of A have valuations k e; dividing by p^{ne} gives the eigenvalues.
    let shift = CappedPadic::from_q(&p_pow(p, -(n as i64) * ei), p, prec + 8);
    let mut roots = Vec::with_capacity(deg);
    for k in 0..deg {
        roots.push(hensel_root_exact(&chi, p, &q(k as i64 * ei), prec)?);
    }
    let product = roots.iter().skip(1).fold(roots[0].clone(), |acc, r| acc.mul_ref(r));
    let c_top = CappedPadic::from_q(&chi.coeff(0), p, prec + 8);
    let top_v = coeff_valuations[deg - 1];
    if !product.congruent(&c_top, &q(top_v + prec as i64 / 2))? {
        return Err(mismatch("product of roots differs from the constant term".into()));
    }
    let eig: Vec<CappedPadic> = roots.iter().map(|r| r.mul_ref(&shift)).collect();
    // ξ_i has valuation -ie (root index n-i), ξ_{n+i} has valuation (i-1)e (root index n+i-1).
    let xs: Vec<CappedPadic> = (1..=n).map(|i| eig[n - i].clone()).collect();
    let duals: Vec<CappedPadic> = (1..=n).map(|i| eig[n + i - 1].clone()).collect();
    let nu = Q::one() / (&h.nu * p_pow(p, ei));
    let nu_p = CappedPadic::from_q(&nu, p, prec + 8);
    for (x, y) in xs.iter().zip(&duals) {
        if !x.mul_ref(y).congruent(&nu_p, &q(-ei + prec as i64 / 2))? {
            return Err(mismatch("eigenvalues do not pair up under the similitude".into()));
        }
    }
    let xi = TorusPoint::new(xs.clone(), nu_p);
    for r in simple_roots(n) {
        let v = xi.root_value(&r)?.valuation()?;
        if v != ExtQ::from(-ei) {
            return Err(mismatch(format!("simple root {} has valuation {v}", r.label())));
        }
    }
    let mut profile = Vec::with_capacity(deg);
    for x in xs.iter().chain(&duals) {
        profile.push(match x.valuation()? {
            ExtQ::Finite(v) => v.to_integer().try_into().expect("small valuation"),
            _ => return Err(mismatch("zero eigenvalue".into())),
        });
    }
    Ok(XiClass { n, p, e, charpoly: chi, coeff_valuations, slopes, xi, profile, nu })
}

/// Evaluate a weight on a rational torus element.
pub fn weight_at(lambda: &Weight, t: &TorusElement) -> Result<Q> {
    lambda.eval(&TorusPoint::new(t.alphas.clone(), t.nu.clone()))
}

/// `λ(h h_p^e) · tr(Ξ^{-1} | L_λ)` evaluated through `ξ`.
pub fn normalized_trace(lambda: &Weight, h: &TorusElement, xi: &XiClass) -> Result<CappedPadic> {
    let scale = weight_at(lambda, &h.mul(&TorusElement::h_p(xi.n, xi.p).pow(xi.e as i64)))?;
    let tr = weyl_char_value(lambda, &xi.xi)?;
    Ok(tr.mul_q(&scale))
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop74Record {
    pub e: u32,
    pub m: u32,
    pub lhs_valuation: String,
    pub rhs_valuation: String,
    pub diff_valuation: String,
    pub threshold: String,
    /// `λ(h h_p^e ξ)` is a unit.
    pub unit_check: bool,
}

fn describe(x: &CappedPadic) -> String {
    match x.valuation() {
        Ok(v) => v.to_string(),
        Err(_) => format!(">={}", x.valuation_lower_bound()),
    }
}

fn check_weight_bounds(lambda: &Weight, c: &Q) -> Result<()> {
    if !lambda.is_dominant() {
        return Err(Error::PreconditionViolated("weight is not dominant".into()));
    }
    if q(lambda.min_simple_pairing()) <= q(2) * c {
        return Err(Error::PreconditionViolated(format!(
            "pairings of {:?} not above 2C = {}",
            lambda.coords(),
            fmt_q(&(q(2) * c))
        )));
    }
    Ok(())
}

/// Compare the normalised traces of two congruent weights at one `Ξ`.
#[allow(clippy::too_many_arguments)]
pub fn prop74_check(
    gamma: &QMatrix,
    h: &TorusElement,
    p: u64,
    e: u32,
    lambda: &Weight,
    lambda_p: &Weight,
    m: u32,
    c: &Q,
    prec: u32,
) -> Result<Prop74Record> {
    check_weight_bounds(lambda, c)?;
    check_weight_bounds(lambda_p, c)?;
    if !weights_congruent(lambda, lambda_p, p, m) {
        return Err(Error::PreconditionViolated("weights are not congruent mod (p-1)p^m".into()));
    }
    let threshold = std::cmp::min(q(m as i64 + 1), c * q(e as i64));
    with_precision(prec, |pr| {
        let xi = check_lemma71(gamma, h, p, e, pr)?;
        let a = normalized_trace(lambda, h, &xi)?;
        let b = normalized_trace(lambda_p, h, &xi)?;
        for (side, x) in [("λ", &a), ("λ'", &b)] {
            if !x.valuation_lower_bound().ge_q(&Q::zero()) {
                return Err(Error::CongruenceFailed(format!("{side} side is not p-integral: {}", describe(x))));
            }
        }
        let unit = {
            let t = h.mul(&TorusElement::h_p(xi.n, p).pow(e as i64));
            let s = weight_at(lambda, &t)?;
            let lx = lambda.eval(&xi.xi)?;
            lx.mul_q(&s).is_unit()?
        };
        if !unit {
            return Err(Error::CongruenceFailed("λ(h h_p^e ξ) is not a unit".into()));
        }
        let d = a.sub_ref(&b);
        if !a.congruent(&b, &threshold)? {
            return Err(Error::CongruenceFailed(format!(
                "difference has valuation {} below {}",
                describe(&d),
                fmt_q(&threshold)
            )));
        }
        Ok(Prop74Record {
            e,
            m,
            lhs_valuation: describe(&a),
            rhs_valuation: describe(&b),
            diff_valuation: describe(&d),
            threshold: fmt_q(&threshold),
            unit_check: unit,
        })
    })
}

// ---------------------------------------------------------------------------
// Formal geometric sides

#[derive(Clone, Debug)]
pub struct GeometricSide {
    pub n: usize,
    pub p: u64,
    /// Component of `h` away from `p` (unit entries at `p`).
    pub h_away: TorusElement,
    pub f: u32,
    /// Conjugacy class representatives and their integer coefficients.
    pub classes: Vec<(QMatrix, i64)>,
    /// `(e, b_e)` for `e = L..tL`.
    pub b: Vec<(u32, Q)>,
    pub beta: Q,
}

impl GeometricSide {
    /// Coefficients integral, `v_p(b_e) ≥ -eβ`.
    pub fn validate(&self) -> Result<()> {
        for (e, b) in &self.b {
            if !vp(b, self.p).ge_q(&-(q(*e as i64) * &self.beta)) {
                return Err(Error::PreconditionViolated(format!("v_p(b_{e}) below -{e}β")));
            }
        }
        if !is_unit_torus(&self.h_away, self.p) {
            return Err(Error::PreconditionViolated("h away from p has non-unit entries".into()));
        }
        Ok(())
    }

    /// The same side with coefficient `i` changed by `delta`.
    pub fn with_coefficient_shift(&self, i: usize, delta: i64) -> Self {
        let mut out = self.clone();
        out.classes[i].1 += delta;
        out
    }
}

/// `b_e` for the `L`-th power of the idempotent polynomial over `mus`.
pub fn idempotent_power_coeffs(mus: &[Q], power: u32) -> Result<Vec<(u32, Q)>> {
    let f = idempotent_poly(mus)?.pow(power);
    Ok(f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e as u32, c.clone()))
        .collect())
}

/// A random side: `classes` sampled `γ`, coefficients in `[-5, 5]`, and `b_e`
/// from the idempotent of `t` random eigenvalues of slope at most `β`.
#[allow(clippy::too_many_arguments)]
pub fn random_geometric_side<R: Rng>(
    n: usize,
    p: u64,
    ell: u64,
    classes: usize,
    t: usize,
    beta: &Q,
    power: u32,
    rng: &mut R,
) -> Result<GeometricSide> {
    let max_slope = beta.floor().to_integer();
    let max_slope: i64 = max_slope.try_into().unwrap_or(0);
    let mut mus: Vec<Q> = Vec::new();
    while mus.len() < t {
        let s = rng.gen_range(0..=max_slope);
        let u = rng.gen_range(1..(4 * p as i64));
        if u % p as i64 == 0 {
            continue;
        }
        let mu = p_pow(p, s) * q(u);
        if !mus.contains(&mu) {
            mus.push(mu);
        }
    }
    let b = idempotent_power_coeffs(&mus, power)?;
    let h_away = random_t_plus(n, ell, rng);
    let classes = (0..classes)
        .map(|_| (sample_gamma(n, p, 6, rng), rng.gen_range(-5..=5)))
        .collect();
    let gs = GeometricSide { n, p, h_away, f: rng.gen_range(0..=2), classes, b, beta: beta.clone() };
    gs.validate()?;
    Ok(gs)
}

/// An `ℓ`-power torus element in the positive semigroup.
pub fn random_t_plus<R: Rng>(n: usize, ell: u64, rng: &mut R) -> TorusElement {
    loop {
        let nu_exp = rng.gen_range(0..=2i64);
        let mut exps = Vec::with_capacity(n);
        let mut prev = 0i64;
        for i in 0..n {
            let lo = if i == 0 { (nu_exp + 1) / 2 } else { prev };
            let k = rng.gen_range(lo..=lo + 1);
            exps.push(k);
            prev = k;
        }
        let t = TorusElement::new(exps.iter().map(|&k| p_pow(ell, k)).collect(), p_pow(ell, nu_exp)).expect("non-zero");
        if t_plus_member(&t, ell) {
            return t;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem75Record {
    pub power: u32,
    pub terms: usize,
    pub lhs_valuation: String,
    pub rhs_valuation: String,
    pub diff_valuation: String,
    pub threshold: String,
    /// Smallest per-term bound `min(m+1, Ce) - eβ` actually met by each term difference.
    pub termwise_min: String,
}

/// `Σ_e b_e λ(h_p^{e+f}) Σ_i c_i tr(Ξ_{i,e}^{-1} | L_λ)` for both weights, compared modulo `p^□`.
#[allow(clippy::too_many_arguments)]
pub fn theorem75_check(
    gs: &GeometricSide,
    gs_prime: &GeometricSide,
    lambda: &Weight,
    lambda_p: &Weight,
    m_beta: u64,
    c: &Q,
    m: u32,
    prec: u32,
) -> Result<Theorem75Record> {
    gs.validate()?;
    gs_prime.validate()?;
    check_weight_bounds(lambda, c)?;
    check_weight_bounds(lambda_p, c)?;
    if !weights_congruent(lambda, lambda_p, gs.p, m) {
        return Err(Error::PreconditionViolated("weights are not congruent mod (p-1)p^m".into()));
    }
    if gs.classes.len() != gs_prime.classes.len() || gs.b != gs_prime.b || gs.f != gs_prime.f {
        return Err(Error::InvalidInput("the two sides must share classes and idempotent".into()));
    }
    let p = gs.p;
    let beta_m = &gs.beta * q(m_beta as i64);
    let boxed = (q(1) - &beta_m / c) * q(m as i64 + 1) - &beta_m;
    let power = ceil_i64(&(q(m as i64 + 1) / c)).max(1) as u32;
    if let Some((e0, _)) = gs.b.first() {
        if *e0 < power {
            return Err(Error::PreconditionViolated(format!("b_e starts at {e0}, below L = {power}")));
        }
    }
    with_precision(prec, |pr| {
        let mut lhs = CappedPadic::zero(p);
        let mut rhs = CappedPadic::zero(p);
        let mut termwise: Option<Q> = None;
        for (e, b) in &gs.b {
            let ep = e + gs.f;
            let hp = TorusElement::h_p(gs.n, p).pow(ep as i64);
            let (sl, slp) = (weight_at(lambda, &hp)?, weight_at(lambda_p, &hp)?);
            let mut inner = CappedPadic::zero(p);
            let mut inner_p = CappedPadic::zero(p);
            for ((gamma, ci), (_, ci_p)) in gs.classes.iter().zip(&gs_prime.classes) {
                if *ci == 0 && *ci_p == 0 {
                    continue;
                }
                let xi = check_lemma71(gamma, &gs.h_away, p, ep, pr)?;
                let t = weyl_char_value(lambda, &xi.xi)?;
                let tp = weyl_char_value(lambda_p, &xi.xi)?;
                inner = inner.add_ref(&t.mul_q(&q(*ci)));
                inner_p = inner_p.add_ref(&tp.mul_q(&q(*ci_p)));
            }
            let term = inner.mul_q(&(b * &sl));
            let term_p = inner_p.mul_q(&(b * &slp));
            let d = term.sub_ref(&term_p);
            let need = std::cmp::min(q(m as i64 + 1), c * q(ep as i64)) - q(*e as i64) * &gs.beta;
            if let ExtQ::Finite(v) = d.valuation_lower_bound() {
                let margin = v - &need;
                termwise = Some(termwise.map_or(margin.clone(), |x| std::cmp::min(x, margin)));
            }
            lhs = lhs.add_ref(&term);
            rhs = rhs.add_ref(&term_p);
        }
        let diff = lhs.sub_ref(&rhs);
        if !lhs.congruent(&rhs, &boxed)? {
            return Err(Error::CongruenceFailed(format!(
                "difference has valuation {} below {}",
                describe(&diff),
                fmt_q(&boxed)
            )));
        }
        Ok(Theorem75Record {
            power,
            terms: gs.b.len(),
            lhs_valuation: describe(&lhs),
            rhs_valuation: describe(&rhs),
            diff_valuation: describe(&diff),
            threshold: fmt_q(&boxed),
            termwise_min: termwise.map_or("inf".into(), |m| fmt_q(&m)),
        })
    })
}

// ---------------------------------------------------------------------------
// Constants

#[derive(Clone, Debug, Serialize)]
pub struct FamilyConstants {
    pub beta: String,
    pub m_beta: u64,
    pub m_beta1: u64,
    pub c: String,
    pub a_prime: String,
    pub a: String,
    pub b: String,
    pub family_a: String,
    pub family_b: LogExpr,
    pub e_bound: LogExpr,
    #[serde(skip)]
    pub values: ConstantValues,
}

#[derive(Clone, Debug, Default)]
pub struct ConstantValues {
    pub c: Q,
    pub a_prime: Q,
    pub a: Q,
    pub b: Q,
    pub family_a: Q,
}

/// `𝖺` as a function of the free constant `C`.
pub fn family_a_for(beta: &Q, m_beta: u64, m_beta1: u64, c: &Q) -> Q {
    let mb = q(m_beta as i64);
    let a = q(1) - beta * &mb / c;
    let a_prime = q(1) / c;
    std::cmp::min(a, a_prime / q(m_beta1 as i64)) / mb
}

pub fn constants_76(beta: &Q, m_beta: u64, m_beta1: u64, p: u64) -> Result<FamilyConstants> {
    if m_beta == 0 || m_beta1 == 0 || m_beta1 < m_beta || *beta < Q::zero() {
        return Err(Error::InvalidInput("need 0 < M(β) <= M(β+1) and β >= 0".into()));
    }
    let mb = q(m_beta as i64);
    let mb1 = q(m_beta1 as i64);
    let c = beta * &mb + q(1) / &mb1;
    let a_prime = q(1) / &c;
    let a = q(1) - beta * &mb / &c;
    let b = -(beta * &mb);
    let k = q(1) + beta * &mb1 * &mb;
    let family_a = q(1) / (&k * &mb);
    debug_assert_eq!(family_a, family_a_for(beta, m_beta, m_beta1, &c));
    let family_b = LogExpr::new(-beta.clone(), -(&mb + q(2)), p, m_beta);
    let e_bound = LogExpr::new(-&b * &k, &mb * (&mb + q(2)) * &k, p, m_beta);
    Ok(FamilyConstants {
        beta: fmt_q(beta),
        m_beta,
        m_beta1,
        c: fmt_q(&c),
        a_prime: fmt_q(&a_prime),
        a: fmt_q(&a),
        b: fmt_q(&b),
        family_a: fmt_q(&family_a),
        family_b,
        e_bound,
        values: ConstantValues { c, a_prime, a, b, family_a },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rational::qf;
    use crate::padic::DEFAULT_PRECISION;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_case() {
        let g = QMatrix::identity(2);
        let xi = check_lemma71(&g, &TorusElement::identity(1), 3, 1, 32).unwrap();
        assert_eq!(xi.coeff_valuations, vec![0, 1]);
        assert_eq!(xi.profile, vec![-1, 0]);
    }

    #[test]
    fn random_gamma_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=2 {
            for e in 1..=3u32 {
                for _ in 0..5 {
                    let g = sample_gamma(n, 3, 8, &mut rng);
                    let h = random_t_plus(n, 2, &mut rng);
                    let xi = check_lemma71(&g, &h, 3, e, 32).unwrap();
                    let ei = e as i64;
                    let want: Vec<i64> = (1..=n as i64).map(|i| -i * ei).chain((0..n as i64).map(|i| i * ei)).collect();
                    assert_eq!(xi.profile, want);
                    let cv: Vec<i64> = (1..=2 * n as i64).map(|i| ei * i * (i - 1) / 2).collect();
                    assert_eq!(xi.coeff_valuations, cv);
                }
            }
        }
    }

    #[test]
    fn non_iwahori_rejected() {
        let g = QMatrix::from_i64(&[vec![1, 1], vec![0, 1]]);
        assert!(matches!(
            check_lemma71(&g, &TorusElement::identity(1), 3, 1, 32),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn prop74_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let consts = constants_76(&q(1), 9, 9, 3).unwrap();
        let c = consts.values.c.clone();
        let g = sample_gamma(1, 3, 6, &mut rng);
        let h = random_t_plus(1, 2, &mut rng);
        let lam = Weight::new(vec![20], 1);
        let same = prop74_check(&g, &h, 3, 1, &lam, &lam, 1, &c, DEFAULT_PRECISION).unwrap();
        assert!(same.diff_valuation.starts_with(">="));
        for m in 1..=3u32 {
            let shift = 2 * 3i64.pow(m);
            let lp = Weight::new(vec![20 + shift], 1 - shift);
            prop74_check(&g, &h, 3, 1, &lam, &lp, m, &c, DEFAULT_PRECISION).unwrap();
        }
        let small = Weight::new(vec![10], 0);
        assert!(matches!(
            prop74_check(&g, &h, 3, 1, &small, &small, 1, &c, 64),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn theorem75_and_mutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let consts = constants_76(&q(0), 9, 9, 3).unwrap();
        let c = consts.values.c.clone();
        let m = 1u32;
        let power = ceil_i64(&(q(m as i64 + 1) / &c)) as u32;
        let gs = random_geometric_side(1, 3, 2, 3, 2, &q(0), power, &mut rng).unwrap();
        let lam = Weight::new(vec![3], 0);
        let lp = Weight::new(vec![3 + 6], 0);
        let rec = theorem75_check(&gs, &gs, &lam, &lp, 9, &c, m, DEFAULT_PRECISION).unwrap();
        assert_eq!(rec.threshold, "2");
        let zero = GeometricSide { classes: gs.classes.iter().map(|(g, _)| (g.clone(), 0)).collect(), ..gs.clone() };
        let rec0 = theorem75_check(&zero, &zero, &lam, &lp, 9, &c, m, DEFAULT_PRECISION).unwrap();
        assert_eq!(rec0.diff_valuation, "+inf");
        let mutated = gs.with_coefficient_shift(0, 1);
        let r = theorem75_check(&gs, &mutated, &lam, &lam, 9, &c, m, DEFAULT_PRECISION);
        assert!(matches!(r, Err(Error::CongruenceFailed(_))), "{r:?}");
    }

    #[test]
    fn constants_examples() {
        let k = constants_76(&q(0), 9, 27, 3).unwrap();
        assert_eq!(k.values.c, qf(1, 27));
        assert_eq!(k.values.family_a, qf(1, 9));
        let k1 = constants_76(&q(1), 9, 9, 3).unwrap();
        assert_eq!(k1.values.c, qf(82, 9));
        assert_eq!(k1.values.family_a, qf(1, 82 * 9));
        // C(β) maximises 𝖺 against perturbations.
        for beta in [q(0), q(1), qf(1, 2)] {
            let c0 = constants_76(&beta, 9, 27, 3).unwrap().values;
            for d in [qf(1, 100), qf(1, 3)] {
                for c in [&c0.c + &d, &c0.c - &d] {
                    if c > Q::zero() {
                        assert!(family_a_for(&beta, 9, 27, &c) <= c0.family_a);
                    }
                }
            }
        }
    }
}
