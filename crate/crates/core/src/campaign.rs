//! Seeded experiment campaigns over every verification engine, with JSON and
//! CSV reports.

use std::str::FromStr;
use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::characters::GeneratorSet;
use crate::congruence::{
    check_lemma71, constants_76, family_a_for, prop74_check, random_geometric_side, random_t_plus, theorem75_check,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hecke::AlgebraElement;
use crate::linalg::QMatrix;
use crate::padic::rational::{ceil_i64, fmt_q, floor_i64, p_pow, parse_q, q, qf, require_prime, Q};
use crate::padic::{LogExpr, DEFAULT_PRECISION};
use crate::slope::{
    check_lemma33, constructed_family, pipeline_37, random_slope_module, trace_congruence_34, MBound, PipelineParams,
};
use crate::symplectic::cosets::{check_product_identity, coset_reps_check, predicted_count_h_p, CosetSpace};
use crate::symplectic::{all_roots, j_matrix, sample_gamma, TorusElement};
use crate::transfer::{
    build_e_theta, build_family, random_family_fixture, random_hypothesis_instance, random_lemma_instance,
    random_probes, transfer_map, verify_e_theta, verify_family,
};
use crate::weights::Weight;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement {
    Lemma71,
    Prop74,
    Thm75,
    Lemma23,
    Transfer24,
    Family19,
    Slope34,
    Pipeline37,
    Cosets52,
    Constants76,
    All,
}

impl Statement {
    /// Every runnable campaign, in suite order.
    pub const CAMPAIGNS: [Statement; 10] = [
        Statement::Lemma71,
        Statement::Prop74,
        Statement::Thm75,
        Statement::Lemma23,
        Statement::Transfer24,
        Statement::Family19,
        Statement::Slope34,
        Statement::Pipeline37,
        Statement::Cosets52,
        Statement::Constants76,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Statement::Lemma71 => "lemma71",
            Statement::Prop74 => "prop74",
            Statement::Thm75 => "thm75",
            Statement::Lemma23 => "lemma23",
            Statement::Transfer24 => "transfer24",
            Statement::Family19 => "family19",
            Statement::Slope34 => "slope34",
            Statement::Pipeline37 => "pipeline37",
            Statement::Cosets52 => "cosets52",
            Statement::Constants76 => "constants76",
            Statement::All => "all",
        }
    }
}

impl FromStr for Statement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statement::CAMPAIGNS
            .iter()
            .chain(std::iter::once(&Statement::All))
            .find(|x| x.id() == s)
            .copied()
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown statement {s:?}")))
    }
}

impl std::fmt::Display for Statement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// One campaign.  Output locations and the execution mode are not echoed into
/// reports, so report bodies depend only on the experiment itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub statement: Statement,
    pub n: usize,
    pub p: u64,
    pub trials: usize,
    pub seed: u64,
    pub precision: u32,
    /// Fixed `e`; cycles through the statement's range when absent.
    pub e: Option<u32>,
    /// Fixed `m`; cycles through `1..=3` when absent.
    pub m: Option<u32>,
    /// Slope bound `β` as a rational string.
    pub beta: Option<String>,
    /// Override for the constant `C` of the weight congruences.
    pub c: Option<String>,
    /// `M`-table as `(start, value)` pairs; defaults per statement.
    pub m_table: Option<Vec<(String, u64)>>,
    /// Width of the range random pairings are drawn from.
    pub weight_span: i64,
    /// Corrupt each instance before checking it.
    pub mutate: bool,
    #[serde(skip_serializing)]
    pub exec: Exec,
    #[serde(skip_serializing)]
    pub out: Option<String>,
    #[serde(skip_serializing)]
    pub csv: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            statement: Statement::Lemma71,
            n: 1,
            p: 3,
            trials: 10,
            seed: 0,
            precision: DEFAULT_PRECISION,
            e: None,
            m: None,
            beta: None,
            c: None,
            m_table: None,
            weight_span: 10,
            mutate: false,
            exec: Exec::Parallel,
            out: None,
            csv: None,
        }
    }
}

impl ExperimentConfig {
    /// Defaults sized for each statement's acceptance campaign.
    pub fn for_statement(statement: Statement) -> Self {
        let base = ExperimentConfig { statement, ..Default::default() };
        match statement {
            Statement::Lemma71 => ExperimentConfig { trials: 100, ..base },
            Statement::Prop74 => ExperimentConfig { trials: 75, ..base },
            Statement::Thm75 => ExperimentConfig { trials: 20, ..base },
            Statement::Lemma23 => ExperimentConfig { trials: 200, ..base },
            Statement::Transfer24 => ExperimentConfig { trials: 50, ..base },
            Statement::Family19 => ExperimentConfig { p: 5, trials: 5, ..base },
            Statement::Slope34 => ExperimentConfig { trials: 100, ..base },
            Statement::Pipeline37 => ExperimentConfig { p: 5, trials: 2, ..base },
            Statement::Cosets52 => ExperimentConfig { trials: 2, ..base },
            Statement::Constants76 => ExperimentConfig { trials: 4, ..base },
            Statement::All => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::ConfigInvalid(s));
        if require_prime(self.p).is_err() {
            return bad(format!("p = {} is not prime", self.p));
        }
        if !(1..=3).contains(&self.n) {
            return bad(format!("n = {} outside 1..=3", self.n));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.precision < 8 {
            return bad("precision must be at least 8".into());
        }
        if self.weight_span < 1 {
            return bad("weight_span must be positive".into());
        }
        if self.e == Some(0) {
            return bad("e must be at least 1".into());
        }
        self.beta()?;
        self.c_override()?;
        self.m_bound()?;
        match self.statement {
            Statement::Family19 if self.p < 5 => bad("family19 needs p >= 5".into()),
            Statement::Pipeline37 if self.p != 5 => bad("pipeline37 runs on its p = 5 family".into()),
            Statement::Slope34 if self.p != 3 => bad("slope34 runs on p = 3 modules".into()),
            Statement::Cosets52 if self.n > 2 => bad("cosets52 enumerates n <= 2 only".into()),
            Statement::Transfer24 | Statement::Lemma23 | Statement::Family19 | Statement::Slope34 | Statement::Pipeline37
                if self.n != 1 =>
            {
                bad(format!("{} does not use n; leave it at 1", self.statement))
            }
            _ => Ok(()),
        }
    }

    fn beta(&self) -> Result<Option<Q>> {
        match &self.beta {
            None => Ok(None),
            Some(s) => {
                let b = parse_q(s).map_err(|e| Error::ConfigInvalid(format!("beta: {e}")))?;
                if b < Q::zero() {
                    return Err(Error::ConfigInvalid("beta must be non-negative".into()));
                }
                Ok(Some(b))
            }
        }
    }

    fn c_override(&self) -> Result<Option<Q>> {
        match &self.c {
            None => Ok(None),
            Some(s) => {
                let c = parse_q(s).map_err(|e| Error::ConfigInvalid(format!("C: {e}")))?;
                if c <= Q::zero() {
                    return Err(Error::ConfigInvalid("C must be positive".into()));
                }
                Ok(Some(c))
            }
        }
    }

    fn m_bound(&self) -> Result<Option<MBound>> {
        let Some(t) = &self.m_table else { return Ok(None) };
        let steps = t
            .iter()
            .map(|(s, v)| parse_q(s).map(|x| (x, *v)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::ConfigInvalid(format!("m_table: {e}")))?;
        MBound::table(steps).map(Some).map_err(|e| Error::ConfigInvalid(format!("m_table: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialError {
    pub kind: String,
    pub message: String,
    pub falsification: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// sha256 of the trial's generated inputs.
    pub digest: String,
    pub valuation: String,
    pub threshold: String,
    pub margin: Option<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<TrialError>,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub passed: usize,
    pub falsifications: usize,
    pub operational_errors: usize,
    pub min_margin: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub schema: u32,
    pub statement: Statement,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<Timing>,
}

impl VerdictReport {
    pub fn has_falsification(&self) -> bool {
        self.aggregate.falsifications > 0
    }

    pub fn all_passed(&self) -> bool {
        self.aggregate.passed == self.aggregate.trials
    }

    /// The report without timing, as compact JSON.
    pub fn body_json(&self) -> String {
        let body = VerdictReport { timing: None, ..self.clone() };
        serde_json::to_string(&body).expect("report serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `(trial, valuation, threshold, margin, pass)` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["trial", "valuation", "threshold", "margin", "pass"]).map_err(io)?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.valuation.clone(),
                r.threshold.clone(),
                r.margin.clone().unwrap_or_default(),
                r.pass.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Per-trial generator: independent of trial order and thread count.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn digest(v: &Value) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(v).expect("inputs serialize")))
}

struct Measured {
    valuation: String,
    threshold: String,
    margin: Option<LogExpr>,
    detail: Value,
}

impl Measured {
    fn exact(valuation: String, threshold: String, margin: Option<Q>, p: u64, detail: Value) -> Self {
        Measured { valuation, threshold, margin: margin.map(|m| LogExpr::rational(m, p)), detail }
    }
}

/// Parsed view of a validated config.
struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    beta: Option<Q>,
    mb: Option<MBound>,
}

impl Ctx<'_> {
    fn m_bound_or(&self, default: MBound) -> MBound {
        self.mb.clone().unwrap_or(default)
    }

    fn cycle_m(&self, trial: usize) -> u32 {
        self.cfg.m.unwrap_or(1 + (trial % 3) as u32)
    }

    /// A prime other than `p` for the torus part away from `p`.
    fn ell(&self) -> u64 {
        if self.cfg.p == 2 {
            3
        } else {
            2
        }
    }
}

fn mat_json(m: &QMatrix) -> Value {
    json!((0..m.rows()).map(|i| m.row(i).iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn torus_json(t: &TorusElement) -> Value {
    json!(t.diagonal().iter().map(fmt_q).collect::<Vec<_>>())
}

/// A dominant weight whose simple pairings lie in `min..min+span`.
pub fn random_weight<R: Rng>(n: usize, min: i64, span: i64, rng: &mut R) -> Weight {
    let mut eps = Vec::with_capacity(n);
    let mut acc = 0;
    for _ in 0..n {
        acc += rng.gen_range(min..min + span);
        eps.push(acc);
    }
    Weight::new(eps, rng.gen_range(-5..=5))
}

/// `λ + (p-1)p^m δ` with `δ` dominant and non-zero.
pub fn congruent_weight<R: Rng>(lambda: &Weight, p: u64, m: u32, rng: &mut R) -> Weight {
    let k = (p as i64 - 1) * (p as i64).pow(m);
    let mut d = Vec::with_capacity(lambda.n());
    let mut acc = rng.gen_range(1..=2);
    for i in 0..lambda.n() {
        if i > 0 {
            acc += rng.gen_range(0..=1);
        }
        d.push(acc);
    }
    lambda.add(&Weight::new(d, rng.gen_range(-2..=2)).scale(k))
}

fn margin_from(valuation: &str, threshold: &Q) -> Option<Q> {
    let v = valuation.strip_prefix(">=").unwrap_or(valuation);
    parse_q(v).ok().map(|v| v - threshold)
}

fn lemma71_trial(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let (n, p) = (ctx.cfg.n, ctx.cfg.p);
    let e = ctx.cfg.e.unwrap_or(1 + (trial % 3) as u32);
    let gamma = sample_gamma(n, p, 8, rng);
    let h = random_t_plus(n, ctx.ell(), rng);
    let inputs = json!({ "n": n, "p": p, "e": e, "gamma": mat_json(&gamma), "h": torus_json(&h) });
    let res = check_lemma71(&gamma, &h, p, e, ctx.cfg.precision).map(|xi| {
        let want: Vec<i64> = (1..=2 * n as i64).map(|i| e as i64 * i * (i - 1) / 2).collect();
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        Measured::exact(join(&xi.coeff_valuations), join(&want), Some(Q::zero()), p, json!(xi.summary()))
    });
    (inputs, res)
}

fn prop74_constant(ctx: &Ctx) -> Result<(Q, Q)> {
    let p = ctx.cfg.p;
    let beta = ctx.beta.clone().unwrap_or_else(|| q(1));
    let mb = ctx.m_bound_or(MBound::constant(p * p));
    if let Some(c) = ctx.cfg.c_override()? {
        return Ok((beta, c));
    }
    let k = constants_76(&beta, mb.at(&beta), mb.at(&(&beta + q(1))), p)?;
    Ok((beta, k.values.c))
}

fn prop74_trial(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let (n, p) = (ctx.cfg.n, ctx.cfg.p);
    let m = ctx.cycle_m(trial);
    let e = ctx.cfg.e.unwrap_or(1 + ((trial / 3) % 3) as u32);
    let (beta, c) = match prop74_constant(ctx) {
        Ok(x) => x,
        Err(err) => return (json!({ "trial": trial }), Err(err)),
    };
    let min_pairing = floor_i64(&(q(2) * &c)) + 1;
    let lambda = random_weight(n, min_pairing, ctx.cfg.weight_span, rng);
    let lambda_p = congruent_weight(&lambda, p, m, rng);
    let gamma = sample_gamma(n, p, 6, rng);
    let h = random_t_plus(n, ctx.ell(), rng);
    let inputs = json!({
        "n": n, "p": p, "e": e, "m": m, "beta": fmt_q(&beta), "C": fmt_q(&c),
        "lambda": lambda, "lambda_prime": lambda_p, "gamma": mat_json(&gamma), "h": torus_json(&h),
    });
    let res = prop74_check(&gamma, &h, p, e, &lambda, &lambda_p, m, &c, ctx.cfg.precision).and_then(|r| {
        let thr = parse_q(&r.threshold)?;
        let margin = margin_from(&r.diff_valuation, &thr);
        Ok(Measured::exact(r.diff_valuation.clone(), r.threshold.clone(), margin, p, json!(r)))
    });
    (inputs, res)
}

fn thm75_trial(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let (n, p) = (ctx.cfg.n, ctx.cfg.p);
    let m = ctx.cycle_m(trial);
    let beta = ctx.beta.clone().unwrap_or_else(|| q((trial % 2) as i64));
    let mb = ctx.m_bound_or(MBound::constant(p * p));
    let (m_beta, m_beta1) = (mb.at(&beta), mb.at(&(&beta + q(1))));
    let build = |rng: &mut ChaCha8Rng| -> Result<(Value, Box<dyn FnOnce() -> Result<Measured>>)> {
        let c = constants_76(&beta, m_beta, m_beta1, p)?.values.c;
        let power = ceil_i64(&(q(m as i64 + 1) / &c)).max(1) as u32;
        let t = rng.gen_range(1..=2usize.min(m_beta as usize));
        let gs = random_geometric_side(n, p, if p == 2 { 3 } else { 2 }, 3, t, &beta, power, rng)?;
        let lambda = random_weight(n, floor_i64(&(q(2) * &c)) + 1, ctx.cfg.weight_span, rng);
        let (gs_p, lambda_p) = if ctx.cfg.mutate {
            (gs.with_coefficient_shift(0, 1), lambda.clone())
        } else {
            (gs.clone(), congruent_weight(&lambda, p, m, rng))
        };
        let inputs = json!({
            "n": n, "p": p, "m": m, "beta": fmt_q(&beta), "M": m_beta, "C": fmt_q(&c),
            "lambda": lambda, "lambda_prime": lambda_p, "f": gs.f, "h": torus_json(&gs.h_away),
            "classes": gs.classes.iter().map(|(g, c)| json!({ "gamma": mat_json(g), "c": c })).collect::<Vec<_>>(),
            "classes_prime": gs_p.classes.iter().map(|(_, c)| *c).collect::<Vec<_>>(),
            "b": gs.b.iter().map(|(e, b)| json!([e, fmt_q(b)])).collect::<Vec<_>>(),
        });
        let prec = ctx.cfg.precision;
        let run = move || {
            let r = theorem75_check(&gs, &gs_p, &lambda, &lambda_p, m_beta, &c, m, prec)?;
            let thr = parse_q(&r.threshold)?;
            let margin = margin_from(&r.diff_valuation, &thr);
            Ok(Measured::exact(r.diff_valuation.clone(), r.threshold.clone(), margin, p, json!(r)))
        };
        Ok((inputs, Box::new(run)))
    };
    match build(rng) {
        Ok((inputs, run)) => (inputs, run()),
        Err(e) => (json!({ "trial": trial }), Err(e)),
    }
}

fn lemma23_trial(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let p = ctx.cfg.p;
    let big_m = match &ctx.mb {
        Some(mb) => mb.at(&Q::zero()),
        None if trial % 2 == 0 => p,
        None => p * p,
    };
    let (inst, theta, m) = match random_lemma_instance(p, big_m, 4, rng) {
        Ok(x) => x,
        Err(e) => return (json!({ "trial": trial, "M": big_m }), Err(e)),
    };
    let inputs = json!({
        "p": p, "M": big_m, "m": fmt_q(&m), "theta": theta.to_json(),
        "h": inst.h.summary(), "h_prime": inst.h_prime.summary(), "phi": inst.phi.assignment(),
    });
    let res = build_e_theta(&inst, &theta, &m).and_then(|cert| verify_e_theta(&inst, &theta, &cert)).map(|r| {
        let margin = match (parse_q(&r.xi_bound), parse_q(&r.xi_valuation)) {
            (Ok(b), Ok(v)) => Some(b - v),
            _ => None,
        };
        Measured::exact(r.xi_valuation.clone(), r.xi_bound.clone(), margin, p, json!(r))
    });
    (inputs, res)
}

/// Even `M` for the transfer statements.
pub fn transfer_m(p: u64) -> u64 {
    if p == 2 {
        4
    } else {
        2 * p
    }
}

/// Exponent of the built-in trace hypothesis.
pub const HYPOTHESIS_EXPONENT: i64 = 40;

fn transfer24_trial(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let p = ctx.cfg.p;
    let big_m = ctx.mb.as_ref().map_or_else(|| transfer_m(p), |mb| mb.at(&Q::zero()));
    let s = q(HYPOTHESIS_EXPONENT);
    let inst = random_hypothesis_instance(p, big_m, HYPOTHESIS_EXPONENT, rng).and_then(|inst| {
        if ctx.cfg.mutate {
            inst.with_mutated_h_prime(0, 0, &p_pow(p, 2), rng)
        } else {
            Ok(inst)
        }
    });
    let inst = match inst {
        Ok(i) => i,
        Err(e) => return (json!({ "trial": trial, "M": big_m }), Err(e)),
    };
    let probes = random_probes(inst.h_prime.generators(), 3, rng);
    let inputs = json!({
        "p": p, "M": big_m, "s": fmt_q(&s), "mutated": ctx.cfg.mutate,
        "h": inst.h.summary(), "h_prime": inst.h_prime.summary(), "phi": inst.phi.assignment(),
        "probes": probes.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>(),
    });
    let res = transfer_map(&inst, &s, &probes).map(|verdicts| {
        let worst = verdicts
            .iter()
            .map(|v| {
                let floor = LogExpr::new(
                    &s / q(big_m as i64),
                    -q(big_m as i64 + 2),
                    p,
                    big_m,
                );
                (floor.neg().add_q(&v.c_value), v)
            })
            .min_by(|a, b| a.0.cmp_expr(&b.0));
        let (margin, valuation, threshold) = match worst {
            Some((m, v)) => (Some(m), v.c.clone(), v.c_floor.clone()),
            None => (None, "-".into(), "-".into()),
        };
        Measured { valuation, threshold, margin, detail: json!(verdicts) }
    });
    (inputs, res)
}

fn family19_trial(ctx: &Ctx, _trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let p = ctx.cfg.p;
    let (weights, modules) = match random_family_fixture(p, rng) {
        Ok(x) => x,
        Err(e) => return (json!({ "p": p }), Err(e)),
    };
    let chars = modules[0].eigencharacters();
    let theta0 = chars[rng.gen_range(0..chars.len())].0.clone();
    let corrupt = rng.gen_range(1..weights.len());
    let inputs = json!({
        "p": p, "weights": weights, "theta0": theta0.to_json(), "mutated": ctx.cfg.mutate,
        "modules": modules.iter().map(|m| m.summary()).collect::<Vec<_>>(),
    });
    let (a, b) = (q(1), LogExpr::rational(Q::zero(), p));
    let res = build_family(&weights, &modules, &theta0, 0, &a, &b).and_then(|mut fam| {
        if ctx.cfg.mutate {
            let v: Vec<Q> = fam[corrupt].values().iter().enumerate().map(|(i, x)| if i == 0 { x + q(1) } else { x.clone() }).collect();
            fam[corrupt] = fam[corrupt].with_values(v)?;
        }
        let r = verify_family(&weights, &fam, &a, &b)?;
        Ok(Measured {
            valuation: format!("{} pairs", r.pairs_checked),
            threshold: "(w+1)".into(),
            margin: r.min_margin.clone(),
            detail: json!(r),
        })
    });
    (inputs, res)
}

fn slope34_trial(ctx: &Ctx, trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let g = GeneratorSet::numbered("T", 2);
    let alphas = [q(0), q(1), qf(3, 2)];
    let alpha = alphas[trial % 3].clone();
    let mb = ctx.m_bound_or(MBound::table(vec![(q(0), 8), (q(1), 12), (q(2), 16)]).expect("valid table"));
    let pair = random_slope_module(&g, rng).and_then(|h| Ok((h, random_slope_module(&g, rng)?)));
    let (h, hp) = match pair {
        Ok(x) => x,
        Err(e) => return (json!({ "trial": trial }), Err(e)),
    };
    let inputs = json!({ "alpha": fmt_q(&alpha), "h": h.summary(), "h_prime": hp.summary() });
    let x = AlgebraElement::generator(g.clone(), 1);
    let res = check_lemma33(&h, &hp, 0, &alpha, &mb, 3).and_then(|l33| {
        let mut worst: Option<(Q, String, String)> = None;
        let mut traces = Vec::new();
        for l in 1..=10 {
            for r in trace_congruence_34(&h, &hp, 0, &x, &alpha, l, &mb)? {
                let thr = parse_q(&r.threshold)?;
                if let Some(mg) = margin_from(&r.valuation, &thr) {
                    if worst.as_ref().map_or(true, |w| mg < w.0) {
                        worst = Some((mg, r.valuation.clone(), r.threshold.clone()));
                    }
                }
                traces.push(r);
            }
        }
        let (margin, valuation, threshold) = match worst {
            Some((m, v, t)) => (Some(m), v, t),
            None => (None, "+inf".into(), "-".into()),
        };
        Ok(Measured::exact(valuation, threshold, margin, 3, json!({ "lemma33": l33, "traces": traces })))
    });
    (inputs, res)
}

fn pipeline37_trial(ctx: &Ctx, _trial: usize, rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let fam = constructed_family(rng, !ctx.cfg.mutate).and_then(|(w, mut mods)| {
        if ctx.cfg.mutate {
            // Drop the slope-1 block at one weight: a dimension jump inside a class.
            let gens = mods[1].generators().clone();
            let mut blocks = mods[1].blocks().to_vec();
            blocks.retain(|b| crate::padic::vp(b.character.value(0), 5) != crate::padic::ExtQ::from(1));
            mods[1] = crate::hecke::SyntheticHeckeModule::synth(5, gens, blocks, rng)?;
        }
        Ok((w, mods))
    });
    let (weights, modules) = match fam {
        Ok(x) => x,
        Err(e) => return (json!({ "mutated": ctx.cfg.mutate }), Err(e)),
    };
    let inputs = json!({
        "weights": weights, "mutated": ctx.cfg.mutate,
        "modules": modules.iter().map(|m| m.summary()).collect::<Vec<_>>(),
    });
    let mb = ctx.m_bound_or(MBound::constant(12));
    let params = PipelineParams { alpha: q(1), a_prime: q(6), a: q(1), b: q(-1) };
    let res = pipeline_37(&weights, &modules, 0, &params, &mb, 0, 4, Exec::Sequential).map(|r| Measured {
        valuation: format!("{} constancy pairs", r.constancy_pairs),
        threshold: format!("D = {}", r.d),
        margin: r.family.as_ref().and_then(|f| f.min_margin.clone()),
        detail: json!(r),
    });
    (inputs, res)
}

/// `X_α` satisfies `X^T J + J X = 0` and `X^2 = 0`, so every `exp(t X_α)` is symplectic.
pub fn root_table_symplectic(n: usize) -> Result<usize> {
    let j = j_matrix(n);
    let roots = all_roots(n);
    for r in &roots {
        let x = r.x_alpha(n);
        if !x.transpose().mul(&j).add(&j.mul(&x)).is_zero() || !x.mul(&x).is_zero() {
            return Err(Error::IdentityFailed(format!("root generator {} is not symplectic", r.label())));
        }
    }
    Ok(roots.len())
}

fn cosets52_trial(ctx: &Ctx, trial: usize, _rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let (n, p) = (ctx.cfg.n, ctx.cfg.p);
    let e = ctx.cfg.e.unwrap_or(1 + (trial % 2) as u32);
    let inputs = json!({ "n": n, "p": p, "e": e });
    let res = (|| {
        let hp = TorusElement::h_p(n, p);
        let s = hp.pow(e as i64);
        let space = CosetSpace::new(&s, p)?;
        let rep = coset_reps_check(&space, 2000)?;
        let predicted = predicted_count_h_p(n, p, e);
        if rep.cardinality != predicted || rep.distinct_keys as u128 != predicted {
            return Err(Error::IdentityFailed(format!("{} cosets, predicted {predicted}", rep.distinct_keys)));
        }
        // V_{h_p^e} = Ad(h_p^{-1})(V_{h_p^{e-1}}) V_{h_p}
        let product = check_product_identity(&hp.pow(e as i64 - 1), &hp, p)?;
        if !product.equal {
            return Err(Error::IdentityFailed(format!("product identity failed: {product:?}")));
        }
        let roots = root_table_symplectic(n)?;
        Ok(Measured::exact(
            rep.distinct_keys.to_string(),
            predicted.to_string(),
            Some(Q::zero()),
            p,
            json!({ "cosets": rep, "product": product, "roots_checked": roots }),
        ))
    })();
    (inputs, res)
}

fn constants76_trial(ctx: &Ctx, trial: usize, _rng: &mut ChaCha8Rng) -> (Value, Result<Measured>) {
    let p = ctx.cfg.p;
    let beta = ctx.beta.clone().unwrap_or_else(|| qf(trial as i64, 2));
    let mb = ctx.m_bound_or(MBound::constant(p * p));
    let (mb0, mb1) = (mb.at(&beta), mb.at(&(&beta + q(1))));
    let inputs = json!({ "beta": fmt_q(&beta), "M": mb0, "M1": mb1, "p": p });
    let res = constants_76(&beta, mb0, mb1, p).and_then(|k| {
        let c = &k.values.c;
        let mut best_other: Option<Q> = None;
        for d in [qf(1, 100), qf(1, 3), q(1)] {
            for other in [c + &d, c - &d] {
                if other > Q::zero() {
                    let a = family_a_for(&beta, mb0, mb1, &other);
                    best_other = Some(best_other.map_or(a.clone(), |b| std::cmp::max(b, a)));
                }
            }
        }
        let best_other = best_other.expect("C + d is always positive");
        if best_other > k.values.family_a {
            return Err(Error::PropertyFailed(format!(
                "a perturbed C gives a = {} above {}",
                fmt_q(&best_other),
                k.family_a
            )));
        }
        let margin = &k.values.family_a - &best_other;
        Ok(Measured::exact(k.family_a.clone(), fmt_q(&best_other), Some(margin), p, json!(k)))
    });
    (inputs, res)
}

type TrialFn = fn(&Ctx, usize, &mut ChaCha8Rng) -> (Value, Result<Measured>);

fn trial_fn(s: Statement) -> TrialFn {
    match s {
        Statement::Lemma71 => lemma71_trial,
        Statement::Prop74 => prop74_trial,
        Statement::Thm75 => thm75_trial,
        Statement::Lemma23 => lemma23_trial,
        Statement::Transfer24 => transfer24_trial,
        Statement::Family19 => family19_trial,
        Statement::Slope34 => slope34_trial,
        Statement::Pipeline37 => pipeline37_trial,
        Statement::Cosets52 => cosets52_trial,
        Statement::Constants76 => constants76_trial,
        Statement::All => unreachable!("suites go through run_all"),
    }
}

/// Run one campaign.  Engine errors are recorded per trial; only an invalid
/// configuration aborts.
pub fn run(config: &ExperimentConfig) -> Result<VerdictReport> {
    config.validate()?;
    if config.statement == Statement::All {
        return Err(Error::ConfigInvalid("use run_all for the full suite".into()));
    }
    let ctx = Ctx { cfg: config, beta: config.beta()?, mb: config.m_bound()? };
    let f = trial_fn(config.statement);
    let start = Instant::now();
    let idx: Vec<usize> = (0..config.trials).collect();
    let outcomes = config.exec.map(&idx, |&t| {
        let mut rng = trial_rng(config.seed, t);
        let (inputs, res) = f(&ctx, t, &mut rng);
        (t, digest(&inputs), res)
    });
    let mut records = Vec::with_capacity(outcomes.len());
    let mut min_margin: Option<(Q, LogExpr)> = None;
    for (trial, digest, res) in outcomes {
        records.push(match res {
            Ok(m) => {
                if let Some(mg) = &m.margin {
                    let low = mg.lower_rational(&qf(1, 1_000_000));
                    if min_margin.as_ref().map_or(true, |(l, _)| low < *l) {
                        min_margin = Some((low, mg.clone()));
                    }
                }
                TrialRecord {
                    trial,
                    digest,
                    valuation: m.valuation,
                    threshold: m.threshold,
                    margin: m.margin.map(|x| x.to_string()),
                    pass: true,
                    error: None,
                    detail: m.detail,
                }
            }
            Err(e) => TrialRecord {
                trial,
                digest,
                valuation: "-".into(),
                threshold: "-".into(),
                margin: None,
                pass: false,
                error: Some(TrialError { kind: e.kind().into(), message: e.to_string(), falsification: e.is_falsification() }),
                detail: Value::Null,
            },
        });
    }
    let falsifications = records.iter().filter(|r| r.error.as_ref().is_some_and(|e| e.falsification)).count();
    let passed = records.iter().filter(|r| r.pass).count();
    let aggregate = Aggregate {
        trials: records.len(),
        passed,
        falsifications,
        operational_errors: records.len() - passed - falsifications,
        min_margin: min_margin.map(|(_, m)| m.to_string()),
    };
    Ok(VerdictReport {
        schema: SCHEMA,
        statement: config.statement,
        config: config.clone(),
        records,
        aggregate,
        timing: Some(Timing { wall_ms: start.elapsed().as_millis() }),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub statements: Vec<Statement>,
    pub seed: u64,
    pub precision: u32,
    /// Caps every campaign's trial count.
    pub max_trials: Option<usize>,
    pub mutate: bool,
    #[serde(skip_serializing)]
    pub exec: Exec,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            statements: Statement::CAMPAIGNS.to_vec(),
            seed: 0,
            precision: DEFAULT_PRECISION,
            max_trials: None,
            mutate: false,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub schema: u32,
    pub reports: Vec<VerdictReport>,
    pub falsifications: usize,
    pub passed: bool,
}

impl SuiteSummary {
    pub fn has_falsification(&self) -> bool {
        self.falsifications > 0
    }
}

/// Each campaign at its default sizes, with the suite's seed and limits.
pub fn run_all(suite: &SuiteConfig) -> Result<SuiteSummary> {
    let mut reports = Vec::new();
    for &s in suite.statements.iter().filter(|s| **s != Statement::All) {
        let mut cfg = ExperimentConfig::for_statement(s);
        cfg.seed = suite.seed;
        cfg.precision = suite.precision;
        cfg.exec = suite.exec;
        cfg.mutate = suite.mutate;
        if let Some(t) = suite.max_trials {
            cfg.trials = cfg.trials.min(t.max(1));
        }
        reports.push(run(&cfg)?);
    }
    let falsifications = reports.iter().map(|r| r.aggregate.falsifications).sum();
    let passed = reports.iter().all(VerdictReport::all_passed);
    Ok(SuiteSummary { schema: SCHEMA, reports, falsifications, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: Statement, trials: usize) -> ExperimentConfig {
        ExperimentConfig { trials, ..ExperimentConfig::for_statement(s) }
    }

    #[test]
    fn single_lemma71_trial() {
        let c = ExperimentConfig { trials: 1, seed: 0, ..ExperimentConfig::for_statement(Statement::Lemma71) };
        let r = run(&c).unwrap();
        assert_eq!(r.records.len(), 1);
        assert!(r.records[0].pass);
        assert_eq!(r.schema, 1);
    }

    #[test]
    fn deterministic_bodies() {
        for s in [Statement::Lemma71, Statement::Prop74, Statement::Lemma23] {
            let mut c = cfg(s, 6);
            c.exec = Exec::Parallel;
            let a = run(&c).unwrap();
            c.exec = Exec::Sequential;
            let b = run(&c).unwrap();
            assert_eq!(a.body_json(), b.body_json());
        }
    }

    #[test]
    fn config_limits() {
        let bad = ExperimentConfig { n: 4, ..Default::default() };
        assert!(matches!(run(&bad), Err(Error::ConfigInvalid(_))));
        let bad = ExperimentConfig { p: 9, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::ConfigInvalid(_))));
        let bad = ExperimentConfig { trials: 0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::ConfigInvalid(_))));
        assert_eq!("thm75".parse::<Statement>().unwrap(), Statement::Thm75);
        assert!("lemma99".parse::<Statement>().is_err());
    }

    #[test]
    fn empty_suite_passes() {
        let s = run_all(&SuiteConfig { statements: vec![], ..Default::default() }).unwrap();
        assert!(s.passed && !s.has_falsification());
    }

    #[test]
    fn mutated_transfer_is_falsified() {
        let mut c = cfg(Statement::Transfer24, 4);
        c.mutate = true;
        let r = run(&c).unwrap();
        assert!(r.has_falsification(), "{}", r.to_json_pretty());
    }

    #[test]
    fn csv_has_one_row_per_trial() {
        let r = run(&cfg(Statement::Constants76, 3)).unwrap();
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("trial,valuation,threshold,margin,pass"));
    }

    #[test]
    fn weight_helpers() {
        let mut rng = trial_rng(1, 0);
        for n in 1..=3 {
            let l = random_weight(n, 19, 5, &mut rng);
            assert!(l.is_dominant() && l.min_simple_pairing() >= 19);
            let lp = congruent_weight(&l, 3, 2, &mut rng);
            assert!(lp.is_dominant() && lp.min_simple_pairing() >= 19);
            assert!(crate::weights::weights_congruent(&l, &lp, 3, 2));
        }
    }
}
