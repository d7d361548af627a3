//! Acceptance suite: one PASS/FAIL line per criterion.  Runs without the
//! libtest harness so the lines are always visible under `cargo test`.

use std::process::ExitCode;

use modpc::campaign::{run, ExperimentConfig, Statement, VerdictReport};
use modpc::congruence::{check_lemma71, random_t_plus, scaled_h_p_inverse};
use modpc::linalg::QMatrix;
use modpc::padic::rational::{q, vp, ExtQ, Q};
use modpc::padic::LogExpr;
use modpc::symplectic::sample_gamma;
use modpc::transfer::random_lemma_instance;
use modpc::weights::{weyl_char_value, TorusPoint, Weight};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = std::result::Result<String, String>;

fn campaign(s: Statement, f: impl FnOnce(&mut ExperimentConfig)) -> Result<VerdictReport, String> {
    let mut cfg = ExperimentConfig::for_statement(s);
    f(&mut cfg);
    let r = run(&cfg).map_err(|e| e.to_string())?;
    if !r.all_passed() {
        let bad: Vec<String> = r
            .records
            .iter()
            .filter(|x| !x.pass)
            .take(3)
            .map(|x| format!("trial {}: {:?}", x.trial, x.error))
            .collect();
        return Err(format!("{} of {} trials failed: {}", r.aggregate.trials - r.aggregate.passed, r.aggregate.trials, bad.join("; ")));
    }
    Ok(r)
}

/// Characteristic polynomial by Faddeev-LeVerrier, as `[c_0, ..., c_n]` with `c_n = 1`.
fn charpoly_fl(a: &QMatrix) -> Vec<Q> {
    let n = a.rows();
    let mut c = vec![Q::zero(); n + 1];
    c[n] = Q::one();
    let mut m = QMatrix::zeros(n, n);
    for k in 1..=n {
        m = a.mul(&m).add(&QMatrix::scalar(n, &c[n + 1 - k]));
        c[n - k] = -a.mul(&m).trace() / q(k as i64);
    }
    c
}

fn criterion1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut count = 0;
    for n in 1..=3usize {
        for p in [3u64, 5] {
            for e in 1..=3u32 {
                for _ in 0..100 {
                    let gamma = sample_gamma(n, p, 8, &mut rng);
                    let h = random_t_plus(n, 2, &mut rng);
                    let xi = check_lemma71(&gamma, &h, p, e, 64).map_err(|err| format!("n={n} p={p} e={e}: {err}"))?;
                    let a = h.inverse().matrix().mul(&scaled_h_p_inverse(n, p, e)).mul(&gamma.inverse().unwrap());
                    let c = charpoly_fl(&a);
                    for i in 1..=2 * n {
                        let want = (e as usize * i * (i - 1) / 2) as i64;
                        if vp(&c[2 * n - i], p) != ExtQ::from(want) || xi.coeff_valuations[i - 1] != want {
                            return Err(format!("n={n} p={p} e={e}: v_p(c_{i}) != {want}"));
                        }
                    }
                    let slopes: Vec<Q> = (0..2 * n as i64).map(|k| q(k * e as i64)).collect();
                    if xi.slopes != slopes {
                        return Err(format!("n={n} p={p} e={e}: slopes {:?}", xi.slopes));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} samples over 18 cells"))
}

fn criterion2() -> Check {
    let mut total = 0;
    for n in 1..=2 {
        for m in 1..=3 {
            let r = campaign(Statement::Prop74, |c| {
                c.n = n;
                c.m = Some(m);
                c.trials = 25;
                c.seed = 74 + n as u64;
                c.m_table = Some(vec![("0".into(), 9)]);
            })?;
            total += r.records.len();
        }
    }
    Ok(format!("{total} weight pairs, every difference above min(m+1, Ce), every side p-integral"))
}

fn criterion3() -> Check {
    let mut total = 0;
    let mut tight = 0;
    for beta in ["0", "1"] {
        let r = campaign(Statement::Thm75, |c| {
            c.beta = Some(beta.into());
            c.trials = 20;
            c.seed = 75;
        })?;
        total += r.records.len();
        tight += r.records.iter().filter(|x| x.margin.as_deref() == Some("0")).count();
    }
    Ok(format!("{total} geometric sides (beta 0 and 1), {tight} at the bound exactly"))
}

fn criterion4() -> Check {
    let mut total = 0;
    for p in [2u64, 3, 5] {
        let r = campaign(Statement::Lemma23, |c| {
            c.p = p;
            c.trials = if p == 3 { 100 } else { 50 };
            c.seed = 23;
        })?;
        for rec in &r.records {
            let d = &rec.detail;
            let c = modpc::padic::rational::parse_q(d["c"].as_str().unwrap()).unwrap();
            let m = modpc::padic::rational::parse_q(d["m"].as_str().unwrap()).unwrap();
            if c > m {
                return Err(format!("p={p} trial {}: c above m", rec.trial));
            }
        }
        total += r.records.len();
    }
    Ok(format!("{total} certificates with M in {{p, p^2}}"))
}

fn criterion5() -> Check {
    let mut chars = 0;
    for p in [2u64, 3, 5] {
        let r = campaign(Statement::Transfer24, |c| {
            c.p = p;
            c.trials = 40;
            c.seed = 24;
        })?;
        for rec in &r.records {
            for v in rec.detail.as_array().unwrap() {
                if v["mult_h"] != v["mult_h_prime"] {
                    return Err(format!("p={p} trial {}: multiplicities differ", rec.trial));
                }
                chars += 1;
            }
        }
    }
    Ok(format!("{chars} eigencharacters, multiplicities and both routes agree"))
}

fn criterion6() -> Check {
    let r = campaign(Statement::Family19, |c| {
        c.trials = 8;
        c.seed = 19;
    })?;
    let mut pairs = 0;
    for rec in &r.records {
        let d = &rec.detail;
        if d["weights"].as_u64() < Some(12) || d["classes"].as_u64() < Some(2) {
            return Err(format!("trial {}: family too small", rec.trial));
        }
        pairs += d["pairs_checked"].as_u64().unwrap();
    }
    Ok(format!("{pairs} same-class pairs over {} families", r.records.len()))
}

fn criterion7() -> Check {
    let r = campaign(Statement::Slope34, |c| {
        c.trials = 100;
        c.seed = 34;
    })?;
    let traces: usize = r.records.iter().map(|x| x.detail["traces"].as_array().unwrap().len()).sum();
    let pipe = campaign(Statement::Pipeline37, |c| {
        c.trials = 2;
        c.seed = 37;
    })?;
    // ā = min(2·6/12, 1) = 1, b = -1: D = (log_5 12 + 1)/1 - 1.
    let d = LogExpr::new(q(0), q(1), 5, 12).to_string();
    for rec in &pipe.records {
        if rec.detail["d"].as_str() != Some(d.as_str()) {
            return Err(format!("D = {}, expected {d}", rec.detail["d"]));
        }
        if rec.detail["constancy_pairs"].as_u64() == Some(0) {
            return Err("no constancy pairs were checked".into());
        }
    }
    Ok(format!("{} module pairs, {traces} trace congruences; pipeline D = {d}", r.records.len()))
}

fn criterion8() -> Check {
    let mut cells = Vec::new();
    for n in 1..=2usize {
        for e in 1..=2u32 {
            let r = campaign(Statement::Cosets52, |c| {
                c.n = n;
                c.e = Some(e);
                c.trials = 1;
            })?;
            let rec = &r.records[0];
            // Sum of heights of the positive roots of type C_n.
            let heights = (n * (n + 1) * (4 * n - 1) / 6) as u32;
            let want = 3u128.pow(e * heights);
            let got: u128 = rec.detail["cosets"]["distinct_keys"].as_u64().unwrap() as u128;
            if got != want || rec.detail["product"]["equal"] != Value::Bool(true) {
                return Err(format!("n={n} e={e}: {got} cosets, expected {want}"));
            }
            cells.push(format!("n={n},e={e}:{got}"));
        }
    }
    Ok(cells.join(" "))
}

fn criterion9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut points = 0;
    for k in 0..=10i64 {
        for _ in 0..5 {
            let c = rng.gen_range(-3..=3);
            let x = q(rng.gen_range(2..30)) / q(rng.gen_range(1..7));
            let nu = q(rng.gen_range(1..20));
            if (&x * &x) == nu {
                continue;
            }
            let t = TorusPoint::new(vec![x.clone()], nu.clone());
            let got = weyl_char_value(&Weight::new(vec![k], c), &t).map_err(|e| e.to_string())?;
            // Weights of L_λ are λ - jα with α(t) = x²/ν.
            let want: Q = (0..=k).map(|j| x.pow((k - 2 * j) as i32) * nu.pow((c + j) as i32)).sum();
            if got != want {
                return Err(format!("k={k}: Weyl formula {got} vs symmetric power {want}"));
            }
            points += 1;
        }
    }
    let mut inst = 0;
    for t in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + t);
        let p = [2u64, 3, 5][t as usize % 3];
        let (i, _, _) = random_lemma_instance(p, p * p, 4, &mut rng).map_err(|e| e.to_string())?;
        i.h.verify_against_oracle().map_err(|e| format!("instance {t}: {e}"))?;
        i.h_prime.verify_against_oracle().map_err(|e| format!("instance {t}: {e}"))?;
        inst += 1;
    }
    Ok(format!("{points} character values, {inst} instances"))
}

fn criterion10() -> Check {
    let mut flips = Vec::new();
    for (s, f) in [
        (Statement::Transfer24, Box::new(|c: &mut ExperimentConfig| c.trials = 20) as Box<dyn Fn(&mut ExperimentConfig)>),
        (Statement::Thm75, Box::new(|c: &mut ExperimentConfig| {
            c.trials = 20;
            c.beta = Some("0".into());
        })),
    ] {
        let mut cfg = ExperimentConfig::for_statement(s);
        f(&mut cfg);
        let clean = run(&cfg).map_err(|e| e.to_string())?;
        cfg.mutate = true;
        let dirty = run(&cfg).map_err(|e| e.to_string())?;
        if !clean.all_passed() {
            return Err(format!("{s}: unmutated campaign failed"));
        }
        let flipped = dirty.records.iter().filter(|r| r.error.as_ref().is_some_and(|e| e.falsification)).count();
        if flipped == 0 {
            return Err(format!("{s}: mutation never detected"));
        }
        flips.push(format!("{s} {flipped}/{}", dirty.records.len()));
    }
    Ok(format!("verdicts flipped: {}", flips.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("char-poly valuations and Newton slopes", criterion1),
        ("weight congruences of normalised traces", criterion2),
        ("geometric-side comparison", criterion3),
        ("e(Θ) certificates", criterion4),
        ("transfer criterion and multiplicities", criterion5),
        ("family builder", criterion6),
        ("idempotents, trace congruences, pipeline", criterion7),
        ("coset combinatorics", criterion8),
        ("oracle agreement", criterion9),
        ("mutation sensitivity", criterion10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        match f() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({:.1}s)", i + 1, start.elapsed().as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
