use modpc::campaign::{congruent_weight, random_weight, run, trial_rng, ExperimentConfig, Statement, VerdictReport};
use modpc::congruence::{
    constants_76, normalized_trace, prop74_check, random_t_plus, theorem75_check, weight_at, GeometricSide,
};
use modpc::error::Error;
use modpc::padic::rational::{q, qf, Q};
use modpc::padic::DEFAULT_PRECISION;
use modpc::symplectic::{sample_gamma, TorusElement};
use modpc::transfer::{find_gap, random_lemma_instance};
use modpc::padic::ExtQ;
use num_traits::Signed;
use proptest::prelude::*;

#[test]
fn single_class_side_matches_weight_congruence() {
    // One class, b_e = 1 at a single e, f = 0: the formal side is the normalised
    // trace up to the unit λ(h).
    let mut rng = trial_rng(5, 0);
    let p = 3;
    let c = constants_76(&q(1), 9, 9, p).unwrap().values.c;
    for e in 1..=3u32 {
        let gamma = sample_gamma(1, p, 6, &mut rng);
        let h = random_t_plus(1, 2, &mut rng);
        let lam = random_weight(1, 19, 5, &mut rng);
        let lam_p = congruent_weight(&lam, p, 2, &mut rng);
        let gs = GeometricSide {
            n: 1,
            p,
            h_away: h.clone(),
            f: 0,
            classes: vec![(gamma.clone(), 1)],
            b: vec![(e, q(1))],
            beta: q(0),
        };
        let thm = theorem75_check(&gs, &gs, &lam, &lam_p, 9, &c, 2, DEFAULT_PRECISION).unwrap();
        let prop = prop74_check(&gamma, &h, p, e, &lam, &lam_p, 2, &c, DEFAULT_PRECISION).unwrap();
        assert_eq!(thm.lhs_valuation, prop.lhs_valuation, "e = {e}");
        assert_eq!(thm.rhs_valuation, prop.rhs_valuation, "e = {e}");
        let xi = modpc::congruence::check_lemma71(&gamma, &h, p, e, 64).unwrap();
        let unit = weight_at(&lam, &h).unwrap();
        assert_eq!(modpc::padic::vp(&unit, p), ExtQ::from(0));
        let norm = normalized_trace(&lam, &h, &xi).unwrap();
        let sum = norm.mul_q(&(q(1) / unit));
        let direct = modpc::weights::weyl_char_value(&lam, &xi.xi)
            .unwrap()
            .mul_q(&weight_at(&lam, &TorusElement::h_p(1, p).pow(e as i64)).unwrap());
        assert!(sum.congruent(&direct, &q(30)).unwrap());
    }
}

#[test]
fn strict_pairing_bound_is_enforced() {
    let mut rng = trial_rng(6, 0);
    let c = q(9);
    let gamma = sample_gamma(1, 3, 6, &mut rng);
    let h = TorusElement::identity(1);
    let at_bound = modpc::weights::Weight::new(vec![18], 0);
    assert!(matches!(
        prop74_check(&gamma, &h, 3, 1, &at_bound, &at_bound, 1, &c, 64),
        Err(Error::PreconditionViolated(_))
    ));
    let above = modpc::weights::Weight::new(vec![19], 0);
    prop74_check(&gamma, &h, 3, 1, &above, &above, 1, &c, 64).unwrap();
}

#[test]
fn zero_exponent_rejected() {
    let g = modpc::linalg::QMatrix::identity(2);
    assert!(matches!(
        modpc::congruence::check_lemma71(&g, &TorusElement::identity(1), 3, 0, 32),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn e_bound_grows_like_m4_log_m() {
    // With M(β) = M(β+1) = M, E(β)/(M^4 log_p M) settles towards β.
    let p = 3;
    let mut prev: Option<f64> = None;
    for m in [9u64, 27, 81, 243] {
        let k = constants_76(&q(1), m, m, p).unwrap();
        let ratio = k.e_bound.to_f64() / ((m as f64).powi(4) * (m as f64).ln() / (p as f64).ln());
        if let Some(r) = prev {
            assert!((ratio - 1.0).abs() <= (r - 1.0).abs() + 1e-9, "ratio {ratio} after {r}");
        }
        prev = Some(ratio);
    }
    assert!((prev.unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn beta_zero_constants() {
    let k = constants_76(&q(0), 4, 16, 2).unwrap();
    assert_eq!(k.values.c, qf(1, 16));
    assert_eq!(k.values.family_a, qf(1, 4));
    assert_eq!(k.values.b, q(0));
    assert_eq!(k.family_b.to_string(), "0 + -6*log_2(4)");
}

fn json_round_trip(r: &VerdictReport) {
    let text = r.to_json_pretty();
    let back: VerdictReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.body_json(), r.body_json());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
}

#[test]
fn reports_round_trip_and_are_reproducible() {
    for s in Statement::CAMPAIGNS {
        let cfg = ExperimentConfig { trials: 2, seed: 11, ..ExperimentConfig::for_statement(s) };
        let a = run(&cfg).unwrap();
        assert!(a.all_passed(), "{s}: {}", a.to_json_pretty());
        json_round_trip(&a);
        if s != Statement::Cosets52 {
            let b = run(&cfg).unwrap();
            assert_eq!(a.body_json(), b.body_json(), "{s}");
        }
    }
}

#[test]
fn digests_depend_on_seed() {
    let mut cfg = ExperimentConfig { trials: 3, ..ExperimentConfig::for_statement(Statement::Lemma71) };
    let a = run(&cfg).unwrap();
    cfg.seed = 1;
    let b = run(&cfg).unwrap();
    assert_ne!(a.records[0].digest, b.records[0].digest);
    // Trial streams are independent of how many trials run.
    cfg.trials = 1;
    let c = run(&cfg).unwrap();
    assert_eq!(c.records[0].digest, b.records[0].digest);
}

#[test]
fn config_file_shape() {
    let cfg: ExperimentConfig = serde_json::from_str(r#"{"statement":"prop74","n":2,"trials":3,"beta":"1","m_table":[["0",9]]}"#).unwrap();
    assert_eq!(cfg.statement, Statement::Prop74);
    let r = run(&cfg).unwrap();
    assert!(r.all_passed());
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus":1}"#).is_err());
    let bad = ExperimentConfig { beta: Some("-1".into()), ..cfg };
    assert!(matches!(bad.validate(), Err(Error::ConfigInvalid(_))));
}

#[test]
fn certificates_survive_more_instances() {
    for t in 0..30u64 {
        let mut rng = trial_rng(300, t as usize);
        let p = [2u64, 3, 5][(t % 3) as usize];
        let big_m = if t % 2 == 0 { p } else { p * p };
        let (inst, theta, m) = random_lemma_instance(p, big_m, 4, &mut rng).unwrap();
        let cert = modpc::transfer::build_e_theta(&inst, &theta, &m).unwrap();
        modpc::transfer::verify_e_theta(&inst, &theta, &cert).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gap_is_admissible(points in prop::collection::vec(-40i64..40, 0..6), m in 0i64..40, big_m in 2u64..10) {
        let p = 3;
        let omega: Vec<ExtQ> = points.iter().map(|&x| ExtQ::from(x)).collect();
        let c = match find_gap(&omega, &q(m), big_m, p) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        prop_assert!(c <= q(m));
        let l = modpc::padic::LogExpr::log(p, big_m);
        for w in &points {
            // |c - ω| > log_p M for every ω.
            let d: Q = (&c - q(*w)).abs();
            prop_assert!(l.lt_q(&d), "c = {} too close to {}", c, w);
        }
        // c stays within the interval the lemma allows.
        let floor = l.scale(&-(q(big_m as i64) + qf(3, 2))).add_q(&q(m));
        prop_assert!(floor.le_q(&c));
    }

    #[test]
    fn normalised_traces_are_integral(seed in 0u64..500, e in 1u32..=3, n in 1usize..=2) {
        let mut rng = trial_rng(seed, 0);
        let lam = random_weight(n, 19, 6, &mut rng);
        let gamma = sample_gamma(n, 3, 6, &mut rng);
        let h = random_t_plus(n, 2, &mut rng);
        let xi = modpc::congruence::check_lemma71(&gamma, &h, 3, e, 64).unwrap();
        let t = normalized_trace(&lam, &h, &xi).unwrap();
        prop_assert!(t.valuation_lower_bound().ge_q(&q(0)));
    }
}
