use modpc::padic::rational::{q, Q};
use modpc::weights::{weights_congruent, weyl_char_value, TorusPoint, Weight, WeylElement};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn dominant(n: usize) -> impl Strategy<Value = Weight> {
    (prop::collection::vec(0i64..6, n), -3i64..3).prop_map(|(steps, c)| {
        let mut acc = 0;
        let eps = steps
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        Weight::new(eps, c)
    })
}

fn point(n: usize) -> impl Strategy<Value = TorusPoint<Q>> {
    (prop::collection::vec(2i64..40, n), 1i64..40).prop_map(|(xs, nu)| TorusPoint::new(xs.into_iter().map(q).collect(), q(nu)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn character_is_weyl_invariant((lam, t) in (1usize..=2).prop_flat_map(|n| (dominant(n), point(n)))) {
        if t.check_regular().is_err() {
            return Ok(());
        }
        let v = weyl_char_value(&lam, &t).unwrap();
        for w in WeylElement::all(t.n()) {
            let wt = w.act_point(&t).unwrap();
            prop_assert_eq!(&weyl_char_value(&lam, &wt).unwrap(), &v);
        }
    }

    #[test]
    fn trivial_weight_has_trace_one(n in 1usize..=3, t in (1usize..=3).prop_flat_map(point)) {
        if t.n() != n || t.check_regular().is_err() {
            return Ok(());
        }
        prop_assert!(weyl_char_value(&Weight::zero(n), &t).unwrap().is_one());
    }

    #[test]
    fn dimension_at_central_limit(k in 0i64..12) {
        // At ν = 1 the n = 1 character is the palindromic sum Σ x^(k-2j).
        let t = TorusPoint::new(vec![q(2)], q(1));
        let want: Q = (0..=k).map(|j| q(2).pow((k - 2 * j) as i32)).sum();
        prop_assert_eq!(weyl_char_value(&Weight::new(vec![k], 0), &t).unwrap(), want);
    }

    #[test]
    fn congruence_is_an_equivalence(a in dominant(2), d in prop::collection::vec(-3i64..3, 3), p in prop::sample::select(vec![3u64, 5]), m in 0u32..3) {
        let k = (p as i64 - 1) * (p as i64).pow(m);
        let b = a.add(&Weight::new(vec![d[0] * k, d[1] * k], d[2] * k));
        prop_assert!(weights_congruent(&a, &a, p, m));
        prop_assert!(weights_congruent(&a, &b, p, m));
        prop_assert!(weights_congruent(&b, &a, p, m));
        let c = b.add(&Weight::new(vec![1, 0], 0));
        prop_assert!(!weights_congruent(&a, &c, p, m));
    }
}

#[test]
fn zero_character_sum_vanishes_nowhere_on_small_points() {
    // The Weyl denominator is never zero at a certified regular point.
    for x in 2..10 {
        for nu in 1..10 {
            let t = TorusPoint::new(vec![q(x)], q(nu));
            if t.check_regular().is_ok() {
                assert!(!t.weyl_denominator().unwrap().is_zero());
            }
        }
    }
}
