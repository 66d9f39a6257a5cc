use dioph::bestapprox::{enumerate_best_chain, verify_chain_optimality, Kind, LatticePoint, ScanStrategy, Weights};
use dioph::construction::{check_cond1, propar_params, tc_closed_forms};
use dioph::exponents::{
    check_laurent_spectrum, check_twisted_relations, estimate_from_chain, ClauseStatus, ExponentQuadruple,
};
use dioph::murseq::{build_mu_r_sequences, signs_from_seed, BuildOptions, MuRParams, PrimeSet, SequencePair};
use dioph::rational::{parse_rational, to_exact_string};
use dioph::theta::ThetaLadder;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn small_theta() -> impl Strategy<Value = (BigRational, BigRational)> {
    (1i64..200, 1i64..200).prop_flat_map(|(d1, d2)| (0..d1, 0..d2).prop_map(move |(a, b)| (rat(a, d1), rat(b, d2))))
}

fn weights() -> impl Strategy<Value = Weights> {
    prop_oneof![
        Just(Weights::classical()),
        Just(Weights::from_i(rat(7, 10)).unwrap()),
        Just(Weights::from_i(rat(2, 3)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lambda_chains_are_monotone_and_optimal((t1, t2) in small_theta(), cap in 1u64..400, w in weights()) {
        let ladder = ThetaLadder::rational(t1, t2);
        let chain = enumerate_best_chain(Kind::Lambda, &ladder, &w, cap, ScanStrategy::Exhaustive).unwrap();
        prop_assert!(chain.check_monotone().is_ok());
        prop_assert_eq!(chain.points.first().map(|c| c.point.x0.clone()), Some(BigInt::one()));
        for c in &chain.points {
            prop_assert!(c.point.is_primitive());
        }
        let rep = verify_chain_optimality(&chain, &ladder).unwrap();
        prop_assert!(rep.min_margin.map_or(true, |m| m >= 1.0));
    }

    #[test]
    fn omega_chains_are_monotone((t1, t2) in small_theta(), cap in 1u64..25, w in weights()) {
        let ladder = ThetaLadder::rational(t1, t2);
        let chain = enumerate_best_chain(Kind::Omega, &ladder, &w, cap, ScanStrategy::Exhaustive).unwrap();
        prop_assert!(chain.check_monotone().is_ok());
        for c in &chain.points {
            prop_assert_eq!(&c.point, &c.point.canonical());
        }
    }

    #[test]
    fn uniform_estimate_below_ordinary(k1 in 1u64..40, k2 in 1u64..40, cap in 200u64..2000) {
        let ladder = ThetaLadder::sqrt_pair(k1 * k1 + 1, k1 as i64, k2 * k2 + 2, k2 as i64, 128, 2);
        let chain = enumerate_best_chain(Kind::Lambda, &ladder, &Weights::classical(), cap, ScanStrategy::Exhaustive).unwrap();
        if let Ok(rep) = estimate_from_chain(&chain, 1) {
            for r in &rep.rows {
                if let (Some(u), Some(o)) = (r.uniform_ratio, r.ordinary_ratio) {
                    prop_assert!(u <= o + r.err_bar * 2.0);
                }
            }
            if let (Some(u), Some(o)) = (rep.uniform_est, rep.ordinary_est) {
                prop_assert!(u <= o + 1e-12);
            }
        }
    }

    #[test]
    fn propar_round_trip(wh_num in 43i64..400, t_num in 1i64..100, i in prop_oneof![Just(rat(1, 2)), Just(rat(7, 10)), Just(rat(3, 5))]) {
        let w = Weights::from_i(i.clone()).unwrap();
        let wh = rat(wh_num, 10);
        prop_assume!(wh > i.clone() * rat(6, 1));
        let (r, mu) = propar_params(&w, &wh, &rat(t_num, 100)).unwrap();
        prop_assert!(check_cond1(&mu, &r, &w).passes());
        let p = tc_closed_forms(&mu, &r, &w, false).unwrap();
        prop_assert_eq!(&p.omega_hat, &wh);
        let rep = check_twisted_relations(&p.quadruple(), &w, &BigRational::zero()).unwrap();
        prop_assert!(rep.all_pass());
    }

    #[test]
    fn classical_twisted_lower_bound_matches_laurent(
        oh in 200i64..2000, om in 0i64..5000, lh in 1i64..100, l in 0i64..500
    ) {
        let oh = rat(oh, 100);
        let q = ExponentQuadruple::finite(&oh + rat(om, 100), oh, rat(lh, 100) + rat(l, 100), rat(lh, 100));
        let z = BigRational::zero();
        let a = check_laurent_spectrum(&q, &z).unwrap();
        let b = check_twisted_relations(&q, &Weights::classical(), &z).unwrap();
        let st = |r: &dioph::exponents::RelationReport, n: &str| r.clause(n).unwrap().status != ClauseStatus::Fail;
        prop_assert_eq!(st(&a, "lambda_lower"), st(&b, "lambda_lower"));
        prop_assert_eq!(st(&a, "omega_hat_at_least_2"), st(&b, "omega_hat_at_least_2"));
    }

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = rat(n, d);
        prop_assert_eq!(parse_rational(&to_exact_string(&x)).unwrap(), x);
    }

    #[test]
    fn canonical_points(x0 in -50i64..50, x1 in -50i64..50, x2 in -50i64..50) {
        let p = LatticePoint::new(x0, x1, x2);
        let c = p.canonical();
        prop_assert_eq!(&c.canonical(), &c);
        prop_assert!(c.same_up_to_sign(&p));
        prop_assert!(p.neg().same_up_to_sign(&p));
    }

    #[test]
    fn sequences_follow_their_definition(seed in any::<u64>()) {
        let params = MuRParams::new(
            PrimeSet::new(vec![2]).unwrap(),
            PrimeSet::new(vec![3]).unwrap(),
            rat(7, 1),
            rat(12, 5),
            rat(1, 1),
        )
        .unwrap();
        let (sa, sb) = signs_from_seed(seed, 4);
        let pair = build_mu_r_sequences(&params, 4, Some(&sa), Some(&sb), BuildOptions::default()).unwrap();
        for n in 1..=4 {
            // A'_n = sum_k e_n e_k A_n / A_k
            let mut s = BigInt::zero();
            for k in 1..=n {
                let t = BigInt::from(pair.a_n(n) / pair.a_n(k));
                s += t * i64::from(pair.sign_a(n) * pair.sign_a(k));
            }
            prop_assert_eq!(&s, pair.a_prime_n(n));
            prop_assert!(pair.a_n(n) % pair.a_n(n.saturating_sub(1).max(1)) == Zero::zero());
        }
        let back = SequencePair::from_json(&pair.to_json()).unwrap();
        prop_assert_eq!(back, pair);
    }
}
