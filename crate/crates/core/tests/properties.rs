use ehrenfest::model::{all_states, materialize, overlap, transition_prob, ProductPermutation};
use ehrenfest::special::SpecialFunctionContext;
use ehrenfest::{HittingEngine, HittingQuery, ModelParams, Rational, SeriesJet, SetDescriptor, State};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..5_000).prop_map(|(a, b)| Rational::new(a, b))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..10_000, 1i64..1_000).prop_map(|(a, b)| Rational::new(a, b))
}

fn small_params() -> impl Strategy<Value = ModelParams> {
    (2u32..=5, 1u32..=4).prop_map(|(n, m)| ModelParams::new(n, m).unwrap())
}

fn state_of(params: ModelParams) -> impl Strategy<Value = State> {
    proptest::collection::vec(1..=params.urns(), params.balls() as usize).prop_map(State::new)
}

fn descriptor_of(params: ModelParams) -> impl Strategy<Value = SetDescriptor> {
    let m = params.balls();
    let fits_distinct = m <= params.urns();
    prop_oneof![
        state_of(params).prop_map(SetDescriptor::Singleton),
        (state_of(params), state_of(params))
            .prop_filter("distinct pair", |(a, b)| a != b)
            .prop_map(|(a, b)| SetDescriptor::Pair(a, b)),
        Just(SetDescriptor::Diagonal),
        (0..=m, 1..=params.urns()).prop_map(|(overlap, urn)| SetDescriptor::Count { overlap, urn }),
        Just(if fits_distinct { SetDescriptor::Distinct } else { SetDescriptor::Diagonal }),
    ]
}

/// Random model, target and start.
fn query() -> impl Strategy<Value = HittingQuery> {
    small_params()
        .prop_flat_map(|p| (Just(p), state_of(p), descriptor_of(p)))
        .prop_map(|(p, x, d)| HittingQuery::new(p, x, &d).unwrap())
}

fn jet(order: usize) -> impl Strategy<Value = SeriesJet> {
    proptest::collection::vec(rational(), order + 1).prop_map(move |c| SeriesJet::from_coeffs(c, order))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_axioms(a in rational(), b in rational(), c in nonzero_rational()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&(&a * &c) / &c, a.clone());
        prop_assert_eq!(&c * c.recip().unwrap(), Rational::one());
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn rational_text_round_trip(a in rational()) {
        let back: Rational = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn rational_float_round_trip(x in -1e12f64..1e12) {
        prop_assert_eq!(Rational::from_f64(x).unwrap().to_f64(), x);
    }

    #[test]
    fn jet_division_inverts_multiplication(a in jet(5), mut b in jet(5), lead in nonzero_rational()) {
        b = b.add(&SeriesJet::constant(lead - b.coeff(0), 5)).unwrap();
        prop_assert_eq!(a.mul(&b).unwrap().div(&b).unwrap(), a);
    }

    #[test]
    fn jet_composition_with_identity(a in jet(6)) {
        prop_assert_eq!(a.compose(&SeriesJet::variable(6)).unwrap(), a);
    }

    #[test]
    fn jet_composition_is_a_ring_map(a in jet(4), b in jet(4), s in nonzero_rational()) {
        let inner = SeriesJet::scaled_expm1(&s, 4);
        let lhs = a.mul(&b).unwrap().compose(&inner).unwrap();
        let rhs = a.compose(&inner).unwrap().mul(&b.compose(&inner).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn descriptor_text_round_trip(d in small_params().prop_flat_map(descriptor_of)) {
        let back: SetDescriptor = d.to_string().parse().unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn kernel_rows_are_stochastic(p in small_params(), seed in any::<u64>()) {
        let states = all_states(&p);
        let x = &states[(seed % states.len() as u64) as usize];
        let total: Rational = states.iter().map(|y| transition_prob(&p, x, y).unwrap()).sum();
        prop_assert_eq!(total, Rational::one());
    }

    #[test]
    fn relabelling_preserves_overlap(
        (p, x, y) in small_params().prop_flat_map(|p| (Just(p), state_of(p), state_of(p))),
        seed in any::<u64>(),
    ) {
        let tau = ProductPermutation::random(&p, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(overlap(&x, &y).unwrap(), overlap(&tau.apply(&x), &tau.apply(&y)).unwrap());
    }

    #[test]
    fn kernel_functions_increase_with_overlap(p in small_params(), u in positive_rational()) {
        let ctx = SpecialFunctionContext::all(p);
        let n1 = Rational::from(p.urns() - 1);
        for pair in ctx.windows(2) {
            prop_assert!(pair[1].f(&u).unwrap() > pair[0].f(&u).unwrap());
        }
        for c in &ctx {
            let shifted = c.f(&u).unwrap() - (&u * &n1).recip().unwrap();
            prop_assert_eq!(c.g(&u).unwrap(), shifted);
        }
    }

    #[test]
    fn engine_moments_are_consistent(q in query()) {
        let e = HittingEngine::new(*q.params());
        let mean = e.mean(&q).unwrap();
        let var = e.variance(&q).unwrap();
        let raw = e.raw_moments(&q, 3).unwrap();
        prop_assert!(!mean.is_negative());
        prop_assert!(!var.is_negative());
        prop_assert_eq!(&raw[0], &mean);
        prop_assert_eq!(&raw[1] - &mean * &mean, var.clone());
        if q.start_in_target() {
            prop_assert!(mean.is_zero());
        } else {
            prop_assert!(mean >= Rational::one());
        }
        let ctmc = e.ctmc_stats(&q).unwrap();
        prop_assert_eq!(ctmc.mean * Rational::from(q.params().balls()), mean);
    }

    #[test]
    fn transform_is_a_decreasing_probability(q in query(), u in positive_rational(), du in positive_rational()) {
        let e = HittingEngine::new(*q.params());
        let lo = e.laplace_u(&q, &u).unwrap();
        let hi = e.laplace_u(&q, &(&u + &du)).unwrap();
        prop_assert!(lo.is_positive() && lo <= Rational::one());
        if q.start_in_target() {
            prop_assert_eq!(lo, Rational::one());
        } else {
            prop_assert!(hi < lo);
        }
    }

    #[test]
    fn every_target_member_hits_instantly(p in small_params().prop_filter("small", |p| p.state_count() <= 256), pick in any::<prop::sample::Index>()) {
        let target = materialize(&SetDescriptor::Diagonal, &p).unwrap();
        let y = pick.get(&target).clone();
        let q = HittingQuery::new(p, y, &SetDescriptor::Diagonal).unwrap();
        let e = HittingEngine::new(p);
        prop_assert!(e.mean(&q).unwrap().is_zero());
        prop_assert!(e.variance(&q).unwrap().is_zero());
    }
}
