//! Invariants of checking, evaluation, monomorphization and slicing over
//! generated well-typed terms. Each case draws a generator seed.

use polyrpc::propgen::{GenConfig, Generated, Generator, Weights};
use polyrpc::slice::{compile_app, gen_dispatch, Dispatch};
use polyrpc::surface::{parse, print};
use polyrpc::{
    alpha_eq, alpha_eq_type, check_mono, check_poly, eval_mono, eval_poly, mono_term, run_cs,
    slice, Fuel, Location, Term, Type, TypeEnv,
};
use proptest::prelude::*;

const FUEL: Fuel = Fuel(100_000);

fn generated(seed: u64, max_depth: usize) -> Generated {
    Generator::new(GenConfig {
        max_depth,
        seed,
        ..GenConfig::default()
    })
    .well_typed()
    .unwrap()
}

fn location_free(seed: u64) -> Generated {
    Generator::new(GenConfig {
        max_depth: 6,
        max_loc_lam_nesting: 0,
        seed,
        weights: Weights {
            labs: 0,
            lapp: 0,
            ..Weights::default()
        },
    })
    .well_typed()
    .unwrap()
}

/// Number of evaluation steps a value takes: one per pair node and leaf.
fn value_steps(v: &Term) -> u64 {
    match v {
        Term::Pair { fst, snd } => 1 + value_steps(fst) + value_steps(snd),
        _ => 1,
    }
}

fn constant() -> impl Strategy<Value = Location> {
    prop_oneof![Just(Location::Client), Just(Location::Server)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn checking_is_deterministic(seed in any::<u64>()) {
        let (m, _, at) = generated(seed, 6);
        let env = TypeEnv::new();
        prop_assert_eq!(check_poly(&env, &at, &m), check_poly(&env, &at, &m));
    }

    #[test]
    fn checkers_agree_without_location_constructs(seed in any::<u64>()) {
        let (m, ty, at) = location_free(seed);
        let env = TypeEnv::new();
        let poly = check_poly(&env, &at, &m).unwrap();
        let mono = check_mono(&env, &at, &m).unwrap();
        prop_assert!(alpha_eq_type(&poly.ty, &ty));
        prop_assert_eq!(poly, mono);
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let (m, _, at) = generated(seed, 6);
        let a = eval_poly(&m, &at, FUEL).unwrap();
        let b = eval_poly(&m, &at, FUEL).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn values_are_fixed_points(seed in any::<u64>(), at in constant()) {
        let (v, _, _) = Generator::new(GenConfig { seed, ..GenConfig::default() }).value().unwrap();
        let out = eval_poly(&v, &at, FUEL).unwrap();
        prop_assert_eq!(&out.value, &v);
        prop_assert_eq!(out.steps_used, 1);

        let mv = mono_term(&v).unwrap().output;
        let out = eval_mono(&mv, &at, FUEL).unwrap();
        prop_assert_eq!(out.steps_used, value_steps(&mv));
        prop_assert_eq!(out.value, mv);
    }

    #[test]
    fn projections_add_no_communication(seed in any::<u64>()) {
        let (m, _, at) = generated(seed, 7);
        let poly = eval_poly(&m, &at, FUEL).unwrap();
        let mono = eval_mono(&mono_term(&m).unwrap().output, &at, FUEL).unwrap();
        let p: Vec<_> = poly.remote_events().collect();
        let q: Vec<_> = mono.remote_events().collect();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn runtime_is_deterministic(seed in any::<u64>()) {
        let (m, _, _) = generated(seed, 6);
        let program = slice(&mono_term(&m).unwrap().output).unwrap();
        prop_assert_eq!(run_cs(&program, FUEL).unwrap(), run_cs(&program, FUEL).unwrap());
    }

    #[test]
    fn static_compilation_agrees_with_dispatch(at in constant(), callee in constant()) {
        let app = Term::app(Term::lam(callee.clone(), "x", Type::int(), Term::var("x")), Term::int(1));
        let compiled = compile_app(&TypeEnv::new(), &at, &app).unwrap();
        let expected = gen_dispatch(&at, &callee).unwrap();
        let actual = match compiled {
            Term::App { .. } => Dispatch::Local,
            Term::Req { .. } => Dispatch::Req,
            Term::Call { .. } => Dispatch::Call,
            other => panic!("unexpected {other:?}"),
        };
        prop_assert_eq!(actual, expected);
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let (m, _, _) = generated(seed, 7);
        prop_assert!(alpha_eq(&parse(&print(&m)).unwrap(), &m));
    }
}

#[test]
fn dispatch_is_undefined_on_variables() {
    let l = Location::var("l");
    for other in [
        Location::Client,
        Location::Server,
        Location::var("k"),
        l.clone(),
    ] {
        assert_eq!(gen_dispatch(&l, &other), None);
        assert_eq!(gen_dispatch(&other, &l), None);
    }
}

#[test]
fn location_brackets_are_distinct_from_type_brackets() {
    // `c` in a type bracket is a base type named c, never a location.
    let Term::TyApp { ty_arg, .. } = parse("f [c]").unwrap() else {
        panic!()
    };
    assert_eq!(ty_arg, Type::base("c"));
    let Term::LocApp { loc_arg, .. } = parse("f [@c]").unwrap() else {
        panic!()
    };
    assert_eq!(loc_arg, Location::Client);
}
