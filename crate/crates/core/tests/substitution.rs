//! Substitution laws over arbitrary (not necessarily well-typed) syntax.
//! Names come from tiny pools so that shadowing and capture are common.

use std::collections::BTreeSet;

use polyrpc::subst::{
    flv, flv_type, ftv, ftv_type, fv, subst_term, subst_term_loc, subst_term_type, subst_type_loc,
};
use polyrpc::{alpha_eq, alpha_eq_type, Kind, Location, Term, Type};
use proptest::prelude::*;

fn name(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    proptest::sample::select(pool).prop_map(str::to_string)
}

fn loc() -> impl Strategy<Value = Location> {
    prop_oneof![
        Just(Location::Client),
        Just(Location::Server),
        name(&["l", "k"]).prop_map(Location::Var),
    ]
}

fn ty() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![Just(Type::int()), name(&["a", "b"]).prop_map(Type::var),];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), loc(), inner.clone()).prop_map(|(a, l, b)| Type::arrow(a, l, b)),
            (name(&["l", "k"]), inner.clone()).prop_map(|(l, a)| Type::forall_loc(l, a)),
            (name(&["a", "b"]), inner).prop_map(|(v, a)| Type::forall_ty(v, a)),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        name(&["x", "y", "z"]).prop_map(Term::var),
        (0i64..5).prop_map(Term::int),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (loc(), name(&["x", "y", "z"]), ty(), inner.clone())
                .prop_map(|(l, x, t, b)| Term::lam(l, x, t, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (name(&["a", "b"]), inner.clone()).prop_map(|(a, b)| Term::ty_lam(a, b)),
            (inner.clone(), ty()).prop_map(|(f, t)| Term::ty_app(f, t)),
            (name(&["l", "k"]), any::<bool>(), inner.clone()).prop_map(|(l, d, b)| {
                Term::loc_lam_kinded(l, if d { Kind::Dynamic } else { Kind::Static }, b)
            }),
            (inner.clone(), loc()).prop_map(|(f, l)| Term::loc_app(f, l)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::pair(a, b)),
            (1u8..=2, inner.clone()).prop_map(|(i, m)| Term::proj(i, m)),
            (name(&["x", "y", "z"]), ty(), inner.clone(), inner)
                .prop_map(|(f, t, v, n)| Term::letrec(f, t, v, n)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn location_substitution_identity(m in term(), l in name(&["l", "k"])) {
        prop_assert!(alpha_eq(&subst_term_loc(&m, &Location::Var(l.clone()), &l), &m));
    }

    #[test]
    fn substituting_a_constant_removes_the_variable(m in term(), l in name(&["l", "k"]), server in any::<bool>()) {
        let c = if server { Location::Server } else { Location::Client };
        let mut want = flv(&m);
        want.remove(&l);
        prop_assert_eq!(flv(&subst_term_loc(&m, &c, &l)), want);
    }

    #[test]
    fn binders_shadow(
        l in loc(), x in name(&["x", "y", "z"]), t in ty(), body in term(),
        v in term(), a in name(&["a", "b"]), b in ty(), k in name(&["l", "k"]), w in loc(),
    ) {
        let lam = Term::lam(l, x.clone(), t.clone(), body.clone());
        prop_assert_eq!(subst_term(&lam, &v, &x), lam);

        let rec = Term::letrec(x.clone(), t.clone(), body.clone(), body.clone());
        prop_assert_eq!(subst_term(&rec, &v, &x), rec);

        let tlam = Term::ty_lam(a.clone(), body.clone());
        prop_assert_eq!(subst_term_type(&tlam, &b, &a), tlam);

        let llam = Term::loc_lam(k.clone(), body);
        prop_assert_eq!(subst_term_loc(&llam, &w, &k), llam);

        let forall = Type::forall_loc(k.clone(), t.clone());
        prop_assert_eq!(subst_type_loc(&forall, &w, &k), forall);
    }

    #[test]
    fn term_substitution_does_not_capture(m in term(), v in term(), x in name(&["x", "y", "z"])) {
        let m = Term::app(m, Term::var(x.clone()));
        let out = subst_term(&m, &v, &x);
        let mut want: BTreeSet<_> = fv(&m);
        want.remove(&x);
        want.extend(fv(&v));
        prop_assert_eq!(fv(&out), want);
        // Location and type variables of the substituted term stay free too.
        prop_assert!(flv(&v).is_subset(&flv(&out)));
        prop_assert!(ftv(&v).is_subset(&ftv(&out)));
    }

    #[test]
    fn location_substitution_does_not_capture(m in term(), l in name(&["l", "k"]), k in name(&["l", "k"])) {
        let m = Term::loc_app(m, Location::Var(l.clone()));
        let out = subst_term_loc(&m, &Location::Var(k.clone()), &l);
        prop_assert!(flv(&out).contains(&k));
    }

    #[test]
    fn type_substitution_does_not_capture(m in term(), a in name(&["a", "b"]), b in ty()) {
        let m = Term::ty_app(m, Type::var(a.clone()));
        let out = subst_term_type(&m, &b, &a);
        prop_assert!(ftv_type(&b).is_subset(&ftv(&out)));
        prop_assert!(flv_type(&b).is_subset(&flv(&out)));
    }

    #[test]
    fn alpha_equivalence_is_reflexive_and_renaming_invariant(m in term()) {
        prop_assert!(alpha_eq(&m, &m.clone()));
        if let Term::LocLam { locvar, kind, body } = &m {
            let fresh = "fresh_l";
            let renamed = Term::loc_lam_kinded(
                fresh,
                *kind,
                subst_term_loc(body, &Location::var(fresh), locvar),
            );
            prop_assert!(alpha_eq(&m, &renamed));
        }
    }

    #[test]
    fn json_round_trip(m in term()) {
        let back = Term::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn type_alpha_eq_is_reflexive(t in ty()) {
        prop_assert!(alpha_eq_type(&t, &t.clone()));
    }
}
