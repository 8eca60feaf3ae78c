//! Typing judgments `env |-_at M : A`.
//!
//! One syntax-directed checker serves both calculi. In polymorphic mode it
//! accepts location abstraction and application (and pairs, so selectively
//! monomorphized output can be re-checked); in monomorphic mode any location
//! variable or location binder is rejected with `PolyFormInMono`.

use std::fmt;

use crate::alpha::alpha_eq_type;
use crate::ast::{Location, Name, PrimOp, Term, TermPath, Type, TypeEnv};
use crate::grow;
use crate::subst::{
    flv, flv_env, flv_loc, flv_type, fresh_name, ftv, ftv_type, fv, subst_term_loc,
    subst_term_type, subst_type_loc, subst_type_type,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypingResult {
    pub ty: Type,
    /// Height of the derivation tree; 1 for axioms.
    pub height: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    UnboundVar,
    UnboundTyVar,
    UnboundLocVar,
    ArrowExpected,
    ForallTyExpected,
    ForallLocExpected,
    ArgMismatch,
    LocationMismatch,
    ProductExpected,
    PolyFormInMono,
    /// A binder whose body must be a value got something else.
    NotAValue,
    /// `req`/`call`/closure nodes only exist after slicing.
    SlicedForm,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind}: {detail} (at {site})")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub site: TermPath,
    pub detail: String,
}

impl TypeError {
    fn new(kind: TypeErrorKind, site: &TermPath, detail: impl Into<String>) -> Self {
        TypeError {
            kind,
            site: site.clone(),
            detail: detail.into(),
        }
    }
}

/// Caller and callee location of one application node, as fixed by the
/// typing derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppSite {
    pub path: TermPath,
    pub at: Location,
    pub callee: Location,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Poly,
    Mono,
}

struct Checker<'a> {
    mode: Mode,
    env: TypeEnv,
    sites: Option<&'a mut Vec<AppSite>>,
}

type Checked = Result<TypingResult, TypeError>;

fn ok(ty: Type, height: usize) -> Checked {
    Ok(TypingResult { ty, height })
}

impl Checker<'_> {
    fn loc_in_scope(&self, loc: &Location, path: &TermPath) -> Result<(), TypeError> {
        if let Location::Var(l) = loc {
            if self.mode == Mode::Mono {
                return Err(TypeError::new(
                    TypeErrorKind::PolyFormInMono,
                    path,
                    format!("location variable `{l}` in a monomorphic term"),
                ));
            }
            if !self.env.loc_vars.contains(l) {
                return Err(TypeError::new(
                    TypeErrorKind::UnboundLocVar,
                    path,
                    format!("location variable `{l}` is not in scope"),
                ));
            }
        }
        Ok(())
    }

    fn type_in_scope(&self, ty: &Type, path: &TermPath) -> Result<(), TypeError> {
        if self.mode == Mode::Mono && !ty.is_location_free() {
            return Err(TypeError::new(
                TypeErrorKind::PolyFormInMono,
                path,
                "location-polymorphic type in a monomorphic term",
            ));
        }
        if let Some(a) = ftv_type(ty)
            .into_iter()
            .find(|a| !self.env.ty_vars.contains(a))
        {
            return Err(TypeError::new(
                TypeErrorKind::UnboundTyVar,
                path,
                format!("type variable `{a}` is not in scope"),
            ));
        }
        if let Some(l) = flv_type(ty)
            .into_iter()
            .find(|l| !self.env.loc_vars.contains(l))
        {
            return Err(TypeError::new(
                TypeErrorKind::UnboundLocVar,
                path,
                format!("location variable `{l}` is not in scope"),
            ));
        }
        Ok(())
    }

    fn require_value(&self, v: &Term, path: &TermPath, what: &str) -> Result<(), TypeError> {
        if v.is_value() {
            Ok(())
        } else {
            Err(TypeError::new(
                TypeErrorKind::NotAValue,
                path,
                format!("the body of {what} must be a value"),
            ))
        }
    }

    fn check(&mut self, at: &Location, m: &Term, path: &TermPath) -> Checked {
        grow(|| self.check_inner(at, m, path))
    }

    fn application(
        &mut self,
        at: &Location,
        fun: &Term,
        arg: &Term,
        path: &TermPath,
    ) -> Result<(Location, Type, usize), TypeError> {
        let f = self.check(at, fun, &path.child(0))?;
        let Type::Arrow { dom, loc, cod } = f.ty else {
            return Err(TypeError::new(
                TypeErrorKind::ArrowExpected,
                path,
                "applied term does not have a function type",
            ));
        };
        let a = self.check(at, arg, &path.child(1))?;
        if !alpha_eq_type(&dom, &a.ty) {
            return Err(TypeError::new(
                TypeErrorKind::ArgMismatch,
                path,
                format!(
                    "argument has type {} but the function expects {}",
                    crate::surface::print_type(&a.ty),
                    crate::surface::print_type(&dom)
                ),
            ));
        }
        if let Some(sites) = self.sites.as_deref_mut() {
            sites.push(AppSite {
                path: path.clone(),
                at: at.clone(),
                callee: loc.clone(),
            });
        }
        Ok((loc, *cod, 1 + f.height.max(a.height)))
    }

    fn check_inner(&mut self, at: &Location, m: &Term, path: &TermPath) -> Checked {
        use TypeErrorKind::*;
        match m {
            Term::Var { name } => match self.env.lookup(name) {
                Some(ty) => ok(ty.clone(), 1),
                None => Err(TypeError::new(
                    UnboundVar,
                    path,
                    format!("variable `{name}` is not in scope"),
                )),
            },
            Term::Const { value } => ok(value.ty(), 1),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => {
                self.loc_in_scope(loc, path)?;
                self.type_in_scope(param_type, path)?;
                self.env.terms.push((param.clone(), param_type.clone()));
                let b = self.check(loc, body, &path.child(0));
                self.env.terms.pop();
                let b = b?;
                ok(
                    Type::arrow(param_type.clone(), loc.clone(), b.ty),
                    b.height + 1,
                )
            }
            Term::App { fun, arg } => {
                let (_, ty, h) = self.application(at, fun, arg, path)?;
                ok(ty, h)
            }
            Term::Gen { callee, fun, arg } => {
                self.loc_in_scope(callee, path)?;
                let (loc, ty, h) = self.application(at, fun, arg, path)?;
                if &loc != callee {
                    return Err(TypeError::new(
                        LocationMismatch,
                        path,
                        format!("gen names callee {callee} but the function runs at {loc}"),
                    ));
                }
                ok(ty, h)
            }
            Term::Req { .. } | Term::Call { .. } | Term::Closure { .. } => Err(TypeError::new(
                SlicedForm,
                path,
                "req/call/closure forms only occur in sliced programs",
            )),
            Term::TyLam { tyvar, body } => {
                self.require_value(body, path, "a type abstraction")?;
                let (tyvar, body) = if self.env.ty_vars.contains(tyvar) {
                    let mut avoid = self.env.ty_vars.clone();
                    avoid.extend(ftv(body));
                    let fresh = fresh_name(tyvar, &avoid);
                    let renamed = subst_term_type(body, &Type::var(fresh.clone()), tyvar);
                    (fresh, std::borrow::Cow::Owned(renamed))
                } else {
                    (tyvar.clone(), std::borrow::Cow::Borrowed(&**body))
                };
                self.env.ty_vars.insert(tyvar.clone());
                let b = self.check(at, &body, &path.child(0));
                self.env.ty_vars.remove(&tyvar);
                let b = b?;
                ok(Type::forall_ty(tyvar, b.ty), b.height + 1)
            }
            Term::TyApp { fun, ty_arg } => {
                self.type_in_scope(ty_arg, path)?;
                let f = self.check(at, fun, &path.child(0))?;
                let Type::ForallTy { tyvar, body } = f.ty else {
                    return Err(TypeError::new(
                        ForallTyExpected,
                        path,
                        "type application of a term without a type-polymorphic type",
                    ));
                };
                ok(subst_type_type(&body, ty_arg, &tyvar), f.height + 1)
            }
            Term::LocLam { locvar, kind, body } => {
                if self.mode == Mode::Mono {
                    return Err(TypeError::new(
                        PolyFormInMono,
                        path,
                        "location abstraction in a monomorphic term",
                    ));
                }
                self.require_value(body, path, "a location abstraction")?;
                let clash = self.env.loc_vars.contains(locvar) || flv_loc(at).contains(locvar);
                let (locvar, body) = if clash {
                    let mut avoid = self.env.loc_vars.clone();
                    avoid.extend(flv(body));
                    avoid.extend(flv_loc(at));
                    let fresh = fresh_name(locvar, &avoid);
                    let renamed = subst_term_loc(body, &Location::Var(fresh.clone()), locvar);
                    (fresh, std::borrow::Cow::Owned(renamed))
                } else {
                    (locvar.clone(), std::borrow::Cow::Borrowed(&**body))
                };
                self.env.loc_vars.insert(locvar.clone());
                let b = self.check(at, &body, &path.child(0));
                self.env.loc_vars.remove(&locvar);
                let b = b?;
                ok(Type::forall_loc_kinded(locvar, *kind, b.ty), b.height + 1)
            }
            Term::LocApp { fun, loc_arg } => {
                if self.mode == Mode::Mono {
                    return Err(TypeError::new(
                        PolyFormInMono,
                        path,
                        "location application in a monomorphic term",
                    ));
                }
                self.loc_in_scope(loc_arg, path)?;
                let f = self.check(at, fun, &path.child(0))?;
                let Type::ForallLoc { locvar, body, .. } = f.ty else {
                    return Err(TypeError::new(
                        ForallLocExpected,
                        path,
                        "location application of a term without a location-polymorphic type",
                    ));
                };
                ok(subst_type_loc(&body, loc_arg, &locvar), f.height + 1)
            }
            Term::Pair { fst, snd } => {
                let a = self.check(at, fst, &path.child(0))?;
                let b = self.check(at, snd, &path.child(1))?;
                ok(Type::product(a.ty, b.ty), 1 + a.height.max(b.height))
            }
            Term::Proj { index, arg } => {
                let p = self.check(at, arg, &path.child(0))?;
                let Type::Product { fst, snd } = p.ty else {
                    return Err(TypeError::new(
                        ProductExpected,
                        path,
                        "projection from a term without a product type",
                    ));
                };
                let ty = if *index == 1 { *fst } else { *snd };
                ok(ty, p.height + 1)
            }
            Term::Prim { op, args } => self.prim(at, *op, args, path),
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => {
                self.type_in_scope(ty, path)?;
                if !value.is_recursive_binding() {
                    return Err(TypeError::new(
                        NotAValue,
                        path,
                        format!("letrec `{name}` must bind a lambda or an abstraction over one"),
                    ));
                }
                self.env.terms.push((name.clone(), ty.clone()));
                let result = (|| {
                    let v = self.check(at, value, &path.child(0))?;
                    if !alpha_eq_type(&v.ty, ty) {
                        return Err(TypeError::new(
                            ArgMismatch,
                            path,
                            format!(
                                "letrec `{name}` is annotated {} but its value has type {}",
                                crate::surface::print_type(ty),
                                crate::surface::print_type(&v.ty)
                            ),
                        ));
                    }
                    let b = self.check(at, body, &path.child(1))?;
                    ok(b.ty, 1 + v.height.max(b.height))
                })();
                self.env.terms.pop();
                result
            }
        }
    }

    fn prim(&mut self, at: &Location, op: PrimOp, args: &[Term], path: &TermPath) -> Checked {
        if args.len() != op.arity() {
            return Err(TypeError::new(
                TypeErrorKind::ArgMismatch,
                path,
                format!("#{} takes {} arguments", op.name(), op.arity()),
            ));
        }
        let mut tys = Vec::with_capacity(args.len());
        let mut height = 0;
        for (i, a) in args.iter().enumerate() {
            let r = self.check(at, a, &path.child(i))?;
            height = height.max(r.height);
            tys.push(r.ty);
        }
        let expect = |ty: &Type, want: Type| -> Result<(), TypeError> {
            if *ty == want {
                Ok(())
            } else {
                Err(TypeError::new(
                    TypeErrorKind::ArgMismatch,
                    path,
                    format!(
                        "#{} expects {} but got {}",
                        op.name(),
                        crate::surface::print_type(&want),
                        crate::surface::print_type(ty)
                    ),
                ))
            }
        };
        let ty = match op {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mul => {
                expect(&tys[0], Type::int())?;
                expect(&tys[1], Type::int())?;
                Type::int()
            }
            PrimOp::Concat => {
                expect(&tys[0], Type::string())?;
                expect(&tys[1], Type::string())?;
                Type::string()
            }
            PrimOp::Ifz => {
                expect(&tys[0], Type::int())?;
                if !alpha_eq_type(&tys[1], &tys[2]) {
                    return Err(TypeError::new(
                        TypeErrorKind::ArgMismatch,
                        path,
                        "#ifz branches have different types",
                    ));
                }
                tys.swap_remove(1)
            }
        };
        ok(ty, height + 1)
    }
}

fn env_well_formed(mode: Mode, env: &TypeEnv, at: &Location) -> Result<(), TypeError> {
    let root = TermPath::root();
    if mode == Mode::Mono {
        if !at.is_const() {
            return Err(TypeError::new(
                TypeErrorKind::LocationMismatch,
                &root,
                format!("monomorphic judgments need a constant location, got {at}"),
            ));
        }
        if !env.loc_vars.is_empty() || env.terms.iter().any(|(_, t)| !t.is_location_free()) {
            return Err(TypeError::new(
                TypeErrorKind::PolyFormInMono,
                &root,
                "environment mentions location variables",
            ));
        }
    }
    for (x, ty) in &env.terms {
        if let Some(a) = ftv_type(ty).into_iter().find(|a| !env.ty_vars.contains(a)) {
            return Err(TypeError::new(
                TypeErrorKind::UnboundTyVar,
                &root,
                format!("type of `{x}` mentions unbound type variable `{a}`"),
            ));
        }
    }
    let mut locs = flv_env(env);
    locs.extend(flv_loc(at));
    if let Some(l) = locs.into_iter().find(|l| !env.loc_vars.contains(l)) {
        return Err(TypeError::new(
            TypeErrorKind::UnboundLocVar,
            &root,
            format!("location variable `{l}` is not in scope"),
        ));
    }
    Ok(())
}

fn run(
    mode: Mode,
    env: &TypeEnv,
    at: &Location,
    m: &Term,
    sites: Option<&mut Vec<AppSite>>,
) -> Checked {
    env_well_formed(mode, env, at)?;
    let mut checker = Checker {
        mode,
        env: env.clone(),
        sites,
    };
    checker.check(at, m, &TermPath::root())
}

/// `env |-_at m : A` in the location-polymorphic calculus.
pub fn check_poly(env: &TypeEnv, at: &Location, m: &Term) -> Checked {
    run(Mode::Poly, env, at, m, None)
}

/// `env |-_a m : A` in the pair-extended monomorphic calculus.
pub fn check_mono(env: &TypeEnv, at: &Location, m: &Term) -> Checked {
    run(Mode::Mono, env, at, m, None)
}

/// Verifies the closure conditions a judgment must satisfy before any rule
/// is applied: every free term, type and location variable of the term, of
/// the environment and of `at` is declared by the environment.
pub fn check_well_formed(env: &TypeEnv, at: &Location, m: &Term) -> Result<(), TypeError> {
    env_well_formed(Mode::Poly, env, at)?;
    let root = TermPath::root();
    let declared: std::collections::BTreeSet<&Name> = env.terms.iter().map(|(n, _)| n).collect();
    if let Some(x) = fv(m).into_iter().find(|x| !declared.contains(x)) {
        return Err(TypeError::new(
            TypeErrorKind::UnboundVar,
            &root,
            format!("variable `{x}` is not in scope"),
        ));
    }
    if let Some(a) = ftv(m).into_iter().find(|a| !env.ty_vars.contains(a)) {
        return Err(TypeError::new(
            TypeErrorKind::UnboundTyVar,
            &root,
            format!("type variable `{a}` is not in scope"),
        ));
    }
    if let Some(l) = flv(m).into_iter().find(|l| !env.loc_vars.contains(l)) {
        return Err(TypeError::new(
            TypeErrorKind::UnboundLocVar,
            &root,
            format!("location variable `{l}` is not in scope"),
        ));
    }
    Ok(())
}

/// Types `m` in polymorphic mode and returns the caller/callee pair of
/// every application. Binder names must already be distinct from those in
/// scope, otherwise the checker's renaming would make reported locations
/// refer to names that do not occur in `m`.
pub fn app_sites(env: &TypeEnv, at: &Location, m: &Term) -> Result<Vec<AppSite>, TypeError> {
    let mut sites = Vec::new();
    run(Mode::Poly, env, at, m, Some(&mut sites))?;
    Ok(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Kind;

    fn base() -> Type {
        Type::base("base")
    }

    fn c() -> Location {
        Location::Client
    }

    fn s() -> Location {
        Location::Server
    }

    fn l(n: &str) -> Location {
        Location::var(n)
    }

    fn id_at(loc: Location) -> Term {
        Term::lam(loc, "x", base(), Term::var("x"))
    }

    #[test]
    fn polymorphic_identity() {
        let m = Term::loc_lam("l", id_at(l("l")));
        let r = check_poly(&TypeEnv::new(), &c(), &m).unwrap();
        assert!(alpha_eq_type(
            &r.ty,
            &Type::forall_loc("l", Type::arrow(base(), l("l"), base()))
        ));
        assert_eq!(r.height, 3);
    }

    #[test]
    fn open_application_under_location_variables() {
        let env = TypeEnv::new()
            .with_ty_var("a")
            .with_ty_var("b")
            .with_ty_var("g2")
            .with_loc_var("l1")
            .with_loc_var("l2")
            .with_var("f", Type::arrow(Type::var("b"), l("l2"), Type::var("g2")))
            .with_var("g", Type::arrow(Type::var("a"), l("l1"), Type::var("b")))
            .with_var("x", Type::var("a"));
        let m = Term::app(Term::var("g"), Term::var("x"));
        let r = check_poly(&env, &l("l2"), &m).unwrap();
        assert_eq!(r.ty, Type::var("b"));
    }

    #[test]
    fn pairs_and_projections_in_mono() {
        let p = Term::pair(id_at(c()), id_at(s()));
        let r = check_mono(&TypeEnv::new(), &c(), &p).unwrap();
        assert_eq!(
            r.ty,
            Type::product(
                Type::arrow(base(), c(), base()),
                Type::arrow(base(), s(), base())
            )
        );
        let r = check_mono(&TypeEnv::new(), &c(), &Term::proj(1, p)).unwrap();
        assert_eq!(r.ty, Type::arrow(base(), c(), base()));
    }

    #[test]
    fn mono_rejects_location_abstraction() {
        let m = Term::loc_lam("l", id_at(l("l")));
        let e = check_mono(&TypeEnv::new(), &c(), &m).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::PolyFormInMono);
    }

    #[test]
    fn well_formedness_examples() {
        let e = check_well_formed(&TypeEnv::new(), &c(), &id_at(l("l"))).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::UnboundLocVar);
        assert!(check_well_formed(&TypeEnv::new(), &c(), &id_at(c())).is_ok());
        let e = check_well_formed(&TypeEnv::new().with_loc_var("l"), &l("l"), &Term::var("x"))
            .unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::UnboundVar);
    }

    #[test]
    fn error_kinds() {
        let env = TypeEnv::new();
        let k = |m: &Term| check_poly(&env, &c(), m).unwrap_err().kind;
        assert_eq!(
            k(&Term::app(Term::int(1), Term::int(2))),
            TypeErrorKind::ArrowExpected
        );
        assert_eq!(
            k(&Term::app(id_at(s()), Term::int(2))),
            TypeErrorKind::ArgMismatch
        );
        assert_eq!(
            k(&Term::ty_app(Term::int(1), base())),
            TypeErrorKind::ForallTyExpected
        );
        assert_eq!(
            k(&Term::loc_app(Term::int(1), c())),
            TypeErrorKind::ForallLocExpected
        );
        assert_eq!(
            k(&Term::proj(1, Term::int(1))),
            TypeErrorKind::ProductExpected
        );
        assert_eq!(
            k(&Term::ty_lam("a", Term::app(id_at(c()), Term::var("y")))),
            TypeErrorKind::NotAValue
        );
        assert_eq!(
            k(&Term::lam(c(), "x", Type::var("a"), Term::var("x"))),
            TypeErrorKind::UnboundTyVar
        );
        let e = check_poly(&env, &c(), &Term::app(Term::var("f"), Term::int(1))).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::UnboundVar);
        assert_eq!(e.site, TermPath(vec![0]));
    }

    #[test]
    fn remote_application_is_well_typed() {
        // the calculus allows any caller/callee pairing
        let m = Term::app(
            Term::lam(c(), "y", Type::int(), Term::var("y")),
            Term::app(
                Term::lam(s(), "x", Type::int(), Term::var("x")),
                Term::int(1),
            ),
        );
        assert_eq!(
            check_mono(&TypeEnv::new(), &c(), &m).unwrap().ty,
            Type::int()
        );
    }

    #[test]
    fn shadowed_location_binder_is_renamed() {
        // /\l. /\l. \x@l. x  : forall l. forall l'. base -l'-> base
        let m = Term::loc_lam("l", Term::loc_lam("l", id_at(l("l"))));
        let r = check_poly(&TypeEnv::new(), &c(), &m).unwrap();
        let expected = Type::forall_loc(
            "a",
            Type::forall_loc("b", Type::arrow(base(), l("b"), base())),
        );
        assert!(alpha_eq_type(&r.ty, &expected), "{:?}", r.ty);
    }

    #[test]
    fn location_application_substitutes() {
        let m = Term::loc_app(Term::loc_lam("l", id_at(l("l"))), s());
        let r = check_poly(&TypeEnv::new(), &c(), &m).unwrap();
        assert_eq!(r.ty, Type::arrow(base(), s(), base()));
    }

    #[test]
    fn kinds_flow_into_types() {
        let m = Term::loc_lam_kinded("l", Kind::Dynamic, id_at(l("l")));
        let r = check_poly(&TypeEnv::new(), &c(), &m).unwrap();
        assert!(matches!(
            r.ty,
            Type::ForallLoc {
                kind: Kind::Dynamic,
                ..
            }
        ));
    }

    #[test]
    fn letrec_is_typed_as_fixpoint() {
        // letrec f : int -c-> int = \n. #ifz(n, 0, f (n - 1)) in f 3
        let f_ty = Type::arrow(Type::int(), c(), Type::int());
        let body = Term::prim(
            PrimOp::Ifz,
            vec![
                Term::var("n"),
                Term::int(0),
                Term::app(
                    Term::var("f"),
                    Term::prim(PrimOp::Sub, vec![Term::var("n"), Term::int(1)]),
                ),
            ],
        );
        let m = Term::letrec(
            "f",
            f_ty.clone(),
            Term::lam(c(), "n", Type::int(), body),
            Term::app(Term::var("f"), Term::int(3)),
        );
        assert_eq!(
            check_poly(&TypeEnv::new(), &c(), &m).unwrap().ty,
            Type::int()
        );
        let bad = Term::letrec(
            "f",
            Type::int(),
            Term::lam(c(), "n", Type::int(), Term::var("n")),
            Term::var("f"),
        );
        assert_eq!(
            check_poly(&TypeEnv::new(), &c(), &bad).unwrap_err().kind,
            TypeErrorKind::ArgMismatch
        );
    }

    #[test]
    fn app_sites_report_caller_and_callee() {
        let m = Term::app(
            Term::lam(s(), "x", Type::int(), Term::var("x")),
            Term::int(1),
        );
        let sites = app_sites(&TypeEnv::new(), &c(), &m).unwrap();
        assert_eq!(
            sites,
            vec![AppSite {
                path: TermPath::root(),
                at: c(),
                callee: s()
            }]
        );
    }
}
