//! Free-variable computations and capture-avoiding substitutions.
//!
//! Three namespaces are kept apart: term variables, type variables and
//! location variables. Every substitution renames a binder only when the
//! replacement mentions the bound name and the substituted variable actually
//! occurs underneath it.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::ast::{Location, Name, Term, Type, TypeEnv};
use crate::grow;

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A name derived from `base` that is not in `avoid`.
///
/// Draws from a process-wide counter, so names are unique across calls; any
/// trailing `_<digits>` on `base` is dropped first to keep names short.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = match base.rfind('_') {
        Some(i)
            if i > 0 && base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() =>
        {
            &base[..i]
        }
        _ => base,
    };
    loop {
        let n = FRESH.fetch_add(1, Ordering::Relaxed);
        let candidate = format!("{stem}_{n}");
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
}

// ---------------------------------------------------------------------------
// free variables

pub fn flv_loc(loc: &Location) -> BTreeSet<Name> {
    match loc {
        Location::Var(l) => BTreeSet::from([l.clone()]),
        _ => BTreeSet::new(),
    }
}

pub fn flv_type(ty: &Type) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_flv_type(ty, &mut Vec::new(), &mut out);
    out
}

pub fn ftv_type(ty: &Type) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_ftv_type(ty, &mut Vec::new(), &mut out);
    out
}

pub fn fv(term: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_fv(term, &mut Vec::new(), &mut out);
    out
}

pub fn ftv(term: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_ftv(term, &mut Vec::new(), &mut out);
    out
}

pub fn flv(term: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_flv(term, &mut Vec::new(), &mut out);
    out
}

/// Location variables of the environment together with the free location
/// variables of every bound type.
pub fn flv_env(env: &TypeEnv) -> BTreeSet<Name> {
    let mut out = env.loc_vars.clone();
    for (_, ty) in &env.terms {
        out.extend(flv_type(ty));
    }
    out
}

fn collect_flv_loc(loc: &Location, bound: &[Name], out: &mut BTreeSet<Name>) {
    if let Location::Var(l) = loc {
        if !bound.contains(l) {
            out.insert(l.clone());
        }
    }
}

fn collect_flv_type(ty: &Type, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match ty {
        Type::Base { .. } | Type::TyVar { .. } => {}
        Type::Arrow { dom, loc, cod } => {
            collect_flv_type(dom, bound, out);
            collect_flv_loc(loc, bound, out);
            collect_flv_type(cod, bound, out);
        }
        Type::ForallTy { body, .. } => collect_flv_type(body, bound, out),
        Type::ForallLoc { locvar, body, .. } => {
            bound.push(locvar.clone());
            collect_flv_type(body, bound, out);
            bound.pop();
        }
        Type::Product { fst, snd } => {
            collect_flv_type(fst, bound, out);
            collect_flv_type(snd, bound, out);
        }
    }
}

fn collect_ftv_type(ty: &Type, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match ty {
        Type::Base { .. } => {}
        Type::TyVar { name } => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        Type::Arrow { dom, cod, .. } => {
            collect_ftv_type(dom, bound, out);
            collect_ftv_type(cod, bound, out);
        }
        Type::ForallTy { tyvar, body } => {
            bound.push(tyvar.clone());
            collect_ftv_type(body, bound, out);
            bound.pop();
        }
        Type::ForallLoc { body, .. } => collect_ftv_type(body, bound, out),
        Type::Product { fst, snd } => {
            collect_ftv_type(fst, bound, out);
            collect_ftv_type(snd, bound, out);
        }
    }
}

fn collect_fv(term: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    grow(|| match term {
        Term::Var { name } => {
            if !bound.contains(name) {
                out.insert(name.clone());
            }
        }
        Term::Lam { param, body, .. } => {
            bound.push(param.clone());
            collect_fv(body, bound, out);
            bound.pop();
        }
        Term::Letrec {
            name, value, body, ..
        } => {
            bound.push(name.clone());
            collect_fv(value, bound, out);
            collect_fv(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in term.children() {
                collect_fv(c, bound, out);
            }
        }
    })
}

fn collect_ftv(term: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    grow(|| match term {
        Term::Lam {
            param_type, body, ..
        } => {
            collect_ftv_type(param_type, bound, out);
            collect_ftv(body, bound, out);
        }
        Term::TyLam { tyvar, body } => {
            bound.push(tyvar.clone());
            collect_ftv(body, bound, out);
            bound.pop();
        }
        Term::TyApp { fun, ty_arg } => {
            collect_ftv(fun, bound, out);
            collect_ftv_type(ty_arg, bound, out);
        }
        Term::Letrec {
            ty, value, body, ..
        } => {
            collect_ftv_type(ty, bound, out);
            collect_ftv(value, bound, out);
            collect_ftv(body, bound, out);
        }
        Term::Closure { tys, vals, .. } => {
            for (_, t) in tys {
                collect_ftv_type(t, bound, out);
            }
            for (_, v) in vals {
                collect_ftv(v, bound, out);
            }
        }
        _ => {
            for c in term.children() {
                collect_ftv(c, bound, out);
            }
        }
    })
}

fn collect_flv(term: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    grow(|| match term {
        Term::Lam {
            loc,
            param_type,
            body,
            ..
        } => {
            collect_flv_loc(loc, bound, out);
            collect_flv_type(param_type, bound, out);
            collect_flv(body, bound, out);
        }
        Term::LocLam { locvar, body, .. } => {
            bound.push(locvar.clone());
            collect_flv(body, bound, out);
            bound.pop();
        }
        Term::LocApp { fun, loc_arg } => {
            collect_flv(fun, bound, out);
            collect_flv_loc(loc_arg, bound, out);
        }
        Term::TyApp { fun, ty_arg } => {
            collect_flv(fun, bound, out);
            collect_flv_type(ty_arg, bound, out);
        }
        Term::Gen { callee, fun, arg } => {
            collect_flv_loc(callee, bound, out);
            collect_flv(fun, bound, out);
            collect_flv(arg, bound, out);
        }
        Term::Letrec {
            ty, value, body, ..
        } => {
            collect_flv_type(ty, bound, out);
            collect_flv(value, bound, out);
            collect_flv(body, bound, out);
        }
        Term::Closure {
            locs, tys, vals, ..
        } => {
            for (_, l) in locs {
                collect_flv_loc(l, bound, out);
            }
            for (_, t) in tys {
                collect_flv_type(t, bound, out);
            }
            for (_, v) in vals {
                collect_flv(v, bound, out);
            }
        }
        _ => {
            for c in term.children() {
                collect_flv(c, bound, out);
            }
        }
    })
}

// ---------------------------------------------------------------------------
// substitution

enum What<'a> {
    Term(&'a Term),
    Type(&'a Type),
    Loc(&'a Location),
}

/// One pending substitution plus the free names of its replacement.
struct Sub<'a> {
    target: &'a str,
    what: What<'a>,
    fv: BTreeSet<Name>,
    ftv: BTreeSet<Name>,
    flv: BTreeSet<Name>,
}

impl<'a> Sub<'a> {
    fn for_term(v: &'a Term, x: &'a str) -> Self {
        Sub {
            target: x,
            what: What::Term(v),
            fv: fv(v),
            ftv: ftv(v),
            flv: flv(v),
        }
    }

    fn for_type(b: &'a Type, a: &'a str) -> Self {
        Sub {
            target: a,
            what: What::Type(b),
            fv: BTreeSet::new(),
            ftv: ftv_type(b),
            flv: flv_type(b),
        }
    }

    fn for_loc(loc: &'a Location, l: &'a str) -> Self {
        Sub {
            target: l,
            what: What::Loc(loc),
            fv: BTreeSet::new(),
            ftv: BTreeSet::new(),
            flv: flv_loc(loc),
        }
    }

    /// Does the substituted variable occur free in `t`?
    fn occurs_in_term(&self, t: &Term) -> bool {
        match self.what {
            What::Term(_) => fv(t).contains(self.target),
            What::Type(_) => ftv(t).contains(self.target),
            What::Loc(_) => flv(t).contains(self.target),
        }
    }

    fn occurs_in_type(&self, t: &Type) -> bool {
        match self.what {
            What::Term(_) => false,
            What::Type(_) => ftv_type(t).contains(self.target),
            What::Loc(_) => flv_type(t).contains(self.target),
        }
    }

    fn loc(&self, loc: &Location) -> Location {
        match (&self.what, loc) {
            (What::Loc(with), Location::Var(l)) if l == self.target => (*with).clone(),
            _ => loc.clone(),
        }
    }

    fn ty(&self, ty: &Type) -> Type {
        match self.what {
            What::Term(_) => ty.clone(),
            _ => self.apply_type(ty),
        }
    }

    fn apply_type(&self, ty: &Type) -> Type {
        match ty {
            Type::Base { .. } => ty.clone(),
            Type::TyVar { name } => match self.what {
                What::Type(b) if name == self.target => b.clone(),
                _ => ty.clone(),
            },
            Type::Arrow { dom, loc, cod } => {
                Type::arrow(self.apply_type(dom), self.loc(loc), self.apply_type(cod))
            }
            Type::Product { fst, snd } => Type::product(self.apply_type(fst), self.apply_type(snd)),
            Type::ForallTy { tyvar, body } => {
                if matches!(self.what, What::Type(_)) && tyvar == self.target {
                    return ty.clone();
                }
                if self.ftv.contains(tyvar) && self.occurs_in_type(body) {
                    let mut avoid = self.ftv.clone();
                    avoid.extend(ftv_type(body));
                    let fresh = fresh_name(tyvar, &avoid);
                    let renamed = subst_type_type(body, &Type::var(fresh.clone()), tyvar);
                    return Type::forall_ty(fresh, self.apply_type(&renamed));
                }
                Type::forall_ty(tyvar.clone(), self.apply_type(body))
            }
            Type::ForallLoc { locvar, kind, body } => {
                if matches!(self.what, What::Loc(_)) && locvar == self.target {
                    return ty.clone();
                }
                if self.flv.contains(locvar) && self.occurs_in_type(body) {
                    let mut avoid = self.flv.clone();
                    avoid.extend(flv_type(body));
                    let fresh = fresh_name(locvar, &avoid);
                    let renamed = subst_type_loc(body, &Location::Var(fresh.clone()), locvar);
                    return Type::forall_loc_kinded(fresh, *kind, self.apply_type(&renamed));
                }
                Type::forall_loc_kinded(locvar.clone(), *kind, self.apply_type(body))
            }
        }
    }

    fn apply(&self, t: &Term) -> Term {
        grow(|| self.apply_inner(t))
    }

    fn apply_inner(&self, t: &Term) -> Term {
        match t {
            Term::Var { name } => match self.what {
                What::Term(v) if name == self.target => v.clone(),
                _ => t.clone(),
            },
            Term::Const { .. } => t.clone(),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => {
                let loc = self.loc(loc);
                let param_type = self.ty(param_type);
                if matches!(self.what, What::Term(_)) && param == self.target {
                    return Term::lam(loc, param.clone(), param_type, (**body).clone());
                }
                if self.fv.contains(param) && self.occurs_in_term(body) {
                    let mut avoid = self.fv.clone();
                    avoid.extend(fv(body));
                    let fresh = fresh_name(param, &avoid);
                    let renamed = subst_term(body, &Term::var(fresh.clone()), param);
                    return Term::lam(loc, fresh, param_type, self.apply(&renamed));
                }
                Term::lam(loc, param.clone(), param_type, self.apply(body))
            }
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => {
                let ty = self.ty(ty);
                if matches!(self.what, What::Term(_)) && name == self.target {
                    return Term::letrec(name.clone(), ty, (**value).clone(), (**body).clone());
                }
                if self.fv.contains(name)
                    && (self.occurs_in_term(value) || self.occurs_in_term(body))
                {
                    let mut avoid = self.fv.clone();
                    avoid.extend(fv(value));
                    avoid.extend(fv(body));
                    let fresh = fresh_name(name, &avoid);
                    let v = subst_term(value, &Term::var(fresh.clone()), name);
                    let b = subst_term(body, &Term::var(fresh.clone()), name);
                    return Term::letrec(fresh, ty, self.apply(&v), self.apply(&b));
                }
                Term::letrec(name.clone(), ty, self.apply(value), self.apply(body))
            }
            Term::TyLam { tyvar, body } => {
                if matches!(self.what, What::Type(_)) && tyvar == self.target {
                    return t.clone();
                }
                if self.ftv.contains(tyvar) && self.occurs_in_term(body) {
                    let mut avoid = self.ftv.clone();
                    avoid.extend(ftv(body));
                    let fresh = fresh_name(tyvar, &avoid);
                    let renamed = subst_term_type(body, &Type::var(fresh.clone()), tyvar);
                    return Term::ty_lam(fresh, self.apply(&renamed));
                }
                Term::ty_lam(tyvar.clone(), self.apply(body))
            }
            Term::LocLam { locvar, kind, body } => {
                if matches!(self.what, What::Loc(_)) && locvar == self.target {
                    return t.clone();
                }
                if self.flv.contains(locvar) && self.occurs_in_term(body) {
                    let mut avoid = self.flv.clone();
                    avoid.extend(flv(body));
                    let fresh = fresh_name(locvar, &avoid);
                    let renamed = subst_term_loc(body, &Location::Var(fresh.clone()), locvar);
                    return Term::loc_lam_kinded(fresh, *kind, self.apply(&renamed));
                }
                Term::loc_lam_kinded(locvar.clone(), *kind, self.apply(body))
            }
            Term::App { fun, arg } => Term::app(self.apply(fun), self.apply(arg)),
            Term::Req { fun, arg } => Term::req(self.apply(fun), self.apply(arg)),
            Term::Call { fun, arg } => Term::call(self.apply(fun), self.apply(arg)),
            Term::Gen { callee, fun, arg } => {
                Term::gen(self.loc(callee), self.apply(fun), self.apply(arg))
            }
            Term::TyApp { fun, ty_arg } => Term::ty_app(self.apply(fun), self.ty(ty_arg)),
            Term::LocApp { fun, loc_arg } => Term::loc_app(self.apply(fun), self.loc(loc_arg)),
            Term::Pair { fst, snd } => Term::pair(self.apply(fst), self.apply(snd)),
            Term::Proj { index, arg } => Term::proj(*index, self.apply(arg)),
            Term::Prim { op, args } => {
                Term::prim(*op, args.iter().map(|a| self.apply(a)).collect())
            }
            Term::Closure {
                def,
                locs,
                tys,
                vals,
            } => Term::Closure {
                def: def.clone(),
                locs: locs.iter().map(|(n, l)| (n.clone(), self.loc(l))).collect(),
                tys: tys.iter().map(|(n, ty)| (n.clone(), self.ty(ty))).collect(),
                vals: vals
                    .iter()
                    .map(|(n, v)| (n.clone(), self.apply(v)))
                    .collect(),
            },
        }
    }
}

/// `Loc{with/l}`.
pub fn subst_loc(target: &Location, with: &Location, l: &str) -> Location {
    match target {
        Location::Var(v) if v == l => with.clone(),
        _ => target.clone(),
    }
}

/// `A{with/l}`.
pub fn subst_type_loc(ty: &Type, with: &Location, l: &str) -> Type {
    Sub::for_loc(with, l).apply_type(ty)
}

/// `A{with/a}`.
pub fn subst_type_type(ty: &Type, with: &Type, a: &str) -> Type {
    Sub::for_type(with, a).apply_type(ty)
}

/// `M{v/x}`. Works for any replacement term, not only values.
pub fn subst_term(m: &Term, v: &Term, x: &str) -> Term {
    Sub::for_term(v, x).apply(m)
}

/// `M{with/l}`.
pub fn subst_term_loc(m: &Term, with: &Location, l: &str) -> Term {
    Sub::for_loc(with, l).apply(m)
}

/// `M{b/a}` on every type annotation in `m`.
pub fn subst_term_type(m: &Term, b: &Type, a: &str) -> Term {
    Sub::for_type(b, a).apply(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::alpha_eq;

    fn base() -> Type {
        Type::base("base")
    }

    fn id_at(loc: Location, x: &str) -> Term {
        Term::lam(loc, x, base(), Term::var(x))
    }

    #[test]
    fn term_value_substitution_examples() {
        let v = id_at(Location::Client, "y");
        assert_eq!(subst_term(&Term::var("x"), &v, "x"), v);
        assert_eq!(subst_term(&Term::var("z"), &v, "x"), Term::var("z"));
        let shadow = id_at(Location::Client, "x");
        assert_eq!(
            subst_term(&shadow, &id_at(Location::Server, "y"), "x"),
            shadow
        );
    }

    #[test]
    fn term_value_substitution_avoids_capture() {
        // (\y. x) {y/x} must not become \y. y
        let m = Term::lam(Location::Client, "y", base(), Term::var("x"));
        let out = subst_term(&m, &Term::var("y"), "x");
        match &out {
            Term::Lam { param, body, .. } => {
                assert_ne!(param, "y");
                assert_eq!(**body, Term::var("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn term_location_substitution_examples() {
        let m = id_at(Location::var("l"), "x");
        assert_eq!(
            subst_term_loc(&m, &Location::Client, "l"),
            id_at(Location::Client, "x")
        );
        let poly = Term::loc_lam("l", id_at(Location::var("l"), "x"));
        assert_eq!(subst_term_loc(&poly, &Location::Client, "l"), poly);
        assert_eq!(
            subst_term_loc(&Term::var("x"), &Location::Server, "l"),
            Term::var("x")
        );
    }

    #[test]
    fn type_location_substitution_examples() {
        let a = Type::arrow(base(), Location::var("l"), base());
        assert_eq!(
            subst_type_loc(&a, &Location::Client, "l"),
            Type::arrow(base(), Location::Client, base())
        );
        let poly = Type::forall_loc("l", a.clone());
        assert_eq!(subst_type_loc(&poly, &Location::Server, "l"), poly);
        assert_eq!(
            subst_type_loc(&Type::var("a"), &Location::Client, "l"),
            Type::var("a")
        );
    }

    #[test]
    fn type_location_substitution_avoids_capture() {
        // (forall l2. base -l-> base -l2-> base){l2/l}
        let ty = Type::forall_loc(
            "l2",
            Type::arrow(
                base(),
                Location::var("l"),
                Type::arrow(base(), Location::var("l2"), base()),
            ),
        );
        let out = subst_type_loc(&ty, &Location::var("l2"), "l");
        let expected = Type::forall_loc(
            "k",
            Type::arrow(
                base(),
                Location::var("l2"),
                Type::arrow(base(), Location::var("k"), base()),
            ),
        );
        assert!(crate::alpha::alpha_eq_type(&out, &expected), "{out:?}");
    }

    #[test]
    fn type_type_substitution_examples() {
        assert_eq!(subst_type_type(&Type::var("a"), &base(), "a"), base());
        let shadow = Type::forall_ty("a", Type::var("a"));
        assert_eq!(subst_type_type(&shadow, &base(), "a"), shadow);
        let m = Term::lam(Location::Client, "x", Type::var("a"), Term::var("x"));
        assert_eq!(
            subst_term_type(&m, &base(), "a"),
            Term::lam(Location::Client, "x", base(), Term::var("x"))
        );
    }

    #[test]
    fn location_substitution_examples() {
        assert_eq!(
            subst_loc(&Location::Client, &Location::Server, "l"),
            Location::Client
        );
        assert_eq!(
            subst_loc(&Location::var("l"), &Location::Client, "l"),
            Location::Client
        );
        assert_eq!(
            subst_loc(&Location::var("l2"), &Location::Client, "l"),
            Location::var("l2")
        );
    }

    #[test]
    fn free_location_variables() {
        assert!(flv_loc(&Location::Client).is_empty());
        let a = Type::arrow(base(), Location::var("l"), base());
        assert_eq!(flv_type(&a), BTreeSet::from(["l".to_string()]));
        assert!(flv_type(&Type::forall_loc("l", a)).is_empty());
        let env = TypeEnv::new()
            .with_loc_var("l1")
            .with_var("f", Type::arrow(base(), Location::var("l2"), base()));
        assert_eq!(
            flv_env(&env),
            BTreeSet::from(["l1".to_string(), "l2".to_string()])
        );
    }

    #[test]
    fn closure_captures_are_substituted_not_bound() {
        let clo = Term::Closure {
            def: "f_1".into(),
            locs: vec![("l".into(), Location::var("l"))],
            tys: vec![("a".into(), Type::var("a"))],
            vals: vec![("y".into(), Term::var("y"))],
        };
        let out = subst_term(&clo, &Term::int(3), "y");
        let out = subst_term_type(&out, &Type::int(), "a");
        let out = subst_term_loc(&out, &Location::Server, "l");
        assert_eq!(
            out,
            Term::Closure {
                def: "f_1".into(),
                locs: vec![("l".into(), Location::Server)],
                tys: vec![("a".into(), Type::int())],
                vals: vec![("y".into(), Term::int(3))],
            }
        );
        assert!(alpha_eq(&out, &out));
    }
}
