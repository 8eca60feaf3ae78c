//! Equality up to consistent renaming of bound variables.

use crate::ast::{Location, Name, Term, Type};
use crate::grow;

#[derive(Default)]
struct Scopes {
    terms: Vec<(Name, Name)>,
    tys: Vec<(Name, Name)>,
    locs: Vec<(Name, Name)>,
}

/// Two occurrences match if both resolve to the same binder depth, or both
/// are free with the same name.
fn same_var(scope: &[(Name, Name)], a: &str, b: &str) -> bool {
    let left = scope.iter().rposition(|(x, _)| x == a);
    let right = scope.iter().rposition(|(_, y)| y == b);
    match (left, right) {
        (Some(i), Some(j)) => i == j,
        (None, None) => a == b,
        _ => false,
    }
}

impl Scopes {
    fn loc(&self, a: &Location, b: &Location) -> bool {
        match (a, b) {
            (Location::Var(x), Location::Var(y)) => same_var(&self.locs, x, y),
            _ => a == b,
        }
    }

    fn ty(&mut self, a: &Type, b: &Type) -> bool {
        match (a, b) {
            (Type::Base { name: x }, Type::Base { name: y }) => x == y,
            (Type::TyVar { name: x }, Type::TyVar { name: y }) => same_var(&self.tys, x, y),
            (
                Type::Arrow {
                    dom: d1,
                    loc: l1,
                    cod: c1,
                },
                Type::Arrow {
                    dom: d2,
                    loc: l2,
                    cod: c2,
                },
            ) => self.loc(l1, l2) && self.ty(d1, d2) && self.ty(c1, c2),
            (Type::Product { fst: f1, snd: s1 }, Type::Product { fst: f2, snd: s2 }) => {
                self.ty(f1, f2) && self.ty(s1, s2)
            }
            (Type::ForallTy { tyvar: x, body: b1 }, Type::ForallTy { tyvar: y, body: b2 }) => {
                self.tys.push((x.clone(), y.clone()));
                let r = self.ty(b1, b2);
                self.tys.pop();
                r
            }
            (
                Type::ForallLoc {
                    locvar: x,
                    kind: k1,
                    body: b1,
                },
                Type::ForallLoc {
                    locvar: y,
                    kind: k2,
                    body: b2,
                },
            ) => {
                if k1 != k2 {
                    return false;
                }
                self.locs.push((x.clone(), y.clone()));
                let r = self.ty(b1, b2);
                self.locs.pop();
                r
            }
            _ => false,
        }
    }

    fn term(&mut self, a: &Term, b: &Term) -> bool {
        grow(|| self.term_inner(a, b))
    }

    fn term_inner(&mut self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Var { name: x }, Term::Var { name: y }) => same_var(&self.terms, x, y),
            (Term::Const { value: x }, Term::Const { value: y }) => x == y,
            (
                Term::Lam {
                    loc: l1,
                    param: x,
                    param_type: t1,
                    body: b1,
                },
                Term::Lam {
                    loc: l2,
                    param: y,
                    param_type: t2,
                    body: b2,
                },
            ) => {
                if !self.loc(l1, l2) || !self.ty(t1, t2) {
                    return false;
                }
                self.terms.push((x.clone(), y.clone()));
                let r = self.term(b1, b2);
                self.terms.pop();
                r
            }
            (
                Term::Letrec {
                    name: x,
                    ty: t1,
                    value: v1,
                    body: b1,
                },
                Term::Letrec {
                    name: y,
                    ty: t2,
                    value: v2,
                    body: b2,
                },
            ) => {
                if !self.ty(t1, t2) {
                    return false;
                }
                self.terms.push((x.clone(), y.clone()));
                let r = self.term(v1, v2) && self.term(b1, b2);
                self.terms.pop();
                r
            }
            (Term::TyLam { tyvar: x, body: b1 }, Term::TyLam { tyvar: y, body: b2 }) => {
                self.tys.push((x.clone(), y.clone()));
                let r = self.term(b1, b2);
                self.tys.pop();
                r
            }
            (
                Term::LocLam {
                    locvar: x,
                    kind: k1,
                    body: b1,
                },
                Term::LocLam {
                    locvar: y,
                    kind: k2,
                    body: b2,
                },
            ) => {
                if k1 != k2 {
                    return false;
                }
                self.locs.push((x.clone(), y.clone()));
                let r = self.term(b1, b2);
                self.locs.pop();
                r
            }
            (Term::App { fun: f1, arg: a1 }, Term::App { fun: f2, arg: a2 })
            | (Term::Req { fun: f1, arg: a1 }, Term::Req { fun: f2, arg: a2 })
            | (Term::Call { fun: f1, arg: a1 }, Term::Call { fun: f2, arg: a2 })
            | (Term::Pair { fst: f1, snd: a1 }, Term::Pair { fst: f2, snd: a2 }) => {
                self.term(f1, f2) && self.term(a1, a2)
            }
            (
                Term::Gen {
                    callee: c1,
                    fun: f1,
                    arg: a1,
                },
                Term::Gen {
                    callee: c2,
                    fun: f2,
                    arg: a2,
                },
            ) => self.loc(c1, c2) && self.term(f1, f2) && self.term(a1, a2),
            (
                Term::TyApp {
                    fun: f1,
                    ty_arg: t1,
                },
                Term::TyApp {
                    fun: f2,
                    ty_arg: t2,
                },
            ) => self.ty(t1, t2) && self.term(f1, f2),
            (
                Term::LocApp {
                    fun: f1,
                    loc_arg: l1,
                },
                Term::LocApp {
                    fun: f2,
                    loc_arg: l2,
                },
            ) => self.loc(l1, l2) && self.term(f1, f2),
            (Term::Proj { index: i, arg: a1 }, Term::Proj { index: j, arg: a2 }) => {
                i == j && self.term(a1, a2)
            }
            (Term::Prim { op: o1, args: a1 }, Term::Prim { op: o2, args: a2 }) => {
                o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| self.term(x, y))
            }
            (
                Term::Closure {
                    def: d1,
                    locs: l1,
                    tys: t1,
                    vals: v1,
                },
                Term::Closure {
                    def: d2,
                    locs: l2,
                    tys: t2,
                    vals: v2,
                },
            ) => {
                d1 == d2
                    && l1.len() == l2.len()
                    && t1.len() == t2.len()
                    && v1.len() == v2.len()
                    && l1
                        .iter()
                        .zip(l2)
                        .all(|((n1, x), (n2, y))| n1 == n2 && self.loc(x, y))
                    && t1
                        .iter()
                        .zip(t2)
                        .all(|((n1, x), (n2, y))| n1 == n2 && self.ty(x, y))
                    && v1
                        .iter()
                        .zip(v2)
                        .all(|((n1, x), (n2, y))| n1 == n2 && self.term(x, y))
            }
            _ => false,
        }
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    Scopes::default().term(a, b)
}

pub fn alpha_eq_type(a: &Type, b: &Type) -> bool {
    Scopes::default().ty(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Type {
        Type::base("base")
    }

    #[test]
    fn renamed_binders_are_equal() {
        let a = Term::lam(Location::Client, "x", base(), Term::var("x"));
        let b = Term::lam(Location::Client, "y", base(), Term::var("y"));
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn locations_must_match() {
        let a = Term::lam(Location::Client, "x", base(), Term::var("x"));
        let b = Term::lam(Location::Server, "x", base(), Term::var("x"));
        assert!(!alpha_eq(&a, &b));
    }

    #[test]
    fn location_binders_rename() {
        let a = Term::loc_lam(
            "l",
            Term::lam(Location::var("l"), "x", base(), Term::var("x")),
        );
        let b = Term::loc_lam(
            "k",
            Term::lam(Location::var("k"), "y", base(), Term::var("y")),
        );
        assert!(alpha_eq(&a, &b));
        let c = Term::loc_lam(
            "k",
            Term::lam(Location::var("l"), "y", base(), Term::var("y")),
        );
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn free_variables_compare_by_name() {
        assert!(alpha_eq(&Term::var("x"), &Term::var("x")));
        assert!(!alpha_eq(&Term::var("x"), &Term::var("y")));
        // bound vs free with the same spelling
        let a = Term::lam(Location::Client, "x", base(), Term::var("x"));
        let b = Term::lam(Location::Client, "y", base(), Term::var("x"));
        assert!(!alpha_eq(&a, &b));
    }

    #[test]
    fn nested_shadowing() {
        // \x.\x.x  ~  \a.\b.b  but not  \a.\b.a
        let a = Term::lam(
            Location::Client,
            "x",
            base(),
            Term::lam(Location::Client, "x", base(), Term::var("x")),
        );
        let b = Term::lam(
            Location::Client,
            "a",
            base(),
            Term::lam(Location::Client, "b", base(), Term::var("b")),
        );
        let c = Term::lam(
            Location::Client,
            "a",
            base(),
            Term::lam(Location::Client, "b", base(), Term::var("a")),
        );
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn types_rename_both_binder_sorts() {
        let a = Type::forall_loc(
            "l",
            Type::forall_ty(
                "a",
                Type::arrow(Type::var("a"), Location::var("l"), Type::var("a")),
            ),
        );
        let b = Type::forall_loc(
            "m",
            Type::forall_ty(
                "b",
                Type::arrow(Type::var("b"), Location::var("m"), Type::var("b")),
            ),
        );
        assert!(alpha_eq_type(&a, &b));
        let dynamic = Type::forall_loc_kinded(
            "m",
            crate::ast::Kind::Dynamic,
            Type::forall_ty(
                "b",
                Type::arrow(Type::var("b"), Location::var("m"), Type::var("b")),
            ),
        );
        assert!(!alpha_eq_type(&a, &dynamic));
    }
}
