use std::collections::BTreeSet;
use std::fmt::Write;

use crate::ast::{Kind, Literal, Location, Name, Term, Type};
use crate::grow;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Open,
    App,
    Atom,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum TyPrec {
    Open,
    Arrow,
    Product,
    Atom,
}

/// Type variables bound by an enclosing binder print bare; free ones carry a
/// leading tick so the parser does not read them as base types.
#[derive(Default)]
struct Printer {
    out: String,
    ty_scope: Vec<Name>,
}

impl Printer {
    fn loc(&mut self, l: &Location) {
        let _ = write!(self.out, "{l}");
    }

    fn ty(&mut self, t: &Type, prec: TyPrec) {
        match t {
            Type::Base { name } => self.out.push_str(name),
            Type::TyVar { name } => {
                if !self.ty_scope.contains(name) {
                    self.out.push('\'');
                }
                self.out.push_str(name);
            }
            Type::Arrow { dom, loc, cod } => {
                self.paren_ty(prec > TyPrec::Arrow, |p| {
                    p.ty(dom, TyPrec::Product);
                    p.out.push_str(" -");
                    p.loc(loc);
                    p.out.push_str("-> ");
                    p.ty(cod, TyPrec::Arrow);
                });
            }
            Type::Product { fst, snd } => {
                self.paren_ty(prec > TyPrec::Product, |p| {
                    p.ty(fst, TyPrec::Product);
                    p.out.push_str(" * ");
                    p.ty(snd, TyPrec::Atom);
                });
            }
            Type::ForallTy { tyvar, body } => {
                self.paren_ty(prec > TyPrec::Open, |p| {
                    let _ = write!(p.out, "forall! {tyvar} . ");
                    p.ty_scope.push(tyvar.clone());
                    p.ty(body, TyPrec::Open);
                    p.ty_scope.pop();
                });
            }
            Type::ForallLoc { locvar, kind, body } => {
                self.paren_ty(prec > TyPrec::Open, |p| {
                    let _ = write!(p.out, "forall {locvar}");
                    if *kind == Kind::Dynamic {
                        p.out.push_str(" : dynamic");
                    }
                    p.out.push_str(" . ");
                    p.ty(body, TyPrec::Open);
                });
            }
        }
    }

    fn paren_ty(&mut self, wrap: bool, f: impl FnOnce(&mut Self)) {
        if wrap {
            self.out.push('(');
        }
        f(self);
        if wrap {
            self.out.push(')');
        }
    }

    fn paren(&mut self, wrap: bool, f: impl FnOnce(&mut Self)) {
        self.paren_ty(wrap, f)
    }

    fn term(&mut self, m: &Term, prec: Prec) {
        grow(|| self.term_inner(m, prec))
    }

    fn term_inner(&mut self, m: &Term, prec: Prec) {
        match m {
            Term::Var { name } => self.out.push_str(name),
            Term::Const { value } => self.literal(value),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => self.paren(prec > Prec::Open, |p| {
                let _ = write!(p.out, "\\({param}:");
                p.ty(param_type, TyPrec::Open);
                p.out.push_str(")@");
                p.loc(loc);
                p.out.push('.');
                p.term(body, Prec::Open);
            }),
            Term::TyLam { tyvar, body } => self.paren(prec > Prec::Open, |p| {
                let _ = write!(p.out, "/!\\{tyvar}.");
                p.ty_scope.push(tyvar.clone());
                p.term(body, Prec::Open);
                p.ty_scope.pop();
            }),
            Term::LocLam { locvar, kind, body } => self.paren(prec > Prec::Open, |p| {
                let _ = write!(p.out, "/\\{locvar}");
                if *kind == Kind::Dynamic {
                    p.out.push_str(":dynamic");
                }
                p.out.push('.');
                p.term(body, Prec::Open);
            }),
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => self.paren(prec > Prec::Open, |p| {
                let _ = write!(p.out, "letrec {name} : ");
                p.ty(ty, TyPrec::Open);
                p.out.push_str(" = ");
                p.term(value, Prec::Open);
                p.out.push_str(" in ");
                p.term(body, Prec::Open);
            }),
            Term::App { fun, arg } => self.paren(prec > Prec::App, |p| {
                p.term(fun, Prec::App);
                p.out.push(' ');
                p.term(arg, Prec::Atom);
            }),
            Term::TyApp { fun, ty_arg } => self.paren(prec > Prec::App, |p| {
                p.term(fun, Prec::App);
                p.out.push('[');
                p.ty(ty_arg, TyPrec::Open);
                p.out.push(']');
            }),
            Term::LocApp { fun, loc_arg } => self.paren(prec > Prec::App, |p| {
                p.term(fun, Prec::App);
                p.out.push_str("[@");
                p.loc(loc_arg);
                p.out.push(']');
            }),
            Term::Proj { index, arg } => self.paren(prec > Prec::App, |p| {
                p.out.push_str(if *index == 1 { "fst " } else { "snd " });
                p.term(arg, Prec::Atom);
            }),
            Term::Pair { fst, snd } => {
                self.out.push('(');
                self.term(fst, Prec::Open);
                self.out.push_str(", ");
                self.term(snd, Prec::Open);
                self.out.push(')');
            }
            Term::Req { fun, arg } => self.binary("req", fun, arg),
            Term::Call { fun, arg } => self.binary("call", fun, arg),
            Term::Gen { callee, fun, arg } => {
                self.out.push_str("gen[@");
                self.loc(callee);
                self.out.push(']');
                self.binary("", fun, arg);
            }
            Term::Prim { op, args } => {
                let _ = write!(self.out, "#{}(", op.name());
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.term(a, Prec::Open);
                }
                self.out.push(')');
            }
            Term::Closure {
                def,
                locs,
                tys,
                vals,
            } => {
                let _ = write!(self.out, "&{def}{{");
                let mut first = true;
                let mut sep = |p: &mut Self| {
                    if !first {
                        p.out.push_str(", ");
                    }
                    first = false;
                };
                for (l, loc) in locs {
                    sep(self);
                    let _ = write!(self.out, "@{l} = ");
                    self.loc(loc);
                }
                for (a, t) in tys {
                    sep(self);
                    let _ = write!(self.out, "!{a} = ");
                    self.ty(t, TyPrec::Open);
                }
                for (x, v) in vals {
                    sep(self);
                    let _ = write!(self.out, "{x} = ");
                    self.term(v, Prec::Open);
                }
                self.out.push('}');
            }
        }
    }

    fn binary(&mut self, head: &str, fun: &Term, arg: &Term) {
        self.out.push_str(head);
        self.out.push('(');
        self.term(fun, Prec::Open);
        self.out.push_str(", ");
        self.term(arg, Prec::Open);
        self.out.push(')');
    }

    fn literal(&mut self, lit: &Literal) {
        match lit {
            Literal::Int(n) => {
                let _ = write!(self.out, "{n}");
            }
            Literal::Str(s) => {
                self.out
                    .push_str(&serde_json::to_string(s).expect("strings always serialize"));
            }
            Literal::Unit(()) => self.out.push_str("()"),
        }
    }
}

pub fn print(m: &Term) -> String {
    let mut p = Printer::default();
    p.term(m, Prec::Open);
    p.out
}

pub fn print_type(t: &Type) -> String {
    let mut p = Printer::default();
    p.ty(t, TyPrec::Open);
    p.out
}

/// Prints a term whose free type variables `scope` will be bound by the
/// surrounding context when it is parsed back.
pub fn print_in_scope(m: &Term, scope: &BTreeSet<Name>) -> String {
    let mut p = Printer {
        ty_scope: scope.iter().cloned().collect(),
        ..Printer::default()
    };
    p.term(m, Prec::Open);
    p.out
}
