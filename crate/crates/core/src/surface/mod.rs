//! Concrete syntax.
//!
//! ```text
//! M ::= \(x : A) @ Loc . M          -- lambda; `\(x:A) (y:B) @Loc. M` nests
//!     | /\ l [: static|dynamic] . V  -- `/\ l, k . V` nests
//!     | /!\ a . V
//!     | letrec f : A = V in M
//!     | M N | M [@ Loc ...] | M [A] | fst M | snd M
//!     | (M, N) | () | 42 | "text" | #add(M, N) | #ifz(M, N, P)
//!     | req(M, N) | call(M, N) | gen[@Loc](M, N) | &f{@l = Loc, !a = A, x = V}
//! A ::= base | a | 'a | A -Loc-> A | A * A | forall l [: kind] . A | forall! a . A
//! ```
//!
//! A bare identifier in a type is a type variable when an enclosing binder
//! introduces it and a base type otherwise. `'a` is always a type variable.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use crate::ast::{Name, Term, TermPath, Type};
pub use printer::{print, print_in_scope, print_type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: ParseError: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

/// Source positions shaped like the term: `kids` follows [`Term::children`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub pos: Pos,
    pub kids: Vec<SpanTree>,
}

impl SpanTree {
    /// Position of the node at `path`, or of its deepest known ancestor.
    pub fn position(&self, path: &TermPath) -> Pos {
        let mut cur = self;
        for &i in &path.0 {
            match cur.kids.get(i) {
                Some(k) => cur = k,
                None => break,
            }
        }
        cur.pos
    }
}

/// A parsed `.prpc` file.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
    pub term: Term,
    pub spans: SpanTree,
}

impl SourceFile {
    pub fn parse(path: impl Into<String>, text: impl Into<String>) -> Result<Self, ParseError> {
        let text = text.into();
        let (term, spans) = parse_with_spans(&text)?;
        Ok(SourceFile {
            path: path.into(),
            text,
            term,
            spans,
        })
    }

    pub fn position(&self, path: &TermPath) -> Pos {
        self.spans.position(path)
    }
}

/// A sliced program file: named definitions and an optional entry term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<(Name, Term)>,
    pub main: Option<Term>,
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    parse_with_spans(text).map(|(m, _)| m)
}

pub fn parse_with_spans(text: &str) -> Result<(Term, SpanTree), ParseError> {
    let mut p = parser::Parser::new(text)?;
    let out = p.term()?;
    p.expect_eof()?;
    Ok(out)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = parser::Parser::new(text)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parser::Parser::new(text)?.program()
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (name, m) in &p.defs {
        out.push_str(&format!("def {name} = {};\n", print(m)));
    }
    if let Some(m) = &p.main {
        out.push_str(&format!("main = {};\n", print(m)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{alpha_eq, alpha_eq_type};
    use crate::ast::{Kind, Location, PrimOp};

    fn base() -> Type {
        Type::base("base")
    }

    fn round_trip(m: &Term) {
        let text = print(m);
        let back = parse(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert!(alpha_eq(m, &back), "{text}\n{back:?}");
    }

    #[test]
    fn polymorphic_identity() {
        let m = parse(r"/\l . \(x : base) @ l . x").unwrap();
        let want = Term::loc_lam(
            "l",
            Term::lam(Location::var("l"), "x", base(), Term::var("x")),
        );
        assert_eq!(m, want);
        round_trip(&want);
    }

    #[test]
    fn bracket_forms_are_disjoint() {
        assert_eq!(
            parse("m [@c]").unwrap(),
            Term::loc_app(Term::var("m"), Location::Client)
        );
        assert_eq!(
            parse("m [base]").unwrap(),
            Term::ty_app(Term::var("m"), base())
        );
        assert_eq!(parse("m [@c s]").unwrap(), parse("m [@c][@s]").unwrap());
        assert_eq!(parse("m [@c, s]").unwrap(), parse("m[@c][@s]").unwrap());
    }

    #[test]
    fn composition_sugar() {
        let m = parse(
            r"/\l1, l2. /!\a, b, g.
                \(f : b -l2-> g) @l2. \(h : a -l1-> b) @l2. \(x : a) @l2. f (h x)",
        )
        .unwrap();
        let Term::LocLam { body, .. } = &m else {
            panic!()
        };
        let Term::LocLam { body, .. } = &**body else {
            panic!()
        };
        let Term::TyLam { tyvar, .. } = &**body else {
            panic!()
        };
        assert_eq!(tyvar, "a");
        round_trip(&m);
    }

    #[test]
    fn type_variables_follow_binders() {
        let t = parse_type("forall! a . a -c-> base").unwrap();
        assert_eq!(
            t,
            Type::forall_ty("a", Type::arrow(Type::var("a"), Location::Client, base()))
        );
        assert_eq!(parse_type("'a").unwrap(), Type::var("a"));
        assert_eq!(parse_type("a").unwrap(), Type::base("a"));
        let t = parse_type("forall l : dynamic . int * int -l-> string").unwrap();
        assert!(alpha_eq_type(
            &t,
            &Type::forall_loc_kinded(
                "l",
                Kind::Dynamic,
                Type::arrow(
                    Type::product(Type::int(), Type::int()),
                    Location::var("l"),
                    Type::string()
                )
            )
        ));
    }

    #[test]
    fn misc_forms_round_trip() {
        let ms = [
            "letrec f : int -s-> int = \\(n:int)@s.#ifz(n, 0, f #sub(n, 1)) in f 3",
            "fst (1, \"two\") (snd p)",
            "req(&f{@l = c, !a = int, y = 3}, ())",
            "gen[@l](g, x)",
            "call(h, -5)",
            "/\\l:dynamic.\\(x:'a)@l.x",
            "(\\(x:int)@c.x) ((\\(y:int)@s.y) 1)",
        ];
        for s in ms {
            let m = parse(s).unwrap_or_else(|e| panic!("{s}: {e}"));
            round_trip(&m);
        }
        let m = parse("#add(1, #mul(2, 3))").unwrap();
        assert_eq!(
            m,
            Term::prim(
                PrimOp::Add,
                vec![
                    Term::int(1),
                    Term::prim(PrimOp::Mul, vec![Term::int(2), Term::int(3)])
                ]
            )
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("\\(x : base) @ c .\n  x )").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 5 });
        let e = parse("#nope(1)").unwrap_err();
        assert!(e.message.contains("unknown primitive"));
        assert!(parse("#add(1)").is_err());
        assert!(parse("letrec = 1").is_err());
    }

    #[test]
    fn spans_follow_children() {
        let (m, spans) = parse_with_spans("f\n  (g x)").unwrap();
        let path = TermPath(vec![1, 1]);
        assert_eq!(m.subterm(&path), Some(&Term::var("x")));
        assert_eq!(spans.position(&path), Pos { line: 2, col: 6 });
    }

    #[test]
    fn programs() {
        let text = "def f = \\(x:int)@s.x;\ndef g = \\(y:'a)@c.y;\nmain = req(&f{}, 1);\n";
        let p = parse_program(text).unwrap();
        assert_eq!(p.defs.len(), 2);
        assert_eq!(print_program(&p), text);
        assert!(parse_program("main = 1; main = 2;").is_err());
    }
}
