//! Syntax shared by every stage of the pipeline.
//!
//! One [`Term`] type covers the location-polymorphic source calculus, the
//! pair-extended monomorphic target, and the `req`/`call`/`gen`/closure forms
//! emitted by the slicer. Which forms are legal at a given stage is checked by
//! the stage itself, not by the type.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

pub type Name = String;

/// Where a piece of code runs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Client,
    Server,
    Var(Name),
}

impl Location {
    pub fn var(name: impl Into<Name>) -> Self {
        Location::Var(name.into())
    }

    pub fn is_const(&self) -> bool {
        !matches!(self, Location::Var(_))
    }

    /// The other constant; `None` for variables.
    pub fn flip(&self) -> Option<Location> {
        match self {
            Location::Client => Some(Location::Server),
            Location::Server => Some(Location::Client),
            Location::Var(_) => None,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Client => f.write_str("c"),
            Location::Server => f.write_str("s"),
            Location::Var(l) => f.write_str(l),
        }
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Location::Client => s.serialize_str("c"),
            Location::Server => s.serialize_str("s"),
            Location::Var(l) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("var", l)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Location {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct LocVisitor;

        impl<'de> Visitor<'de> for LocVisitor {
            type Value = Location;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(r#""c", "s" or {"var": name}"#)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Location, E> {
                match v {
                    "c" => Ok(Location::Client),
                    "s" => Ok(Location::Server),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Location, A::Error> {
                let mut name: Option<Name> = None;
                while let Some(key) = map.next_key::<String>()? {
                    if key != "var" {
                        return Err(de::Error::unknown_field(&key, &["var"]));
                    }
                    name = Some(map.next_value()?);
                }
                match name {
                    Some(n) if !n.is_empty() => Ok(Location::Var(n)),
                    Some(_) => Err(de::Error::custom("empty location variable name")),
                    None => Err(de::Error::missing_field("var")),
                }
            }
        }

        d.deserialize_any(LocVisitor)
    }
}

/// Kind of a location variable: static ones are expanded by
/// monomorphization, dynamic ones survive to run time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[default]
    Static,
    Dynamic,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Static => "static",
            Kind::Dynamic => "dynamic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "node", rename_all_fields = "camelCase")]
pub enum Type {
    Base {
        name: Name,
    },
    Arrow {
        dom: Box<Type>,
        loc: Location,
        cod: Box<Type>,
    },
    TyVar {
        name: Name,
    },
    ForallTy {
        tyvar: Name,
        body: Box<Type>,
    },
    ForallLoc {
        locvar: Name,
        kind: Kind,
        body: Box<Type>,
    },
    Product {
        fst: Box<Type>,
        snd: Box<Type>,
    },
}

impl Type {
    pub fn base(name: impl Into<Name>) -> Self {
        Type::Base { name: name.into() }
    }

    pub fn int() -> Self {
        Type::base("int")
    }

    pub fn string() -> Self {
        Type::base("string")
    }

    pub fn unit() -> Self {
        Type::base("unit")
    }

    pub fn arrow(dom: Type, loc: Location, cod: Type) -> Self {
        Type::Arrow {
            dom: Box::new(dom),
            loc,
            cod: Box::new(cod),
        }
    }

    pub fn var(name: impl Into<Name>) -> Self {
        Type::TyVar { name: name.into() }
    }

    pub fn forall_ty(tyvar: impl Into<Name>, body: Type) -> Self {
        Type::ForallTy {
            tyvar: tyvar.into(),
            body: Box::new(body),
        }
    }

    pub fn forall_loc(locvar: impl Into<Name>, body: Type) -> Self {
        Type::forall_loc_kinded(locvar, Kind::Static, body)
    }

    pub fn forall_loc_kinded(locvar: impl Into<Name>, kind: Kind, body: Type) -> Self {
        Type::ForallLoc {
            locvar: locvar.into(),
            kind,
            body: Box::new(body),
        }
    }

    pub fn product(fst: Type, snd: Type) -> Self {
        Type::Product {
            fst: Box::new(fst),
            snd: Box::new(snd),
        }
    }

    /// True if no `ForallLoc` and no location variable occurs anywhere.
    pub fn is_location_free(&self) -> bool {
        match self {
            Type::Base { .. } | Type::TyVar { .. } => true,
            Type::Arrow { dom, loc, cod } => {
                loc.is_const() && dom.is_location_free() && cod.is_location_free()
            }
            Type::ForallTy { body, .. } => body.is_location_free(),
            Type::ForallLoc { .. } => false,
            Type::Product { fst, snd } => fst.is_location_free() && snd.is_location_free(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Str(String),
    Unit(()),
}

impl Literal {
    pub fn ty(&self) -> Type {
        match self {
            Literal::Int(_) => Type::int(),
            Literal::Str(_) => Type::string(),
            Literal::Unit(()) => Type::unit(),
        }
    }
}

/// Pure primitive operations. They evaluate at whichever location reaches
/// them and never communicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Concat,
    /// `ifz(n, a, b)` is `a` when `n == 0`, else `b`. Strict in all three.
    Ifz,
}

impl PrimOp {
    pub const ALL: [PrimOp; 5] = [
        PrimOp::Add,
        PrimOp::Sub,
        PrimOp::Mul,
        PrimOp::Concat,
        PrimOp::Ifz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimOp::Add => "add",
            PrimOp::Sub => "sub",
            PrimOp::Mul => "mul",
            PrimOp::Concat => "concat",
            PrimOp::Ifz => "ifz",
        }
    }

    pub fn from_name(name: &str) -> Option<PrimOp> {
        PrimOp::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            PrimOp::Ifz => 3,
            _ => 2,
        }
    }
}

/// Terms of every calculus handled by the toolkit.
///
/// `Closure` only appears in sliced programs: it names a lifted definition
/// together with the locations, types and values it captured.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "node", rename_all_fields = "camelCase")]
pub enum Term {
    Var {
        name: Name,
    },
    Lam {
        loc: Location,
        param: Name,
        param_type: Type,
        body: Box<Term>,
    },
    App {
        fun: Box<Term>,
        arg: Box<Term>,
    },
    TyLam {
        tyvar: Name,
        body: Box<Term>,
    },
    TyApp {
        fun: Box<Term>,
        ty_arg: Type,
    },
    LocLam {
        locvar: Name,
        kind: Kind,
        body: Box<Term>,
    },
    LocApp {
        fun: Box<Term>,
        loc_arg: Location,
    },
    Pair {
        fst: Box<Term>,
        snd: Box<Term>,
    },
    Proj {
        index: u8,
        arg: Box<Term>,
    },
    Req {
        fun: Box<Term>,
        arg: Box<Term>,
    },
    Call {
        fun: Box<Term>,
        arg: Box<Term>,
    },
    Gen {
        callee: Location,
        fun: Box<Term>,
        arg: Box<Term>,
    },
    Const {
        value: Literal,
    },
    Prim {
        op: PrimOp,
        args: Vec<Term>,
    },
    Letrec {
        name: Name,
        ty: Type,
        value: Box<Term>,
        body: Box<Term>,
    },
    Closure {
        def: Name,
        locs: Vec<(Name, Location)>,
        tys: Vec<(Name, Type)>,
        vals: Vec<(Name, Term)>,
    },
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Self {
        Term::Var { name: name.into() }
    }

    pub fn lam(loc: Location, param: impl Into<Name>, param_type: Type, body: Term) -> Self {
        Term::Lam {
            loc,
            param: param.into(),
            param_type,
            body: Box::new(body),
        }
    }

    pub fn app(fun: Term, arg: Term) -> Self {
        Term::App {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn ty_lam(tyvar: impl Into<Name>, body: Term) -> Self {
        Term::TyLam {
            tyvar: tyvar.into(),
            body: Box::new(body),
        }
    }

    pub fn ty_app(fun: Term, ty_arg: Type) -> Self {
        Term::TyApp {
            fun: Box::new(fun),
            ty_arg,
        }
    }

    pub fn loc_lam(locvar: impl Into<Name>, body: Term) -> Self {
        Term::loc_lam_kinded(locvar, Kind::Static, body)
    }

    pub fn loc_lam_kinded(locvar: impl Into<Name>, kind: Kind, body: Term) -> Self {
        Term::LocLam {
            locvar: locvar.into(),
            kind,
            body: Box::new(body),
        }
    }

    pub fn loc_app(fun: Term, loc_arg: Location) -> Self {
        Term::LocApp {
            fun: Box::new(fun),
            loc_arg,
        }
    }

    pub fn pair(fst: Term, snd: Term) -> Self {
        Term::Pair {
            fst: Box::new(fst),
            snd: Box::new(snd),
        }
    }

    pub fn proj(index: u8, arg: Term) -> Self {
        debug_assert!(index == 1 || index == 2);
        Term::Proj {
            index,
            arg: Box::new(arg),
        }
    }

    pub fn req(fun: Term, arg: Term) -> Self {
        Term::Req {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn call(fun: Term, arg: Term) -> Self {
        Term::Call {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn gen(callee: Location, fun: Term, arg: Term) -> Self {
        Term::Gen {
            callee,
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn int(n: i64) -> Self {
        Term::Const {
            value: Literal::Int(n),
        }
    }

    pub fn str(s: impl Into<String>) -> Self {
        Term::Const {
            value: Literal::Str(s.into()),
        }
    }

    pub fn unit() -> Self {
        Term::Const {
            value: Literal::Unit(()),
        }
    }

    pub fn prim(op: PrimOp, args: Vec<Term>) -> Self {
        Term::Prim { op, args }
    }

    pub fn letrec(name: impl Into<Name>, ty: Type, value: Term, body: Term) -> Self {
        Term::Letrec {
            name: name.into(),
            ty,
            value: Box::new(value),
            body: Box::new(body),
        }
    }

    /// Value forms: variables, abstractions whose body is a value where the
    /// grammar demands it, pairs of values, literals and closures whose
    /// captured values are values.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var { .. } | Term::Lam { .. } | Term::Const { .. } => true,
            Term::TyLam { body, .. } | Term::LocLam { body, .. } => body.is_value(),
            Term::Pair { fst, snd } => fst.is_value() && snd.is_value(),
            Term::Closure { vals, .. } => vals.iter().all(|(_, v)| v.is_value()),
            _ => false,
        }
    }

    /// Forms a `letrec` may bind: a lambda, possibly under type or location
    /// abstractions, or a pair of such forms. Substituting anything for a
    /// variable in one of these leaves a value.
    pub fn is_recursive_binding(&self) -> bool {
        match self {
            Term::Lam { .. } => true,
            Term::TyLam { body, .. } | Term::LocLam { body, .. } => body.is_recursive_binding(),
            Term::Pair { fst, snd } => fst.is_recursive_binding() && snd.is_recursive_binding(),
            _ => false,
        }
    }

    /// True if the term belongs to the location-polymorphic source calculus:
    /// no pair, projection, `req`, `call`, `gen` or closure nodes.
    pub fn is_source(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |t| {
            if matches!(
                t,
                Term::Pair { .. }
                    | Term::Proj { .. }
                    | Term::Req { .. }
                    | Term::Call { .. }
                    | Term::Gen { .. }
                    | Term::Closure { .. }
            ) {
                ok = false;
            }
        });
        ok
    }

    /// True if no location abstraction, location application or location
    /// variable occurs anywhere, including inside type annotations.
    pub fn is_location_free(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |t| match t {
            Term::LocLam { .. } | Term::LocApp { .. } => ok = false,
            Term::Lam {
                loc, param_type, ..
            } => {
                if !loc.is_const() || !param_type.is_location_free() {
                    ok = false;
                }
            }
            Term::TyApp { ty_arg, .. } => {
                if !ty_arg.is_location_free() {
                    ok = false;
                }
            }
            Term::Letrec { ty, .. } => {
                if !ty.is_location_free() {
                    ok = false;
                }
            }
            Term::Gen { callee, .. } => {
                if !callee.is_const() {
                    ok = false;
                }
            }
            Term::Closure { locs, tys, .. }
                if locs.iter().any(|(_, l)| !l.is_const())
                    || tys.iter().any(|(_, t)| !t.is_location_free()) =>
            {
                ok = false;
            }
            _ => {}
        });
        ok
    }

    /// Immediate subterms in a fixed order. Paths into a term index this list.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var { .. } | Term::Const { .. } => vec![],
            Term::Lam { body, .. } | Term::TyLam { body, .. } | Term::LocLam { body, .. } => {
                vec![body]
            }
            Term::TyApp { fun, .. } | Term::LocApp { fun, .. } => vec![fun],
            Term::Proj { arg, .. } => vec![arg],
            Term::App { fun, arg }
            | Term::Req { fun, arg }
            | Term::Call { fun, arg }
            | Term::Gen { fun, arg, .. } => vec![fun, arg],
            Term::Pair { fst, snd } => vec![fst, snd],
            Term::Prim { args, .. } => args.iter().collect(),
            Term::Letrec { value, body, .. } => vec![value, body],
            Term::Closure { vals, .. } => vals.iter().map(|(_, v)| v).collect(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn subterm(&self, path: &TermPath) -> Option<&Term> {
        let mut cur = self;
        for &i in &path.0 {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("terms always serialize")
    }

    pub fn from_json(text: &str) -> Result<Term, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Position of a subterm: child indices from the root, following
/// [`Term::children`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermPath(pub Vec<usize>);

impl TermPath {
    pub fn root() -> Self {
        TermPath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        TermPath(p)
    }
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// Typing environment: ordered term bindings plus the type and location
/// variables in scope.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    pub terms: Vec<(Name, Type)>,
    pub ty_vars: BTreeSet<Name>,
    pub loc_vars: BTreeSet<Name>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Latest binding wins.
    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.terms
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, t)| t)
    }

    pub fn with_var(mut self, x: impl Into<Name>, ty: Type) -> Self {
        self.terms.push((x.into(), ty));
        self
    }

    pub fn with_ty_var(mut self, a: impl Into<Name>) -> Self {
        self.ty_vars.insert(a.into());
        self
    }

    pub fn with_loc_var(mut self, l: impl Into<Name>) -> Self {
        self.loc_vars.insert(l.into());
        self
    }

    pub fn dom(&self) -> BTreeSet<Name> {
        let mut d: BTreeSet<Name> = self.terms.iter().map(|(n, _)| n.clone()).collect();
        d.extend(self.ty_vars.iter().cloned());
        d.extend(self.loc_vars.iter().cloned());
        d
    }

    pub fn rng(&self) -> Vec<&Type> {
        self.terms.iter().map(|(_, t)| t).collect()
    }
}
