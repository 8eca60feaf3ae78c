//! Splitting a program into client and server fragments.
//!
//! Every lambda is lifted to a named definition placed by its annotation,
//! and every application becomes a local application, `req`, `call` or
//! `gen` according to the caller and callee locations fixed by typing.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ast::{Kind, Location, Name, Term, TermPath, Type, TypeEnv};
use crate::grow;
use crate::subst::{flv, fresh_name, ftv, fv};
use crate::surface::{self, ParseError, Program};
use crate::typeck::{app_sites, check_mono, check_poly, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SliceError {
    #[error("{0}")]
    IllTyped(#[from] TypeError),
    #[error("UnplaceableDefinition: {0}")]
    UnplaceableDefinition(String),
    #[error("ArrowExpected: {0}")]
    NotAnApplication(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("malformed manifest: {0}")]
    Manifest(String),
}

/// How an application with known caller and callee runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dispatch {
    Local,
    Req,
    Call,
}

/// Dispatch table for `gen`. `None` unless both locations are constants.
pub fn gen_dispatch(caller: &Location, callee: &Location) -> Option<Dispatch> {
    match (caller, callee) {
        (Location::Var(_), _) | (_, Location::Var(_)) => None,
        (a, b) if a == b => Some(Dispatch::Local),
        (Location::Client, Location::Server) => Some(Dispatch::Req),
        _ => Some(Dispatch::Call),
    }
}

/// The application form for `fun arg` evaluated at `at` with the function
/// running at `callee`. The same location variable on both sides is
/// statically local.
pub fn app_form(at: &Location, callee: &Location, fun: Term, arg: Term) -> Term {
    match gen_dispatch(at, callee) {
        Some(Dispatch::Local) => Term::app(fun, arg),
        Some(Dispatch::Req) => Term::req(fun, arg),
        Some(Dispatch::Call) => Term::call(fun, arg),
        None if at == callee => Term::app(fun, arg),
        None => Term::gen(callee.clone(), fun, arg),
    }
}

/// Compiles one application node under `env` at `at`. Subterms are kept
/// as they are.
pub fn compile_app(env: &TypeEnv, at: &Location, app: &Term) -> Result<Term, SliceError> {
    let Term::App { fun, arg } = app else {
        return Err(SliceError::NotAnApplication(
            "expected an application".into(),
        ));
    };
    match check_poly(env, at, fun)?.ty {
        Type::Arrow { loc, .. } => Ok(app_form(at, &loc, (**fun).clone(), (**arg).clone())),
        other => Err(SliceError::NotAnApplication(format!(
            "function position has type {}",
            surface::print_type(&other)
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlicedProgram {
    pub client_top: Term,
    pub client_defs: BTreeMap<Name, Term>,
    pub server_defs: BTreeMap<Name, Term>,
    pub entry: Name,
}

impl Default for SlicedProgram {
    fn default() -> Self {
        SlicedProgram {
            client_top: Term::unit(),
            client_defs: BTreeMap::new(),
            server_defs: BTreeMap::new(),
            entry: "main".into(),
        }
    }
}

impl SlicedProgram {
    pub fn defs_at(&self, site: &Location) -> &BTreeMap<Name, Term> {
        match site {
            Location::Server => &self.server_defs,
            _ => &self.client_defs,
        }
    }

    pub fn client_source(&self) -> String {
        surface::print_program(&Program {
            defs: self.client_defs.clone().into_iter().collect(),
            main: Some(self.client_top.clone()),
        })
    }

    pub fn server_source(&self) -> String {
        surface::print_program(&Program {
            defs: self.server_defs.clone().into_iter().collect(),
            main: None,
        })
    }

    pub fn manifest(&self) -> String {
        let v = serde_json::json!({
            "entry": self.entry,
            "client": "client.prpc",
            "server": "server.prpc",
        });
        serde_json::to_string_pretty(&v).expect("manifest serializes")
    }

    /// Rebuilds a program from the three files written by `slice`.
    pub fn from_sources(client: &str, server: &str, manifest: &str) -> Result<Self, SliceError> {
        let v: serde_json::Value =
            serde_json::from_str(manifest).map_err(|e| SliceError::Manifest(e.to_string()))?;
        let entry = v
            .get("entry")
            .and_then(|e| e.as_str())
            .ok_or_else(|| SliceError::Manifest("missing `entry`".into()))?
            .to_string();
        let c = surface::parse_program(client)?;
        let s = surface::parse_program(server)?;
        let client_top = c
            .main
            .ok_or_else(|| SliceError::Manifest(format!("client file has no `{entry}`")))?;
        Ok(SlicedProgram {
            client_top,
            client_defs: c.defs.into_iter().collect(),
            server_defs: s.defs.into_iter().collect(),
            entry,
        })
    }
}

// ---------------------------------------------------------------------------
// binder renaming

/// Renames binders so that no two binders, and no binder and free name,
/// share a spelling. Names already unique are kept.
pub fn uniquify(m: &Term) -> Term {
    let mut seen: BTreeSet<Name> = fv(m);
    seen.extend(ftv(m));
    seen.extend(flv(m));
    let mut r = Renamer { seen };
    r.term(m, &Scope::default())
}

#[derive(Clone, Default)]
struct Scope {
    terms: HashMap<Name, Name>,
    tys: HashMap<Name, Name>,
    locs: HashMap<Name, Name>,
}

struct Renamer {
    seen: BTreeSet<Name>,
}

impl Renamer {
    fn bind(&mut self, x: &str) -> Name {
        let name = if self.seen.contains(x) {
            fresh_name(x, &self.seen)
        } else {
            x.to_string()
        };
        self.seen.insert(name.clone());
        name
    }

    fn loc(&self, l: &Location, sc: &Scope) -> Location {
        match l {
            Location::Var(v) => Location::Var(sc.locs.get(v).cloned().unwrap_or_else(|| v.clone())),
            a => a.clone(),
        }
    }

    fn ty(&mut self, t: &Type, sc: &Scope) -> Type {
        match t {
            Type::Base { .. } => t.clone(),
            Type::TyVar { name } => {
                Type::var(sc.tys.get(name).cloned().unwrap_or_else(|| name.clone()))
            }
            Type::Arrow { dom, loc, cod } => {
                Type::arrow(self.ty(dom, sc), self.loc(loc, sc), self.ty(cod, sc))
            }
            Type::Product { fst, snd } => Type::product(self.ty(fst, sc), self.ty(snd, sc)),
            Type::ForallTy { tyvar, body } => {
                let a = self.bind(tyvar);
                let mut inner = sc.clone();
                inner.tys.insert(tyvar.clone(), a.clone());
                Type::forall_ty(a, self.ty(body, &inner))
            }
            Type::ForallLoc { locvar, kind, body } => {
                let l = self.bind(locvar);
                let mut inner = sc.clone();
                inner.locs.insert(locvar.clone(), l.clone());
                Type::forall_loc_kinded(l, *kind, self.ty(body, &inner))
            }
        }
    }

    fn term(&mut self, m: &Term, sc: &Scope) -> Term {
        grow(|| self.term_inner(m, sc))
    }

    fn term_inner(&mut self, m: &Term, sc: &Scope) -> Term {
        match m {
            Term::Var { name } => {
                Term::var(sc.terms.get(name).cloned().unwrap_or_else(|| name.clone()))
            }
            Term::Const { .. } => m.clone(),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => {
                let loc = self.loc(loc, sc);
                let ty = self.ty(param_type, sc);
                let x = self.bind(param);
                let mut inner = sc.clone();
                inner.terms.insert(param.clone(), x.clone());
                Term::lam(loc, x, ty, self.term(body, &inner))
            }
            Term::TyLam { tyvar, body } => {
                let a = self.bind(tyvar);
                let mut inner = sc.clone();
                inner.tys.insert(tyvar.clone(), a.clone());
                Term::ty_lam(a, self.term(body, &inner))
            }
            Term::LocLam { locvar, kind, body } => {
                let l = self.bind(locvar);
                let mut inner = sc.clone();
                inner.locs.insert(locvar.clone(), l.clone());
                Term::loc_lam_kinded(l, *kind, self.term(body, &inner))
            }
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => {
                let ty = self.ty(ty, sc);
                let f = self.bind(name);
                let mut inner = sc.clone();
                inner.terms.insert(name.clone(), f.clone());
                Term::letrec(f, ty, self.term(value, &inner), self.term(body, &inner))
            }
            Term::App { fun, arg } => Term::app(self.term(fun, sc), self.term(arg, sc)),
            Term::Req { fun, arg } => Term::req(self.term(fun, sc), self.term(arg, sc)),
            Term::Call { fun, arg } => Term::call(self.term(fun, sc), self.term(arg, sc)),
            Term::Gen { callee, fun, arg } => {
                Term::gen(self.loc(callee, sc), self.term(fun, sc), self.term(arg, sc))
            }
            Term::TyApp { fun, ty_arg } => Term::ty_app(self.term(fun, sc), self.ty(ty_arg, sc)),
            Term::LocApp { fun, loc_arg } => {
                Term::loc_app(self.term(fun, sc), self.loc(loc_arg, sc))
            }
            Term::Pair { fst, snd } => Term::pair(self.term(fst, sc), self.term(snd, sc)),
            Term::Proj { index, arg } => Term::proj(*index, self.term(arg, sc)),
            Term::Prim { op, args } => {
                Term::prim(*op, args.iter().map(|a| self.term(a, sc)).collect())
            }
            Term::Closure {
                def,
                locs,
                tys,
                vals,
            } => Term::Closure {
                def: def.clone(),
                locs: locs
                    .iter()
                    .map(|(n, l)| (n.clone(), self.loc(l, sc)))
                    .collect(),
                tys: tys
                    .iter()
                    .map(|(n, t)| (n.clone(), self.ty(t, sc)))
                    .collect(),
                vals: vals
                    .iter()
                    .map(|(n, v)| (n.clone(), self.term(v, sc)))
                    .collect(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// slicing

struct Slicer {
    sites: HashMap<TermPath, (Location, Location)>,
    /// Kinds of the location variables in scope.
    loc_kinds: Vec<(Name, Kind)>,
    next_def: usize,
    out: SlicedProgram,
}

impl Slicer {
    fn kind_of(&self, l: &str) -> Option<Kind> {
        self.loc_kinds
            .iter()
            .rev()
            .find(|(n, _)| n == l)
            .map(|(_, k)| *k)
    }

    fn compile(&mut self, m: &Term, path: &TermPath) -> Result<Term, SliceError> {
        grow(|| self.compile_inner(m, path))
    }

    fn compile_inner(&mut self, m: &Term, path: &TermPath) -> Result<Term, SliceError> {
        let kids = |i: usize| path.child(i);
        Ok(match m {
            Term::Var { .. } | Term::Const { .. } => m.clone(),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => {
                let body = self.compile(body, &kids(0))?;
                let name = format!("f{}", self.next_def);
                self.next_def += 1;
                let code = Term::lam(loc.clone(), param.clone(), param_type.clone(), body);
                match loc {
                    Location::Client => {
                        self.out.client_defs.insert(name.clone(), code);
                    }
                    Location::Server => {
                        self.out.server_defs.insert(name.clone(), code);
                    }
                    Location::Var(l) => match self.kind_of(l) {
                        Some(Kind::Dynamic) => {
                            self.out.client_defs.insert(name.clone(), code.clone());
                            self.out.server_defs.insert(name.clone(), code);
                        }
                        Some(Kind::Static) => {
                            return Err(SliceError::UnplaceableDefinition(format!(
                                "lambda at static location variable `{l}` (at {path})"
                            )))
                        }
                        None => {
                            return Err(SliceError::UnplaceableDefinition(format!(
                                "lambda at unbound location variable `{l}` (at {path})"
                            )))
                        }
                    },
                }
                Term::Closure {
                    def: name,
                    locs: flv(m)
                        .into_iter()
                        .map(|l| (l.clone(), Location::Var(l)))
                        .collect(),
                    tys: ftv(m)
                        .into_iter()
                        .map(|a| (a.clone(), Type::var(a)))
                        .collect(),
                    vals: fv(m)
                        .into_iter()
                        .map(|x| (x.clone(), Term::var(x)))
                        .collect(),
                }
            }
            Term::App { fun, arg } => {
                let (at, callee) = self.sites.get(path).cloned().ok_or_else(|| {
                    SliceError::NotAnApplication(format!("no typing for application at {path}"))
                })?;
                let f = self.compile(fun, &kids(0))?;
                let a = self.compile(arg, &kids(1))?;
                app_form(&at, &callee, f, a)
            }
            Term::TyLam { tyvar, body } => {
                Term::ty_lam(tyvar.clone(), self.compile(body, &kids(0))?)
            }
            Term::TyApp { fun, ty_arg } => {
                Term::ty_app(self.compile(fun, &kids(0))?, ty_arg.clone())
            }
            Term::LocLam { locvar, kind, body } => {
                self.loc_kinds.push((locvar.clone(), *kind));
                let body = self.compile(body, &kids(0));
                self.loc_kinds.pop();
                Term::loc_lam_kinded(locvar.clone(), *kind, body?)
            }
            Term::LocApp { fun, loc_arg } => {
                Term::loc_app(self.compile(fun, &kids(0))?, loc_arg.clone())
            }
            Term::Pair { fst, snd } => {
                Term::pair(self.compile(fst, &kids(0))?, self.compile(snd, &kids(1))?)
            }
            Term::Proj { index, arg } => Term::proj(*index, self.compile(arg, &kids(0))?),
            Term::Prim { op, args } => Term::prim(
                *op,
                args.iter()
                    .enumerate()
                    .map(|(i, a)| self.compile(a, &kids(i)))
                    .collect::<Result<_, _>>()?,
            ),
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => Term::letrec(
                name.clone(),
                ty.clone(),
                self.compile(value, &kids(0))?,
                self.compile(body, &kids(1))?,
            ),
            Term::Req { .. } | Term::Call { .. } | Term::Gen { .. } | Term::Closure { .. } => {
                return Err(SliceError::IllTyped(TypeError {
                    kind: crate::typeck::TypeErrorKind::SlicedForm,
                    site: path.clone(),
                    detail: "program is already sliced".into(),
                }))
            }
        })
    }
}

/// Slices a closed program whose entry point runs at the client.
///
/// Location-free input is checked by the monomorphic checker; input that
/// still has (dynamic) location abstractions by the polymorphic one.
pub fn slice(m: &Term) -> Result<SlicedProgram, SliceError> {
    let m = uniquify(m);
    let env = TypeEnv::new();
    if m.is_location_free() {
        check_mono(&env, &Location::Client, &m)?;
    }
    let sites = app_sites(&env, &Location::Client, &m)?
        .into_iter()
        .map(|s| (s.path, (s.at, s.callee)))
        .collect();
    let mut slicer = Slicer {
        sites,
        loc_kinds: Vec::new(),
        next_def: 0,
        out: SlicedProgram::default(),
    };
    slicer.out.client_top = slicer.compile(&m, &TermPath::root())?;
    Ok(slicer.out)
}

/// Counts `gen` nodes in a sliced term.
pub fn gen_sites(m: &Term) -> usize {
    let mut n = 0;
    m.walk(&mut |t| {
        if matches!(t, Term::Gen { .. }) {
            n += 1;
        }
    });
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Type {
        Type::base("base")
    }

    #[test]
    fn dispatch_table() {
        use Location::{Client as C, Server as S};
        assert_eq!(gen_dispatch(&C, &C), Some(Dispatch::Local));
        assert_eq!(gen_dispatch(&S, &S), Some(Dispatch::Local));
        assert_eq!(gen_dispatch(&C, &S), Some(Dispatch::Req));
        assert_eq!(gen_dispatch(&S, &C), Some(Dispatch::Call));
        assert_eq!(gen_dispatch(&Location::var("l"), &C), None);
    }

    #[test]
    fn compile_app_cases() {
        let f = |loc: Location| Term::lam(loc, "x", base(), Term::var("x"));
        let env = TypeEnv::new().with_var("y", base());
        let app = Term::app(f(Location::Client), Term::var("y"));
        assert!(matches!(
            compile_app(&env, &Location::Client, &app).unwrap(),
            Term::App { .. }
        ));
        let app = Term::app(f(Location::Server), Term::var("y"));
        assert!(matches!(
            compile_app(&env, &Location::Client, &app).unwrap(),
            Term::Req { .. }
        ));
        assert!(matches!(
            compile_app(
                &env,
                &Location::Server,
                &Term::app(f(Location::Client), Term::var("y"))
            )
            .unwrap(),
            Term::Call { .. }
        ));
        // the g x site of the composition function
        let (a, b) = (Type::var("a"), Type::var("b"));
        let env = TypeEnv::new()
            .with_ty_var("a")
            .with_ty_var("b")
            .with_loc_var("l1")
            .with_loc_var("l2")
            .with_var("g", Type::arrow(a.clone(), Location::var("l1"), b))
            .with_var("x", a);
        let out = compile_app(
            &env,
            &Location::var("l2"),
            &Term::app(Term::var("g"), Term::var("x")),
        )
        .unwrap();
        assert_eq!(
            out,
            Term::gen(Location::var("l1"), Term::var("g"), Term::var("x"))
        );
    }

    #[test]
    fn remote_identity_slices_to_req() {
        let m = Term::app(
            Term::lam(Location::Server, "x", Type::int(), Term::var("x")),
            Term::int(1),
        );
        let p = slice(&m).unwrap();
        assert!(matches!(p.client_top, Term::Req { .. }));
        assert_eq!(p.server_defs.len(), 1);
        assert!(p.client_defs.is_empty());
    }

    #[test]
    fn pure_client_program() {
        let m = Term::app(
            Term::lam(
                Location::Client,
                "f",
                Type::arrow(base(), Location::Client, base()),
                Term::var("f"),
            ),
            Term::lam(Location::Client, "y", base(), Term::var("y")),
        );
        let p = slice(&m).unwrap();
        assert!(p.server_defs.is_empty());
        assert_eq!(p.client_defs.len(), 2);
        assert!(matches!(p.client_top, Term::App { .. }));
    }

    #[test]
    fn static_location_variable_is_unplaceable() {
        let m = Term::loc_lam(
            "l",
            Term::lam(Location::var("l"), "x", base(), Term::var("x")),
        );
        assert!(matches!(
            slice(&m),
            Err(SliceError::UnplaceableDefinition(_))
        ));
    }

    #[test]
    fn dynamic_definitions_are_shared() {
        let m = Term::loc_lam_kinded(
            "l",
            Kind::Dynamic,
            Term::lam(Location::var("l"), "x", base(), Term::var("x")),
        );
        let p = slice(&m).unwrap();
        assert_eq!(p.client_defs, p.server_defs);
        assert_eq!(p.client_defs.len(), 1);
    }

    #[test]
    fn uniquify_renames_only_clashes() {
        let inner = Term::lam(Location::Client, "x", base(), Term::var("x"));
        let m = Term::lam(
            Location::Client,
            "x",
            base(),
            Term::app(inner, Term::var("x")),
        );
        let u = uniquify(&m);
        assert!(crate::alpha::alpha_eq(&m, &u));
        let Term::Lam { param, body, .. } = &u else {
            panic!()
        };
        assert_eq!(param, "x");
        let Term::App { fun, .. } = &**body else {
            panic!()
        };
        let Term::Lam {
            param: inner_param, ..
        } = &**fun
        else {
            panic!()
        };
        assert_ne!(inner_param, "x");
    }

    #[test]
    fn files_round_trip() {
        let m = Term::app(
            Term::lam(Location::Server, "x", Type::int(), Term::var("x")),
            Term::int(1),
        );
        let p = slice(&m).unwrap();
        let back =
            SlicedProgram::from_sources(&p.client_source(), &p.server_source(), &p.manifest())
                .unwrap();
        assert_eq!(back, p);
    }
}
