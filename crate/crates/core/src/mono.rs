//! Monomorphization: location abstractions become (client, server) pairs and
//! location applications become projections.
//!
//! The full translation ignores kinds. [`selective_mono`] expands only
//! static location abstractions and keeps dynamic ones for run-time
//! dispatch.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ast::{Kind, Location, Name, Term, Type, TypeEnv};
use crate::grow;
use crate::subst::{flv, subst_term_loc, subst_type_loc};
use crate::typeck::{check_poly, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MonoError {
    #[error("FreeLocationVariable: `{0}` has no location to be instantiated with")]
    FreeLocationVariable(Name),
    #[error("KindMismatch: {0}")]
    KindMismatch(String),
    #[error("{0}")]
    IllTyped(#[from] TypeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoReport {
    pub output: Term,
    /// Bodies instantiated under location abstractions: every maximal chain
    /// of `n` abstractions contributes `2^n`.
    pub leaf_count: u64,
    /// Largest number of location abstractions being expanded at once.
    pub duplication_depth: usize,
}

type Subst = BTreeMap<Name, Location>;

fn resolve(sigma: &Subst, loc: &Location) -> Result<Location, MonoError> {
    match loc {
        Location::Var(l) => match sigma.get(l) {
            Some(a) => Ok(a.clone()),
            None => Err(MonoError::FreeLocationVariable(l.clone())),
        },
        a => Ok(a.clone()),
    }
}

fn with(sigma: &Subst, l: &str, a: Location) -> Subst {
    let mut s = sigma.clone();
    s.insert(l.to_string(), a);
    s
}

fn mono_type_in(sigma: &Subst, ty: &Type) -> Result<Type, MonoError> {
    Ok(match ty {
        Type::Base { .. } | Type::TyVar { .. } => ty.clone(),
        Type::Arrow { dom, loc, cod } => Type::arrow(
            mono_type_in(sigma, dom)?,
            resolve(sigma, loc)?,
            mono_type_in(sigma, cod)?,
        ),
        Type::ForallTy { tyvar, body } => {
            Type::forall_ty(tyvar.clone(), mono_type_in(sigma, body)?)
        }
        Type::ForallLoc { locvar, body, .. } => Type::product(
            mono_type_in(&with(sigma, locvar, Location::Client), body)?,
            mono_type_in(&with(sigma, locvar, Location::Server), body)?,
        ),
        Type::Product { fst, snd } => {
            Type::product(mono_type_in(sigma, fst)?, mono_type_in(sigma, snd)?)
        }
    })
}

/// Translation of types. Fails on a free location variable.
pub fn mono_type(ty: &Type) -> Result<Type, MonoError> {
    mono_type_in(&Subst::new(), ty)
}

/// Translation of environments. Location variables, or types mentioning
/// them, leave the translation undefined.
pub fn mono_env(env: &TypeEnv) -> Result<TypeEnv, MonoError> {
    if let Some(l) = env.loc_vars.iter().next() {
        return Err(MonoError::FreeLocationVariable(l.clone()));
    }
    let mut out = TypeEnv {
        terms: Vec::with_capacity(env.terms.len()),
        ty_vars: env.ty_vars.clone(),
        loc_vars: BTreeSet::new(),
    };
    for (x, ty) in &env.terms {
        out.terms.push((x.clone(), mono_type(ty)?));
    }
    Ok(out)
}

/// A LocLam node under a substitution restricted to its free variables.
type MemoKey = (*const Term, Vec<(Name, Location)>);

struct Mono<'a> {
    leaves: u64,
    depth: usize,
    max_depth: usize,
    /// Free location variables of each location abstraction in the input.
    flv: HashMap<*const Term, BTreeSet<Name>>,
    memo: HashMap<MemoKey, (Term, u64, usize)>,
    _input: std::marker::PhantomData<&'a Term>,
}

impl<'a> Mono<'a> {
    fn new(root: &'a Term) -> Self {
        let mut flvs = HashMap::new();
        root.walk(&mut |t| {
            if matches!(t, Term::LocLam { .. }) {
                flvs.insert(t as *const Term, flv(t));
            }
        });
        Mono {
            leaves: 0,
            depth: 0,
            max_depth: 0,
            flv: flvs,
            memo: HashMap::new(),
            _input: std::marker::PhantomData,
        }
    }

    fn term(&mut self, sigma: &Subst, m: &'a Term) -> Result<Term, MonoError> {
        grow(|| self.term_inner(sigma, m))
    }

    fn term_inner(&mut self, sigma: &Subst, m: &'a Term) -> Result<Term, MonoError> {
        Ok(match m {
            Term::Var { .. } | Term::Const { .. } => m.clone(),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => Term::lam(
                resolve(sigma, loc)?,
                param.clone(),
                mono_type_in(sigma, param_type)?,
                self.term(sigma, body)?,
            ),
            Term::App { fun, arg } => Term::app(self.term(sigma, fun)?, self.term(sigma, arg)?),
            Term::TyLam { tyvar, body } => Term::ty_lam(tyvar.clone(), self.term(sigma, body)?),
            Term::TyApp { fun, ty_arg } => {
                Term::ty_app(self.term(sigma, fun)?, mono_type_in(sigma, ty_arg)?)
            }
            Term::LocLam { locvar, body, .. } => self.expand(sigma, m, locvar, body)?,
            Term::LocApp { fun, loc_arg } => {
                let index = match resolve(sigma, loc_arg)? {
                    Location::Client => 1,
                    _ => 2,
                };
                Term::proj(index, self.term(sigma, fun)?)
            }
            Term::Pair { fst, snd } => Term::pair(self.term(sigma, fst)?, self.term(sigma, snd)?),
            Term::Proj { index, arg } => Term::proj(*index, self.term(sigma, arg)?),
            Term::Prim { op, args } => Term::prim(
                *op,
                args.iter()
                    .map(|a| self.term(sigma, a))
                    .collect::<Result<_, _>>()?,
            ),
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => Term::letrec(
                name.clone(),
                mono_type_in(sigma, ty)?,
                self.term(sigma, value)?,
                self.term(sigma, body)?,
            ),
            Term::Req { fun, arg } => Term::req(self.term(sigma, fun)?, self.term(sigma, arg)?),
            Term::Call { fun, arg } => Term::call(self.term(sigma, fun)?, self.term(sigma, arg)?),
            Term::Gen { callee, fun, arg } => Term::gen(
                resolve(sigma, callee)?,
                self.term(sigma, fun)?,
                self.term(sigma, arg)?,
            ),
            Term::Closure {
                def,
                locs,
                tys,
                vals,
            } => Term::Closure {
                def: def.clone(),
                locs: locs
                    .iter()
                    .map(|(n, l)| Ok((n.clone(), resolve(sigma, l)?)))
                    .collect::<Result<_, MonoError>>()?,
                tys: tys
                    .iter()
                    .map(|(n, t)| Ok((n.clone(), mono_type_in(sigma, t)?)))
                    .collect::<Result<_, MonoError>>()?,
                vals: vals
                    .iter()
                    .map(|(n, v)| Ok((n.clone(), self.term(sigma, v)?)))
                    .collect::<Result<_, MonoError>>()?,
            },
        })
    }

    fn expand(
        &mut self,
        sigma: &Subst,
        node: &'a Term,
        l: &str,
        body: &'a Term,
    ) -> Result<Term, MonoError> {
        let key_locs: Vec<(Name, Location)> = self.flv[&(node as *const Term)]
            .iter()
            .filter_map(|x| sigma.get(x).map(|a| (x.clone(), a.clone())))
            .collect();
        let key = (node as *const Term, key_locs);
        if let Some((out, leaves, depth)) = self.memo.get(&key) {
            self.leaves += leaves;
            self.max_depth = self.max_depth.max(self.depth + depth);
            return Ok(out.clone());
        }

        let (leaves_before, outer_max) = (self.leaves, self.max_depth);
        self.max_depth = self.depth;
        self.depth += 1;
        self.max_depth = self.max_depth.max(self.depth);
        let mut halves = Vec::with_capacity(2);
        for a in [Location::Client, Location::Server] {
            if !matches!(body, Term::LocLam { .. }) {
                self.leaves += 1;
            }
            halves.push(self.term(&with(sigma, l, a), body)?);
        }
        self.depth -= 1;
        let snd = halves.pop().expect("two halves");
        let fst = halves.pop().expect("two halves");
        let out = Term::pair(fst, snd);

        let local_depth = self.max_depth - self.depth;
        self.memo
            .insert(key, (out.clone(), self.leaves - leaves_before, local_depth));
        self.max_depth = self.max_depth.max(outer_max);
        Ok(out)
    }
}

/// Translation of closed terms.
pub fn mono_term(m: &Term) -> Result<MonoReport, MonoError> {
    if let Some(l) = flv(m).into_iter().next() {
        return Err(MonoError::FreeLocationVariable(l));
    }
    let mut mono = Mono::new(m);
    let output = mono.term(&Subst::new(), m)?;
    Ok(MonoReport {
        output,
        leaf_count: mono.leaves,
        duplication_depth: mono.max_depth,
    })
}

/// Translation of a `letrec`. The recursive name is kept, so a use `f[c]`
/// inside the client half becomes `fst f` and refers back to the translated
/// pair instead of unfolding it again.
pub fn mono_letrec(m: &Term) -> Result<Term, MonoError> {
    match m {
        Term::Letrec { .. } => mono_term(m).map(|r| r.output),
        _ => Err(MonoError::KindMismatch("expected a letrec".into())),
    }
}

// ---------------------------------------------------------------------------
// selective

/// Type translation that expands only static location quantifiers.
pub fn selective_mono_type(ty: &Type) -> Type {
    match ty {
        Type::Base { .. } | Type::TyVar { .. } => ty.clone(),
        Type::Arrow { dom, loc, cod } => Type::arrow(
            selective_mono_type(dom),
            loc.clone(),
            selective_mono_type(cod),
        ),
        Type::ForallTy { tyvar, body } => Type::forall_ty(tyvar.clone(), selective_mono_type(body)),
        Type::ForallLoc {
            locvar,
            kind: Kind::Static,
            body,
        } => Type::product(
            selective_mono_type(&subst_type_loc(body, &Location::Client, locvar)),
            selective_mono_type(&subst_type_loc(body, &Location::Server, locvar)),
        ),
        Type::ForallLoc {
            locvar,
            kind: Kind::Dynamic,
            body,
        } => Type::forall_loc_kinded(locvar.clone(), Kind::Dynamic, selective_mono_type(body)),
        Type::Product { fst, snd } => {
            Type::product(selective_mono_type(fst), selective_mono_type(snd))
        }
    }
}

struct Selective {
    env: TypeEnv,
}

impl Selective {
    fn term(&mut self, m: &Term) -> Result<Term, MonoError> {
        grow(|| self.term_inner(m))
    }

    fn under<T>(&mut self, env: TypeEnv, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = std::mem::replace(&mut self.env, env);
        let out = f(self);
        self.env = saved;
        out
    }

    fn term_inner(&mut self, m: &Term) -> Result<Term, MonoError> {
        Ok(match m {
            Term::Var { .. } | Term::Const { .. } => m.clone(),
            Term::Lam {
                loc,
                param,
                param_type,
                body,
            } => {
                let env = self.env.clone().with_var(param.clone(), param_type.clone());
                let body = self.under(env, |s| s.term(body))?;
                Term::lam(
                    loc.clone(),
                    param.clone(),
                    selective_mono_type(param_type),
                    body,
                )
            }
            Term::App { fun, arg } => Term::app(self.term(fun)?, self.term(arg)?),
            Term::TyLam { tyvar, body } => {
                let env = self.env.clone().with_ty_var(tyvar.clone());
                Term::ty_lam(tyvar.clone(), self.under(env, |s| s.term(body))?)
            }
            Term::TyApp { fun, ty_arg } => {
                Term::ty_app(self.term(fun)?, selective_mono_type(ty_arg))
            }
            Term::LocLam {
                locvar,
                kind: Kind::Static,
                body,
            } => Term::pair(
                self.term(&subst_term_loc(body, &Location::Client, locvar))?,
                self.term(&subst_term_loc(body, &Location::Server, locvar))?,
            ),
            Term::LocLam {
                locvar,
                kind: Kind::Dynamic,
                body,
            } => {
                let env = self.env.clone().with_loc_var(locvar.clone());
                Term::loc_lam_kinded(
                    locvar.clone(),
                    Kind::Dynamic,
                    self.under(env, |s| s.term(body))?,
                )
            }
            Term::LocApp { fun, loc_arg } => {
                let ty = check_poly(&self.env, &Location::Client, fun)?.ty;
                let Type::ForallLoc { locvar, kind, .. } = ty else {
                    return Err(MonoError::KindMismatch(
                        "location application of a non-polymorphic term".into(),
                    ));
                };
                match (kind, loc_arg) {
                    (Kind::Dynamic, _) => Term::loc_app(self.term(fun)?, loc_arg.clone()),
                    (Kind::Static, Location::Client) => Term::proj(1, self.term(fun)?),
                    (Kind::Static, Location::Server) => Term::proj(2, self.term(fun)?),
                    (Kind::Static, Location::Var(l)) => {
                        return Err(MonoError::KindMismatch(format!(
                            "static location variable `{locvar}` instantiated with dynamic `{l}`"
                        )))
                    }
                }
            }
            Term::Pair { fst, snd } => Term::pair(self.term(fst)?, self.term(snd)?),
            Term::Proj { index, arg } => Term::proj(*index, self.term(arg)?),
            Term::Prim { op, args } => Term::prim(
                *op,
                args.iter()
                    .map(|a| self.term(a))
                    .collect::<Result<_, _>>()?,
            ),
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => {
                let env = self.env.clone().with_var(name.clone(), ty.clone());
                let (value, body) =
                    self.under(env, |s| Ok::<_, MonoError>((s.term(value)?, s.term(body)?)))?;
                Term::letrec(name.clone(), selective_mono_type(ty), value, body)
            }
            Term::Req { .. } | Term::Call { .. } | Term::Gen { .. } | Term::Closure { .. } => {
                return Err(MonoError::KindMismatch(
                    "sliced-program form in monomorphization input".into(),
                ))
            }
        })
    }
}

/// Kind-directed translation of a closed, well-typed term. Static location
/// abstractions expand to pairs; dynamic ones stay and their bodies are
/// translated. The result is typed by the polymorphic checker.
pub fn selective_mono(m: &Term) -> Result<Term, MonoError> {
    if let Some(l) = flv(m).into_iter().next() {
        return Err(MonoError::FreeLocationVariable(l));
    }
    check_poly(&TypeEnv::new(), &Location::Client, m)?;
    Selective {
        env: TypeEnv::new(),
    }
    .term(m)
}
