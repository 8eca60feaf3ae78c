//! Random closed well-typed terms of the location-polymorphic calculus.
//!
//! Generation is goal directed: pick a type, then build a term of that type
//! by choosing a typing rule whose conclusion matches it. Elimination rules
//! invent the premise types (an argument type, a type or location to
//! abstract out of the goal). Leaves are free; introduction forms cost one
//! level of depth and elimination forms need two, so depth 1 yields a constant or
//! a lambda around a leaf. Failed branches are retried with another rule
//! within a per-term step budget.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alpha::alpha_eq_type;
use crate::ast::{Location, Name, PrimOp, Term, Type, TypeEnv};
use crate::subst::{subst_type_loc, subst_type_type};
use crate::typeck::check_poly;

/// Relative weight of each production.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub var: u32,
    pub abs: u32,
    pub app: u32,
    pub tabs: u32,
    pub tapp: u32,
    pub labs: u32,
    pub lapp: u32,
    pub konst: u32,
    pub prim: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            var: 6,
            abs: 4,
            app: 6,
            tabs: 3,
            tapp: 2,
            labs: 3,
            lapp: 3,
            konst: 2,
            prim: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_loc_lam_nesting: usize,
    pub seed: u64,
    pub weights: Weights,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 6,
            max_loc_lam_nesting: 3,
            seed: 0,
            weights: Weights::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("GenerationExhausted: no term found in {0} attempts")]
    GenerationExhausted(usize),
    /// A generated term failed re-checking. Always a generator bug.
    #[error("generated term does not have its goal type: {0}")]
    Unsound(String),
}

/// A generated term, its type and the location it was typed at.
pub type Generated = (Term, Type, Location);

const ATTEMPTS: usize = 500;
const STEPS_PER_TERM: usize = 4_000;

#[derive(Clone, Default)]
struct Ctx {
    vars: Vec<(Name, Type)>,
    ty_vars: Vec<Name>,
    loc_vars: Vec<Name>,
    nesting: usize,
}

impl Ctx {
    fn from_env(env: &TypeEnv) -> Self {
        Ctx {
            vars: env.terms.clone(),
            ty_vars: env.ty_vars.iter().cloned().collect(),
            loc_vars: env.loc_vars.iter().cloned().collect(),
            nesting: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Var,
    Abs,
    App,
    Tabs,
    Tapp,
    Labs,
    Lapp,
    Const,
    Prim,
}

pub struct Generator {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    counter: usize,
    steps: usize,
}

impl Generator {
    pub fn new(cfg: GenConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Generator {
            cfg,
            rng,
            counter: 0,
            steps: 0,
        }
    }

    fn fresh(&mut self, stem: &str) -> Name {
        self.counter += 1;
        format!("{stem}{}", self.counter)
    }

    fn pick_loc(&mut self, ctx: &Ctx) -> Location {
        let n = ctx.loc_vars.len();
        let i = self.rng.random_range(0..2 + 2 * n);
        match i {
            0 => Location::Client,
            1 => Location::Server,
            _ => Location::Var(ctx.loc_vars[(i - 2) % n].clone()),
        }
    }

    fn base_type(&mut self) -> Type {
        match self.rng.random_range(0..6) {
            0..=3 => Type::int(),
            4 => Type::string(),
            _ => Type::unit(),
        }
    }

    /// A random type whose free variables come from `ctx`.
    fn gen_type(&mut self, ctx: &Ctx, size: usize) -> Type {
        if size == 0 {
            if !ctx.ty_vars.is_empty() && self.rng.random_ratio(1, 4) {
                let i = self.rng.random_range(0..ctx.ty_vars.len());
                return Type::var(ctx.ty_vars[i].clone());
            }
            return self.base_type();
        }
        let can_labs = ctx.nesting < self.cfg.max_loc_lam_nesting;
        match self.rng.random_range(0..10) {
            0..=1 => self.gen_type(ctx, 0),
            2..=6 => self.arrow_type(ctx, size),
            7 if can_labs => self.forall_loc_type(ctx, size),
            8 if can_labs => self.forall_loc_type(ctx, size),
            _ => {
                let a = self.fresh("a");
                let mut inner = ctx.clone();
                inner.ty_vars.push(a.clone());
                let body = self.arrow_type(&inner, size);
                Type::forall_ty(a, body)
            }
        }
    }

    fn arrow_type(&mut self, ctx: &Ctx, size: usize) -> Type {
        let dom = self.gen_type(ctx, size.saturating_sub(1) / 2);
        let loc = self.pick_loc(ctx);
        let cod = self.gen_type(ctx, size.saturating_sub(1));
        Type::arrow(dom, loc, cod)
    }

    fn forall_loc_type(&mut self, ctx: &Ctx, size: usize) -> Type {
        let l = self.fresh("l");
        let mut inner = ctx.clone();
        inner.loc_vars.push(l.clone());
        inner.nesting += 1;
        let body = if size > 1
            && inner.nesting < self.cfg.max_loc_lam_nesting
            && self.rng.random_ratio(1, 2)
        {
            self.forall_loc_type(&inner, size - 1)
        } else {
            self.arrow_type(&inner, size.max(1))
        };
        Type::forall_loc(l, body)
    }

    fn weight(&self, r: Rule) -> u32 {
        let w = &self.cfg.weights;
        match r {
            Rule::Var => w.var,
            Rule::Abs => w.abs,
            Rule::App => w.app,
            Rule::Tabs => w.tabs,
            Rule::Tapp => w.tapp,
            Rule::Labs => w.labs,
            Rule::Lapp => w.lapp,
            Rule::Const => w.konst,
            Rule::Prim => w.prim,
        }
    }

    /// Orders candidate rules by weighted sampling without replacement.
    fn order(&mut self, mut rules: Vec<Rule>) -> Vec<Rule> {
        let mut out = Vec::with_capacity(rules.len());
        rules.retain(|r| self.weight(*r) > 0);
        while !rules.is_empty() {
            let total: u32 = rules.iter().map(|r| self.weight(*r)).sum();
            let mut x = self.rng.random_range(0..total);
            let mut idx = 0;
            for (i, r) in rules.iter().enumerate() {
                let w = self.weight(*r);
                if x < w {
                    idx = i;
                    break;
                }
                x -= w;
            }
            out.push(rules.remove(idx));
        }
        out
    }

    fn gen(
        &mut self,
        ctx: &Ctx,
        at: &Location,
        goal: &Type,
        depth: usize,
        value: bool,
    ) -> Option<Term> {
        if self.steps >= STEPS_PER_TERM {
            return None;
        }
        self.steps += 1;

        let mut rules = Vec::new();
        if ctx.vars.iter().any(|(_, t)| alpha_eq_type(t, goal)) {
            rules.push(Rule::Var);
        }
        if depth > 0 {
            match goal {
                Type::Arrow { .. } => rules.push(Rule::Abs),
                Type::ForallTy { .. } => rules.push(Rule::Tabs),
                Type::ForallLoc { .. } if ctx.nesting < self.cfg.max_loc_lam_nesting => {
                    rules.push(Rule::Labs)
                }
                _ => {}
            }
            if !value && depth > 1 {
                rules.extend([Rule::App, Rule::Tapp, Rule::Lapp, Rule::Prim]);
            }
        }
        if matches!(goal, Type::Base { .. }) {
            rules.push(Rule::Const);
        }

        for rule in self.order(rules) {
            if let Some(m) = self.apply(rule, ctx, at, goal, depth) {
                return Some(m);
            }
        }
        None
    }

    fn apply(
        &mut self,
        rule: Rule,
        ctx: &Ctx,
        at: &Location,
        goal: &Type,
        depth: usize,
    ) -> Option<Term> {
        match rule {
            Rule::Var => {
                let hits: Vec<&Name> = ctx
                    .vars
                    .iter()
                    .filter(|(_, t)| alpha_eq_type(t, goal))
                    .map(|(x, _)| x)
                    .collect();
                hits.choose(&mut self.rng).map(|x| Term::var((*x).clone()))
            }
            Rule::Const => {
                let Type::Base { name } = goal else {
                    return None;
                };
                Some(match name.as_str() {
                    "int" => Term::int(self.rng.random_range(-9..=99)),
                    "string" => Term::str(["a", "b", "hello", ""][self.rng.random_range(0..4)]),
                    "unit" => Term::unit(),
                    _ => return None,
                })
            }
            Rule::Abs => {
                let Type::Arrow { dom, loc, cod } = goal else {
                    return None;
                };
                let x = self.fresh("x");
                let mut inner = ctx.clone();
                inner.vars.push((x.clone(), (**dom).clone()));
                let body = self.gen(&inner, loc, cod, depth - 1, false)?;
                Some(Term::lam(loc.clone(), x, (**dom).clone(), body))
            }
            Rule::Tabs => {
                let Type::ForallTy { tyvar, body } = goal else {
                    return None;
                };
                let a = self.fresh("a");
                let body = subst_type_type(body, &Type::var(a.clone()), tyvar);
                let mut inner = ctx.clone();
                inner.ty_vars.push(a.clone());
                let v = self.gen(&inner, at, &body, depth - 1, true)?;
                Some(Term::ty_lam(a, v))
            }
            Rule::Labs => {
                let Type::ForallLoc { locvar, kind, body } = goal else {
                    return None;
                };
                let l = self.fresh("l");
                let body = subst_type_loc(body, &Location::Var(l.clone()), locvar);
                let mut inner = ctx.clone();
                inner.loc_vars.push(l.clone());
                inner.nesting += 1;
                let v = self.gen(&inner, at, &body, depth - 1, true)?;
                Some(Term::loc_lam_kinded(l, *kind, v))
            }
            Rule::App => {
                let size = self.rng.random_range(0..=1);
                let dom = self.gen_type(ctx, size);
                let callee = self.pick_loc(ctx);
                let fun_ty = Type::arrow(dom.clone(), callee, goal.clone());
                let fun = self.gen(ctx, at, &fun_ty, depth - 1, false)?;
                let arg = self.gen(ctx, at, &dom, depth - 1, false)?;
                Some(Term::app(fun, arg))
            }
            Rule::Tapp => {
                let size = self.rng.random_range(0..=1);
                let t = self.gen_type(ctx, size);
                let a = self.fresh("a");
                let abstracted = self.abstract_type(goal, &t, &a);
                let fun_ty = Type::forall_ty(a, abstracted);
                let fun = self.gen(ctx, at, &fun_ty, depth - 1, false)?;
                Some(Term::ty_app(fun, t))
            }
            Rule::Lapp => {
                let loc = self.pick_loc(ctx);
                let l = self.fresh("l");
                let abstracted = self.abstract_loc(goal, &loc, &l);
                let fun_ty = Type::forall_loc(l, abstracted);
                let fun = self.gen(ctx, at, &fun_ty, depth - 1, false)?;
                Some(Term::loc_app(fun, loc))
            }
            Rule::Prim => {
                let d = depth - 1;
                match goal {
                    Type::Base { name } if name == "int" && self.rng.random_ratio(2, 3) => {
                        let op =
                            [PrimOp::Add, PrimOp::Sub, PrimOp::Mul][self.rng.random_range(0..3)];
                        let a = self.gen(ctx, at, goal, d, false)?;
                        let b = self.gen(ctx, at, goal, d, false)?;
                        Some(Term::prim(op, vec![a, b]))
                    }
                    Type::Base { name } if name == "string" && self.rng.random_ratio(1, 2) => {
                        let a = self.gen(ctx, at, goal, d, false)?;
                        let b = self.gen(ctx, at, goal, d, false)?;
                        Some(Term::prim(PrimOp::Concat, vec![a, b]))
                    }
                    _ => {
                        let n = self.gen(ctx, at, &Type::int(), d, false)?;
                        let a = self.gen(ctx, at, goal, d, false)?;
                        let b = self.gen(ctx, at, goal, d, false)?;
                        Some(Term::prim(PrimOp::Ifz, vec![n, a, b]))
                    }
                }
            }
        }
    }

    /// `goal` with some occurrences of `t` replaced by the type variable `a`,
    /// so that substituting `t` back gives `goal`.
    fn abstract_type(&mut self, goal: &Type, t: &Type, a: &str) -> Type {
        if goal == t && self.rng.random_ratio(3, 4) {
            return Type::var(a);
        }
        match goal {
            Type::Arrow { dom, loc, cod } => Type::arrow(
                self.abstract_type(dom, t, a),
                loc.clone(),
                self.abstract_type(cod, t, a),
            ),
            Type::ForallTy { tyvar, body } => {
                Type::forall_ty(tyvar.clone(), self.abstract_type(body, t, a))
            }
            Type::ForallLoc { locvar, kind, body } => {
                Type::forall_loc_kinded(locvar.clone(), *kind, self.abstract_type(body, t, a))
            }
            Type::Product { fst, snd } => {
                Type::product(self.abstract_type(fst, t, a), self.abstract_type(snd, t, a))
            }
            _ => goal.clone(),
        }
    }

    /// `goal` with some occurrences of `loc` replaced by the variable `l`.
    fn abstract_loc(&mut self, goal: &Type, loc: &Location, l: &str) -> Type {
        match goal {
            Type::Arrow {
                dom,
                loc: here,
                cod,
            } => {
                let here = if here == loc && self.rng.random_ratio(3, 4) {
                    Location::var(l)
                } else {
                    here.clone()
                };
                Type::arrow(
                    self.abstract_loc(dom, loc, l),
                    here,
                    self.abstract_loc(cod, loc, l),
                )
            }
            Type::ForallTy { tyvar, body } => {
                Type::forall_ty(tyvar.clone(), self.abstract_loc(body, loc, l))
            }
            Type::ForallLoc { locvar, kind, body } => {
                Type::forall_loc_kinded(locvar.clone(), *kind, self.abstract_loc(body, loc, l))
            }
            Type::Product { fst, snd } => Type::product(
                self.abstract_loc(fst, loc, l),
                self.abstract_loc(snd, loc, l),
            ),
            _ => goal.clone(),
        }
    }

    fn attempt(&mut self, value: bool) -> Result<Generated, GenError> {
        for _ in 0..ATTEMPTS {
            self.steps = 0;
            let at = if self.rng.random_bool(0.5) {
                Location::Client
            } else {
                Location::Server
            };
            let size = self.rng.random_range(0..=3.min(self.cfg.max_depth));
            let goal = self.gen_type(&Ctx::default(), size);
            let Some(m) = self.gen(&Ctx::default(), &at, &goal, self.cfg.max_depth, value) else {
                continue;
            };
            let checked = check_poly(&TypeEnv::new(), &at, &m)
                .map_err(|e| GenError::Unsound(format!("{e}")))?;
            if !alpha_eq_type(&checked.ty, &goal) {
                return Err(GenError::Unsound(format!(
                    "expected {}, checker says {}",
                    crate::surface::print_type(&goal),
                    crate::surface::print_type(&checked.ty)
                )));
            }
            return Ok((m, goal, at));
        }
        Err(GenError::GenerationExhausted(ATTEMPTS))
    }

    /// A closed well-typed term.
    pub fn well_typed(&mut self) -> Result<Generated, GenError> {
        self.attempt(false)
    }

    /// A closed well-typed value.
    pub fn value(&mut self) -> Result<Generated, GenError> {
        self.attempt(true)
    }

    /// A term of type `goal` under `env`, or `None` if the budget ran out.
    pub fn term_of_type(
        &mut self,
        env: &TypeEnv,
        at: &Location,
        goal: &Type,
        value: bool,
    ) -> Option<Term> {
        for _ in 0..20 {
            self.steps = 0;
            if let Some(m) = self.gen(&Ctx::from_env(env), at, goal, self.cfg.max_depth, value) {
                return Some(m);
            }
        }
        None
    }

    /// A random type whose free type and location variables are drawn from
    /// `env`.
    pub fn type_in(&mut self, env: &TypeEnv, size: usize) -> Type {
        self.gen_type(&Ctx::from_env(env), size)
    }
}

pub fn gen_well_typed(cfg: GenConfig) -> Result<Generated, GenError> {
    Generator::new(cfg).well_typed()
}

/// `count` terms from one seeded generator.
pub fn corpus(cfg: GenConfig, count: usize) -> Result<Vec<Generated>, GenError> {
    let mut g = Generator::new(cfg);
    (0..count).map(|_| g.well_typed()).collect()
}

/// How often each typing rule occurs in a set of terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Coverage {
    pub var: usize,
    pub abs: usize,
    pub app: usize,
    pub tabs: usize,
    pub tapp: usize,
    pub labs: usize,
    pub lapp: usize,
}

impl Coverage {
    pub fn record(&mut self, m: &Term) {
        m.walk(&mut |t| match t {
            Term::Var { .. } => self.var += 1,
            Term::Lam { .. } => self.abs += 1,
            Term::App { .. } => self.app += 1,
            Term::TyLam { .. } => self.tabs += 1,
            Term::TyApp { .. } => self.tapp += 1,
            Term::LocLam { .. } => self.labs += 1,
            Term::LocApp { .. } => self.lapp += 1,
            _ => {}
        });
    }

    /// Rules that never occurred.
    pub fn missing(&self) -> Vec<&'static str> {
        [
            ("Var", self.var),
            ("Abs", self.abs),
            ("App", self.app),
            ("Tabs", self.tabs),
            ("Tapp", self.tapp),
            ("Labs", self.labs),
            ("Lapp", self.lapp),
        ]
        .into_iter()
        .filter(|(_, n)| *n == 0)
        .map(|(r, _)| r)
        .collect()
    }
}
