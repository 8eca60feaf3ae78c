//! Big-step evaluation `M ⇓_a V`.
//!
//! The evaluator is substitution based and charges one unit of fuel per rule
//! application. Every beta step records the location it was issued from and
//! the location of the lambda it entered, which is how remote calls are told
//! apart from local ones.

use std::fmt;

use crate::ast::{Literal, Location, PrimOp, Term};
use crate::grow;
use crate::subst::{subst_term, subst_term_loc, subst_term_type};

pub const DEFAULT_FUEL: u64 = 100_000;

/// Remaining rule applications.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel(pub u64);

impl Default for Fuel {
    fn default() -> Self {
        Fuel(DEFAULT_FUEL)
    }
}

/// One application: where it was evaluated and where its lambda ran.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppEvent {
    pub caller: Location,
    pub callee: Location,
}

impl AppEvent {
    pub fn is_remote(&self) -> bool {
        self.caller != self.callee
    }
}

impl fmt::Display for AppEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "app caller={} callee={} kind={}",
            self.caller,
            self.callee,
            if self.is_remote() { "remote" } else { "local" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOutcome {
    pub value: Term,
    pub steps_used: u64,
    pub app_events: Vec<AppEvent>,
}

impl EvalOutcome {
    pub fn remote_events(&self) -> impl Iterator<Item = &AppEvent> {
        self.app_events.iter().filter(|e| e.is_remote())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("out of fuel after {0} steps")]
    OutOfFuel(u64),
    #[error("stuck: {0}")]
    Stuck(String),
    #[error("location-polymorphic form in a monomorphic program: {0}")]
    PolyFormInMono(String),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Poly,
    Mono,
}

struct Machine {
    mode: Mode,
    remaining: u64,
    used: u64,
    events: Vec<AppEvent>,
}

type Eval = Result<Term, EvalError>;

fn stuck<T>(msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::Stuck(msg.into()))
}

/// The value `letrec f = V in f` unrolls to: `V` with every `f` replaced by
/// the letrec itself.
pub(crate) fn unroll_letrec(name: &str, ty: &crate::ast::Type, value: &Term) -> Term {
    let knot = Term::letrec(name, ty.clone(), value.clone(), Term::var(name));
    subst_term(value, &knot, name)
}

impl Machine {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.remaining == 0 {
            return Err(EvalError::OutOfFuel(self.used));
        }
        self.remaining -= 1;
        self.used += 1;
        Ok(())
    }

    fn eval(&mut self, m: &Term, at: &Location) -> Eval {
        grow(|| self.eval_inner(m, at))
    }

    fn eval_inner(&mut self, m: &Term, at: &Location) -> Eval {
        self.tick()?;
        match m {
            Term::Var { name } => stuck(format!("free variable `{name}`")),
            Term::Lam { .. } | Term::Const { .. } => Ok(m.clone()),
            Term::TyLam { body, .. } => {
                if body.is_value() {
                    Ok(m.clone())
                } else {
                    stuck("type abstraction over a non-value")
                }
            }
            Term::LocLam { body, .. } => {
                if self.mode == Mode::Mono {
                    return Err(EvalError::PolyFormInMono("location abstraction".into()));
                }
                if body.is_value() {
                    Ok(m.clone())
                } else {
                    stuck("location abstraction over a non-value")
                }
            }
            Term::App { fun, arg } => {
                let f = self.eval(fun, at)?;
                let w = self.eval(arg, at)?;
                let Term::Lam {
                    loc, param, body, ..
                } = f
                else {
                    return stuck("application of a non-function");
                };
                if !loc.is_const() {
                    return stuck(format!("lambda at unresolved location `{loc}`"));
                }
                self.events.push(AppEvent {
                    caller: at.clone(),
                    callee: loc.clone(),
                });
                let reduced = subst_term(&body, &w, &param);
                self.eval(&reduced, &loc)
            }
            Term::TyApp { fun, ty_arg } => match self.eval(fun, at)? {
                Term::TyLam { tyvar, body } => Ok(subst_term_type(&body, ty_arg, &tyvar)),
                _ => stuck("type application of a non-type-abstraction"),
            },
            Term::LocApp { fun, loc_arg } => {
                if self.mode == Mode::Mono {
                    return Err(EvalError::PolyFormInMono("location application".into()));
                }
                if !loc_arg.is_const() {
                    return stuck(format!("location application to variable `{loc_arg}`"));
                }
                match self.eval(fun, at)? {
                    Term::LocLam { locvar, body, .. } => {
                        Ok(subst_term_loc(&body, loc_arg, &locvar))
                    }
                    _ => stuck("location application of a non-location-abstraction"),
                }
            }
            Term::Pair { fst, snd } => {
                let a = self.eval(fst, at)?;
                let b = self.eval(snd, at)?;
                Ok(Term::pair(a, b))
            }
            Term::Proj { index, arg } => match self.eval(arg, at)? {
                Term::Pair { fst, snd } => Ok(if *index == 1 { *fst } else { *snd }),
                _ => stuck("projection from a non-pair"),
            },
            Term::Prim { op, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, at)?);
                }
                apply_prim(*op, vals)
            }
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => {
                if !value.is_recursive_binding() {
                    return stuck("letrec must bind an abstraction");
                }
                let unrolled = unroll_letrec(name, ty, value);
                self.eval(&subst_term(body, &unrolled, name), at)
            }
            Term::Req { .. } | Term::Call { .. } | Term::Gen { .. } | Term::Closure { .. } => {
                stuck("sliced-program form outside the client/server runtime")
            }
        }
    }
}

/// Shared by the evaluator and the client/server runtime.
pub(crate) fn apply_prim(op: PrimOp, vals: Vec<Term>) -> Eval {
    let lit = |t: &Term| match t {
        Term::Const { value } => Some(value.clone()),
        _ => None,
    };
    let lits: Vec<Option<Literal>> = vals.iter().map(lit).collect();
    match (op, lits.as_slice()) {
        (PrimOp::Add, [Some(Literal::Int(a)), Some(Literal::Int(b))]) => {
            Ok(Term::int(a.wrapping_add(*b)))
        }
        (PrimOp::Sub, [Some(Literal::Int(a)), Some(Literal::Int(b))]) => {
            Ok(Term::int(a.wrapping_sub(*b)))
        }
        (PrimOp::Mul, [Some(Literal::Int(a)), Some(Literal::Int(b))]) => {
            Ok(Term::int(a.wrapping_mul(*b)))
        }
        (PrimOp::Concat, [Some(Literal::Str(a)), Some(Literal::Str(b))]) => {
            Ok(Term::str(format!("{a}{b}")))
        }
        (PrimOp::Ifz, [Some(Literal::Int(n)), _, _]) => {
            let mut vals = vals;
            Ok(if *n == 0 {
                vals.swap_remove(1)
            } else {
                vals.swap_remove(2)
            })
        }
        _ => stuck(format!("#{} applied to ill-typed operands", op.name())),
    }
}

fn run(mode: Mode, m: &Term, at: &Location, fuel: Fuel) -> Result<EvalOutcome, EvalError> {
    if !at.is_const() {
        return stuck(format!("evaluation at unresolved location `{at}`"));
    }
    let mut machine = Machine {
        mode,
        remaining: fuel.0,
        used: 0,
        events: Vec::new(),
    };
    let value = machine.eval(m, at)?;
    Ok(EvalOutcome {
        value,
        steps_used: machine.used,
        app_events: machine.events,
    })
}

/// Evaluates a closed term of the location-polymorphic calculus at `at`.
pub fn eval_poly(m: &Term, at: &Location, fuel: Fuel) -> Result<EvalOutcome, EvalError> {
    run(Mode::Poly, m, at, fuel)
}

/// Evaluates a closed term of the pair-extended monomorphic calculus.
pub fn eval_mono(m: &Term, at: &Location, fuel: Fuel) -> Result<EvalOutcome, EvalError> {
    run(Mode::Mono, m, at, fuel)
}
