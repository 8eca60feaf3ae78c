//! Type checking, evaluation, monomorphization and client/server slicing for
//! the polymorphic RPC calculus.

pub mod alpha;
pub mod ast;
pub mod eval;
pub mod mono;
pub mod propgen;
pub mod runtime;
pub mod slice;
pub mod subst;
pub mod surface;
pub mod typeck;

pub use alpha::{alpha_eq, alpha_eq_type};
pub use ast::{Kind, Literal, Location, Name, PrimOp, Term, TermPath, Type, TypeEnv};
pub use eval::{eval_mono, eval_poly, AppEvent, EvalError, EvalOutcome, Fuel, DEFAULT_FUEL};
pub use mono::{
    mono_env, mono_letrec, mono_term, mono_type, selective_mono, selective_mono_type, MonoError,
    MonoReport,
};
pub use runtime::{read_back, run_cs, Direction, RunError, RunOutcome, Trace, TraceEvent};
pub use slice::{slice, Dispatch, SliceError, SlicedProgram};
pub use typeck::{
    check_mono, check_poly, check_well_formed, TypeError, TypeErrorKind, TypingResult,
};

/// Runs `f` on a fresh stack segment when the current one is nearly full, so
/// deeply nested terms do not overflow the recursive passes.
pub(crate) fn grow<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, f)
}
