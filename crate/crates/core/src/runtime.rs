//! A deterministic two-endpoint machine for sliced programs.
//!
//! The client and the server alternate on one logical thread. `req` and
//! `call` post a message to the other endpoint's inbox and suspend the
//! sender until the matching reply arrives; the receiver may itself call
//! back before replying. Closures travel by definition name together with
//! their captured environment.

use std::collections::VecDeque;
use std::fmt;

use serde_json::{json, Value};

use crate::ast::{Location, Name, Term};
use crate::eval::{apply_prim, unroll_letrec, Fuel};
use crate::grow;
use crate::slice::{gen_dispatch, Dispatch, SlicedProgram};
use crate::subst::{subst_term, subst_term_loc, subst_term_type};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("out of fuel after {0} steps")]
    OutOfFuel(u64),
    #[error("stuck: {0}")]
    Stuck(String),
    #[error("ProtocolViolation: {0}")]
    ProtocolViolation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Req,
    Call,
    Reply,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Req => "req",
            Direction::Call => "call",
            Direction::Reply => "reply",
        })
    }
}

/// One message on the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub direction: Direction,
    pub payload: Value,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.direction, self.payload)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// Number of `req` and `call` messages.
    pub fn remote_calls(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.direction != Direction::Reply)
            .count()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.events.iter().map(|e| e.direction).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub value: Term,
    pub trace: Trace,
    pub steps_used: u64,
}

#[derive(Clone, Debug)]
enum Message {
    Invoke { fun: Term, arg: Term },
    Reply(Term),
}

#[derive(Clone, Debug)]
enum Activation {
    /// A request this endpoint sent and is waiting on.
    Awaiting,
    /// A handler running on behalf of the other endpoint.
    Serving(Name),
}

#[derive(Debug)]
struct Endpoint {
    site: Location,
    stack: Vec<Activation>,
    inbox: VecDeque<Message>,
}

impl Endpoint {
    fn new(site: Location) -> Self {
        Endpoint {
            site,
            stack: Vec::new(),
            inbox: VecDeque::new(),
        }
    }
}

struct Machine<'p> {
    program: &'p SlicedProgram,
    client: Endpoint,
    server: Endpoint,
    trace: Trace,
    remaining: u64,
    used: u64,
}

type Run = Result<Term, RunError>;

fn stuck<T>(msg: impl Into<String>) -> Result<T, RunError> {
    Err(RunError::Stuck(msg.into()))
}

impl<'p> Machine<'p> {
    fn endpoint(&mut self, site: &Location) -> &mut Endpoint {
        match site {
            Location::Server => &mut self.server,
            _ => &mut self.client,
        }
    }

    fn tick(&mut self) -> Result<(), RunError> {
        if self.remaining == 0 {
            return Err(RunError::OutOfFuel(self.used));
        }
        self.remaining -= 1;
        self.used += 1;
        Ok(())
    }

    /// The code of closure `fun` applied to `arg`, checked to run at `site`.
    fn instantiate(&self, fun: &Term, arg: &Term, site: &Location) -> Run {
        let Term::Closure {
            def,
            locs,
            tys,
            vals,
        } = fun
        else {
            return stuck("application of a non-closure");
        };
        let Some(code) = self.program.defs_at(site).get(def) else {
            return stuck(format!("definition `{def}` is not available at {site}"));
        };
        let mut code = code.clone();
        for (l, loc) in locs {
            code = subst_term_loc(&code, loc, l);
        }
        for (a, ty) in tys {
            code = subst_term_type(&code, ty, a);
        }
        for (x, v) in vals {
            code = subst_term(&code, v, x);
        }
        let Term::Lam {
            loc, param, body, ..
        } = code
        else {
            return stuck(format!("definition `{def}` is not a lambda"));
        };
        if &loc != site {
            return stuck(format!("definition `{def}` runs at {loc}, not at {site}"));
        }
        Ok(subst_term(&body, arg, &param))
    }

    fn remote(&mut self, from: &Location, dir: Direction, fun: Term, arg: Term) -> Run {
        let to = match (dir, from) {
            (Direction::Req, Location::Client) => Location::Server,
            (Direction::Call, Location::Server) => Location::Client,
            _ => {
                return Err(RunError::ProtocolViolation(format!(
                    "`{dir}` issued at {from}"
                )))
            }
        };
        self.trace.events.push(TraceEvent {
            direction: dir,
            payload: json!({ "tag": dir.to_string(), "fn": fun, "arg": arg }),
        });
        self.endpoint(from).stack.push(Activation::Awaiting);
        self.endpoint(&to)
            .inbox
            .push_back(Message::Invoke { fun, arg });
        self.serve(&to)?;
        self.receive_reply(from)
    }

    /// Runs the oldest message in `site`'s inbox to completion and replies.
    fn serve(&mut self, site: &Location) -> Result<(), RunError> {
        let Some(Message::Invoke { fun, arg }) = self.endpoint(site).inbox.pop_front() else {
            return Err(RunError::ProtocolViolation(format!(
                "{site} was scheduled with no request"
            )));
        };
        let def = match &fun {
            Term::Closure { def, .. } => def.clone(),
            _ => String::new(),
        };
        self.endpoint(site).stack.push(Activation::Serving(def));
        let body = self.instantiate(&fun, &arg, site)?;
        let result = self.eval(&body, site)?;
        self.endpoint(site).stack.pop();
        let back = match site {
            Location::Server => Location::Client,
            _ => Location::Server,
        };
        self.trace.events.push(TraceEvent {
            direction: Direction::Reply,
            payload: json!({ "tag": "reply", "arg": result }),
        });
        self.endpoint(&back).inbox.push_back(Message::Reply(result));
        Ok(())
    }

    fn receive_reply(&mut self, site: &Location) -> Run {
        let ep = self.endpoint(site);
        match ep.inbox.pop_front() {
            Some(Message::Reply(v)) => match ep.stack.pop() {
                Some(Activation::Awaiting) => Ok(v),
                Some(Activation::Serving(def)) => Err(RunError::ProtocolViolation(format!(
                    "reply at {site} while it was still serving `{def}`"
                ))),
                None => Err(RunError::ProtocolViolation(format!(
                    "reply at {site} with no pending request"
                ))),
            },
            _ => Err(RunError::ProtocolViolation(format!(
                "{site} resumed without a reply"
            ))),
        }
    }

    fn eval(&mut self, m: &Term, at: &Location) -> Run {
        grow(|| self.eval_inner(m, at))
    }

    fn eval_inner(&mut self, m: &Term, at: &Location) -> Run {
        self.tick()?;
        match m {
            Term::Const { .. }
            | Term::Closure { .. }
            | Term::TyLam { .. }
            | Term::LocLam { .. } => Ok(m.clone()),
            Term::Var { name } => stuck(format!("free variable `{name}` at {at}")),
            Term::Lam { .. } => stuck("unlifted lambda in sliced code"),
            Term::App { fun, arg } => {
                let f = self.eval(fun, at)?;
                let a = self.eval(arg, at)?;
                let body = self.instantiate(&f, &a, at)?;
                self.eval(&body, at)
            }
            Term::Req { fun, arg } | Term::Call { fun, arg } => {
                let dir = if matches!(m, Term::Req { .. }) {
                    Direction::Req
                } else {
                    Direction::Call
                };
                let f = self.eval(fun, at)?;
                let a = self.eval(arg, at)?;
                self.remote(at, dir, f, a)
            }
            Term::Gen { callee, fun, arg } => {
                let Some(how) = gen_dispatch(at, callee) else {
                    return stuck(format!("gen with unresolved callee `{callee}`"));
                };
                let f = self.eval(fun, at)?;
                let a = self.eval(arg, at)?;
                match how {
                    Dispatch::Local => {
                        let body = self.instantiate(&f, &a, at)?;
                        self.eval(&body, at)
                    }
                    Dispatch::Req => self.remote(at, Direction::Req, f, a),
                    Dispatch::Call => self.remote(at, Direction::Call, f, a),
                }
            }
            Term::TyApp { fun, ty_arg } => match self.eval(fun, at)? {
                Term::TyLam { tyvar, body } => {
                    self.eval(&subst_term_type(&body, ty_arg, &tyvar), at)
                }
                _ => stuck("type application of a non-type-abstraction"),
            },
            Term::LocApp { fun, loc_arg } => {
                if !loc_arg.is_const() {
                    return stuck(format!("location application to variable `{loc_arg}`"));
                }
                match self.eval(fun, at)? {
                    Term::LocLam { locvar, body, .. } => {
                        self.eval(&subst_term_loc(&body, loc_arg, &locvar), at)
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
                apply_prim(*op, vals).map_err(|e| RunError::Stuck(e.to_string()))
            }
            Term::Letrec {
                name,
                ty,
                value,
                body,
            } => {
                let unrolled = unroll_letrec(name, ty, value);
                self.eval(&subst_term(body, &unrolled, name), at)
            }
        }
    }
}

/// Runs the entry term at the client.
pub fn run_cs(p: &SlicedProgram, fuel: Fuel) -> Result<RunOutcome, RunError> {
    let mut machine = Machine {
        program: p,
        client: Endpoint::new(Location::Client),
        server: Endpoint::new(Location::Server),
        trace: Trace::default(),
        remaining: fuel.0,
        used: 0,
    };
    let value = machine.eval(&p.client_top, &Location::Client)?;
    for ep in [&machine.client, &machine.server] {
        if !ep.stack.is_empty() || !ep.inbox.is_empty() {
            return Err(RunError::ProtocolViolation(format!(
                "{} finished with pending messages",
                ep.site
            )));
        }
    }
    Ok(RunOutcome {
        value,
        trace: machine.trace,
        steps_used: machine.used,
    })
}

/// Turns a runtime value back into a term of the unsliced calculus:
/// closures become their lambdas with the captured environment substituted,
/// and `req`/`call`/`gen` become plain applications.
pub fn read_back(p: &SlicedProgram, v: &Term) -> Term {
    grow(|| match v {
        Term::Closure {
            def,
            locs,
            tys,
            vals,
        } => {
            let code = p
                .client_defs
                .get(def)
                .or_else(|| p.server_defs.get(def))
                .cloned()
                .unwrap_or_else(|| v.clone());
            if matches!(code, Term::Closure { .. }) {
                return code;
            }
            let mut code = read_back(p, &code);
            for (l, loc) in locs {
                code = subst_term_loc(&code, loc, l);
            }
            for (a, ty) in tys {
                code = subst_term_type(&code, ty, a);
            }
            for (x, val) in vals {
                code = subst_term(&code, &read_back(p, val), x);
            }
            code
        }
        Term::Req { fun, arg } | Term::Call { fun, arg } | Term::Gen { fun, arg, .. } => {
            Term::app(read_back(p, fun), read_back(p, arg))
        }
        Term::Var { .. } | Term::Const { .. } => v.clone(),
        Term::Lam {
            loc,
            param,
            param_type,
            body,
        } => Term::lam(
            loc.clone(),
            param.clone(),
            param_type.clone(),
            read_back(p, body),
        ),
        Term::App { fun, arg } => Term::app(read_back(p, fun), read_back(p, arg)),
        Term::TyLam { tyvar, body } => Term::ty_lam(tyvar.clone(), read_back(p, body)),
        Term::TyApp { fun, ty_arg } => Term::ty_app(read_back(p, fun), ty_arg.clone()),
        Term::LocLam { locvar, kind, body } => {
            Term::loc_lam_kinded(locvar.clone(), *kind, read_back(p, body))
        }
        Term::LocApp { fun, loc_arg } => Term::loc_app(read_back(p, fun), loc_arg.clone()),
        Term::Pair { fst, snd } => Term::pair(read_back(p, fst), read_back(p, snd)),
        Term::Proj { index, arg } => Term::proj(*index, read_back(p, arg)),
        Term::Prim { op, args } => Term::prim(*op, args.iter().map(|a| read_back(p, a)).collect()),
        Term::Letrec {
            name,
            ty,
            value,
            body,
        } => Term::letrec(
            name.clone(),
            ty.clone(),
            read_back(p, value),
            read_back(p, body),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Type;
    use crate::slice::slice;

    fn run(m: &Term) -> RunOutcome {
        run_cs(&slice(m).unwrap(), Fuel::default()).unwrap()
    }

    #[test]
    fn remote_identity_round_trip() {
        let m = Term::app(
            Term::lam(Location::Server, "x", Type::int(), Term::var("x")),
            Term::int(1),
        );
        let out = run(&m);
        assert_eq!(out.value, Term::int(1));
        assert_eq!(
            out.trace.directions(),
            vec![Direction::Req, Direction::Reply]
        );
        assert_eq!(
            out.trace.events[1].to_string(),
            r#"reply {"arg":{"node":"Const","value":1},"tag":"reply"}"#
        );
    }

    #[test]
    fn pure_client_has_no_messages() {
        let m = Term::app(
            Term::lam(
                Location::Client,
                "x",
                Type::int(),
                Term::prim(crate::ast::PrimOp::Add, vec![Term::var("x"), Term::int(1)]),
            ),
            Term::int(1),
        );
        let out = run(&m);
        assert_eq!(out.value, Term::int(2));
        assert!(out.trace.events.is_empty());
    }

    #[test]
    fn nested_callback() {
        // (\(u:unit)@s. (\(v:unit)@c. 7) ()) ()
        let cred = Term::lam(Location::Client, "v", Type::unit(), Term::int(7));
        let auth = Term::lam(
            Location::Server,
            "u",
            Type::unit(),
            Term::app(cred, Term::unit()),
        );
        let out = run(&Term::app(auth, Term::unit()));
        assert_eq!(out.value, Term::int(7));
        assert_eq!(
            out.trace.directions(),
            vec![
                Direction::Req,
                Direction::Call,
                Direction::Reply,
                Direction::Reply
            ]
        );
    }

    #[test]
    fn closures_read_back_to_lambdas() {
        // (\(y:int)@s. \(x:int)@c. y) 5  ~>  \(x:int)@c. 5
        let inner = Term::lam(Location::Client, "x", Type::int(), Term::var("y"));
        let m = Term::app(
            Term::lam(Location::Server, "y", Type::int(), inner),
            Term::int(5),
        );
        let p = slice(&m).unwrap();
        let out = run_cs(&p, Fuel::default()).unwrap();
        let back = read_back(&p, &out.value);
        assert!(crate::alpha::alpha_eq(
            &back,
            &Term::lam(Location::Client, "x", Type::int(), Term::int(5))
        ));
    }

    #[test]
    fn call_from_client_is_a_violation() {
        let p = SlicedProgram {
            client_top: Term::call(Term::int(1), Term::int(2)),
            entry: "main".into(),
            ..SlicedProgram::default()
        };
        assert!(matches!(
            run_cs(&p, Fuel::default()),
            Err(RunError::ProtocolViolation(_))
        ));
    }

    #[test]
    fn deterministic() {
        let m = Term::app(
            Term::lam(Location::Server, "x", Type::int(), Term::var("x")),
            Term::int(1),
        );
        let p = slice(&m).unwrap();
        assert_eq!(run_cs(&p, Fuel::default()), run_cs(&p, Fuel::default()));
        assert!(matches!(run_cs(&p, Fuel(2)), Err(RunError::OutOfFuel(2))));
    }
}
