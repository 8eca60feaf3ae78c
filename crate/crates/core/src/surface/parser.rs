use super::lexer::{lex, Tok};
use super::{ParseError, Pos, Program, SpanTree};
use crate::ast::{Kind, Location, Name, PrimOp, Term, Type};
use crate::grow;

const KEYWORDS: [&str; 9] = [
    "letrec", "in", "fst", "snd", "req", "call", "gen", "forall", "def",
];

type Parsed = Result<(Term, SpanTree), ParseError>;

pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    ty_scope: Vec<Name>,
}

fn leaf(pos: Pos) -> SpanTree {
    SpanTree {
        pos,
        kids: Vec::new(),
    }
}

fn node(pos: Pos, kids: Vec<SpanTree>) -> SpanTree {
    SpanTree { pos, kids }
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
            ty_scope: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.pos(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!(
            "expected {wanted}, found {}",
            self.peek().describe()
        ))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(what),
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    pub fn location(&mut self) -> Result<Location, ParseError> {
        let name = self.ident("a location")?;
        Ok(match name.as_str() {
            "c" => Location::Client,
            "s" => Location::Server,
            _ => Location::Var(name),
        })
    }

    fn kind(&mut self) -> Result<Kind, ParseError> {
        if *self.peek() != Tok::Colon {
            return Ok(Kind::Static);
        }
        self.bump();
        if self.eat_keyword("static") {
            Ok(Kind::Static)
        } else if self.eat_keyword("dynamic") {
            Ok(Kind::Dynamic)
        } else {
            self.unexpected("`static` or `dynamic`")
        }
    }

    fn comma_separated<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut out = vec![item(self)?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(item(self)?);
        }
        Ok(out)
    }

    // ---- types ----

    pub fn ty(&mut self) -> Result<Type, ParseError> {
        grow(|| self.ty_inner())
    }

    fn ty_inner(&mut self) -> Result<Type, ParseError> {
        if self.eat_keyword("forall") {
            if *self.peek() == Tok::Bang {
                self.bump();
                let vars = self.comma_separated(|p| p.ident("a type variable"))?;
                self.expect(Tok::Dot, "`.`")?;
                let depth = self.ty_scope.len();
                self.ty_scope.extend(vars.iter().cloned());
                let body = self.ty();
                self.ty_scope.truncate(depth);
                let body = body?;
                return Ok(vars
                    .into_iter()
                    .rev()
                    .fold(body, |b, a| Type::forall_ty(a, b)));
            }
            let binders = self.comma_separated(|p| {
                let l = p.ident("a location variable")?;
                Ok((l, p.kind()?))
            })?;
            self.expect(Tok::Dot, "`.`")?;
            let body = self.ty()?;
            return Ok(binders
                .into_iter()
                .rev()
                .fold(body, |b, (l, k)| Type::forall_loc_kinded(l, k, b)));
        }
        let dom = self.product_ty()?;
        if *self.peek() == Tok::Minus {
            self.bump();
            let loc = self.location()?;
            self.expect(Tok::Arrow, "`->`")?;
            let cod = self.ty()?;
            return Ok(Type::arrow(dom, loc, cod));
        }
        Ok(dom)
    }

    fn product_ty(&mut self) -> Result<Type, ParseError> {
        let mut t = self.atom_ty()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.atom_ty()?;
            t = Type::product(t, rhs);
        }
        Ok(t)
    }

    fn atom_ty(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Tick(a) => {
                self.bump();
                Ok(Type::var(a))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(_) => {
                let name = self.ident("a type")?;
                Ok(if self.ty_scope.contains(&name) {
                    Type::var(name)
                } else {
                    Type::base(name)
                })
            }
            _ => self.unexpected("a type"),
        }
    }

    // ---- terms ----

    pub fn term(&mut self) -> Parsed {
        grow(|| self.term_inner())
    }

    fn term_inner(&mut self) -> Parsed {
        let pos = self.pos();
        match self.peek() {
            Tok::Backslash => {
                self.bump();
                let mut params = Vec::new();
                while *self.peek() == Tok::LParen {
                    self.bump();
                    let x = self.ident("a parameter name")?;
                    self.expect(Tok::Colon, "`:`")?;
                    let t = self.ty()?;
                    self.expect(Tok::RParen, "`)`")?;
                    params.push((x, t));
                }
                if params.is_empty() {
                    return self.unexpected("`(x : A)`");
                }
                self.expect(Tok::At, "`@`")?;
                let loc = self.location()?;
                self.expect(Tok::Dot, "`.`")?;
                let (body, span) = self.term()?;
                Ok(params
                    .into_iter()
                    .rev()
                    .fold((body, span), |(b, s), (x, t)| {
                        (Term::lam(loc.clone(), x, t, b), node(pos, vec![s]))
                    }))
            }
            Tok::LocLambda => {
                self.bump();
                let binders = self.comma_separated(|p| {
                    let l = p.ident("a location variable")?;
                    Ok((l, p.kind()?))
                })?;
                self.expect(Tok::Dot, "`.`")?;
                let (body, span) = self.term()?;
                Ok(binders
                    .into_iter()
                    .rev()
                    .fold((body, span), |(b, s), (l, k)| {
                        (Term::loc_lam_kinded(l, k, b), node(pos, vec![s]))
                    }))
            }
            Tok::TyLambda => {
                self.bump();
                let vars = self.comma_separated(|p| p.ident("a type variable"))?;
                self.expect(Tok::Dot, "`.`")?;
                let depth = self.ty_scope.len();
                self.ty_scope.extend(vars.iter().cloned());
                let body = self.term();
                self.ty_scope.truncate(depth);
                let (body, span) = body?;
                Ok(vars.into_iter().rev().fold((body, span), |(b, s), a| {
                    (Term::ty_lam(a, b), node(pos, vec![s]))
                }))
            }
            Tok::Ident(k) if k == "letrec" => {
                self.bump();
                let name = self.ident("a function name")?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.ty()?;
                self.expect(Tok::Eq, "`=`")?;
                let (value, vs) = self.term()?;
                if !self.eat_keyword("in") {
                    return self.unexpected("`in`");
                }
                let (body, bs) = self.term()?;
                Ok((Term::letrec(name, ty, value, body), node(pos, vec![vs, bs])))
            }
            _ => self.app(),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Str(_) | Tok::LParen | Tok::Hash | Tok::Amp => true,
            Tok::Ident(s) => {
                !KEYWORDS.contains(&s.as_str()) || matches!(s.as_str(), "req" | "call" | "gen")
            }
            _ => false,
        }
    }

    fn app(&mut self) -> Parsed {
        let pos = self.pos();
        let (mut m, mut span) = if self.is_keyword("fst") || self.is_keyword("snd") {
            let index = if self.eat_keyword("fst") {
                1
            } else {
                self.bump();
                2
            };
            let (arg, s) = self.atom()?;
            (Term::proj(index, arg), node(pos, vec![s]))
        } else {
            self.atom()?
        };
        loop {
            if *self.peek() == Tok::LBracket {
                self.bump();
                if *self.peek() == Tok::At {
                    self.bump();
                    loop {
                        let l = self.location()?;
                        m = Term::loc_app(m, l);
                        span = node(pos, vec![span]);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        }
                        if *self.peek() == Tok::RBracket {
                            break;
                        }
                    }
                } else {
                    let t = self.ty()?;
                    m = Term::ty_app(m, t);
                    span = node(pos, vec![span]);
                }
                self.expect(Tok::RBracket, "`]`")?;
            } else if self.starts_atom() {
                let (arg, s) = self.atom()?;
                m = Term::app(m, arg);
                span = node(pos, vec![span, s]);
            } else {
                return Ok((m, span));
            }
        }
    }

    fn pair_args(&mut self) -> Result<(Term, SpanTree, Term, SpanTree), ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let (a, sa) = self.term()?;
        self.expect(Tok::Comma, "`,`")?;
        let (b, sb) = self.term()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok((a, sa, b, sb))
    }

    fn atom(&mut self) -> Parsed {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok((Term::int(n), leaf(pos)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok((Term::str(s), leaf(pos)))
            }
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok((Term::unit(), leaf(pos)));
                }
                let (a, sa) = self.term()?;
                match self.peek() {
                    Tok::RParen => {
                        self.bump();
                        Ok((a, sa))
                    }
                    Tok::Comma => {
                        self.bump();
                        let (b, sb) = self.term()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok((Term::pair(a, b), node(pos, vec![sa, sb])))
                    }
                    _ => self.unexpected("`)` or `,`"),
                }
            }
            Tok::Hash => {
                self.bump();
                let name = self.ident("a primitive name")?;
                let Some(op) = PrimOp::from_name(&name) else {
                    return Err(ParseError::new(pos, format!("unknown primitive `#{name}`")));
                };
                self.expect(Tok::LParen, "`(`")?;
                let mut args = Vec::new();
                let mut spans = Vec::new();
                if *self.peek() != Tok::RParen {
                    for (a, s) in self.comma_separated(|p| p.term())? {
                        args.push(a);
                        spans.push(s);
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != op.arity() {
                    return Err(ParseError::new(
                        pos,
                        format!("#{name} takes {} arguments, got {}", op.arity(), args.len()),
                    ));
                }
                Ok((Term::prim(op, args), node(pos, spans)))
            }
            Tok::Amp => {
                self.bump();
                let def = self.ident("a definition name")?;
                self.expect(Tok::LBrace, "`{`")?;
                let (mut locs, mut tys, mut vals, mut spans) = (vec![], vec![], vec![], vec![]);
                while *self.peek() != Tok::RBrace {
                    match self.peek() {
                        Tok::At => {
                            self.bump();
                            let l = self.ident("a location variable")?;
                            self.expect(Tok::Eq, "`=`")?;
                            locs.push((l, self.location()?));
                        }
                        Tok::Bang => {
                            self.bump();
                            let a = self.ident("a type variable")?;
                            self.expect(Tok::Eq, "`=`")?;
                            tys.push((a, self.ty()?));
                        }
                        _ => {
                            let x = self.ident("a captured name")?;
                            self.expect(Tok::Eq, "`=`")?;
                            let (v, s) = self.term()?;
                            vals.push((x, v));
                            spans.push(s);
                        }
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else if *self.peek() != Tok::RBrace {
                        return self.unexpected("`,` or `}`");
                    }
                }
                self.bump();
                Ok((
                    Term::Closure {
                        def,
                        locs,
                        tys,
                        vals,
                    },
                    node(pos, spans),
                ))
            }
            Tok::Ident(k) if k == "req" || k == "call" => {
                self.bump();
                let (a, sa, b, sb) = self.pair_args()?;
                let m = if k == "req" {
                    Term::req(a, b)
                } else {
                    Term::call(a, b)
                };
                Ok((m, node(pos, vec![sa, sb])))
            }
            Tok::Ident(k) if k == "gen" => {
                self.bump();
                self.expect(Tok::LBracket, "`[`")?;
                self.expect(Tok::At, "`@`")?;
                let callee = self.location()?;
                self.expect(Tok::RBracket, "`]`")?;
                let (a, sa, b, sb) = self.pair_args()?;
                Ok((Term::gen(callee, a, b), node(pos, vec![sa, sb])))
            }
            Tok::Ident(_) => {
                let x = self.ident("a term")?;
                Ok((Term::var(x), leaf(pos)))
            }
            _ => self.unexpected("a term"),
        }
    }

    pub fn program(&mut self) -> Result<Program, ParseError> {
        let mut prog = Program::default();
        while !self.at_eof() {
            if self.eat_keyword("def") {
                let name = self.ident("a definition name")?;
                self.expect(Tok::Eq, "`=`")?;
                let (m, _) = self.term()?;
                self.expect(Tok::Semi, "`;`")?;
                prog.defs.push((name, m));
            } else if self.is_keyword("main") && *self.peek_at(1) == Tok::Eq {
                if prog.main.is_some() {
                    return self.error("duplicate `main`");
                }
                self.bump();
                self.bump();
                let (m, _) = self.term()?;
                self.expect(Tok::Semi, "`;`")?;
                prog.main = Some(m);
            } else {
                return self.unexpected("`def` or `main`");
            }
        }
        Ok(prog)
    }
}
