//! Surface syntax: `\x.e`, `(e1 e2)`, `letrec x1 = e1, ..., xn = en in e`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{Env, Name, Sort, Symbol, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("duplicate letrec binder `{0}`")]
    DuplicateBinder(String),
    #[error("letrec needs at least one binding")]
    EmptyEnv,
    #[error("cannot decode `{0}`")]
    Undecodable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    App(Box<Expr>, Box<Expr>),
    Lam(String, Box<Expr>),
    Letrec(Vec<(String, Expr)>, Box<Expr>),
}

impl Expr {
    pub fn app(a: Expr, b: Expr) -> Expr {
        Expr::App(Box::new(a), Box::new(b))
    }

    pub fn lam(x: &str, body: Expr) -> Expr {
        Expr::Lam(x.to_string(), Box::new(body))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'\'' || c == b'_'
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), SyntaxError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn word(&mut self) -> Option<String> {
        let c = self.peek()?;
        if !c.is_ascii_alphabetic() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.src.len() && ident_char(self.src[self.pos]) {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn keyword(&mut self, kw: &str) -> bool {
        let save = self.pos;
        match self.word() {
            Some(w) if w == kw => true,
            _ => {
                self.pos = save;
                false
            }
        }
    }

    fn binder(&mut self) -> Result<String, SyntaxError> {
        let save = self.pos;
        match self.word() {
            Some(w) if w != "in" && w != "letrec" => Ok(w),
            _ => {
                self.pos = save;
                Err(self.err("expected variable"))
            }
        }
    }

    /// Application spine: one or more atoms, left-associated.
    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.atom()?;
        loop {
            let save = self.pos;
            match self.peek() {
                Some(b'(') | Some(b'\\') => e = Expr::app(e, self.atom()?),
                Some(c) if c.is_ascii_alphabetic() => {
                    if self.keyword("in") {
                        self.pos = save;
                        break;
                    }
                    e = Expr::app(e, self.atom()?);
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'\\') => {
                self.pos += 1;
                let x = self.binder()?;
                self.expect(b'.')?;
                Ok(Expr::lam(&x, self.expr()?))
            }
            Some(_) => {
                if self.keyword("letrec") {
                    return self.letrec();
                }
                Ok(Expr::Var(self.binder()?))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn letrec(&mut self) -> Result<Expr, SyntaxError> {
        if self.keyword("in") {
            return Err(SyntaxError::EmptyEnv);
        }
        let mut binds = Vec::new();
        let mut seen = BTreeSet::new();
        loop {
            let x = self.binder()?;
            if !seen.insert(x.clone()) {
                return Err(SyntaxError::DuplicateBinder(x));
            }
            self.expect(b'=')?;
            binds.push((x, self.expr()?));
            if self.peek() == Some(b',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if !self.keyword("in") {
            return Err(self.err("expected `in`"));
        }
        Ok(Expr::Letrec(binds, Box::new(self.expr()?)))
    }
}

pub fn parse(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

fn fmt_arg(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Var(_) | Expr::App(..) => write!(f, "{e}"),
        _ => write!(f, "({e})"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::App(a, b) => {
                f.write_str("(")?;
                fmt_arg(a, f)?;
                f.write_str(" ")?;
                fmt_arg(b, f)?;
                f.write_str(")")
            }
            Expr::Lam(x, b) => write!(f, "\\{x}.{b}"),
            Expr::Letrec(bs, body) => {
                f.write_str("letrec ")?;
                for (i, (x, e)) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x} = {e}")?;
                }
                write!(f, " in {body}")
            }
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    e.to_string()
}

pub fn encode(e: &Expr) -> Term {
    match e {
        Expr::Var(x) => Term::use_var(Term::bv(x)),
        Expr::App(a, b) => Term::app(encode(a), encode(b)),
        Expr::Lam(x, b) => Term::lam(Term::bv(x), encode(b)),
        Expr::Letrec(bs, body) => Term::let_(
            Term::env(bs.iter().map(|(x, e)| Term::bind(Term::bv(x), encode(e))), []),
            encode(body),
        ),
    }
}

fn bv_name(t: &Term) -> Result<String, SyntaxError> {
    match t {
        Term::Var(Var {
            name: Name::Plain(s),
            sort: Sort::BV,
        }) => Ok(s.to_string()),
        Term::Var(v) if v.sort == Sort::BV => Ok(crate::term::display_name(v)),
        _ => Err(SyntaxError::Undecodable(t.to_string())),
    }
}

/// Inverse of [`encode`] on almost-ground terms without holes.
pub fn decode(t: &Term) -> Result<Expr, SyntaxError> {
    let bad = || SyntaxError::Undecodable(t.to_string());
    match t {
        Term::Fn(Symbol::Var, a) => Ok(Expr::Var(bv_name(&a[0])?)),
        Term::Fn(Symbol::App, a) => Ok(Expr::app(decode(&a[0])?, decode(&a[1])?)),
        Term::Fn(Symbol::Lam, a) => Ok(Expr::Lam(bv_name(&a[0])?, Box::new(decode(&a[1])?))),
        Term::Fn(Symbol::Let, a) => {
            let env = a[0].as_env().ok_or_else(bad)?;
            if !env.tails().is_empty() || env.comps().is_empty() {
                return Err(bad());
            }
            let binds = env
                .comps()
                .iter()
                .map(|c| match c {
                    Term::Fn(Symbol::Bind, b) => Ok((bv_name(&b[0])?, decode(&b[1])?)),
                    _ => Err(SyntaxError::Undecodable(c.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Expr::Letrec(binds, Box::new(decode(&a[1])?)))
        }
        _ => Err(bad()),
    }
}

fn meta_env(e: &Env, out: &mut String) {
    let mut items: Vec<String> = Vec::new();
    for c in e.comps() {
        items.push(match c {
            Term::Fn(Symbol::Bind, b) => format!("{} = {}", meta_name(&b[0]), print_meta(&b[1])),
            Term::Chain(a, b) => format!("BCh({a},{b})"),
            other => print_meta(other),
        });
    }
    items.extend(e.tails().iter().map(crate::term::display_name));
    out.push_str(&items.join(", "));
}

fn meta_name(t: &Term) -> String {
    match t {
        Term::Var(v) => crate::term::display_name(v),
        other => print_meta(other),
    }
}

/// Concrete syntax for meta-expressions: context variables print as
/// `X[e]`, meta-variables and environment variables by name, chains as
/// `BCh(N1,N2)`.
pub fn print_meta(t: &Term) -> String {
    match t {
        Term::Var(v) => crate::term::display_name(v),
        Term::Hole => "[.]".into(),
        Term::Chain(a, b) => format!("BCh({a},{b})"),
        Term::Ctx(x, a) => format!("{}[{}]", crate::term::display_ctx_name(x), print_meta(a)),
        Term::Fn(Symbol::Var, a) => meta_name(&a[0]),
        Term::Fn(Symbol::App, a) => {
            let arg = |u: &Term| match u {
                Term::Fn(Symbol::Lam | Symbol::Let, _) => format!("({})", print_meta(u)),
                _ => print_meta(u),
            };
            format!("({} {})", arg(&a[0]), arg(&a[1]))
        }
        Term::Fn(Symbol::Lam, a) => format!("\\{}.{}", meta_name(&a[0]), print_meta(&a[1])),
        Term::Fn(Symbol::Let, a) => {
            let mut s = String::from("letrec ");
            match &a[0] {
                Term::Env(e) => meta_env(e, &mut s),
                other => s.push_str(&print_meta(other)),
            }
            s.push_str(" in ");
            s.push_str(&print_meta(&a[1]));
            s
        }
        Term::Fn(Symbol::Bind, b) => format!("{} = {}", meta_name(&b[0]), print_meta(&b[1])),
        Term::Env(e) => {
            let mut s = String::new();
            meta_env(e, &mut s);
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn parses_letrec() {
        let e = parse("letrec x = \\y.y, z = (x x) in z").unwrap();
        let Expr::Letrec(bs, body) = &e else { panic!() };
        assert_eq!(bs.len(), 2);
        assert_eq!(**body, Expr::Var("z".into()));
        assert_eq!(bs[1].1, Expr::app(Expr::Var("x".into()), Expr::Var("x".into())));
    }

    #[test]
    fn rejects_bad_letrecs() {
        assert_eq!(parse("letrec in x"), Err(SyntaxError::EmptyEnv));
        assert_eq!(parse("letrec x = y, x = z in x"), Err(SyntaxError::DuplicateBinder("x".into())));
        assert!(matches!(parse("(x"), Err(SyntaxError::Parse { .. })));
    }

    #[test]
    fn applies_abstraction() {
        let e = parse("((\\x.x) y)").unwrap();
        assert_eq!(e, Expr::app(Expr::lam("x", Expr::Var("x".into())), Expr::Var("y".into())));
        assert_eq!(parse(&print_expr(&e)).unwrap(), e);
    }

    #[test]
    fn encodes_by_structure() {
        let e = parse("letrec x = \\y.y, z = (x x) in z").unwrap();
        let want = parse_term(
            "let(env(bind(x:BV,lam(y:BV,var(y:BV))),env(bind(z:BV,app(var(x:BV),var(x:BV))),emptyEnv)),var(z:BV))",
        )
        .unwrap();
        assert_eq!(encode(&e), want);
        assert!(encode(&e).well_sorted());
    }

    #[test]
    fn decode_inverts_encode() {
        for s in ["x", "(\\x.x y)", "letrec a = b, c = \\d.(d a) in (c a)", "\\f.letrec x = (f x) in x"] {
            let e = parse(s).unwrap();
            let back = decode(&encode(&e)).unwrap();
            // letrec bindings come back in canonical order
            assert_eq!(encode(&back), encode(&e), "{s}");
        }
        assert!(decode(&parse_term("s:Exp").unwrap()).is_err());
    }

    #[test]
    fn meta_printing() {
        let t = parse_term(
            "let(env(bind(x:BV,lam(w:BV,t:Exp)),env(bind(y_N1:BV,A_N1{A}(var(x:BV))),env(BCh(N1,N2),Env2:Env))),A{A}(var(y_N2:BV)))",
        )
        .unwrap();
        assert_eq!(print_meta(&t), "letrec x = \\w.t, y_N1 = A_N1[x], BCh(N1,N2), Env2 in A[y_N2]");
    }
}
