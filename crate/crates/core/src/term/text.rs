//! Canonical text form of terms.
//!
//! ```text
//! term  ::= ident ':' sort                 first-order variable
//!         | ident '{' class '}' '(' term ')' context application
//!         | sym '(' term, ... ')'          symbol application
//!         | 'emptyEnv' | '[]' | 'BCh(' int ',' int ')'
//! ident ::= [A-Za-z][A-Za-z0-9'.]* | ('y' | 'A') '_' (N<digits> | <digits>)
//! ```
//!
//! Environments print right-nested with components in canonical order, so
//! the printed form of a term is identical for LC-equal terms.

use std::fmt;

use super::{Class, CtxVar, Env, Index, IntVar, Name, Signature, Sort, Symbol, Term, TermError, Var};

pub fn var_name(v: &Var) -> String {
    match &v.name {
        Name::Plain(s) => s.to_string(),
        Name::Chain(i) => format!("y_{i}"),
    }
}

pub fn ctx_name(x: &CtxVar) -> String {
    match &x.name {
        Name::Plain(s) => s.to_string(),
        Name::Chain(i) => format!("A_{i}"),
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", var_name(self), self.sort)
    }
}

impl fmt::Display for CtxVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", ctx_name(self), self.class)
    }
}

fn fmt_env(e: &Env, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let tails = e.tails();
    let mut items: Vec<String> = e.comps().iter().map(|c| c.to_string()).collect();
    items.extend(tails.iter().skip(1).map(|v| v.to_string()));
    let last = tails.first().map_or_else(|| "emptyEnv".to_string(), |v| v.to_string());
    for it in &items {
        write!(f, "env({it},")?;
    }
    f.write_str(&last)?;
    for _ in &items {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Ctx(x, a) => write!(f, "{x}({a})"),
            Term::Fn(s, args) => {
                write!(f, "{}(", s.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Env(e) => fmt_env(e, f),
            Term::Hole => f.write_str("[]"),
            Term::Chain(a, b) => write!(f, "BCh({a},{b})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> TermError {
        TermError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TermError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String, TermError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let ok = if self.pos == start {
                c.is_ascii_alphabetic()
            } else {
                c.is_ascii_alphanumeric() || c == b'\'' || c == b'.' || c == b'_'
            };
            if !ok {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn int_var(&mut self) -> Result<IntVar, TermError> {
        let id = self.ident()?;
        parse_int_var(&id).ok_or_else(|| self.err(format!("bad integer variable `{id}`")))
    }

    fn name(&self, id: &str, chain_prefix: &str) -> Result<Name, TermError> {
        match id.split_once('_') {
            None => Ok(Name::plain(id)),
            Some((pre, idx)) if pre == chain_prefix => {
                let index = if let Some(n) = parse_int_var(idx) {
                    Index::Int(n)
                } else {
                    Index::Lit(idx.parse().map_err(|_| self.err(format!("bad chain index `{idx}`")))?)
                };
                Ok(Name::Chain(index))
            }
            Some(_) => Err(self.err(format!("`_` is reserved for chain names, got `{id}`"))),
        }
    }

    fn term(&mut self) -> Result<Term, TermError> {
        if self.eat(b'[') {
            self.expect(b']')?;
            return Ok(Term::Hole);
        }
        let id = self.ident()?;
        match self.peek() {
            Some(b':') => {
                self.pos += 1;
                let s = self.ident()?;
                let sort = Sort::from_name(&s).ok_or_else(|| self.err(format!("unknown sort `{s}`")))?;
                Ok(Term::Var(Var {
                    name: self.name(&id, "y")?,
                    sort,
                }))
            }
            Some(b'{') => {
                self.pos += 1;
                let c = self.ident()?;
                let class = Class::from_name(&c).ok_or_else(|| self.err(format!("unknown class `{c}`")))?;
                self.expect(b'}')?;
                self.expect(b'(')?;
                let arg = self.term()?;
                self.expect(b')')?;
                Ok(Term::ctx(
                    CtxVar {
                        name: self.name(&id, "A")?,
                        class,
                    },
                    arg,
                ))
            }
            _ => self.application(id),
        }
    }

    fn application(&mut self, id: String) -> Result<Term, TermError> {
        if id == "BCh" {
            self.expect(b'(')?;
            let a = self.int_var()?;
            self.expect(b',')?;
            let b = self.int_var()?;
            self.expect(b')')?;
            return Ok(Term::Chain(a, b));
        }
        let decl = Signature::lneed().lookup(&id)?;
        let mut args = Vec::new();
        if !decl.args.is_empty() {
            self.expect(b'(')?;
            loop {
                args.push(self.term()?);
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b')')?;
        }
        if args.len() != decl.args.len() {
            return Err(self.err(format!("`{id}` expects {} arguments", decl.args.len())));
        }
        match id.as_str() {
            "emptyEnv" => Ok(Term::empty_env()),
            "env" => {
                let rest = args.pop().unwrap();
                let comp = args.pop().unwrap();
                if rest.sort() != Some(Sort::Env) {
                    return Err(TermError::SortMismatch {
                        expected: "Env".into(),
                        found: rest.sort().map_or("chain", Sort::name).into(),
                    });
                }
                Ok(Term::env([comp, rest], []))
            }
            _ => {
                let sym = Symbol::from_name(&id).expect("free symbol");
                Ok(Term::Fn(sym, args))
            }
        }
    }
}

fn parse_int_var(s: &str) -> Option<IntVar> {
    s.strip_prefix('N')?.parse().ok().map(IntVar)
}

/// Parses the canonical text form.
pub fn parse_term(src: &str) -> Result<Term, TermError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let t = p.term()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

impl std::str::FromStr for Term {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in [
            "app(var(x:BV),var(y:BV))",
            "X{C}(var(x:BV))",
            "let(env(bind(x:BV,[]),env(BCh(N1,N2),E:Env)),A{A}(var(y_N2:BV)))",
            "A_N4{A}(var(y_3:BV))",
            "emptyEnv",
            "env(E1:Env,E2:Env)",
        ] {
            let t = parse_term(s).unwrap();
            assert_eq!(parse_term(&t.to_string()).unwrap(), t, "{s}");
        }
    }

    #[test]
    fn env_printing_is_canonical() {
        let a = parse_term("env(bind(b:BV,s:Exp),env(bind(a:BV,s:Exp),E:Env))").unwrap();
        assert_eq!(a.to_string(), "env(bind(a:BV,s:Exp),env(bind(b:BV,s:Exp),E:Env))");
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_term("app(x:BV"), Err(TermError::Parse { .. })));
        assert!(matches!(parse_term("app(x:Foo,y:BV)"), Err(TermError::Parse { .. })));
        assert!(matches!(parse_term("z_1:BV"), Err(TermError::Parse { .. })));
        assert!(matches!(parse_term("env(bind(x:BV,s:Exp),s:Exp)"), Err(TermError::SortMismatch { .. })));
    }
}
