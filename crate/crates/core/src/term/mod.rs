//! Many-sorted terms over the letrec signature.
//!
//! Environments are kept flattened: an `env(b1, env(b2, ... r))` spine is a
//! single [`Env`] node holding the component multiset in sorted order plus
//! its tails. Because every constructor normalizes, two terms are equal
//! modulo left-commutativity iff they are structurally equal.

mod rename;
mod subst;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub use rename::{alpha_equal, Renaming};
pub use subst::Substitution;
pub use text::{ctx_name as display_ctx_name, parse_term, var_name as display_name};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: String, found: String },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("term is not a context (needs exactly one hole): {0}")]
    NotAContext(String),
    #[error("term is not almost ground: {0}")]
    NotAlmostGround(String),
    #[error("context variable {var} of class {class} mapped to a context of class {found}")]
    ClassViolation {
        var: String,
        class: Class,
        found: Class,
    },
    #[error("binding chain bounds must satisfy 0 < n1 < n2, got ({0}, {1})")]
    ChainBounds(u32, u32),
    #[error("not an environment term: {0}")]
    NotEnv(String),
}

/// Sorts of the letrec signature. `Env` is the only theory sort; `BV` is
/// empty, so every `BV` term is a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Bind,
    Env,
    Exp,
    BV,
}

impl Sort {
    pub fn name(self) -> &'static str {
        match self {
            Sort::Bind => "Bind",
            Sort::Env => "Env",
            Sort::Exp => "Exp",
            Sort::BV => "BV",
        }
    }

    pub fn from_name(s: &str) -> Option<Sort> {
        Some(match s {
            "Bind" => Sort::Bind,
            "Env" => Sort::Env,
            "Exp" => Sort::Exp,
            "BV" => Sort::BV,
            _ => return None,
        })
    }

    pub fn is_theory(self) -> bool {
        self == Sort::Env
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Context classes, totally ordered `A < S < C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    A,
    S,
    C,
}

impl Class {
    pub fn from_name(s: &str) -> Option<Class> {
        Some(match s {
            "A" => Class::A,
            "S" => Class::S,
            "C" => Class::C,
            _ => return None,
        })
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::A => "A",
            Class::S => "S",
            Class::C => "C",
        })
    }
}

/// Integer variable indexing binding chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntVar(pub u32);

impl fmt::Display for IntVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0)
    }
}

/// Index of a chain-reserved name: symbolic before the integer variables are
/// instantiated, a literal afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Int(IntVar),
    Lit(u32),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Int(n) => write!(f, "{n}"),
            Index::Lit(k) => write!(f, "{k}"),
        }
    }
}

/// Variable names. `Chain` names are the reserved `y_i` (sort BV) and `A_i`
/// (class A) families; they can never collide with plain names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Plain(Arc<str>),
    Chain(Index),
}

impl Name {
    pub fn plain(s: &str) -> Name {
        Name::Plain(Arc::from(s))
    }

    pub fn chain_index(&self) -> Option<Index> {
        match self {
            Name::Chain(i) => Some(*i),
            Name::Plain(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Name,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var {
            name: Name::plain(name),
            sort,
        }
    }

    pub fn bv(name: &str) -> Var {
        Var::new(name, Sort::BV)
    }

    /// The reserved chain binder `y_i`.
    pub fn chain_y(index: Index) -> Var {
        Var {
            name: Name::Chain(index),
            sort: Sort::BV,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CtxVar {
    pub name: Name,
    pub class: Class,
}

impl CtxVar {
    pub fn new(name: &str, class: Class) -> CtxVar {
        CtxVar {
            name: Name::plain(name),
            class,
        }
    }

    /// The reserved chain context `A_i`.
    pub fn chain_a(index: Index) -> CtxVar {
        CtxVar {
            name: Name::Chain(index),
            class: Class::A,
        }
    }
}

/// Free function symbols. The theory symbols `env` and `emptyEnv` are
/// represented by [`Env`] nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Let,
    App,
    Lam,
    Bind,
    Var,
}

impl Symbol {
    pub const ALL: [Symbol; 5] = [Symbol::Let, Symbol::App, Symbol::Lam, Symbol::Bind, Symbol::Var];

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Let => "let",
            Symbol::App => "app",
            Symbol::Lam => "lam",
            Symbol::Bind => "bind",
            Symbol::Var => "var",
        }
    }

    pub fn from_name(s: &str) -> Option<Symbol> {
        Symbol::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn arg_sorts(self) -> &'static [Sort] {
        match self {
            Symbol::Let => &[Sort::Env, Sort::Exp],
            Symbol::App => &[Sort::Exp, Sort::Exp],
            Symbol::Lam => &[Sort::BV, Sort::Exp],
            Symbol::Bind => &[Sort::BV, Sort::Exp],
            Symbol::Var => &[Sort::BV],
        }
    }

    pub fn result_sort(self) -> Sort {
        match self {
            Symbol::Bind => Sort::Bind,
            _ => Sort::Exp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: &'static str,
    pub args: Vec<Sort>,
    pub result: Sort,
    pub theory: bool,
}

/// The many-sorted signature. Only the letrec instance is ever built.
#[derive(Debug, Clone)]
pub struct Signature {
    pub theory_sorts: Vec<Sort>,
    pub free_sorts: Vec<Sort>,
    pub symbols: Vec<SymbolDecl>,
}

impl Signature {
    pub fn lneed() -> &'static Signature {
        static SIG: OnceLock<Signature> = OnceLock::new();
        SIG.get_or_init(|| {
            let mut symbols = vec![
                SymbolDecl {
                    name: "emptyEnv",
                    args: vec![],
                    result: Sort::Env,
                    theory: true,
                },
                SymbolDecl {
                    name: "env",
                    args: vec![Sort::Bind, Sort::Env],
                    result: Sort::Env,
                    theory: true,
                },
            ];
            symbols.extend(Symbol::ALL.iter().map(|f| SymbolDecl {
                name: f.name(),
                args: f.arg_sorts().to_vec(),
                result: f.result_sort(),
                theory: false,
            }));
            Signature {
                theory_sorts: vec![Sort::Env],
                free_sorts: vec![Sort::Bind, Sort::Exp, Sort::BV],
                symbols,
            }
        })
    }

    pub fn lookup(&self, name: &str) -> Result<&SymbolDecl, TermError> {
        self.symbols
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| TermError::UnknownSymbol(name.to_string()))
    }

    /// Sorts that are the result of some symbol; the others are empty.
    pub fn is_inhabited(&self, sort: Sort) -> bool {
        self.symbols.iter().any(|d| d.result == sort)
    }
}

/// A flattened environment `env*(components ∪ tails)`. An empty tail list is
/// `emptyEnv`; more than one tail only arises on right-hand sides that
/// concatenate environments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Env {
    comps: Vec<Term>,
    tails: Vec<Var>,
}

impl Env {
    pub fn empty() -> Env {
        Env {
            comps: Vec::new(),
            tails: Vec::new(),
        }
    }

    /// Builds a normalized environment. Nested environments and Env-sorted
    /// variables given as components are spliced in.
    pub fn new(comps: impl IntoIterator<Item = Term>, tails: impl IntoIterator<Item = Var>) -> Env {
        let mut out = Env {
            comps: Vec::new(),
            tails: tails.into_iter().collect(),
        };
        for c in comps {
            out.push(c);
        }
        out.comps.sort();
        out.tails.sort();
        out
    }

    fn push(&mut self, c: Term) {
        match c {
            Term::Env(e) => {
                self.comps.extend(e.comps);
                self.tails.extend(e.tails);
            }
            Term::Var(v) if v.sort == Sort::Env => self.tails.push(v),
            other => self.comps.push(other),
        }
    }

    pub fn comps(&self) -> &[Term] {
        &self.comps
    }

    pub fn tails(&self) -> &[Var] {
        &self.tails
    }

    pub fn into_parts(self) -> (Vec<Term>, Vec<Var>) {
        (self.comps, self.tails)
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty() && self.tails.is_empty()
    }

    /// The single tail, `None` for `emptyEnv`. Panics on multi-tail spines.
    pub fn single_tail(&self) -> Option<&Var> {
        assert!(self.tails.len() <= 1, "environment has several tails");
        self.tails.first()
    }

    pub fn bind_count(&self) -> usize {
        self.comps.iter().filter(|c| !matches!(c, Term::Chain(..))).count()
    }

    pub fn chain_count(&self) -> usize {
        self.comps.iter().filter(|c| matches!(c, Term::Chain(..))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// Context-variable application `X(t)`.
    Ctx(CtxVar, Box<Term>),
    Fn(Symbol, Vec<Term>),
    Env(Env),
    Hole,
    /// `BCh(N1, N2)`, only valid as an environment component.
    Chain(IntVar, IntVar),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn bv(name: &str) -> Term {
        Term::Var(Var::bv(name))
    }

    pub fn exp(name: &str) -> Term {
        Term::Var(Var::new(name, Sort::Exp))
    }

    pub fn env_var(name: &str) -> Term {
        Term::Var(Var::new(name, Sort::Env))
    }

    pub fn app(a: Term, b: Term) -> Term {
        Term::Fn(Symbol::App, vec![a, b])
    }

    pub fn lam(x: Term, body: Term) -> Term {
        Term::Fn(Symbol::Lam, vec![x, body])
    }

    pub fn bind(x: Term, e: Term) -> Term {
        Term::Fn(Symbol::Bind, vec![x, e])
    }

    /// `var(x)`: a bound variable used as an expression.
    pub fn use_var(x: Term) -> Term {
        Term::Fn(Symbol::Var, vec![x])
    }

    pub fn let_(env: Term, body: Term) -> Term {
        Term::Fn(Symbol::Let, vec![env, body])
    }

    pub fn ctx(x: CtxVar, arg: Term) -> Term {
        Term::Ctx(x, Box::new(arg))
    }

    pub fn env(comps: impl IntoIterator<Item = Term>, tails: impl IntoIterator<Item = Var>) -> Term {
        Term::from_env(Env::new(comps, tails))
    }

    /// Wraps an environment, collapsing `env*({} ∪ v)` to the variable `v`.
    pub fn from_env(e: Env) -> Term {
        if e.comps.is_empty() && e.tails.len() == 1 {
            Term::Var(e.tails.into_iter().next().unwrap())
        } else {
            Term::Env(e)
        }
    }

    pub fn empty_env() -> Term {
        Term::Env(Env::empty())
    }

    /// The sort of a term, `None` for a bare chain component.
    pub fn sort(&self) -> Option<Sort> {
        match self {
            Term::Var(v) => Some(v.sort),
            Term::Ctx(..) | Term::Hole => Some(Sort::Exp),
            Term::Fn(f, _) => Some(f.result_sort()),
            Term::Env(_) => Some(Sort::Env),
            Term::Chain(..) => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_env(&self) -> Option<&Env> {
        match self {
            Term::Env(e) => Some(e),
            _ => None,
        }
    }

    /// Preorder traversal, visiting environment tails as variable terms.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Ctx(_, a) => a.walk(f),
            Term::Fn(_, args) => args.iter().for_each(|a| a.walk(f)),
            Term::Env(e) => e.comps.iter().for_each(|c| c.walk(f)),
            _ => {}
        }
    }

    /// First-order variables, including environment tails.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| match t {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Env(e) => out.extend(e.tails.iter().cloned()),
            _ => {}
        });
        out
    }

    pub fn ctx_vars(&self) -> BTreeSet<CtxVar> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let Term::Ctx(x, _) = t {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn int_vars(&self) -> BTreeSet<IntVar> {
        let mut out = BTreeSet::new();
        let mut add = |n: &Name| {
            if let Name::Chain(Index::Int(i)) = n {
                out.insert(*i);
            }
        };
        self.walk(&mut |t| match t {
            Term::Chain(a, b) => {
                add(&Name::Chain(Index::Int(*a)));
                add(&Name::Chain(Index::Int(*b)));
            }
            Term::Var(v) => add(&v.name),
            Term::Ctx(x, _) => add(&x.name),
            _ => {}
        });
        out
    }

    /// All variable occurrences as a multiset (first-order and context).
    pub fn var_occurrences(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |t| match t {
            Term::Var(v) => out.push(format!("{}", Term::Var(v.clone()))),
            Term::Ctx(x, _) => out.push(text::ctx_name(x).to_string()),
            Term::Env(e) => out.extend(e.tails.iter().map(|v| format!("{}", Term::Var(v.clone())))),
            _ => {}
        });
        out
    }

    pub fn count_holes(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if matches!(t, Term::Hole) {
                n += 1
            }
        });
        n
    }

    pub fn is_context(&self) -> bool {
        self.sort() == Some(Sort::Exp) && self.count_holes() == 1
    }

    pub fn contains_chain(&self) -> bool {
        let mut found = false;
        self.walk(&mut |t| found |= matches!(t, Term::Chain(..)));
        found
    }

    /// Number of `let` occurrences.
    pub fn let_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if matches!(t, Term::Fn(Symbol::Let, _)) {
                n += 1
            }
        });
        n
    }

    /// Almost ground: every variable has the empty sort BV, and there are no
    /// context variables or unexpanded chains.
    pub fn is_almost_ground(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |t| match t {
            Term::Var(v) => ok &= v.sort == Sort::BV,
            Term::Ctx(..) | Term::Chain(..) => ok = false,
            Term::Env(e) => ok &= e.tails.is_empty(),
            _ => {}
        });
        ok
    }

    /// Renames variables, context variables and integer variables pointwise.
    /// The maps must be injective for the result to mean the same thing.
    pub fn rename_with(
        &self,
        fv: &impl Fn(&Var) -> Var,
        fc: &impl Fn(&CtxVar) -> CtxVar,
        fi: &impl Fn(IntVar) -> IntVar,
    ) -> Term {
        match self {
            Term::Var(v) => Term::Var(fv(v)),
            Term::Ctx(x, a) => Term::Ctx(fc(x), Box::new(a.rename_with(fv, fc, fi))),
            Term::Fn(f, args) => Term::Fn(*f, args.iter().map(|a| a.rename_with(fv, fc, fi)).collect()),
            Term::Env(e) => Term::from_env(Env::new(
                e.comps.iter().map(|c| c.rename_with(fv, fc, fi)),
                e.tails.iter().map(fv),
            )),
            Term::Hole => Term::Hole,
            Term::Chain(a, b) => Term::Chain(fi(*a), fi(*b)),
        }
    }

    /// Replaces the hole by `arg`.
    pub fn fill(&self, arg: &Term) -> Term {
        match self {
            Term::Hole => arg.clone(),
            Term::Var(_) | Term::Chain(..) => self.clone(),
            Term::Ctx(x, a) => Term::Ctx(x.clone(), Box::new(a.fill(arg))),
            Term::Fn(f, args) => Term::Fn(*f, args.iter().map(|a| a.fill(arg)).collect()),
            Term::Env(e) => Term::from_env(Env::new(
                e.comps.iter().map(|c| c.fill(arg)),
                e.tails.iter().cloned(),
            )),
        }
    }

    /// Class of the path from the root to the hole: the join of every step
    /// and of every context variable passed on the way. `None` without hole.
    pub fn hole_class(&self) -> Option<Class> {
        match self {
            Term::Hole => Some(Class::A),
            Term::Var(_) | Term::Chain(..) => None,
            Term::Ctx(x, a) => a.hole_class().map(|c| c.max(x.class)),
            Term::Env(e) => e
                .comps
                .iter()
                .find_map(|c| c.hole_class())
                .map(|c| c.max(Class::S)),
            Term::Fn(f, args) => args.iter().enumerate().find_map(|(i, a)| {
                a.hole_class().map(|c| {
                    let step = match (f, i) {
                        (Symbol::App, 0) => Class::A,
                        (Symbol::Lam, _) => Class::C,
                        _ => Class::S,
                    };
                    c.max(step)
                })
            }),
        }
    }

    /// Well-sortedness per the signature. Holes are accepted at Exp
    /// positions; chains only as environment components.
    pub fn well_sorted(&self) -> bool {
        match self {
            Term::Var(_) | Term::Hole => true,
            Term::Chain(..) => false,
            Term::Ctx(_, a) => a.sort() == Some(Sort::Exp) && a.well_sorted(),
            Term::Fn(f, args) => {
                let sorts = f.arg_sorts();
                args.len() == sorts.len()
                    && args
                        .iter()
                        .zip(sorts)
                        .all(|(a, s)| a.sort() == Some(*s) && a.well_sorted())
            }
            Term::Env(e) => {
                e.tails.iter().all(|v| v.sort == Sort::Env)
                    && e.comps.iter().all(|c| match c {
                        Term::Chain(a, b) => a != b,
                        c => c.sort() == Some(Sort::Bind) && c.well_sorted(),
                    })
            }
        }
    }
}

/// Equality modulo left-commutativity.
pub fn lc_equal(a: &Term, b: &Term) -> Result<bool, TermError> {
    if a.sort() != b.sort() {
        return Err(TermError::SortMismatch {
            expected: a.sort().map_or("chain", Sort::name).to_string(),
            found: b.sort().map_or("chain", Sort::name).to_string(),
        });
    }
    Ok(a == b)
}

/// Flattened view of an environment: component multiset and tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvView {
    /// Bind terms, chains, and any extra Env-variable tails.
    pub components: Vec<Term>,
    /// `None` stands for `emptyEnv`.
    pub tail: Option<Var>,
}

pub fn env_view(t: &Term) -> Result<EnvView, TermError> {
    if let Term::Var(v) = t {
        if v.sort == Sort::Env {
            return Ok(EnvView {
                components: Vec::new(),
                tail: Some(v.clone()),
            });
        }
    }
    let e = t.as_env().ok_or_else(|| TermError::NotEnv(t.to_string()))?;
    let mut components = e.comps.clone();
    components.extend(e.tails.iter().skip(1).cloned().map(Term::Var));
    Ok(EnvView {
        components,
        tail: e.tails.first().cloned(),
    })
}

impl EnvView {
    pub fn reconstruct(&self) -> Term {
        Term::env(self.components.iter().cloned(), self.tail.iter().cloned())
    }
}

/// Expands `BCh(n1, n2)` into `bind(y_i, A_i(var(y_{i-1})))` for
/// `n1 < i <= n2`.
pub fn expand_chain(n1: u32, n2: u32) -> Result<Vec<Term>, TermError> {
    if n1 == 0 || n1 >= n2 {
        return Err(TermError::ChainBounds(n1, n2));
    }
    Ok((n1 + 1..=n2)
        .map(|i| {
            Term::bind(
                Term::Var(Var::chain_y(Index::Lit(i))),
                Term::ctx(
                    CtxVar::chain_a(Index::Lit(i)),
                    Term::use_var(Term::Var(Var::chain_y(Index::Lit(i - 1)))),
                ),
            )
        })
        .collect())
}

/// Least class among A, S, C containing an almost-ground context.
pub fn context_class_of(c: &Term) -> Result<Class, TermError> {
    if !c.is_context() {
        return Err(TermError::NotAContext(c.to_string()));
    }
    if !c.is_almost_ground() {
        return Err(TermError::NotAlmostGround(c.to_string()));
    }
    Ok(c.hole_class().expect("context has a hole"))
}

/// Fresh-name supply. One generator per search task; branches clone it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fresh {
    next: u32,
}

impl Fresh {
    pub fn starting_at(next: u32) -> Fresh {
        Fresh { next }
    }

    fn bump(&mut self) -> u32 {
        self.next += 1;
        self.next
    }

    pub fn var(&mut self, family: &str, sort: Sort) -> Var {
        let k = self.bump();
        Var::new(&format!("{family}.{k}"), sort)
    }

    pub fn ctx(&mut self, family: &str, class: Class) -> CtxVar {
        let k = self.bump();
        CtxVar::new(&format!("{family}.{k}"), class)
    }

    pub fn int(&mut self) -> IntVar {
        IntVar(self.bump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn well_sorted_examples() {
        assert!(t("app(var(x:BV),var(y:BV))").well_sorted());
        let bad = Term::bind(Term::use_var(Term::bv("x")), Term::exp("t"));
        assert!(!bad.well_sorted());
        let enc = t("let(env(bind(x:BV,lam(y:BV,var(y:BV))),env(bind(z:BV,app(var(x:BV),var(x:BV))),emptyEnv)),var(z:BV))");
        assert!(enc.well_sorted());
        assert!(!Term::Chain(IntVar(1), IntVar(2)).well_sorted());
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        assert_eq!(
            parse_term("foo(x:BV)"),
            Err(TermError::UnknownSymbol("foo".into()))
        );
    }

    #[test]
    fn env_view_examples() {
        let v = env_view(&t("env(bind(a:BV,s:Exp),env(bind(b:BV,s2:Exp),E:Env))")).unwrap();
        assert_eq!(v.components.len(), 2);
        assert_eq!(v.tail, Some(Var::new("E", Sort::Env)));
        let v = env_view(&t("emptyEnv")).unwrap();
        assert!(v.components.is_empty() && v.tail.is_none());
        let v = env_view(&t("env(bind(a:BV,s:Exp),emptyEnv)")).unwrap();
        assert_eq!(v.components.len(), 1);
        assert!(v.tail.is_none());
        assert!(env_view(&t("s:Exp")).is_err());
    }

    #[test]
    fn lc_axiom_holds() {
        let a = t("env(bind(a:BV,s:Exp),env(bind(b:BV,r:Exp),emptyEnv))");
        let b = t("env(bind(b:BV,r:Exp),env(bind(a:BV,s:Exp),emptyEnv))");
        assert!(lc_equal(&a, &b).unwrap());
        assert!(lc_equal(&a, &t("s:Exp")).is_err());
    }

    #[test]
    fn chain_expansion() {
        let one = expand_chain(1, 2).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].to_string(), "bind(y_2:BV,A_2{A}(var(y_1:BV)))");
        let two = expand_chain(1, 3).unwrap();
        assert_eq!(two[1].to_string(), "bind(y_3:BV,A_3{A}(var(y_2:BV)))");
        assert_eq!(expand_chain(2, 2), Err(TermError::ChainBounds(2, 2)));
        assert!(expand_chain(0, 2).is_err());
    }

    #[test]
    fn context_classes() {
        assert_eq!(context_class_of(&Term::Hole), Ok(Class::A));
        assert_eq!(context_class_of(&t("app([],var(s:BV))")), Ok(Class::A));
        assert_eq!(context_class_of(&t("app(var(s:BV),[])")), Ok(Class::S));
        assert_eq!(context_class_of(&t("lam(x:BV,[])")), Ok(Class::C));
        assert_eq!(
            context_class_of(&t("let(env(bind(x:BV,[]),emptyEnv),var(s:BV))")),
            Ok(Class::S)
        );
        assert!(matches!(
            context_class_of(&t("app([],s:Exp)")),
            Err(TermError::NotAlmostGround(_))
        ));
        assert!(context_class_of(&t("var(s:BV)")).is_err());
    }

    #[test]
    fn fresh_names_are_distinct() {
        let mut f = Fresh::default();
        let a = f.var("x", Sort::BV);
        let b = f.var("x", Sort::BV);
        assert_ne!(a, b);
        assert_ne!(f.int(), f.int());
    }
}
