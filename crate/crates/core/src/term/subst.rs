use std::collections::BTreeMap;

use super::{expand_chain, CtxVar, Env, Index, IntVar, Name, Term, TermError, Var};

/// Simultaneous substitution for first-order variables, context variables and
/// integer variables. Integer variables are instantiated first: chain names
/// `y_N`/`A_N` are renamed to their literal index before lookup, and chains
/// whose bounds are both known are expanded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    vars: BTreeMap<Var, Term>,
    ctxs: BTreeMap<CtxVar, Term>,
    ints: BTreeMap<IntVar, u32>,
    chains: BTreeMap<(IntVar, IntVar), Vec<Term>>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn insert_var(&mut self, v: Var, t: Term) -> Result<(), TermError> {
        if t.sort() != Some(v.sort) {
            return Err(TermError::SortMismatch {
                expected: v.sort.to_string(),
                found: t.sort().map_or("chain".into(), |s| s.to_string()),
            });
        }
        self.vars.insert(v, t);
        Ok(())
    }

    pub fn insert_ctx(&mut self, x: CtxVar, c: Term) -> Result<(), TermError> {
        if !c.is_context() {
            return Err(TermError::NotAContext(c.to_string()));
        }
        let found = c.hole_class().expect("context has a hole");
        if found > x.class {
            return Err(TermError::ClassViolation {
                var: x.to_string(),
                class: x.class,
                found,
            });
        }
        self.ctxs.insert(x, c);
        Ok(())
    }

    pub fn insert_int(&mut self, n: IntVar, k: u32) {
        self.ints.insert(n, k);
    }

    /// Replaces the chain `BCh(a, b)` by `comps` wherever it occurs.
    pub fn insert_chain(&mut self, a: IntVar, b: IntVar, comps: Vec<Term>) {
        self.chains.insert((a, b), comps);
    }

    pub fn chains(&self) -> impl Iterator<Item = (&(IntVar, IntVar), &Vec<Term>)> {
        self.chains.iter()
    }

    pub fn var(&self, v: &Var) -> Option<&Term> {
        self.vars.get(v)
    }

    pub fn ctx(&self, x: &CtxVar) -> Option<&Term> {
        self.ctxs.get(x)
    }

    pub fn int(&self, n: IntVar) -> Option<u32> {
        self.ints.get(&n).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.vars.iter()
    }

    pub fn ctxs(&self) -> impl Iterator<Item = (&CtxVar, &Term)> {
        self.ctxs.iter()
    }

    pub fn ints(&self) -> impl Iterator<Item = (&IntVar, &u32)> {
        self.ints.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.ctxs.is_empty() && self.ints.is_empty() && self.chains.is_empty()
    }

    fn rename(&self, name: &Name) -> Name {
        match name {
            Name::Chain(Index::Int(n)) => match self.ints.get(n) {
                Some(k) => Name::Chain(Index::Lit(*k)),
                None => name.clone(),
            },
            _ => name.clone(),
        }
    }

    fn rename_var(&self, v: &Var) -> Var {
        Var {
            name: self.rename(&v.name),
            sort: v.sort,
        }
    }

    pub fn apply(&self, t: &Term) -> Result<Term, TermError> {
        Ok(match t {
            Term::Var(v) => {
                let v = self.rename_var(v);
                self.vars.get(&v).cloned().unwrap_or(Term::Var(v))
            }
            Term::Ctx(x, a) => {
                let x = CtxVar {
                    name: self.rename(&x.name),
                    class: x.class,
                };
                let a = self.apply(a)?;
                match self.ctxs.get(&x) {
                    Some(c) => c.fill(&a),
                    None => Term::Ctx(x, Box::new(a)),
                }
            }
            Term::Fn(f, args) => Term::Fn(*f, args.iter().map(|a| self.apply(a)).collect::<Result<_, _>>()?),
            Term::Hole => Term::Hole,
            Term::Chain(a, b) if self.chains.contains_key(&(*a, *b)) => {
                let mut comps = Vec::new();
                for c in &self.chains[&(*a, *b)] {
                    comps.push(self.apply(c)?);
                }
                Term::env(comps, [])
            }
            Term::Chain(a, b) => match (self.ints.get(a), self.ints.get(b)) {
                (Some(&x), Some(&y)) => Term::env(expand_chain(x, y)?, []),
                _ => t.clone(),
            },
            Term::Env(e) => {
                let mut comps = Vec::with_capacity(e.comps().len());
                for c in e.comps() {
                    comps.push(self.apply(c)?);
                }
                let mut tails = Vec::new();
                for v in e.tails() {
                    let v = self.rename_var(v);
                    match self.vars.get(&v) {
                        Some(img) => comps.push(img.clone()),
                        None => tails.push(v),
                    }
                }
                Term::from_env(Env::new(comps, tails))
            }
        })
    }
}
