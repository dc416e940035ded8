//! One-sided matching of rule patterns against meta-terms. The meta-term's
//! variables, context variables and chains are rigid; a pattern chain may
//! stand for a path of chains and chain-shaped bindings.

use std::collections::{BTreeMap, BTreeSet};

use crate::constraints::IntConstraint;
use crate::term::{Class, CtxVar, Index, IntVar, Sort, Symbol, Term, Var};

/// What is known about the rigid variables of a meta-term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Facts {
    /// Context variables known to be non-empty.
    pub nonempty: BTreeSet<CtxVar>,
    pub ints: Vec<IntConstraint>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Match {
    pub vars: BTreeMap<Var, Term>,
    pub ctxs: BTreeMap<CtxVar, Term>,
    pub chains: BTreeMap<(IntVar, IntVar), Vec<Term>>,
}

/// A position in a term: the context above it and the subterm below.
#[derive(Debug, Clone)]
pub struct Split {
    pub ctx: Term,
    pub sub: Term,
    pub class: Class,
    pub nonempty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positions {
    /// Every Exp position.
    All,
    /// Not below `lam` and not inside a class-C context variable.
    Surface,
}

/// All decompositions `t = C[u]` with `u` of sort Exp.
pub fn splits(t: &Term, facts: &Facts, mode: Positions) -> Vec<Split> {
    let mut out = Vec::new();
    splits_into(t, facts, mode, &mut out);
    out
}

fn splits_into(t: &Term, facts: &Facts, mode: Positions, out: &mut Vec<Split>) {
    if t.sort() == Some(Sort::Exp) {
        out.push(Split {
            ctx: Term::Hole,
            sub: t.clone(),
            class: Class::A,
            nonempty: false,
        });
    }
    let mut wrap = |inner: Vec<Split>, step: Class, nonempty: bool, rebuild: &dyn Fn(Term) -> Term| {
        for s in inner {
            out.push(Split {
                ctx: rebuild(s.ctx),
                sub: s.sub,
                class: s.class.max(step),
                nonempty: s.nonempty || nonempty,
            });
        }
    };
    match t {
        Term::Var(_) | Term::Hole | Term::Chain(..) => {}
        Term::Ctx(x, a) => {
            if mode == Positions::Surface && x.class == Class::C {
                return;
            }
            let inner = splits(a, facts, mode);
            wrap(inner, x.class, facts.nonempty.contains(x), &|c| Term::ctx(x.clone(), c));
        }
        Term::Fn(f, args) => {
            if mode == Positions::Surface && *f == Symbol::Lam {
                return;
            }
            for (i, a) in args.iter().enumerate() {
                let step = match (f, i) {
                    (Symbol::App, 0) => Class::A,
                    (Symbol::Lam, _) => Class::C,
                    _ => Class::S,
                };
                let inner = splits(a, facts, mode);
                wrap(inner, step, true, &|c| {
                    let mut args = args.clone();
                    args[i] = c;
                    Term::Fn(*f, args)
                });
            }
        }
        Term::Env(e) => {
            for (i, c) in e.comps().iter().enumerate() {
                let inner = splits(c, facts, mode);
                wrap(inner, Class::S, true, &|h| {
                    let mut comps = e.comps().to_vec();
                    comps[i] = h;
                    Term::env(comps, e.tails().iter().cloned())
                });
            }
        }
    }
}

fn env_parts(t: &Term) -> Option<(Vec<Term>, Vec<Var>)> {
    match t {
        Term::Var(v) if v.sort == Sort::Env => Some((Vec::new(), vec![v.clone()])),
        Term::Env(e) => Some((e.comps().to_vec(), e.tails().to_vec())),
        _ => None,
    }
}

fn bind_var(m: &mut Match, v: &Var, t: &Term) -> bool {
    if t.sort() != Some(v.sort) {
        return false;
    }
    match m.vars.get(v) {
        Some(old) => old == t,
        None => {
            m.vars.insert(v.clone(), t.clone());
            true
        }
    }
}

/// All matches of pattern `p` against `t` extending `m`.
pub fn match_term(p: &Term, t: &Term, m: Match, facts: &Facts) -> Vec<Match> {
    match p {
        Term::Var(v) => {
            let mut m = m;
            if bind_var(&mut m, v, t) {
                vec![m]
            } else {
                Vec::new()
            }
        }
        Term::Fn(f, pargs) => match t {
            Term::Fn(g, targs) if f == g => {
                let mut ms = vec![m];
                for (pa, ta) in pargs.iter().zip(targs) {
                    ms = ms.into_iter().flat_map(|m| match_term(pa, ta, m, facts)).collect();
                    if ms.is_empty() {
                        break;
                    }
                }
                ms
            }
            _ => Vec::new(),
        },
        Term::Ctx(x, parg) => {
            let mut out = Vec::new();
            for s in splits(t, facts, Positions::All) {
                if s.class > x.class {
                    continue;
                }
                for mut m2 in match_term(parg, &s.sub, m.clone(), facts) {
                    match m2.ctxs.get(x) {
                        Some(old) if *old != s.ctx => continue,
                        _ => {}
                    }
                    m2.ctxs.insert(x.clone(), s.ctx.clone());
                    out.push(m2);
                }
            }
            out
        }
        Term::Env(pe) => {
            let Some((tcomps, ttails)) = env_parts(t) else { return Vec::new() };
            match_env(pe.comps(), pe.tails(), tcomps, ttails, m, facts)
        }
        Term::Hole | Term::Chain(..) => Vec::new(),
    }
}

/// Like [`match_term`], with a set of pattern context variables that must
/// map to non-empty contexts.
pub fn match_rule(p: &Term, t: &Term, nonempty: &BTreeSet<CtxVar>, facts: &Facts) -> Vec<Match> {
    match_term(p, t, Match::default(), facts)
        .into_iter()
        .filter(|m| nonempty.iter().all(|x| m.ctxs.get(x).is_none_or(|c| ctx_nonempty(c, facts))))
        .collect()
}

fn ctx_nonempty(c: &Term, facts: &Facts) -> bool {
    match c {
        Term::Hole => false,
        Term::Ctx(x, a) => facts.nonempty.contains(x) || ctx_nonempty(a, facts),
        _ => true,
    }
}

fn match_env(
    pcomps: &[Term],
    ptails: &[Var],
    tcomps: Vec<Term>,
    ttails: Vec<Var>,
    m: Match,
    facts: &Facts,
) -> Vec<Match> {
    let binds: Vec<&Term> = pcomps.iter().filter(|c| !matches!(c, Term::Chain(..))).collect();
    let chains: Vec<(IntVar, IntVar)> = pcomps
        .iter()
        .filter_map(|c| match c {
            Term::Chain(a, b) => Some((*a, *b)),
            _ => None,
        })
        .collect();
    // (match, unused t components)
    let mut states = vec![(m, tcomps)];
    for pb in binds {
        let mut next = Vec::new();
        for (m, rest) in states {
            for (i, tc) in rest.iter().enumerate() {
                if matches!(tc, Term::Chain(..)) {
                    continue;
                }
                for m2 in match_term(pb, tc, m.clone(), facts) {
                    let mut r = rest.clone();
                    r.remove(i);
                    next.push((m2, r));
                }
            }
        }
        states = next;
    }
    // A chain is matched once its start binder is known; chains may start
    // where another one ends.
    type Pending = (Match, Vec<Term>, Vec<(IntVar, IntVar)>);
    let mut pending: Vec<Pending> = states.into_iter().map(|(m, r)| (m, r, chains.clone())).collect();
    let mut done = Vec::new();
    while let Some((m, rest, todo)) = pending.pop() {
        if todo.is_empty() {
            done.push((m, rest));
            continue;
        }
        let ready = todo.iter().position(|(n1, _)| matches!(m.vars.get(&Var::chain_y(Index::Int(*n1))), Some(Term::Var(_))));
        let Some(k) = ready else { continue };
        let (n1, n2) = todo[k];
        let mut todo = todo.clone();
        todo.remove(k);
        let Some(Term::Var(s)) = m.vars.get(&Var::chain_y(Index::Int(n1))).cloned() else { continue };
        let end = Var::chain_y(Index::Int(n2));
        for (path, last, r) in chain_paths(&s, rest.clone(), facts) {
            let mut m2 = m.clone();
            if !bind_var(&mut m2, &end, &Term::Var(last)) {
                continue;
            }
            m2.chains.insert((n1, n2), path);
            pending.push((m2, r, todo.clone()));
        }
    }
    let states = done;
    let mut out = Vec::new();
    for (mut m, rest) in states {
        match ptails {
            [] => {
                if rest.is_empty() && ttails.is_empty() {
                    out.push(m);
                }
            }
            [r] => {
                let img = Term::env(rest, ttails.iter().cloned());
                if bind_var(&mut m, r, &img) {
                    out.push(m);
                }
            }
            _ => {}
        }
    }
    out
}

/// Non-empty paths from `start` through chains and bindings `w = A[var(prev)]`.
fn chain_paths(start: &Var, comps: Vec<Term>, facts: &Facts) -> Vec<(Vec<Term>, Var, Vec<Term>)> {
    let mut out = Vec::new();
    let mut frontier = vec![(Vec::new(), start.clone(), comps)];
    while let Some((path, cur, rest)) = frontier.pop() {
        for (i, c) in rest.iter().enumerate() {
            let next = match c {
                Term::Chain(a, b) => {
                    (cur == Var::chain_y(Index::Int(*a))).then(|| Var::chain_y(Index::Int(*b)))
                }
                Term::Fn(Symbol::Bind, args) => {
                    let target = Term::use_var(Term::Var(cur.clone()));
                    let hit = splits(&args[1], facts, Positions::All)
                        .into_iter()
                        .any(|s| s.sub == target && s.class == Class::A && ctx_nonempty(&s.ctx, facts));
                    match (&args[0], hit) {
                        (Term::Var(w), true) => Some(w.clone()),
                        _ => None,
                    }
                }
                _ => None,
            };
            if let Some(n) = next {
                let mut p = path.clone();
                p.push(c.clone());
                let mut r = rest.clone();
                r.remove(i);
                out.push((p.clone(), n.clone(), r.clone()));
                frontier.push((p, n, r));
            }
        }
    }
    out
}

/// The pattern `t` under `m`: variables and context variables replaced,
/// matched chains spliced back in.
pub fn instantiate(t: &Term, m: &Match) -> Term {
    match t {
        Term::Var(v) => m.vars.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Ctx(x, a) => {
            let a = instantiate(a, m);
            match m.ctxs.get(x) {
                Some(c) => c.fill(&a),
                None => Term::ctx(x.clone(), a),
            }
        }
        Term::Fn(f, args) => Term::Fn(*f, args.iter().map(|a| instantiate(a, m)).collect()),
        Term::Env(e) => {
            let mut comps = Vec::new();
            for c in e.comps() {
                match c {
                    Term::Chain(a, b) => match m.chains.get(&(*a, *b)) {
                        Some(path) => comps.extend(path.iter().cloned()),
                        None => comps.push(c.clone()),
                    },
                    c => comps.push(instantiate(c, m)),
                }
            }
            let mut tails = Vec::new();
            for v in e.tails() {
                match m.vars.get(v) {
                    Some(img) => comps.push(img.clone()),
                    None => tails.push(v.clone()),
                }
            }
            Term::env(comps, tails)
        }
        Term::Hole | Term::Chain(..) => t.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::find_rule;
    use crate::term::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn llet_in_matches_nested_let_once() {
        let r = find_rule("llet-in").unwrap();
        let term = t("let(Env1:Env,let(Env2:Env,r:Exp))");
        let ms = match_rule(&r.lhs, &term, &r.delta1, &Facts::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(instantiate(&r.rhs, &ms[0]), t("let(env(Env1:Env,Env2:Env),r:Exp)"));
    }

    #[test]
    fn lbeta_needs_an_application() {
        let r = find_rule("lbeta").unwrap();
        let term = t("let(Env:Env,lam(x:BV,var(x:BV)))");
        assert!(match_rule(&r.lhs, &term, &r.delta1, &Facts::default()).is_empty());
    }

    #[test]
    fn pattern_chain_spans_chain_and_binding() {
        let r = find_rule("no-cp-e-c/abs").unwrap();
        let term = t("let(env(bind(x:BV,lam(w:BV,t:Exp)),env(bind(y_N1:BV,A_N1{A}(var(x:BV))),env(BCh(N1,N3),env(bind(y_N4:BV,Z{A}(app(B{A}(var(y_N3:BV)),C{C}(var(x:BV))))),env(BCh(N4,N2),E:Env))))),A{A}(var(y_N2:BV)))");
        let mut facts = Facts::default();
        facts.nonempty.insert(CtxVar::new("Z", Class::A));
        facts.nonempty.insert(CtxVar::chain_a(Index::Int(IntVar(1))));
        let ms = match_rule(&r.lhs, &term, &r.delta1, &facts);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].chains.values().next().unwrap().len(), 3);
    }

    #[test]
    fn non_empty_pattern_context_rejects_bare_variable() {
        let r = find_rule("no-cp-e/var").unwrap();
        let term = t("let(env(bind(x:BV,var(u:BV)),env(bind(y:BV,B{A}(var(x:BV))),E:Env)),A{A}(var(y:BV)))");
        assert!(match_rule(&r.lhs, &term, &r.delta1, &Facts::default()).is_empty());
        let mut facts = Facts::default();
        facts.nonempty.insert(CtxVar::new("B", Class::A));
        assert_eq!(match_rule(&r.lhs, &term, &r.delta1, &facts).len(), 1);
    }
}
