//! One rule application per call: pick an equation, return every
//! don't-know successor state (none on failure).

use crate::constraints::{satisfiable, IntConstraint};
use crate::term::{Class, CtxVar, Index, IntVar, Sort, Symbol, Term, Var};

use super::{family, Equation, Measure, Site, State, Step};

/// Size used by the termination measure. An environment with `m` bindings
/// and `m'` chains weighs `7m + m'` plus its components and tail.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Var(_) | Term::Hole => 1,
        Term::Ctx(_, a) => 1 + term_size(a),
        Term::Fn(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
        Term::Chain(..) => 0,
        Term::Env(e) => {
            let tail = if e.tails().is_empty() { 1 } else { e.tails().len() };
            7 * e.bind_count() + e.chain_count() + e.comps().iter().map(term_size).sum::<usize>() + tail
        }
    }
}

pub fn measure(p: &[Equation]) -> Measure {
    let mut m = Measure { mu1: 0, mu2: 0 };
    for eq in p {
        m.mu1 += eq.lhs.let_count() + eq.rhs.let_count() + eq.deferred.iter().map(Term::let_count).sum::<usize>();
        m.mu2 += term_size(&eq.lhs) + term_size(&eq.rhs);
        m.mu2 += eq.deferred.iter().map(|c| 7 + term_size(c)).sum::<usize>();
        // a bare tail variable left after deferral still sits in an env*
        if !eq.deferred.is_empty() && matches!(eq.lhs, Term::Var(_)) {
            m.mu2 += 0;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Trivial,
    Fail,
    Dec,
    Solve,
    Ctx,
    Env,
}

fn is_empty_env(t: &Term) -> bool {
    matches!(t, Term::Env(e) if e.is_empty())
}

fn env_has_comps(t: &Term) -> bool {
    matches!(t, Term::Env(e) if !e.comps().is_empty())
}

/// Failure of a non-empty context against a rigid term.
fn ctx_clash(x: &CtxVar, t: &Term) -> bool {
    match t {
        Term::Fn(Symbol::Var, _) => true,
        Term::Fn(Symbol::Lam, _) => x.class != Class::C,
        Term::Fn(Symbol::Let, _) => x.class == Class::A,
        _ => false,
    }
}

fn classify(eq: &Equation, st: &State) -> Kind {
    let (l, r) = (&eq.lhs, &eq.rhs);
    if !eq.deferred.is_empty() {
        return if is_empty_env(r) { Kind::Fail } else { Kind::Env };
    }
    if l == r {
        return Kind::Trivial;
    }
    match (l, r) {
        (Term::Fn(f, _), Term::Fn(g, _)) => {
            if f == g {
                Kind::Dec
            } else {
                Kind::Fail
            }
        }
        (Term::Var(_), _) | (_, Term::Var(_)) => Kind::Solve,
        (Term::Ctx(x, _), t) | (t, Term::Ctx(x, _)) if !matches!(t, Term::Ctx(..)) => {
            if st.delta1.contains(x) && ctx_clash(x, t) {
                Kind::Fail
            } else {
                Kind::Ctx
            }
        }
        (Term::Ctx(..), Term::Ctx(..)) => Kind::Ctx,
        (Term::Env(_), Term::Env(_)) => {
            if (env_has_comps(l) && is_empty_env(r)) || (is_empty_env(l) && env_has_comps(r)) {
                Kind::Fail
            } else {
                Kind::Env
            }
        }
        _ => Kind::Fail,
    }
}

fn contains_ctx(t: &Term, xs: &std::collections::BTreeSet<CtxVar>) -> bool {
    !xs.is_empty() && t.ctx_vars().iter().any(|x| xs.contains(x))
}

fn replace_ctx(t: &Term, x: &CtxVar, img: &Term) -> Term {
    match t {
        Term::Ctx(y, a) => {
            let a = replace_ctx(a, x, img);
            if y == x {
                img.fill(&a)
            } else {
                Term::ctx(y.clone(), a)
            }
        }
        Term::Fn(f, args) => Term::Fn(*f, args.iter().map(|a| replace_ctx(a, x, img)).collect()),
        Term::Env(e) => Term::env(e.comps().iter().map(|c| replace_ctx(c, x, img)), e.tails().iter().cloned()),
        _ => t.clone(),
    }
}

impl State {
    fn record(&mut self, rule: &'static str, changes_p: bool) {
        let m = measure(&self.pending);
        self.trace.push(Step {
            rule,
            measure: m,
            changes_p,
        });
    }

    fn mark(&mut self, site: Site) {
        if self.site.is_none() {
            self.site = Some(site);
        }
    }

    fn bind_var(&mut self, v: Var, img: Term) {
        if contains_ctx(&img, &self.lineage) {
            self.mark(Site::Variable);
        }
        if v.sort == Sort::BV {
            let Term::Var(w) = img else { unreachable!("BV bound to a non-variable") };
            if !self.s_bv.iter().any(|(a, b)| a == &v && b == &w) {
                self.s_bv.push((v, w));
            }
        } else {
            self.s_vars.push((v, img));
        }
    }

    fn bind_ctx(&mut self, x: &CtxVar, img: Term) {
        for eq in &mut self.pending {
            eq.lhs = replace_ctx(&eq.lhs, x, &img);
            eq.rhs = replace_ctx(&eq.rhs, x, &img);
        }
        self.s_ctx.push((x.clone(), img));
    }

    fn fresh_like(&mut self, x: &CtxVar, class: Class) -> CtxVar {
        let y = self.fresh.ctx(&family(&x.name, "A"), class);
        if self.lineage.contains(x) {
            self.lineage.insert(y.clone());
        }
        y
    }

    fn fresh_ctx(&mut self, fam: &str, class: Class) -> CtxVar {
        self.fresh.ctx(fam, class)
    }
}

fn ctx_of(x: &CtxVar, a: Term) -> Term {
    Term::ctx(x.clone(), a)
}

fn hole_of(x: &CtxVar) -> Term {
    ctx_of(x, Term::Hole)
}

/// Builds an equation keeping the transformation side on the left.
fn oriented(ctx_left: bool, ctx_side: Term, other: Term) -> Equation {
    if ctx_left {
        Equation::new(ctx_side, other)
    } else {
        Equation::new(other, ctx_side)
    }
}

pub(super) fn step(mut st: State) -> Vec<State> {
    let Some((idx, kind)) = st
        .pending
        .iter()
        .enumerate()
        .map(|(i, eq)| (i, classify(eq, &st)))
        .min_by_key(|&(i, k)| (k, i))
    else {
        return vec![st];
    };
    match kind {
        Kind::Fail => Vec::new(),
        Kind::Trivial => {
            st.pending.remove(idx);
            st.record("Trivial", true);
            vec![st]
        }
        Kind::Dec => {
            let eq = st.pending.remove(idx);
            if eq.root {
                st.mark(Site::Critical);
            }
            let (Term::Fn(_, a), Term::Fn(_, b)) = (eq.lhs, eq.rhs) else { unreachable!() };
            for (x, y) in a.into_iter().zip(b) {
                st.pending.push(Equation::new(x, y));
            }
            st.record("Dec", true);
            vec![st]
        }
        Kind::Solve => {
            let eq = st.pending.remove(idx);
            if eq.root {
                st.mark(Site::Variable);
            }
            match (eq.lhs, eq.rhs) {
                (Term::Var(v), t) => st.bind_var(v, t),
                (t, Term::Var(v)) => {
                    if v.sort == Sort::BV {
                        let Term::Var(w) = t else { unreachable!() };
                        st.s_bv.push((w, v));
                    } else {
                        st.bind_var(v, t);
                    }
                }
                _ => unreachable!(),
            }
            st.record("Solve", true);
            vec![st]
        }
        Kind::Ctx => ctx_step(st, idx),
        Kind::Env => env_step(st, idx),
    }
}

fn empty_c(st: State, x: &CtxVar) -> Vec<State> {
    let mut keep = st.clone();
    keep.delta1.insert(x.clone());
    keep.record("Empty-C", false);
    let mut empty = st;
    // the equation whose lineage context vanishes now carries the redex
    if empty.lineage.contains(x) {
        for eq in &mut empty.pending {
            if matches!(&eq.lhs, Term::Ctx(y, _) if y == x) {
                eq.root = true;
            }
        }
    }
    empty.bind_ctx(x, Term::Hole);
    empty.record("Empty-C", true);
    vec![keep, empty]
}

fn ctx_step(st: State, idx: usize) -> Vec<State> {
    let eq = st.pending[idx].clone();
    match (&eq.lhs, &eq.rhs) {
        (Term::Ctx(x, s), Term::Ctx(y, t)) => {
            if !st.delta1.contains(x) {
                empty_c(st, x)
            } else if !st.delta1.contains(y) {
                empty_c(st, y)
            } else {
                merge(st, idx, (x.clone(), (**s).clone()), (y.clone(), (**t).clone()))
            }
        }
        (Term::Ctx(x, s), t) => {
            if !st.delta1.contains(x) {
                empty_c(st, x)
            } else {
                dec_ctx(st, idx, true, x.clone(), (**s).clone(), t.clone())
            }
        }
        (t, Term::Ctx(x, s)) => {
            if !st.delta1.contains(x) {
                empty_c(st, x)
            } else {
                dec_ctx(st, idx, false, x.clone(), (**s).clone(), t.clone())
            }
        }
        _ => unreachable!(),
    }
}

/// Decomposition of `X(s) ≐ t` for non-empty `X` and rigid `t`.
fn dec_ctx(mut st: State, idx: usize, left: bool, x: CtxVar, s: Term, t: Term) -> Vec<State> {
    let eq = st.pending.remove(idx);
    if eq.root {
        // the redex root lies inside the image of X
        st.mark(Site::Variable);
    }
    let Term::Fn(f, args) = t else { unreachable!("rigid side") };
    let mut out = Vec::new();
    type Build<'a> = &'a dyn Fn(&mut State, &CtxVar) -> (Term, Vec<Equation>);
    let mut branch = |st: &State, rule: &'static str, build: Build| {
        let mut n = st.clone();
        let xp = n.fresh_like(&x, x.class);
        let (img, eqs) = build(&mut n, &xp);
        n.bind_ctx(&x, img);
        n.pending.extend(eqs);
        n.record(rule, true);
        out.push(n);
    };
    let sx = |xp: &CtxVar| ctx_of(xp, s.clone());
    match f {
        Symbol::App => {
            let (t1, t2) = (args[0].clone(), args[1].clone());
            branch(&st, "Dec-CA", &|_, xp| {
                (Term::app(hole_of(xp), t2.clone()), vec![oriented(left, sx(xp), t1.clone())])
            });
            if x.class != Class::A {
                branch(&st, "Dec-CC", &|_, xp| {
                    (Term::app(t1.clone(), hole_of(xp)), vec![oriented(left, sx(xp), t2.clone())])
                });
            }
        }
        Symbol::Let if x.class != Class::A => {
            let (t1, t2) = (args[0].clone(), args[1].clone());
            branch(&st, "Dec-CC", &|_, xp| {
                (Term::let_(t1.clone(), hole_of(xp)), vec![oriented(left, sx(xp), t2.clone())])
            });
            branch(&st, "Dec-CL", &|n, xp| {
                let b = n.fresh.var("x", Sort::BV);
                let z = n.fresh.var("z", Sort::Env);
                let img = Term::let_(Term::env([Term::bind(Term::Var(b.clone()), hole_of(xp))], [z.clone()]), t2.clone());
                let env = Term::env([Term::bind(Term::Var(b), sx(xp))], [z]);
                (img, vec![oriented(left, env, t1.clone())])
            });
        }
        Symbol::Lam if x.class == Class::C => {
            let (t1, t2) = (args[0].clone(), args[1].clone());
            branch(&st, "Dec-Lam", &|_, xp| {
                (Term::lam(t1.clone(), hole_of(xp)), vec![oriented(left, sx(xp), t2.clone())])
            });
        }
        _ => {}
    }
    out
}

fn merge(mut st: State, idx: usize, (x, s): (CtxVar, Term), (y, t): (CtxVar, Term)) -> Vec<State> {
    st.pending.remove(idx);
    let d = x.class.min(y.class);
    let lineage = st.lineage.contains(&x) || st.lineage.contains(&y);
    let mut out = Vec::new();

    // Merge-P, X is a prefix of Y
    {
        let mut n = st.clone();
        let z = n.fresh_ctx("Z", d);
        let yp = n.fresh.ctx(&family(&y.name, "A"), y.class);
        n.delta1.insert(z.clone());
        n.bind_ctx(&x, hole_of(&z));
        n.bind_ctx(&y, ctx_of(&z, hole_of(&yp)));
        let mut eq = Equation::new(s.clone(), ctx_of(&yp, t.clone()));
        eq.root = st.lineage.contains(&x);
        if st.lineage.contains(&y) {
            n.lineage.insert(yp.clone());
        }
        n.pending.push(eq);
        n.record("Merge-P", true);
        out.push(n);
    }
    // Merge-P, Y is a proper prefix of X
    {
        let mut n = st.clone();
        let z = n.fresh_ctx("Z", d);
        let xp = n.fresh_like(&x, x.class);
        n.delta1.insert(z.clone());
        n.delta1.insert(xp.clone());
        n.bind_ctx(&y, hole_of(&z));
        n.bind_ctx(&x, ctx_of(&z, hole_of(&xp)));
        let mut eq = Equation::new(ctx_of(&xp, s.clone()), t.clone());
        eq.root = st.lineage.contains(&y);
        n.pending.push(eq);
        n.record("Merge-P-sym", true);
        out.push(n);
    }

    let split = |st: &State, rule: &'static str, zc: Class, build: &dyn Fn(&mut State, &CtxVar, &CtxVar) -> (Term, Term)| {
        let mut n = st.clone();
        let z = n.fresh_ctx("Z", zc);
        let xp = n.fresh.ctx(&family(&x.name, "A"), x.class);
        let yp = n.fresh.ctx(&family(&y.name, "A"), y.class);
        let (xi, yi) = build(&mut n, &xp, &yp);
        n.bind_ctx(&x, ctx_of(&z, xi));
        n.bind_ctx(&y, ctx_of(&z, yi));
        if lineage {
            n.mark(Site::Variable);
        }
        n.record(rule, true);
        n
    };
    let xs = |xp: &CtxVar| ctx_of(xp, s.clone());
    let yt = |yp: &CtxVar| ctx_of(yp, t.clone());

    match (x.class == Class::A, y.class == Class::A) {
        (true, true) => {}
        (true, false) => out.push(split(&st, "Merge-FA", Class::A, &|_, xp, yp| {
            (Term::app(hole_of(xp), yt(yp)), Term::app(xs(xp), hole_of(yp)))
        })),
        (false, true) => out.push(split(&st, "Merge-FA", Class::A, &|_, xp, yp| {
            (Term::app(yt(yp), hole_of(xp)), Term::app(hole_of(yp), xs(xp)))
        })),
        (false, false) => {
            out.push(split(&st, "Merge-FC", d, &|_, xp, yp| {
                (Term::app(hole_of(xp), yt(yp)), Term::app(xs(xp), hole_of(yp)))
            }));
            out.push(split(&st, "Merge-FC", d, &|_, xp, yp| {
                (Term::app(yt(yp), hole_of(xp)), Term::app(hole_of(yp), xs(xp)))
            }));
            out.push(split(&st, "Merge-FC", d, &|n, xp, yp| {
                let b = Term::Var(n.fresh.var("x", Sort::BV));
                let z = n.fresh.var("z", Sort::Env);
                (
                    Term::let_(Term::env([Term::bind(b.clone(), hole_of(xp))], [z.clone()]), yt(yp)),
                    Term::let_(Term::env([Term::bind(b, xs(xp))], [z]), hole_of(yp)),
                )
            }));
            out.push(split(&st, "Merge-FC", d, &|n, xp, yp| {
                let b = Term::Var(n.fresh.var("x", Sort::BV));
                let z = n.fresh.var("z", Sort::Env);
                (
                    Term::let_(Term::env([Term::bind(b.clone(), yt(yp))], [z.clone()]), hole_of(xp)),
                    Term::let_(Term::env([Term::bind(b, hole_of(yp))], [z]), xs(xp)),
                )
            }));
            out.push(split(&st, "Merge-FC", d, &|n, xp, yp| {
                let b1 = Term::Var(n.fresh.var("x", Sort::BV));
                let b2 = Term::Var(n.fresh.var("y", Sort::BV));
                let z = n.fresh.var("z", Sort::Env);
                let w = Term::Var(n.fresh.var("w", Sort::Exp));
                (
                    Term::let_(
                        Term::env([Term::bind(b1.clone(), hole_of(xp)), Term::bind(b2.clone(), yt(yp))], [z.clone()]),
                        w.clone(),
                    ),
                    Term::let_(Term::env([Term::bind(b1, xs(xp)), Term::bind(b2, hole_of(yp))], [z]), w),
                )
            }));
        }
    }
    out
}

fn env_parts(t: &Term) -> (Vec<Term>, Option<Var>) {
    match t {
        Term::Var(v) => (Vec::new(), Some(v.clone())),
        Term::Env(e) => (e.comps().to_vec(), e.single_tail().cloned()),
        _ => unreachable!("not an environment: {t}"),
    }
}

fn chain_bind(y: IntVar, a: IntVar, prev: IntVar) -> Term {
    Term::bind(
        Term::Var(Var::chain_y(Index::Int(y))),
        Term::ctx(CtxVar::chain_a(Index::Int(a)), Term::use_var(Term::Var(Var::chain_y(Index::Int(prev))))),
    )
}

fn env_step(mut st: State, idx: usize) -> Vec<State> {
    let eq = st.pending.remove(idx);
    let (mut l1, r1) = env_parts(&eq.lhs);
    let (l2, r2) = env_parts(&eq.rhs);
    debug_assert!(!l1.iter().any(|c| matches!(c, Term::Chain(..))), "chain on the left");
    let rebuild = |l1: &[Term], l2: &[Term], deferred: &[Term]| {
        let mut e = Equation::new(
            Term::env(l1.iter().cloned(), r1.iter().cloned()),
            Term::env(l2.iter().cloned(), r2.iter().cloned()),
        );
        e.deferred = deferred.to_vec();
        e
    };

    if !l1.is_empty() {
        let t1 = l1.remove(0);
        let mut out = Vec::new();
        for (j, t2) in l2.iter().enumerate() {
            match t2 {
                Term::Chain(n1, n2) => {
                    let (n1, n2) = (*n1, *n2);
                    for case in 0..4 {
                        let mut n = st.clone();
                        n.delta2.retain(|c| *c != IntConstraint::Less(n1, n2));
                        let mut rest: Vec<Term> = l2.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, c)| c.clone()).collect();
                        let (b, a, cs, split) = match case {
                            0 => {
                                let b = chain_bind(n2, n2, n1);
                                (b.clone(), n2, vec![IntConstraint::Succ(n1, n2)], vec![b])
                            }
                            1 => {
                                let n3 = n.fresh.int();
                                rest.push(Term::Chain(n3, n2));
                                let b = chain_bind(n3, n3, n1);
                                let split = vec![b.clone(), Term::Chain(n3, n2)];
                                (b, n3, vec![IntConstraint::Succ(n1, n3), IntConstraint::Less(n3, n2)], split)
                            }
                            2 => {
                                let n3 = n.fresh.int();
                                rest.push(Term::Chain(n1, n3));
                                let b = chain_bind(n2, n2, n3);
                                let split = vec![Term::Chain(n1, n3), b.clone()];
                                (b, n2, vec![IntConstraint::Less(n1, n3), IntConstraint::Succ(n3, n2)], split)
                            }
                            _ => {
                                let n3 = n.fresh.int();
                                let n4 = n.fresh.int();
                                rest.push(Term::Chain(n1, n3));
                                rest.push(Term::Chain(n4, n2));
                                let b = chain_bind(n4, n4, n3);
                                let split = vec![Term::Chain(n1, n3), b.clone(), Term::Chain(n4, n2)];
                                (
                                    b,
                                    n4,
                                    vec![IntConstraint::Less(n1, n3), IntConstraint::Succ(n3, n4), IntConstraint::Less(n4, n2)],
                                    split,
                                )
                            }
                        };
                        n.s_chain.push((n1, n2, split));
                        n.delta2.extend(cs);
                        if !satisfiable(&n.delta2) {
                            continue;
                        }
                        n.delta1.insert(CtxVar::chain_a(Index::Int(a)));
                        n.pending.push(Equation::new(t1.clone(), b));
                        n.pending.push(rebuild(&l1, &rest, &eq.deferred));
                        n.record("Dec-Ch", true);
                        out.push(n);
                    }
                }
                _ => {
                    let mut n = st.clone();
                    let rest: Vec<Term> = l2.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, c)| c.clone()).collect();
                    n.pending.push(Equation::new(t1.clone(), t2.clone()));
                    n.pending.push(rebuild(&l1, &rest, &eq.deferred));
                    n.record("Dec-E", true);
                    out.push(n);
                }
            }
        }
        if r2.is_some() {
            let mut n = st;
            let mut deferred = eq.deferred.clone();
            deferred.push(t1);
            n.pending.push(rebuild(&l1, &l2, &deferred));
            out.push(n);
        }
        return out;
    }

    // every left component is placed; distribute the rest over the tails
    let d = eq.deferred;
    match (r1, r2) {
        (Some(v1), Some(v2)) => {
            if d.is_empty() {
                st.bind_var(v1, Term::env(l2, [v2]));
            } else if l2.is_empty() {
                st.bind_var(v2, Term::env(d, [v1]));
            } else {
                let z = st.fresh.var("z", Sort::Env);
                st.bind_var(v1, Term::env(l2, [z.clone()]));
                st.bind_var(v2, Term::env(d, [z]));
            }
            st.record("Solve-E", true);
        }
        (Some(v1), None) => {
            debug_assert!(d.is_empty());
            st.bind_var(v1, Term::env(l2, []));
            st.record("Solve", true);
        }
        (None, Some(v2)) => {
            if !l2.is_empty() {
                return Vec::new();
            }
            st.bind_var(v2, Term::env(d, []));
            st.record("Solve", true);
        }
        (None, None) => {
            if !l2.is_empty() || !d.is_empty() {
                return Vec::new();
            }
            st.record("Trivial", true);
        }
    }
    vec![st]
}
