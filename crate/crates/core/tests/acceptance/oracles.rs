//! Criteria checked against oracles written independently of the library:
//! a `let` counter, a brute-force least model, a permutation-based
//! environment equality, and a random ground-instance generator.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lcsx::calculus::{find_rule, Rule};
use lcsx::constraints::IntConstraint;
use lcsx::matching::{instantiate, match_rule, splits, Facts, Positions};
use lcsx::overlaps::{check_soundness, pairs, problem, run_all, run_pair, site_var, RuleFilter};
use lcsx::term::{lc_equal, Class, CtxVar, Index, IntVar, Name, Sort, Symbol, Term, Var};
use lcsx::unifier::{derive_solution, successors, symbolic_solution, Config, Equation, FinalSystem, State};

use super::{verdict, Verdict};

fn count_lets(t: &Term) -> usize {
    match t {
        Term::Fn(s, args) => (*s == Symbol::Let) as usize + args.iter().map(count_lets).sum::<usize>(),
        Term::Ctx(_, a) => count_lets(a),
        Term::Env(e) => e.comps().iter().map(count_lets).sum(),
        Term::Var(_) | Term::Hole | Term::Chain(..) => 0,
    }
}

fn lets_in(p: &[Equation]) -> usize {
    p.iter().map(|e| count_lets(&e.lhs) + count_lets(&e.rhs) + e.deferred.iter().map(count_lets).sum::<usize>()).sum()
}

fn trace_decreases(st: &[lcsx::unifier::Step]) -> bool {
    st.windows(2).all(|w| !w[1].changes_p || w[1].measure < w[0].measure)
}

pub fn c4_measure() -> Verdict {
    let rs = run_all(&RuleFilter::default(), &Config::default(), 4).unwrap();
    let finals: Vec<&FinalSystem> = rs.iter().flat_map(|r| r.overlaps.iter().map(|o| &o.system)).collect();
    let full_bad = finals.iter().filter(|f| !trace_decreases(&f.trace)).count();

    let all: Vec<(&Rule, &Rule)> = pairs(&RuleFilter::default());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut bad, mut mu1_bad, mut steps) = (0, 0, 0);
    for _ in 0..1000 {
        let (t, no) = all[rng.gen_range(0..all.len())];
        let (p, _) = problem(t, no);
        let mut st = State::initial(&p);
        loop {
            if st.trace.last().unwrap().measure.mu1 != lets_in(&st.pending) {
                mu1_bad += 1;
            }
            let mut kids = successors(st.clone());
            if kids.is_empty() {
                break;
            }
            steps += 1;
            st = kids.swap_remove(rng.gen_range(0..kids.len()));
        }
        if !trace_decreases(&st.trace) {
            bad += 1;
        }
    }
    let ok = full_bad == 0 && bad == 0 && mu1_bad == 0;
    verdict(
        ok,
        format!("{} full-run traces ({full_bad} bad), 1000 fuzzed derivations / {steps} steps ({bad} bad, {mu1_bad} let-count mismatches)", finals.len()),
    )
}

/// Least model by exhaustive search over a small box; `None` when the box
/// is too large to search.
fn brute_least_model(cs: &[IntConstraint]) -> Option<BTreeMap<IntVar, u32>> {
    let vars: Vec<IntVar> = cs.iter().flat_map(|c| c.vars()).collect::<BTreeSet<_>>().into_iter().collect();
    if vars.len() > 5 {
        return None;
    }
    let top = vars.len() as u32 + 2;
    let mut best: Option<Vec<u32>> = None;
    let mut vals = vec![1u32; vars.len()];
    loop {
        let m: BTreeMap<IntVar, u32> = vars.iter().copied().zip(vals.iter().copied()).collect();
        if cs.iter().all(|c| c.holds(&m)) {
            best = Some(match best {
                None => vals.clone(),
                Some(b) => b.iter().zip(&vals).map(|(x, y)| *x.min(y)).collect(),
            });
        }
        let mut i = 0;
        while i < vals.len() && vals[i] == top {
            vals[i] = 1;
            i += 1;
        }
        if i == vals.len() {
            break;
        }
        vals[i] += 1;
    }
    let best = best?;
    let m: BTreeMap<IntVar, u32> = vars.into_iter().zip(best).collect();
    cs.iter().all(|c| c.holds(&m)).then_some(m)
}

fn has_chain(t: &Term) -> bool {
    match t {
        Term::Chain(..) => true,
        Term::Fn(_, a) => a.iter().any(has_chain),
        Term::Ctx(_, a) => has_chain(a),
        Term::Env(e) => e.comps().iter().any(has_chain),
        Term::Var(_) | Term::Hole => false,
    }
}

pub fn c5_soundness() -> Verdict {
    let rs = run_all(&RuleFilter::default(), &Config::default(), 4).unwrap();
    let (mut n, mut unsound, mut model_bad, mut brute) = (0, 0, 0, 0);
    for r in &rs {
        let t = find_rule(&r.t_rule).unwrap();
        let no = find_rule(&r.no_rule).unwrap();
        let (p, _) = problem(t, no);
        for o in &r.overlaps {
            n += 1;
            let f = &o.system;
            if let Some(m) = brute_least_model(&f.delta2) {
                brute += 1;
                if m.iter().any(|(k, v)| f.least_model.get(k) != Some(v)) {
                    model_bad += 1;
                }
            } else if !f.delta2.iter().all(|c| c.holds(&f.least_model)) {
                model_bad += 1;
            }
            let sound = derive_solution(f, &f.least_model).ok().is_some_and(|s| {
                let (l, rr) = (s.apply(&p.lhs).unwrap(), s.apply(&p.rhs).unwrap());
                !has_chain(&l) && !has_chain(&rr) && lc_equal(&l, &rr).unwrap()
            });
            if !sound || !check_soundness(t, no, f).unwrap_or(false) {
                unsound += 1;
            }
        }
    }
    verdict(unsound == 0 && model_bad == 0, format!("{n} final systems, {unsound} unsound, {model_bad} wrong least models ({brute} brute-forced)"))
}

#[derive(Debug, Clone)]
enum Raw {
    Var(u8),
    App(Box<Raw>, Box<Raw>),
    Lam(u8, Box<Raw>),
    Let(Vec<(u8, Raw)>, Option<u8>, Box<Raw>),
}

fn raw_strategy() -> impl Strategy<Value = Raw> {
    let leaf = (0u8..3).prop_map(Raw::Var);
    leaf.prop_recursive(3, 24, 6, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Raw::App(Box::new(a), Box::new(b))),
            (0u8..3, inner.clone()).prop_map(|(x, b)| Raw::Lam(x, Box::new(b))),
            (prop::collection::vec((0u8..3, inner.clone()), 0..=6), prop::option::of(0u8..2), inner)
                .prop_map(|(bs, tail, body)| Raw::Let(bs, tail, Box::new(body))),
        ]
    })
}

fn to_term(r: &Raw) -> Term {
    let bv = |x: &u8| Term::bv(&format!("x{x}"));
    match r {
        Raw::Var(x) => Term::use_var(bv(x)),
        Raw::App(a, b) => Term::app(to_term(a), to_term(b)),
        Raw::Lam(x, b) => Term::lam(bv(x), to_term(b)),
        Raw::Let(bs, tail, body) => {
            let comps: Vec<Term> = bs.iter().map(|(x, e)| Term::bind(bv(x), to_term(e))).collect();
            let tails: Vec<Var> = tail.iter().map(|k| Var::new(&format!("E{k}"), Sort::Env)).collect();
            Term::let_(Term::env(comps, tails), to_term(body))
        }
    }
}

/// Equality up to reordering of `let` bindings, by trying permutations.
fn perm_equal(a: &Raw, b: &Raw) -> bool {
    match (a, b) {
        (Raw::Var(x), Raw::Var(y)) => x == y,
        (Raw::App(a1, a2), Raw::App(b1, b2)) => perm_equal(a1, b1) && perm_equal(a2, b2),
        (Raw::Lam(x, a), Raw::Lam(y, b)) => x == y && perm_equal(a, b),
        (Raw::Let(ab, at, ae), Raw::Let(bb, bt, be)) => {
            if at != bt || ab.len() != bb.len() || !perm_equal(ae, be) {
                return false;
            }
            let mut idx: Vec<usize> = (0..bb.len()).collect();
            permutations(&mut idx, 0, &mut |p| ab.iter().zip(p).all(|((x, e), &j)| *x == bb[j].0 && perm_equal(e, &bb[j].1)))
        }
        _ => false,
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if k == v.len() {
        return f(v);
    }
    for i in k..v.len() {
        v.swap(k, i);
        if permutations(v, k + 1, f) {
            v.swap(k, i);
            return true;
        }
        v.swap(k, i);
    }
    false
}

fn shuffled(r: &Raw, rng: &mut ChaCha8Rng) -> Raw {
    match r {
        Raw::Var(_) => r.clone(),
        Raw::App(a, b) => Raw::App(Box::new(shuffled(a, rng)), Box::new(shuffled(b, rng))),
        Raw::Lam(x, b) => Raw::Lam(*x, Box::new(shuffled(b, rng))),
        Raw::Let(bs, t, body) => {
            let mut bs: Vec<(u8, Raw)> = bs.iter().map(|(x, e)| (*x, shuffled(e, rng))).collect();
            bs.shuffle(rng);
            Raw::Let(bs, *t, Box::new(shuffled(body, rng)))
        }
    }
}

pub fn c6_lc_equal() -> Verdict {
    let mut runner = TestRunner::new_with_rng(PtConfig { cases: 10_000, failure_persistence: None, ..PtConfig::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (raw_strategy(), raw_strategy(), any::<u64>(), 0u8..3);
    let counts = std::cell::Cell::new((0usize, 0usize));
    let res = runner.run(&strategy, |(a, b, seed, mode)| {
        let mut s = ChaCha8Rng::seed_from_u64(seed);
        let b = match mode {
            0 => shuffled(&a, &mut s),
            1 => b,
            _ => match shuffled(&a, &mut s) {
                Raw::Let(mut bs, t, body) if !bs.is_empty() => {
                    bs[0].0 = (bs[0].0 + 1) % 3;
                    Raw::Let(bs, t, body)
                }
                other => Raw::App(Box::new(other), Box::new(Raw::Var(0))),
            },
        };
        let oracle = perm_equal(&a, &b);
        let got = lc_equal(&to_term(&a), &to_term(&b)).unwrap();
        let (e, n) = counts.get();
        counts.set((e + oracle as usize, n + 1));
        prop_assert_eq!(got, oracle);
        Ok(())
    });
    let (equal, total) = counts.get();
    let detail = match &res {
        Ok(()) => format!("{total} random pairs agree ({equal} equal, {} different)", total - equal),
        Err(e) => format!("disagreement: {e}"),
    };
    verdict(res.is_ok() && total >= 10_000, detail)
}

/// Random ground instances of a pattern. Meta-variables get small ground
/// fillers; context variables get contexts of their class; chains are
/// unrolled under a random model of the integer constraints.
struct Ground<'a> {
    rng: &'a mut ChaCha8Rng,
    next: &'a mut u32,
    vars: BTreeMap<Var, Term>,
    ctxs: BTreeMap<String, Term>,
    model: BTreeMap<IntVar, u32>,
    nonempty: BTreeSet<CtxVar>,
    plant: Option<&'a Rule>,
}

impl Ground<'_> {
    fn fresh(&mut self) -> Term {
        *self.next += 1;
        Term::bv(&format!("c{}", self.next))
    }

    fn exp(&mut self, depth: u32) -> Term {
        if depth == 0 || self.rng.gen_bool(0.4) {
            let x = self.fresh();
            return Term::use_var(x);
        }
        if self.rng.gen_bool(0.5) {
            let x = self.fresh();
            Term::lam(x, self.exp(depth - 1))
        } else {
            Term::app(self.exp(depth - 1), self.exp(depth - 1))
        }
    }

    fn env(&mut self) -> Term {
        let n = self.rng.gen_range(0..=2);
        let comps: Vec<Term> = (0..n).map(|_| {
            let x = self.fresh();
            Term::bind(x, self.exp(1))
        }).collect();
        Term::env(comps, [])
    }

    fn ctx(&mut self, class: Class, nonempty: bool, depth: u32) -> Term {
        if !nonempty && (depth == 0 || self.rng.gen_bool(0.4)) {
            return Term::Hole;
        }
        let depth = depth.max(1);
        let choices = match class {
            Class::A => 1,
            Class::S => 4,
            Class::C => 5,
        };
        match self.rng.gen_range(0..choices) {
            0 => Term::app(self.ctx(Class::A.min(class), false, depth - 1), self.exp(1)),
            1 => Term::app(self.exp(1), self.ctx(class, false, depth - 1)),
            2 => Term::let_(self.env(), self.ctx(class, false, depth - 1)),
            3 => {
                let x = self.fresh();
                let rest = self.env();
                let (mut comps, tails) = match rest {
                    Term::Env(e) => e.into_parts(),
                    _ => (Vec::new(), Vec::new()),
                };
                comps.push(Term::bind(x, self.ctx(class, false, depth - 1)));
                Term::let_(Term::env(comps, tails), self.exp(1))
            }
            _ => {
                let x = self.fresh();
                Term::lam(x, self.ctx(class, false, depth - 1))
            }
        }
    }

    fn chain_y(&self, n: IntVar) -> Var {
        Var::bv(&format!("y{}", self.model[&n]))
    }

    fn ctx_image(&mut self, x: &CtxVar) -> Term {
        let key = match &x.name {
            Name::Chain(Index::Int(n)) => format!("A_{}", self.model[n]),
            Name::Chain(Index::Lit(k)) => format!("A_{k}"),
            Name::Plain(s) => s.to_string(),
        };
        if let Some(c) = self.ctxs.get(&key) {
            return c.clone();
        }
        let ne = self.nonempty.contains(x) || matches!(x.name, Name::Chain(_));
        let c = self.ctx(x.class, ne, 2);
        self.ctxs.insert(key, c.clone());
        c
    }

    fn var_image(&mut self, v: &Var) -> Term {
        if let Name::Chain(Index::Int(n)) = &v.name {
            return Term::var(self.chain_y(*n));
        }
        if let Some(t) = self.vars.get(v) {
            return t.clone();
        }
        let t = match v.sort {
            Sort::BV => self.fresh(),
            Sort::Env => self.env(),
            _ => match self.plant {
                Some(rule) if self.rng.gen_bool(0.3) => {
                    let mut sub = Ground {
                        rng: &mut *self.rng,
                        next: &mut *self.next,
                        vars: BTreeMap::new(),
                        ctxs: BTreeMap::new(),
                        model: BTreeMap::new(),
                        nonempty: rule.delta1.clone(),
                        plant: None,
                    };
                    sub.inst(&rule.lhs)
                }
                _ => self.exp(2),
            },
        };
        self.vars.insert(v.clone(), t.clone());
        t
    }

    fn inst(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.var_image(v),
            Term::Ctx(x, a) => {
                let c = self.ctx_image(x);
                let a = self.inst(a);
                c.fill(&a)
            }
            Term::Fn(s, args) => Term::Fn(*s, args.iter().map(|a| self.inst(a)).collect()),
            Term::Env(e) => {
                let mut comps = Vec::new();
                let mut tails = Vec::new();
                for c in e.comps() {
                    match c {
                        Term::Chain(a, b) => {
                            for i in self.model[a] + 1..=self.model[b] {
                                let a_i = CtxVar::chain_a(Index::Lit(i));
                                let ctx = self.ctx_image(&a_i);
                                let prev = Term::use_var(Term::bv(&format!("y{}", i - 1)));
                                comps.push(Term::bind(Term::bv(&format!("y{i}")), ctx.fill(&prev)));
                            }
                        }
                        c => comps.push(self.inst(c)),
                    }
                }
                for v in e.tails() {
                    match self.var_image(v) {
                        Term::Env(e2) => {
                            let (c2, t2) = e2.into_parts();
                            comps.extend(c2);
                            tails.extend(t2);
                        }
                        Term::Var(w) => tails.push(w),
                        _ => {}
                    }
                }
                Term::env(comps, tails)
            }
            Term::Hole | Term::Chain(..) => t.clone(),
        }
    }
}

fn random_model(cs: &[IntConstraint], ints: &BTreeSet<IntVar>, rng: &mut ChaCha8Rng) -> BTreeMap<IntVar, u32> {
    loop {
        let m: BTreeMap<IntVar, u32> = ints.iter().map(|n| (*n, rng.gen_range(1..=4))).collect();
        if cs.iter().all(|c| c.holds(&m)) {
            return m;
        }
    }
}

/// Is `Δ2` together with `b - a = len` for each matched chain satisfiable?
/// Bellman-Ford on the difference graph.
fn lengths_fit(cs: &[IntConstraint], lens: &[(IntVar, IntVar, i64)]) -> bool {
    // edge (u, v, w): x_v - x_u <= w
    let mut edges: Vec<(IntVar, IntVar, i64)> = Vec::new();
    for c in cs {
        match *c {
            IntConstraint::Less(a, b) => edges.push((b, a, -1)),
            IntConstraint::Succ(a, b) => {
                edges.push((b, a, -1));
                edges.push((a, b, 1));
            }
        }
    }
    for &(a, b, l) in lens {
        edges.push((b, a, -l));
        edges.push((a, b, l));
    }
    let nodes: BTreeSet<IntVar> = edges.iter().flat_map(|e| [e.0, e.1]).collect();
    let mut dist: BTreeMap<IntVar, i64> = nodes.iter().map(|n| (*n, 0)).collect();
    for _ in 0..=nodes.len() {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if dist[&u] + w < dist[&v] {
                dist.insert(v, dist[&u] + w);
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Positions of `g` where the transformation matches under a surface
/// context, as the context with a marker in the hole.
fn redex_positions(g: &Term, t: &Rule, marker: &Term) -> BTreeSet<Term> {
    splits(g, &Facts::default(), Positions::All)
        .into_iter()
        .filter(|s| s.class <= Class::S)
        .filter(|s| !match_rule(&t.lhs, &s.sub, &t.delta1, &Facts::default()).is_empty())
        .map(|s| s.ctx.fill(marker))
        .collect()
}

fn covered(finals: &[FinalSystem], lhs: &Term, g: &Term, pos: &Term, marker: &Term) -> bool {
    finals.iter().any(|f| {
        let Ok(sigma) = symbolic_solution(f) else { return false };
        let (Ok(pat), Ok(site)) = (sigma.apply(lhs), sigma.apply(&Term::ctx(site_var(), marker.clone()))) else { return false };
        match_rule(&pat, g, &f.delta1, &Facts::default()).into_iter().any(|m| {
            let lens: Vec<(IntVar, IntVar, i64)> = m.chains.iter().map(|((a, b), p)| (*a, *b, p.len() as i64)).collect();
            lengths_fit(&f.delta2, &lens) && instantiate(&site, &m) == *pos
        })
    })
}

pub fn c8_completeness() -> Verdict {
    let cfg = Config::default();
    let mut candidates: Vec<(&Rule, &Rule)> = pairs(&RuleFilter::default())
        .into_iter()
        .filter(|(t, no)| run_pair(t, no, &cfg).critical() > 0)
        .collect();
    let stride = (candidates.len() / 19).max(1);
    let mut chosen: Vec<(&Rule, &Rule)> = candidates.iter().step_by(stride).take(19).copied().collect();
    let worked = (find_rule("cp-e/abs").unwrap(), find_rule("no-cp-e-c/abs").unwrap());
    if !chosen.contains(&worked) {
        chosen.push(worked);
    }
    candidates.clear();
    let marker = Term::var(Var::new("hole.marker", Sort::Exp));
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0_ffee);
    let (mut instances, mut positions, mut missed) = (0, 0, Vec::new());
    for (t, no) in &chosen {
        let (p, no_r) = problem(t, no);
        let finals: Vec<FinalSystem> = run_pair(t, no, &cfg).overlaps.into_iter().map(|o| o.system).collect();
        for _ in 0..20 {
            let mut next = 0;
            let model = random_model(&no_r.delta2, &p.rhs.int_vars(), &mut rng);
            let mut gen = Ground {
                rng: &mut rng,
                next: &mut next,
                vars: BTreeMap::new(),
                ctxs: BTreeMap::new(),
                model,
                nonempty: no_r.delta1.clone(),
                plant: Some(t),
            };
            let g = gen.inst(&p.rhs);
            instances += 1;
            for pos in redex_positions(&g, t, &marker) {
                positions += 1;
                if !covered(&finals, &p.lhs, &g, &pos, &marker) {
                    missed.push(format!("{} / {}: {g} at {pos}", t.name, no.name));
                }
            }
        }
    }
    let ok = missed.is_empty() && positions > 0 && chosen.len() == 20;
    let mut detail = format!("{} problems, {instances} ground instances, {positions} redex positions, {} uncovered", chosen.len(), missed.len());
    for m in missed.iter().take(3) {
        detail.push_str(&format!("\n      {m}"));
    }
    verdict(ok, detail)
}
