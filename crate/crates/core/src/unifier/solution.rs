//! Reading substitutions off final systems: DAG resolution, bound-variable
//! identification, chain instantiation, the DVC check and canonical keys.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constraints::least_model;
use crate::term::{CtxVar, IntVar, Name, Substitution, Symbol, Term, TermError, Var};

use super::{FinalSystem, Problem, State};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolutionError {
    #[error("solved form is cyclic")]
    Cycle,
    #[error("integer constraints are unsatisfiable")]
    Unsatisfiable,
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Outcome of the distinct variable check on the instantiated lhs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DvcReport {
    /// Binders occurring at two or more binding positions.
    pub duplicated: Vec<Var>,
    pub violated: bool,
}

pub(super) fn finalize(st: State, problem: &Problem) -> FinalSystem {
    let mut f = FinalSystem {
        s_bv: st.s_bv,
        s_vars: st.s_vars,
        s_ctx: st.s_ctx,
        s_chain: st.s_chain,
        delta1: st.delta1,
        delta2: st.delta2,
        site: st.site,
        trace: st.trace,
        least_model: BTreeMap::new(),
        dvc: DvcReport::default(),
        base_int: problem.max_int(),
    };
    f.least_model = model_of(&f, problem).unwrap_or_default();
    f.dvc = check_dvc(&f, &problem.lhs);
    f
}

/// Least model of Δ2, with 1 for integer variables Δ2 does not mention.
fn model_of(f: &FinalSystem, problem: &Problem) -> Result<BTreeMap<IntVar, u32>, SolutionError> {
    let mut m = least_model(&f.delta2).ok_or(SolutionError::Unsatisfiable)?;
    let mut ints = problem.lhs.int_vars();
    ints.extend(problem.rhs.int_vars());
    for (_, t) in &f.s_vars {
        ints.extend(t.int_vars());
    }
    for (_, t) in &f.s_ctx {
        ints.extend(t.int_vars());
    }
    for n in ints {
        m.entry(n).or_insert(1);
    }
    Ok(m)
}

/// Representative of each bound-variable class: the least variable that
/// occurs on the normal-order side, else the least variable.
fn bv_classes(pairs: &[(Var, Var)]) -> BTreeMap<Var, Var> {
    let mut parent: BTreeMap<Var, Var> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<Var, Var>, v: &Var) -> Var {
        let p = parent.entry(v.clone()).or_insert_with(|| v.clone()).clone();
        if &p == v {
            return p;
        }
        let r = find(parent, &p);
        parent.insert(v.clone(), r.clone());
        r
    }
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let right: BTreeSet<&Var> = pairs.iter().map(|(_, b)| b).collect();
    let mut classes: BTreeMap<Var, Vec<Var>> = BTreeMap::new();
    let keys: Vec<Var> = parent.keys().cloned().collect();
    for v in keys {
        let r = find(&mut parent, &v);
        classes.entry(r).or_default().push(v);
    }
    let mut rep = BTreeMap::new();
    for members in classes.values() {
        let r = members
            .iter()
            .filter(|v| right.contains(v))
            .min()
            .or_else(|| members.iter().min())
            .expect("non-empty class")
            .clone();
        for v in members {
            if *v != r {
                rep.insert(v.clone(), r.clone());
            }
        }
    }
    rep
}

/// The solved form as one idempotent substitution, integer variables left
/// symbolic.
pub fn symbolic_solution(f: &FinalSystem) -> Result<Substitution, SolutionError> {
    let mut vars: BTreeMap<Var, Term> = f.s_vars.iter().cloned().collect();
    let mut ctxs: BTreeMap<CtxVar, Term> = f.s_ctx.iter().cloned().collect();
    for (v, r) in bv_classes(&f.s_bv) {
        vars.insert(v, Term::Var(r));
    }
    let bound = |t: &Term, vars: &BTreeMap<Var, Term>, ctxs: &BTreeMap<CtxVar, Term>| {
        t.vars().iter().any(|v| vars.contains_key(v)) || t.ctx_vars().iter().any(|x| ctxs.contains_key(x))
    };
    let rounds = vars.len() + ctxs.len() + 1;
    for _ in 0..=rounds {
        let all = vars.values().chain(ctxs.values()).all(|t| !bound(t, &vars, &ctxs));
        if all {
            let mut s = Substitution::new();
            for (v, t) in vars {
                s.insert_var(v, t)?;
            }
            for (x, t) in ctxs {
                s.insert_ctx(x, t)?;
            }
            for (a, b, comps) in &f.s_chain {
                s.insert_chain(*a, *b, comps.clone());
            }
            return Ok(s);
        }
        let mut cur = Substitution::new();
        for (v, t) in &vars {
            cur.insert_var(v.clone(), t.clone())?;
        }
        for (x, t) in &ctxs {
            cur.insert_ctx(x.clone(), t.clone())?;
        }
        for t in vars.values_mut().chain(ctxs.values_mut()) {
            *t = cur.apply(t)?;
        }
    }
    Err(SolutionError::Cycle)
}

/// Ground-index instance of the solved form under `model`: chain names are
/// renamed to their index and chains are expanded.
pub fn derive_solution(f: &FinalSystem, model: &BTreeMap<IntVar, u32>) -> Result<Substitution, SolutionError> {
    let sym = symbolic_solution(f)?;
    let mut ints = Substitution::new();
    for (n, k) in model {
        ints.insert_int(*n, *k);
    }
    let mut out = ints.clone();
    for (&(a, b), comps) in sym.chains() {
        out.insert_chain(a, b, comps.clone());
    }
    for (v, t) in sym.vars() {
        let Term::Var(key) = ints.apply(&Term::Var(v.clone()))? else { unreachable!() };
        out.insert_var(key, ints.apply(t)?)?;
    }
    for (x, t) in sym.ctxs() {
        let Term::Ctx(key, _) = ints.apply(&Term::ctx(x.clone(), Term::Hole))? else { unreachable!() };
        out.insert_ctx(key, ints.apply(t)?)?;
    }
    Ok(out)
}

fn binders(t: &Term, sigma: &Substitution, out: &mut Vec<Var>) {
    match t {
        Term::Fn(Symbol::Lam | Symbol::Bind, args) => {
            if let Term::Var(v) = &args[0] {
                out.push(v.clone());
            }
            binders(&args[1], sigma, out);
        }
        Term::Fn(_, args) => args.iter().for_each(|a| binders(a, sigma, out)),
        Term::Ctx(_, a) => binders(a, sigma, out),
        Term::Env(e) => e.comps().iter().for_each(|c| binders(c, sigma, out)),
        Term::Chain(_, n2) => {
            let y = Var::chain_y(crate::term::Index::Int(*n2));
            match sigma.var(&y) {
                Some(Term::Var(r)) => out.push(r.clone()),
                _ => out.push(y),
            }
        }
        Term::Var(_) | Term::Hole => {}
    }
}

/// Distinct variable check of `σ(t)`. A chain contributes its last binder.
pub fn check_dvc(f: &FinalSystem, t: &Term) -> DvcReport {
    let Ok((sub, inst)) = symbolic_solution(f).and_then(|s| {
        let inst = s.apply(t)?;
        Ok((s, inst))
    }) else {
        return DvcReport {
            duplicated: Vec::new(),
            violated: true,
        };
    };
    let mut bs = Vec::new();
    binders(&inst, &sub, &mut bs);
    let mut count: BTreeMap<Var, usize> = BTreeMap::new();
    for b in bs {
        *count.entry(b).or_default() += 1;
    }
    let duplicated: Vec<Var> = count.into_iter().filter(|&(_, n)| n > 1).map(|(v, _)| v).collect();
    DvcReport {
        violated: !duplicated.is_empty(),
        duplicated,
    }
}

fn is_fresh(name: &Name) -> bool {
    matches!(name, Name::Plain(s) if s.contains('.'))
}

/// Key identifying final systems up to renaming of fresh names.
pub fn canonical_key(f: &FinalSystem) -> String {
    let base = f.base_int;
    let masked = |t: &Term| {
        t.rename_with(
            &|v: &Var| if is_fresh(&v.name) { Var::new("?", v.sort) } else { v.clone() },
            &|x: &CtxVar| if is_fresh(&x.name) { CtxVar::new("?", x.class) } else { x.clone() },
            &|n: IntVar| if n.0 > base { IntVar(0) } else { n },
        )
        .to_string()
    };
    let mut entries: Vec<(u8, String, Term, Term)> = Vec::new();
    for (a, b) in &f.s_bv {
        let (a, b) = (Term::Var(a.clone()), Term::Var(b.clone()));
        entries.push((0, format!("{}={}", masked(&a), masked(&b)), a, b));
    }
    for (v, t) in &f.s_vars {
        let a = Term::Var(v.clone());
        entries.push((1, format!("{}={}", masked(&a), masked(t)), a, t.clone()));
    }
    for (x, t) in &f.s_ctx {
        let a = Term::ctx(x.clone(), Term::Hole);
        entries.push((2, format!("{}={}", masked(&a), masked(t)), a, t.clone()));
    }
    for (a, b, comps) in &f.s_chain {
        let (l, r) = (Term::Chain(*a, *b), Term::env(comps.iter().cloned(), []));
        entries.push((3, format!("{}={}", masked(&l), masked(&r)), l, r));
    }
    entries.sort_by(|p, q| (p.0, &p.1).cmp(&(q.0, &q.1)));

    let vmap: RefCell<BTreeMap<Var, Var>> = RefCell::default();
    let cmap: RefCell<BTreeMap<CtxVar, CtxVar>> = RefCell::default();
    let imap: RefCell<BTreeMap<IntVar, IntVar>> = RefCell::default();
    let counter = RefCell::new(0u32);
    let next = || {
        *counter.borrow_mut() += 1;
        *counter.borrow()
    };
    let canon = |t: &Term| {
        t.rename_with(
            &|v: &Var| {
                if !is_fresh(&v.name) {
                    return v.clone();
                }
                let known = vmap.borrow().get(v).cloned();
                known.unwrap_or_else(|| {
                    let w = Var::new(&format!("#{}", next()), v.sort);
                    vmap.borrow_mut().insert(v.clone(), w.clone());
                    w
                })
            },
            &|x: &CtxVar| {
                if !is_fresh(&x.name) {
                    return x.clone();
                }
                let known = cmap.borrow().get(x).cloned();
                known.unwrap_or_else(|| {
                    let w = CtxVar::new(&format!("#{}", next()), x.class);
                    cmap.borrow_mut().insert(x.clone(), w.clone());
                    w
                })
            },
            &|n: IntVar| {
                if n.0 <= base {
                    return n;
                }
                let known = imap.borrow().get(&n).copied();
                known.unwrap_or_else(|| {
                    let w = IntVar(1_000_000 + next());
                    imap.borrow_mut().insert(n, w);
                    w
                })
            },
        )
        .to_string()
    };
    let mut key = String::new();
    for (_, _, a, b) in &entries {
        let (a, b) = (canon(a), canon(b));
        key.push_str(&a);
        key.push('=');
        key.push_str(&b);
        key.push(';');
    }
    let mut d1: Vec<String> = f.delta1.iter().map(|x| canon(&Term::ctx(x.clone(), Term::Hole))).collect();
    d1.sort();
    let mut d2: Vec<String> = f
        .delta2
        .iter()
        .map(|c| {
            let [a, b] = c.vars();
            let s = canon(&Term::Chain(a, b));
            format!("{}{s}", if matches!(c, crate::constraints::IntConstraint::Succ(..)) { "S" } else { "L" })
        })
        .collect();
    d2.sort();
    d2.dedup();
    key.push_str(&format!("|{}|{}|{:?}", d1.join(","), d2.join(","), f.site));
    key
}

impl std::fmt::Display for FinalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut items: Vec<String> = Vec::new();
        items.extend(self.s_bv.iter().map(|(a, b)| format!("{a} ≐ {b}")));
        items.extend(
            self.s_vars
                .iter()
                .filter(|(a, b)| !self.s_bv.iter().any(|(x, y)| x == a && b.as_var() == Some(y)))
                .map(|(a, b)| format!("{a} ≐ {b}")),
        );
        items.extend(self.s_ctx.iter().map(|(a, b)| format!("{a} ≐ {b}")));
        items.extend(self.s_chain.iter().map(|(a, b, cs)| format!("{} ≐ {}", Term::Chain(*a, *b), Term::env(cs.iter().cloned(), []))));
        write!(f, "{{{}}}", items.join(", "))?;
        let d1: Vec<String> = self.delta1.iter().map(|x| x.to_string()).collect();
        let d2: Vec<String> = self.delta2.iter().map(|c| c.to_string()).collect();
        write!(f, " Δ1={{{}}} Δ2={{{}}}", d1.join(","), d2.join(","))
    }
}
