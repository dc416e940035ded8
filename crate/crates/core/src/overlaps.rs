//! Overlaps of a transformation lhs inside a normal-order lhs: one
//! unification problem `S(l_T) ≐ l_no` per rule pair.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::calculus::{normal_order_rules, transformation_rules, Rule};
use crate::calculus::catalog::plain_names;
use crate::term::{Class, CtxVar, Substitution, Term, TermError};
use crate::unifier::{derive_solution, solve, symbolic_solution, Config, FinalSystem, Problem, Site, SolutionError};

/// The context variable placing the transformation redex.
pub fn site_var() -> CtxVar {
    CtxVar::new("S", Class::S)
}

/// `S(l_T) ≐ l_no` with the normal-order rule renamed apart.
pub fn problem(t: &Rule, no: &Rule) -> (Problem, Rule) {
    let mut avoid = plain_names(&t.lhs);
    avoid.extend(plain_names(&t.rhs));
    avoid.insert("S".into());
    let no = no.renamed_apart(&avoid, 0);
    let mut p = Problem::new(Term::ctx(site_var(), t.lhs.clone()), no.lhs.clone());
    p.delta1 = t.delta1.iter().chain(&no.delta1).cloned().collect();
    p.delta2 = no.delta2.clone();
    p.lineage.insert(site_var());
    (p, no)
}

/// One solution of one pair, with the fork it induces.
#[derive(Debug, Clone)]
pub struct Overlap {
    pub t_rule: String,
    pub no_rule: String,
    pub system: FinalSystem,
    pub fork: Option<Fork>,
}

/// `left <-no- source -T-> right`, with the solved form applied symbolically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fork {
    pub source: Term,
    pub left: Term,
    pub right: Term,
}

#[derive(Debug, Clone)]
pub struct PairResult {
    pub t_rule: String,
    pub no_rule: String,
    pub raw: usize,
    pub states: usize,
    pub exhausted: bool,
    pub overlaps: Vec<Overlap>,
}

impl PairResult {
    pub fn dedup(&self) -> usize {
        self.overlaps.len()
    }

    pub fn dvc_ok(&self) -> usize {
        self.overlaps.iter().filter(|o| o.system.dvc_ok()).count()
    }

    pub fn critical(&self) -> usize {
        self.overlaps.iter().filter(|o| o.fork.is_some()).count()
    }
}

pub fn fork_of(t: &Rule, no: &Rule, sigma: &Substitution) -> Result<Fork, SolutionError> {
    let s = site_var();
    let ctx = sigma.ctx(&s).cloned().unwrap_or(Term::ctx(s, Term::Hole));
    let right = sigma.apply(&ctx.fill(&t.rhs))?;
    Ok(Fork {
        source: sigma.apply(&no.lhs)?,
        left: sigma.apply(&no.rhs)?,
        right,
    })
}

pub fn run_pair(t: &Rule, no: &Rule, cfg: &Config) -> PairResult {
    let (p, no_renamed) = problem(t, no);
    let out = solve(&p, cfg);
    let overlaps = out
        .finals
        .into_iter()
        .map(|system| {
            let fork = if system.site == Some(Site::Critical) && system.dvc_ok() {
                symbolic_solution(&system).and_then(|s| fork_of(t, &no_renamed, &s)).ok()
            } else {
                None
            };
            Overlap {
                t_rule: t.name.clone(),
                no_rule: no.name.clone(),
                system,
                fork,
            }
        })
        .collect();
    PairResult {
        t_rule: t.name.clone(),
        no_rule: no.name.clone(),
        raw: out.raw,
        states: out.states,
        exhausted: out.exhausted,
        overlaps,
    }
}

/// Rule selection by name or family; an empty filter selects everything.
#[derive(Debug, Clone, Default)]
pub struct RuleFilter {
    pub transformations: BTreeSet<String>,
    pub normal_order: BTreeSet<String>,
}

pub fn selected(filter: &BTreeSet<String>, r: &Rule) -> bool {
    filter.is_empty() || filter.contains(&r.name) || filter.contains(r.family)
}

pub fn pairs(filter: &RuleFilter) -> Vec<(&'static Rule, &'static Rule)> {
    let mut out = Vec::new();
    for t in transformation_rules().iter().filter(|r| selected(&filter.transformations, r)) {
        for no in normal_order_rules().iter().filter(|r| selected(&filter.normal_order, r)) {
            out.push((t, no));
        }
    }
    out
}

/// Solves every selected pair on a pool of `threads` workers. The result is
/// in pair order whatever the thread count.
pub fn run_all(filter: &RuleFilter, cfg: &Config, threads: usize) -> Result<Vec<PairResult>, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let ps = pairs(filter);
    Ok(pool.install(|| ps.par_iter().map(|(t, no)| run_pair(t, no, cfg)).collect()))
}

/// Ground instance of an overlap under the least model of its Δ2, checked
/// for equality of both sides.
pub fn check_soundness(t: &Rule, no: &Rule, f: &FinalSystem) -> Result<bool, SolutionError> {
    let (p, _) = problem(t, no);
    let sigma = derive_solution(f, &f.least_model)?;
    let l = sigma.apply(&p.lhs)?;
    let r = sigma.apply(&p.rhs)?;
    crate::term::lc_equal(&l, &r).map_err(|e: TermError| SolutionError::Term(e))
}
