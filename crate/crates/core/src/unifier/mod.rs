//! LCSX: unification modulo left-commutativity of `env`, with sorts,
//! classed context variables and binding chains.
//!
//! The search is a depth-first walk over the don't-know choices. Which
//! equation to work on next is a don't-care choice, fixed here as: trivial
//! and failing equations, decomposition, solving, context equations,
//! environment equations.

mod rules;
mod solution;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::constraints::IntConstraint;
use crate::term::{CtxVar, Fresh, IntVar, Name, Term, Var};

pub use rules::{measure, term_size};
pub use solution::{canonical_key, check_dvc, derive_solution, symbolic_solution, DvcReport, SolutionError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    /// The left side is the transformation redex itself, so whatever the
    /// right side turns out to be marks the overlap position.
    pub root: bool,
    /// Components taken off the left environment that must end up in the
    /// right environment's tail.
    pub deferred: Vec<Term>,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Equation {
        Equation {
            lhs,
            rhs,
            root: false,
            deferred: Vec::new(),
        }
    }
}

/// Termination measure: `let` count in P, then weighted size of P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Measure {
    pub mu1: usize,
    pub mu2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: &'static str,
    pub measure: Measure,
    /// False for steps that only touch the constraint store.
    pub changes_p: bool,
}

/// Where the transformation redex sits relative to the normal-order lhs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    /// At a function-symbol position of the normal-order lhs.
    Critical,
    /// Inside the instance of a meta-variable, context variable or chain.
    Variable,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub lhs: Term,
    pub rhs: Term,
    pub delta1: BTreeSet<CtxVar>,
    pub delta2: Vec<IntConstraint>,
    /// Context variables whose hole leads to the transformation redex.
    pub lineage: BTreeSet<CtxVar>,
}

impl Problem {
    pub fn new(lhs: Term, rhs: Term) -> Problem {
        Problem {
            lhs,
            rhs,
            delta1: BTreeSet::new(),
            delta2: Vec::new(),
            lineage: BTreeSet::new(),
        }
    }

    pub(crate) fn max_int(&self) -> u32 {
        let mut m = 0;
        for t in [&self.lhs, &self.rhs] {
            m = m.max(t.int_vars().iter().map(|n| n.0).max().unwrap_or(0));
        }
        for c in &self.delta2 {
            m = m.max(c.vars().iter().map(|n| n.0).max().unwrap_or(0));
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct State {
    pub pending: Vec<Equation>,
    pub s_vars: Vec<(Var, Term)>,
    pub s_ctx: Vec<(CtxVar, Term)>,
    /// `x ≐ y` between bound variables, transformation side on the left.
    pub s_bv: Vec<(Var, Var)>,
    /// How Dec-Ch split each chain it touched.
    pub s_chain: Vec<(IntVar, IntVar, Vec<Term>)>,
    pub delta1: BTreeSet<CtxVar>,
    pub delta2: Vec<IntConstraint>,
    pub fresh: Fresh,
    pub lineage: BTreeSet<CtxVar>,
    pub site: Option<Site>,
    pub trace: Vec<Step>,
}

impl State {
    pub fn initial(p: &Problem) -> State {
        let pending = vec![Equation::new(p.lhs.clone(), p.rhs.clone())];
        let m = measure(&pending);
        State {
            pending,
            s_vars: Vec::new(),
            s_ctx: Vec::new(),
            s_bv: Vec::new(),
            s_chain: Vec::new(),
            delta1: p.delta1.clone(),
            delta2: p.delta2.clone(),
            fresh: Fresh::starting_at(p.max_int()),
            lineage: p.lineage.clone(),
            site: None,
            trace: vec![Step {
                rule: "Init",
                measure: m,
                changes_p: true,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalSystem {
    pub s_bv: Vec<(Var, Var)>,
    pub s_vars: Vec<(Var, Term)>,
    pub s_ctx: Vec<(CtxVar, Term)>,
    pub s_chain: Vec<(IntVar, IntVar, Vec<Term>)>,
    pub delta1: BTreeSet<CtxVar>,
    pub delta2: Vec<IntConstraint>,
    pub site: Option<Site>,
    pub trace: Vec<Step>,
    pub least_model: BTreeMap<IntVar, u32>,
    pub dvc: DvcReport,
    /// Integer variables above this one were introduced by the search.
    pub base_int: u32,
}

impl FinalSystem {
    pub fn dvc_ok(&self) -> bool {
        !self.dvc.violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Maximum number of search states expanded per problem.
    pub step_budget: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            step_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Final systems after deduplication, in discovery order.
    pub finals: Vec<FinalSystem>,
    /// Number of final systems before deduplication.
    pub raw: usize,
    pub states: usize,
    pub exhausted: bool,
}

pub fn solve(problem: &Problem, cfg: &Config) -> Outcome {
    let mut stack = vec![State::initial(problem)];
    let mut states = 0;
    let mut exhausted = false;
    let mut raw = 0;
    let mut seen = BTreeSet::new();
    let mut finals = Vec::new();
    while let Some(st) = stack.pop() {
        states += 1;
        if states > cfg.step_budget {
            exhausted = true;
            break;
        }
        if st.pending.is_empty() {
            raw += 1;
            let f = solution::finalize(st, problem);
            if seen.insert(canonical_key(&f)) {
                finals.push(f);
            }
            continue;
        }
        let mut children = rules::step(st);
        children.reverse();
        stack.extend(children);
    }
    Outcome {
        finals,
        raw,
        states,
        exhausted,
    }
}

/// One don't-care step on `st`: the states for each don't-know choice.
/// Empty when `st` is final or fails.
pub fn successors(st: State) -> Vec<State> {
    if st.pending.is_empty() {
        return Vec::new();
    }
    rules::step(st)
}

/// Base of a variable name, used to name fresh variants.
pub(crate) fn family(name: &Name, chain: &'static str) -> String {
    match name {
        Name::Plain(s) => s.split('.').next().unwrap_or(s).to_string(),
        Name::Chain(_) => chain.to_string(),
    }
}
