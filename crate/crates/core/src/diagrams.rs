//! Closing forks by bounded meta-level rewriting, and abstracting the
//! closures into diagram schemas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{find_rule, normal_order_rules, transformation_rules, Rule};
use crate::matching::{instantiate, match_rule, splits, Facts, Positions};
use crate::overlaps::{run_pair, selected, Fork};
use crate::term::Term;
use crate::unifier::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Normal-order step.
    No,
    /// Transformation in a surface context.
    S,
}

/// Short label used in diagrams: `cp-e-c` and `cp-in` print as `cp...`.
pub fn short_label(family: &str) -> &'static str {
    match family {
        "lbeta" => "lbeta",
        "lapp" => "lapp",
        "cp-in" => "cpin",
        "cp-e" | "cp-e-c" => "cpe",
        "llet-in" => "lletin",
        "llet-e" | "llet-e-c" => "llete",
        _ => "?",
    }
}

fn generalized(label: &str) -> &str {
    match label {
        "cpin" | "cpe" => "cp",
        l => l,
    }
}

/// One rewrite edge. A step that is both a normal-order step and a
/// transformation step carries both rule names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetaStep {
    pub no_rule: Option<String>,
    pub t_rule: Option<String>,
    #[serde(serialize_with = "ser_term")]
    pub before: Term,
    #[serde(serialize_with = "ser_term")]
    pub after: Term,
}

fn ser_term<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

impl MetaStep {
    fn family(&self, mode: Mode) -> Option<&'static str> {
        let name = match mode {
            Mode::No => self.no_rule.as_deref()?,
            Mode::S => self.t_rule.as_deref()?,
        };
        find_rule(name).map(|r| short_label(r.family))
    }
}

fn merge_step(out: &mut Vec<MetaStep>, step: MetaStep) {
    let base = |s: &MetaStep| {
        let n = s.no_rule.as_deref().or(s.t_rule.as_deref()).and_then(find_rule).map(|r| r.family);
        n.map(|f| generalized(short_label(f)))
    };
    if let Some(old) = out.iter_mut().find(|o| o.after == step.after && base(o) == base(&step)) {
        if old.no_rule.is_none() {
            old.no_rule = step.no_rule;
        }
        if old.t_rule.is_none() {
            old.t_rule = step.t_rule;
        }
    } else {
        out.push(step);
    }
}

/// Normal-order steps: a no-rule lhs matching at the root.
pub fn no_steps(t: &Term, facts: &Facts) -> Vec<MetaStep> {
    let mut out = Vec::new();
    for r in normal_order_rules() {
        for m in match_rule(&r.lhs, t, &r.delta1, facts) {
            merge_step(
                &mut out,
                MetaStep {
                    no_rule: Some(r.name.clone()),
                    t_rule: None,
                    before: t.clone(),
                    after: instantiate(&r.rhs, &m),
                },
            );
        }
    }
    out
}

/// Transformation steps at surface positions.
pub fn surface_steps(t: &Term, facts: &Facts) -> Vec<MetaStep> {
    let mut out = Vec::new();
    let positions = splits(t, facts, Positions::Surface);
    for r in transformation_rules() {
        for p in &positions {
            for m in match_rule(&r.lhs, &p.sub, &r.delta1, facts) {
                merge_step(
                    &mut out,
                    MetaStep {
                        no_rule: None,
                        t_rule: Some(r.name.clone()),
                        before: t.clone(),
                        after: p.ctx.fill(&instantiate(&r.rhs, &m)),
                    },
                );
            }
        }
    }
    out
}

/// All steps from `t`; surface transformations only if `with_surface`.
pub fn rewrite_successors(t: &Term, facts: &Facts, with_surface: bool) -> Vec<MetaStep> {
    let mut out = no_steps(t, facts);
    if with_surface {
        for s in surface_steps(t, facts) {
            merge_step(&mut out, s);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Transformation commutes below, normal-order steps on the right.
    Square,
    /// The transformation is absorbed; normal-order steps on both sides.
    Triangle,
    Generalized,
    /// Both successors coincide.
    Degenerate,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Square => "square",
            Shape::Triangle => "triangle",
            Shape::Generalized => "generalized",
            Shape::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Label {
    pub mode: Mode,
    pub rule: String,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            Mode::No => write!(f, "no,{}", self.rule),
            Mode::S => write!(f, "S,{}", self.rule),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagram {
    pub t_rule: String,
    pub no_rule: String,
    /// Steps from the normal-order successor.
    pub left: Vec<MetaStep>,
    /// Steps from the transformation successor.
    pub right: Vec<MetaStep>,
    pub left_labels: Vec<Label>,
    pub right_labels: Vec<Label>,
    pub shape: Shape,
}

/// A diagram abstracted to rule-family labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Schema {
    pub transformation: String,
    pub fork_no: String,
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub shape: Shape,
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: <-no,{}- . -iS,{}-> ; left [{}] ; right [{}] ; {}",
            self.transformation,
            self.fork_no,
            self.transformation,
            self.left.join(" "),
            self.right.join(" "),
            self.shape
        )
    }
}

fn labels_for(left: &[MetaStep], right: &[MetaStep], t_base: &str) -> (Vec<Label>, Vec<Label>, Shape) {
    let right_labels: Vec<Label> = right
        .iter()
        .map(|s| match s.family(Mode::No) {
            Some(f) => Label { mode: Mode::No, rule: f.into() },
            None => Label { mode: Mode::S, rule: s.family(Mode::S).unwrap_or("?").into() },
        })
        .collect();
    let right_no = right.iter().all(|s| s.no_rule.is_some());
    if left.is_empty() && right.is_empty() {
        return (Vec::new(), right_labels, Shape::Degenerate);
    }
    let commutes = left.iter().any(|s| s.family(Mode::S).map(generalized) == Some(generalized(t_base)));
    let prefer = if commutes { [Mode::S, Mode::No] } else { [Mode::No, Mode::S] };
    let left_labels: Vec<Label> = left
        .iter()
        .map(|s| {
            let mode = if s.family(prefer[0]).is_some() { prefer[0] } else { prefer[1] };
            Label { mode, rule: s.family(mode).unwrap_or("?").into() }
        })
        .collect();
    let shape = if !right_no || right.is_empty() {
        Shape::Generalized
    } else if commutes && !left.is_empty() {
        Shape::Square
    } else if left_labels.iter().all(|l| l.mode == Mode::No) && !left.is_empty() {
        Shape::Triangle
    } else {
        Shape::Generalized
    };
    (left_labels, right_labels, shape)
}

impl Diagram {
    pub fn schema(&self) -> Schema {
        let t = find_rule(&self.t_rule).map(|r| short_label(r.family)).unwrap_or("?");
        let n = find_rule(&self.no_rule).map(|r| r.family).unwrap_or("?");
        let n_short = short_label(n);
        let single_commute = self.left_labels.len() == 1
            && self.left_labels[0].mode == Mode::S
            && generalized(&self.left_labels[0].rule) == generalized(t)
            && self.right.len() == 1
            && self.right[0].no_rule.as_deref().and_then(find_rule).map(|r| r.family) == Some(n);
        if single_commute {
            return Schema {
                transformation: t.into(),
                fork_no: "a".into(),
                left: vec![format!("S,{t}")],
                right: vec!["no,a".into()],
                shape: self.shape,
            };
        }
        let cp = generalized(n_short) == "cp";
        let show = |l: &Label| {
            let rule = if cp { generalized(&l.rule) } else { &l.rule };
            match l.mode {
                Mode::No => format!("no,{rule}"),
                Mode::S => format!("S,{rule}"),
            }
        };
        Schema {
            transformation: t.into(),
            fork_no: if cp { "cp".into() } else { n_short.into() },
            left: self.left_labels.iter().map(show).collect(),
            right: self.right_labels.iter().map(show).collect(),
            shape: self.shape,
        }
    }
}

/// Terms reached from `start`, layer by layer, each with one path.
struct Search {
    facts: Facts,
    with_surface: bool,
    layers: Vec<Vec<(Term, Vec<MetaStep>)>>,
    seen: BTreeSet<Term>,
}

impl Search {
    fn new(start: &Term, facts: &Facts, with_surface: bool) -> Search {
        Search {
            facts: facts.clone(),
            with_surface,
            layers: vec![vec![(start.clone(), Vec::new())]],
            seen: BTreeSet::from([start.clone()]),
        }
    }

    fn layer(&mut self, k: usize) -> &[(Term, Vec<MetaStep>)] {
        while self.layers.len() <= k {
            let last = self.layers.last().expect("layer 0");
            let mut next = Vec::new();
            for (t, path) in last {
                for step in rewrite_successors(t, &self.facts, self.with_surface) {
                    if self.seen.insert(step.after.clone()) {
                        let mut p = path.clone();
                        let after = step.after.clone();
                        p.push(step);
                        next.push((after, p));
                    }
                }
            }
            self.layers.push(next);
        }
        &self.layers[k]
    }
}

/// Shortest closure of `fork` with at most `max_depth` steps in total.
/// Among closures of equal length, squares are preferred to triangles.
pub fn close_fork(t: &Rule, no: &Rule, fork: &Fork, facts: &Facts, max_depth: usize) -> Option<Diagram> {
    let t_base = short_label(t.family);
    for right_surface in [false, true] {
        let mut left = Search::new(&fork.left, facts, true);
        let mut right = Search::new(&fork.right, facts, right_surface);
        for d in 0..=max_depth {
            let mut best: Option<(u8, Vec<Label>, Vec<Label>, Diagram)> = None;
            for a in 0..=d {
                let rl: BTreeMap<Term, Vec<MetaStep>> = right.layer(d - a).iter().cloned().collect();
                for (term, lp) in left.layer(a) {
                    let Some(rp) = rl.get(term) else { continue };
                    let (ll, rlab, shape) = labels_for(lp, rp, t_base);
                    let rank = match shape {
                        Shape::Degenerate => 0,
                        Shape::Square => 1,
                        Shape::Triangle => 2,
                        Shape::Generalized => 3,
                    };
                    let better = match &best {
                        None => true,
                        Some((r, l2, r2, _)) => (rank, &ll, &rlab) < (*r, l2, r2),
                    };
                    if better {
                        let dg = Diagram {
                            t_rule: t.name.clone(),
                            no_rule: no.name.clone(),
                            left: lp.clone(),
                            right: rp.clone(),
                            left_labels: ll.clone(),
                            right_labels: rlab.clone(),
                            shape,
                        };
                        best = Some((rank, ll, rlab, dg));
                    }
                }
            }
            if let Some((_, _, _, dg)) = best {
                return Some(dg);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct UnclosedFork {
    pub t_rule: String,
    pub no_rule: String,
    #[serde(serialize_with = "ser_term")]
    pub source: Term,
    #[serde(serialize_with = "ser_term")]
    pub left: Term,
    #[serde(serialize_with = "ser_term")]
    pub right: Term,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramSet {
    pub transformation: String,
    pub max_depth: usize,
    pub forks: usize,
    /// Forks whose two successors coincide.
    pub degenerate: usize,
    pub diagrams: Vec<Diagram>,
    pub schemas: Vec<Schema>,
    pub unclosed: Vec<UnclosedFork>,
    /// Some unification problem ran out of its step budget.
    pub exhausted: bool,
}

/// Closes every critical fork of the transformation family `family`
/// (e.g. `cp-e` covers `cp-e/var` and `cp-e/abs`) against the normal-order
/// rules selected by `no_filter`.
pub fn complete_set(
    family: &str,
    no_filter: &BTreeSet<String>,
    max_depth: usize,
    cfg: &Config,
    threads: usize,
) -> Result<DiagramSet, rayon::ThreadPoolBuildError> {
    let ts: Vec<&Rule> = transformation_rules().iter().filter(|r| r.family == family || r.name == family).collect();
    let mut jobs = Vec::new();
    let mut exhausted = false;
    for t in &ts {
        for no in normal_order_rules().iter().filter(|r| selected(no_filter, r)) {
            let pr = run_pair(t, no, cfg);
            exhausted |= pr.exhausted;
            for o in pr.overlaps {
                if let Some(fork) = o.fork {
                    let facts = Facts {
                        nonempty: o.system.delta1.clone(),
                        ints: o.system.delta2.clone(),
                    };
                    jobs.push((*t, no, fork, facts));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let results: Vec<Option<Diagram>> =
        pool.install(|| jobs.par_iter().map(|(t, no, fork, facts)| close_fork(t, no, fork, facts, max_depth)).collect());
    let mut set = DiagramSet {
        transformation: family.into(),
        max_depth,
        forks: jobs.len(),
        degenerate: 0,
        diagrams: Vec::new(),
        schemas: Vec::new(),
        unclosed: Vec::new(),
        exhausted,
    };
    let mut schemas = BTreeSet::new();
    for ((t, no, fork, _), res) in jobs.iter().zip(results) {
        match res {
            Some(d) if d.shape == Shape::Degenerate => set.degenerate += 1,
            Some(d) => {
                schemas.insert(d.schema());
                set.diagrams.push(d);
            }
            None => set.unclosed.push(UnclosedFork {
                t_rule: t.name.clone(),
                no_rule: no.name.clone(),
                source: fork.source.clone(),
                left: fork.left.clone(),
                right: fork.right.clone(),
            }),
        }
    }
    set.schemas = schemas.into_iter().collect();
    Ok(set)
}
