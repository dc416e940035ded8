//! Integer constraints over chain indices.
//!
//! Only `N + 1 = M` and `N < M` occur, over positive integers. Both are
//! lower-bound difference constraints (`M >= N + 1`, and for the equation
//! also `N >= M - 1`), so the least model is the longest-path fixpoint from
//! the all-ones assignment; a positive cycle means unsatisfiable.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::term::IntVar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntConstraint {
    /// `a + 1 = b`
    Succ(IntVar, IntVar),
    /// `a < b`
    Less(IntVar, IntVar),
}

impl IntConstraint {
    pub fn vars(self) -> [IntVar; 2] {
        match self {
            IntConstraint::Succ(a, b) | IntConstraint::Less(a, b) => [a, b],
        }
    }

    pub fn holds(self, model: &BTreeMap<IntVar, u32>) -> bool {
        let get = |v| model.get(&v).copied();
        match self {
            IntConstraint::Succ(a, b) => matches!((get(a), get(b)), (Some(x), Some(y)) if x + 1 == y),
            IntConstraint::Less(a, b) => matches!((get(a), get(b)), (Some(x), Some(y)) if x < y),
        }
    }
}

impl fmt::Display for IntConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntConstraint::Succ(a, b) => write!(f, "{a}+1={b}"),
            IntConstraint::Less(a, b) => write!(f, "{a}<{b}"),
        }
    }
}

impl FromStr for IntConstraint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let var = |t: &str| -> Result<IntVar, String> {
            t.strip_prefix('N')
                .and_then(|d| d.parse().ok())
                .map(IntVar)
                .ok_or_else(|| format!("bad integer variable `{t}`"))
        };
        if let Some((l, r)) = s.split_once("+1=") {
            Ok(IntConstraint::Succ(var(l)?, var(r)?))
        } else if let Some((l, r)) = s.split_once('<') {
            Ok(IntConstraint::Less(var(l)?, var(r)?))
        } else {
            Err(format!("bad constraint `{s}`"))
        }
    }
}

/// Pointwise-least positive model, or `None` if unsatisfiable.
pub fn least_model(cs: &[IntConstraint]) -> Option<BTreeMap<IntVar, u32>> {
    let mut model: BTreeMap<IntVar, i64> = cs.iter().flat_map(|c| c.vars()).map(|v| (v, 1)).collect();
    // (from, to, weight): model[to] >= model[from] + weight
    let mut edges = Vec::new();
    for c in cs {
        match *c {
            IntConstraint::Less(a, b) => edges.push((a, b, 1)),
            IntConstraint::Succ(a, b) => {
                edges.push((a, b, 1));
                edges.push((b, a, -1));
            }
        }
    }
    let rounds = model.len() + 1;
    for _ in 0..rounds {
        let mut changed = false;
        for &(from, to, w) in &edges {
            let need = model[&from] + w;
            if model[&to] < need {
                model.insert(to, need);
                changed = true;
            }
        }
        if !changed {
            return Some(model.into_iter().map(|(k, v)| (k, v as u32)).collect());
        }
    }
    None
}

pub fn satisfiable(cs: &[IntConstraint]) -> bool {
    least_model(cs).is_some()
}
