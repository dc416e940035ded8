use std::collections::BTreeMap;

use super::{CtxVar, Index, IntVar, Name, Term, Var};

/// A partial bijection between the variables of two terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Renaming {
    vars: BTreeMap<Var, Var>,
    vars_back: BTreeMap<Var, Var>,
    ctxs: BTreeMap<CtxVar, CtxVar>,
    ctxs_back: BTreeMap<CtxVar, CtxVar>,
    ints: BTreeMap<IntVar, IntVar>,
    ints_back: BTreeMap<IntVar, IntVar>,
}

fn pair<K: Ord + Clone>(fwd: &mut BTreeMap<K, K>, back: &mut BTreeMap<K, K>, a: &K, b: &K) -> bool {
    match (fwd.get(a), back.get(b)) {
        (Some(x), _) => x == b,
        (None, Some(_)) => false,
        (None, None) => {
            fwd.insert(a.clone(), b.clone());
            back.insert(b.clone(), a.clone());
            true
        }
    }
}

impl Renaming {
    pub fn new() -> Renaming {
        Renaming::default()
    }

    fn index(&mut self, a: &Index, b: &Index) -> bool {
        match (a, b) {
            (Index::Int(x), Index::Int(y)) => self.int(*x, *y),
            (Index::Lit(x), Index::Lit(y)) => x == y,
            _ => false,
        }
    }

    fn name(&mut self, a: &Name, b: &Name) -> bool {
        match (a, b) {
            (Name::Chain(i), Name::Chain(j)) => self.index(i, j),
            (Name::Plain(_), Name::Plain(_)) => true,
            _ => false,
        }
    }

    pub fn int(&mut self, a: IntVar, b: IntVar) -> bool {
        pair(&mut self.ints, &mut self.ints_back, &a, &b)
    }

    pub fn var(&mut self, a: &Var, b: &Var) -> bool {
        a.sort == b.sort && self.name(&a.name, &b.name) && pair(&mut self.vars, &mut self.vars_back, a, b)
    }

    pub fn ctx(&mut self, a: &CtxVar, b: &CtxVar) -> bool {
        a.class == b.class && self.name(&a.name, &b.name) && pair(&mut self.ctxs, &mut self.ctxs_back, a, b)
    }

    pub fn var_image(&self, a: &Var) -> Option<&Var> {
        self.vars.get(a)
    }

    pub fn ctx_image(&self, a: &CtxVar) -> Option<&CtxVar> {
        self.ctxs.get(a)
    }

    /// Extends the renaming so that it maps `a` onto `b`; on failure the
    /// renaming is left unchanged.
    pub fn extend(&mut self, a: &Term, b: &Term) -> bool {
        let mut trial = self.clone();
        if trial.go(a, b) {
            *self = trial;
            true
        } else {
            false
        }
    }

    fn go(&mut self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => self.var(x, y),
            (Term::Ctx(x, s), Term::Ctx(y, t)) => self.ctx(x, y) && self.go(s, t),
            (Term::Fn(f, xs), Term::Fn(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.go(x, y))
            }
            (Term::Hole, Term::Hole) => true,
            (Term::Chain(a1, a2), Term::Chain(b1, b2)) => self.int(*a1, *b1) && self.int(*a2, *b2),
            (Term::Env(e), Term::Env(f)) => {
                if e.comps().len() != f.comps().len() || e.tails().len() != f.tails().len() {
                    return false;
                }
                let left: Vec<Term> = e.comps().iter().cloned().chain(e.tails().iter().cloned().map(Term::Var)).collect();
                let right: Vec<Term> = f.comps().iter().cloned().chain(f.tails().iter().cloned().map(Term::Var)).collect();
                let mut used = vec![false; right.len()];
                self.multiset(&left, &right, &mut used)
            }
            _ => false,
        }
    }

    fn multiset(&mut self, left: &[Term], right: &[Term], used: &mut [bool]) -> bool {
        let Some((first, rest)) = left.split_first() else {
            return true;
        };
        for j in 0..right.len() {
            if used[j] {
                continue;
            }
            let mut trial = self.clone();
            if trial.go(first, &right[j]) {
                used[j] = true;
                if trial.multiset(rest, right, used) {
                    *self = trial;
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
}

/// LC-equality up to a bijective renaming of variables.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    Renaming::new().extend(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn renaming_is_bijective() {
        let a = parse_term("app(s:Exp,t:Exp)").unwrap();
        let b = parse_term("app(u:Exp,v:Exp)").unwrap();
        let c = parse_term("app(u:Exp,u:Exp)").unwrap();
        assert!(alpha_equal(&a, &b));
        assert!(!alpha_equal(&a, &c));
        assert!(!alpha_equal(&c, &a));
    }

    #[test]
    fn envs_match_up_to_permutation() {
        let a = parse_term("env(bind(a:BV,var(b:BV)),env(bind(b:BV,s:Exp),E:Env))").unwrap();
        let b = parse_term("env(bind(p:BV,t:Exp),env(bind(q:BV,var(p:BV)),F:Env))").unwrap();
        assert!(alpha_equal(&a, &b));
    }

    #[test]
    fn chain_names_follow_integer_renaming() {
        let a = parse_term("env(bind(y_N1:BV,s:Exp),env(BCh(N1,N2),emptyEnv))").unwrap();
        let b = parse_term("env(bind(y_N7:BV,s:Exp),env(BCh(N7,N9),emptyEnv))").unwrap();
        let c = parse_term("env(bind(y_N9:BV,s:Exp),env(BCh(N7,N9),emptyEnv))").unwrap();
        assert!(alpha_equal(&a, &b));
        assert!(!alpha_equal(&a, &c));
    }
}
