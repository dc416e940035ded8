//! Rule catalogs: the unrestricted rules used as transformations, and the
//! normal-order rules with reduction contexts unfolded into the four
//! shapes `A`, `letrec Env in A`, `letrec y1 = A1, Env in A2[y1]` and the
//! chain variant.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::constraints::IntConstraint;
use crate::term::{parse_term, Class, CtxVar, Index, IntVar, Name, Sort, Term, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Transformation,
    NormalOrder,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Transformation => "transformation",
            RuleKind::NormalOrder => "no",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    /// Name of the underlying rule without instantiation suffixes.
    pub family: &'static str,
    pub kind: RuleKind,
    pub lhs: Term,
    pub rhs: Term,
    pub delta1: BTreeSet<CtxVar>,
    pub delta2: Vec<IntConstraint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleJson {
    pub name: String,
    pub kind: RuleKind,
    pub lhs: String,
    pub rhs: String,
    pub delta1: Vec<String>,
    pub delta2: Vec<String>,
}

impl Rule {
    fn new(name: String, family: &'static str, kind: RuleKind, lhs: &str, rhs: &str) -> Rule {
        let parse = |s: &str| parse_term(s).unwrap_or_else(|e| panic!("catalog entry {name}: {e}: {s}"));
        Rule {
            lhs: parse(lhs),
            rhs: parse(rhs),
            name,
            family,
            kind,
            delta1: BTreeSet::new(),
            delta2: Vec::new(),
        }
    }

    fn nonempty(mut self, x: &str) -> Rule {
        self.delta1.insert(parse_ctx(x));
        self
    }

    fn with_chain(mut self) -> Rule {
        self.delta2.push(IntConstraint::Less(IntVar(1), IntVar(2)));
        self
    }

    pub fn to_json(&self) -> RuleJson {
        RuleJson {
            name: self.name.clone(),
            kind: self.kind,
            lhs: self.lhs.to_string(),
            rhs: self.rhs.to_string(),
            delta1: self.delta1.iter().map(|x| x.to_string()).collect(),
            delta2: self.delta2.iter().map(|c| c.to_string()).collect(),
        }
    }

    /// Almost linear: each context variable and each variable of a
    /// non-empty sort occurs at most once; at most one chain.
    pub fn is_almost_linear(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut ok = true;
        let mut chains = 0;
        self.lhs.walk(&mut |t| match t {
            Term::Var(v) if v.sort != Sort::BV => ok &= seen.insert(Term::Var(v.clone())),
            Term::Env(e) => {
                for v in e.tails() {
                    ok &= seen.insert(Term::Var(v.clone()));
                }
            }
            Term::Ctx(x, _) => ok &= seen.insert(Term::ctx(x.clone(), Term::Hole)),
            Term::Chain(..) => chains += 1,
            _ => {}
        });
        ok && chains <= 1
    }

    /// The rule with every plain name in `avoid` primed, and integer
    /// variables shifted by `int_offset`.
    pub fn renamed_apart(&self, avoid: &BTreeSet<String>, int_offset: u32) -> Rule {
        let fresh = |s: &str| {
            let mut s = s.to_string();
            while avoid.contains(&s) {
                s.push('\'');
            }
            s
        };
        let fi = |n: IntVar| IntVar(n.0 + int_offset);
        let fname = |n: &Name| match n {
            Name::Plain(s) => Name::plain(&fresh(s)),
            Name::Chain(Index::Int(k)) => Name::Chain(Index::Int(fi(*k))),
            Name::Chain(i) => Name::Chain(*i),
        };
        let fv = |v: &Var| Var {
            name: fname(&v.name),
            sort: v.sort,
        };
        let fc = |x: &CtxVar| CtxVar {
            name: fname(&x.name),
            class: x.class,
        };
        Rule {
            name: self.name.clone(),
            family: self.family,
            kind: self.kind,
            lhs: self.lhs.rename_with(&fv, &fc, &fi),
            rhs: self.rhs.rename_with(&fv, &fc, &fi),
            delta1: self.delta1.iter().map(fc).collect(),
            delta2: self
                .delta2
                .iter()
                .map(|c| match *c {
                    IntConstraint::Succ(a, b) => IntConstraint::Succ(fi(a), fi(b)),
                    IntConstraint::Less(a, b) => IntConstraint::Less(fi(a), fi(b)),
                })
                .collect(),
        }
    }
}

/// Plain names of all variables and context variables in `t`.
pub fn plain_names(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for v in t.vars() {
        if let Name::Plain(s) = &v.name {
            out.insert(s.to_string());
        }
    }
    for x in t.ctx_vars() {
        if let Name::Plain(s) = &x.name {
            out.insert(s.to_string());
        }
    }
    out
}

fn parse_ctx(s: &str) -> CtxVar {
    match parse_term(&format!("{s}([])")) {
        Ok(Term::Ctx(x, _)) => x,
        other => panic!("bad context variable {s}: {other:?}"),
    }
}

const S_VAR: &str = "var(z:BV)";
const S_ABS: &str = "lam(w:BV,t:Exp)";

fn cp_variants() -> [(&'static str, &'static str); 2] {
    [("var", S_VAR), ("abs", S_ABS)]
}

fn build_transformations() -> Vec<Rule> {
    use RuleKind::Transformation as T;
    let mut out = vec![Rule::new(
        "lbeta".into(),
        "lbeta",
        T,
        "app(lam(x:BV,s:Exp),r:Exp)",
        "let(env(bind(x:BV,r:Exp),emptyEnv),s:Exp)",
    )];
    for (tag, s) in cp_variants() {
        out.push(Rule::new(
            format!("cp-in/{tag}"),
            "cp-in",
            T,
            &format!("let(env(bind(x:BV,{s}),Env:Env),C{{C}}(var(x:BV)))"),
            &format!("let(env(bind(x:BV,{s}),Env:Env),C{{C}}({s}))"),
        ));
    }
    for (tag, s) in cp_variants() {
        // the copied variable is `u` here, since `z` names the target binding
        let s = s.replace("z:BV", "u:BV");
        out.push(Rule::new(
            format!("cp-e/{tag}"),
            "cp-e",
            T,
            &format!("let(env(bind(x:BV,{s}),env(bind(z:BV,C{{C}}(var(x:BV))),Env1:Env)),r:Exp)"),
            &format!("let(env(bind(x:BV,{s}),env(bind(z:BV,C{{C}}({s})),Env1:Env)),r:Exp)"),
        ));
    }
    out.push(Rule::new(
        "llet-in".into(),
        "llet-in",
        T,
        "let(Env1:Env,let(Env2:Env,r:Exp))",
        "let(env(Env1:Env,Env2:Env),r:Exp)",
    ));
    out.push(Rule::new(
        "llet-e".into(),
        "llet-e",
        T,
        "let(env(bind(x:BV,let(Env2:Env,s:Exp)),Env1:Env),r:Exp)",
        "let(env(bind(x:BV,s:Exp),env(Env1:Env,Env2:Env)),r:Exp)",
    ));
    out.push(Rule::new(
        "lapp".into(),
        "lapp",
        T,
        "app(let(Env:Env,t:Exp),s:Exp)",
        "let(Env:Env,app(t:Exp,s:Exp))",
    ));
    out
}

/// The four reduction-context shapes around a redex and its contractum.
fn r_shapes(redex: &str, contractum: &str) -> [(String, String, bool); 4] {
    let wrap = |e: &str, k: usize| match k {
        1 => format!("A{{A}}({e})"),
        2 => format!("let(Env:Env,A{{A}}({e}))"),
        3 => format!("let(env(bind(y1:BV,A1{{A}}({e})),Env:Env),A2{{A}}(var(y1:BV)))"),
        _ => format!("let(env(bind(y_N1:BV,A1{{A}}({e})),env(BCh(N1,N2),Env:Env)),A2{{A}}(var(y_N2:BV)))"),
    };
    [1, 2, 3, 4].map(|k| (wrap(redex, k), wrap(contractum, k), k == 4))
}

fn build_normal_order() -> Vec<Rule> {
    use RuleKind::NormalOrder as N;
    let mut out = Vec::new();
    let redexes = [
        (
            "lbeta",
            "app(lam(x:BV,s:Exp),r:Exp)",
            "let(env(bind(x:BV,r:Exp),emptyEnv),s:Exp)",
        ),
        ("lapp", "app(let(Env1:Env,t:Exp),s:Exp)", "let(Env1:Env,app(t:Exp,s:Exp))"),
    ];
    for (family, redex, contractum) in redexes {
        for (k, (lhs, rhs, chain)) in r_shapes(redex, contractum).into_iter().enumerate() {
            let r = Rule::new(format!("no-{family}/{}", k + 1), family, N, &lhs, &rhs);
            out.push(if chain { r.with_chain() } else { r });
        }
    }
    for (tag, s) in cp_variants() {
        out.push(Rule::new(
            format!("no-cp-in/{tag}"),
            "cp-in",
            N,
            &format!("let(env(bind(x:BV,{s}),Env:Env),A{{A}}(var(x:BV)))"),
            &format!("let(env(bind(x:BV,{s}),Env:Env),A{{A}}({s}))"),
        ));
    }
    for (tag, s) in cp_variants() {
        out.push(
            Rule::new(
                format!("no-cp-e/{tag}"),
                "cp-e",
                N,
                &format!("let(env(bind(x:BV,{s}),env(bind(y:BV,A2{{A}}(var(x:BV))),Env:Env)),A{{A}}(var(y:BV)))"),
                &format!("let(env(bind(x:BV,{s}),env(bind(y:BV,A2{{A}}({s})),Env:Env)),A{{A}}(var(y:BV)))"),
            )
            .nonempty("A2{A}"),
        );
    }
    for (tag, s) in cp_variants() {
        out.push(
            Rule::new(
                format!("no-cp-e-c/{tag}"),
                "cp-e-c",
                N,
                &format!(
                    "let(env(bind(x:BV,{s}),env(bind(y_N1:BV,A_N1{{A}}(var(x:BV))),env(BCh(N1,N2),Env:Env))),A{{A}}(var(y_N2:BV)))"
                ),
                &format!(
                    "let(env(bind(x:BV,{s}),env(bind(y_N1:BV,A_N1{{A}}({s})),env(BCh(N1,N2),Env:Env))),A{{A}}(var(y_N2:BV)))"
                ),
            )
            .nonempty("A_N1{A}")
            .with_chain(),
        );
    }
    out.push(Rule::new(
        "no-llet-in".into(),
        "llet-in",
        N,
        "let(Env1:Env,let(Env2:Env,r:Exp))",
        "let(env(Env1:Env,Env2:Env),r:Exp)",
    ));
    out.push(Rule::new(
        "no-llet-e".into(),
        "llet-e",
        N,
        "let(env(bind(y:BV,let(Env1:Env,r:Exp)),Env2:Env),A{A}(var(y:BV)))",
        "let(env(bind(y:BV,r:Exp),env(Env1:Env,Env2:Env)),A{A}(var(y:BV)))",
    ));
    out.push(
        Rule::new(
            "no-llet-e-c".into(),
            "llet-e-c",
            N,
            "let(env(bind(y_N1:BV,let(Env1:Env,r:Exp)),env(BCh(N1,N2),Env2:Env)),A{A}(var(y_N2:BV)))",
            "let(env(bind(y_N1:BV,r:Exp),env(BCh(N1,N2),env(Env1:Env,Env2:Env))),A{A}(var(y_N2:BV)))",
        )
        .with_chain(),
    );
    out
}

pub fn transformation_rules() -> &'static [Rule] {
    static T: OnceLock<Vec<Rule>> = OnceLock::new();
    T.get_or_init(build_transformations)
}

pub fn normal_order_rules() -> &'static [Rule] {
    static N: OnceLock<Vec<Rule>> = OnceLock::new();
    N.get_or_init(build_normal_order)
}

pub fn find_rule(name: &str) -> Option<&'static Rule> {
    transformation_rules()
        .iter()
        .chain(normal_order_rules())
        .find(|r| r.name == name)
}

/// The class every context variable of a transformation carries.
pub const TRANSFORMATION_CLASS: Class = Class::C;

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> impl Iterator<Item = &'static Rule> {
        transformation_rules().iter().chain(normal_order_rules())
    }

    #[test]
    fn catalog_sizes() {
        assert_eq!(transformation_rules().len(), 8);
        assert_eq!(normal_order_rules().len(), 17);
        let names: BTreeSet<_> = all().map(|r| r.name.as_str()).collect();
        assert_eq!(names.len(), 25);
    }

    #[test]
    fn entries_are_well_formed() {
        for r in all() {
            assert!(r.lhs.well_sorted() && r.rhs.well_sorted(), "{}", r.name);
            assert!(r.is_almost_linear(), "{}", r.name);
            assert!(r.rhs.vars().is_subset(&r.lhs.vars()), "{}", r.name);
            assert!(r.rhs.ctx_vars().is_subset(&r.lhs.ctx_vars()), "{}", r.name);
            assert!(r.delta1.is_subset(&r.lhs.ctx_vars()), "{}", r.name);
            assert_eq!(r.lhs.int_vars(), r.rhs.int_vars(), "{}", r.name);
        }
    }

    #[test]
    fn transformation_contexts_are_class_c() {
        for r in transformation_rules() {
            assert!(r.lhs.ctx_vars().iter().all(|x| x.class == TRANSFORMATION_CLASS));
        }
        for r in normal_order_rules() {
            assert!(r.lhs.ctx_vars().iter().all(|x| x.class == Class::A));
        }
    }

    #[test]
    fn known_entries() {
        assert_eq!(find_rule("lbeta").unwrap().lhs.to_string(), "app(lam(x:BV,s:Exp),r:Exp)");
        let cpe = find_rule("no-cp-e-c/abs").unwrap();
        assert_eq!(
            cpe.lhs.to_string(),
            "let(env(bind(x:BV,lam(w:BV,t:Exp)),env(bind(y_N1:BV,A_N1{A}(var(x:BV))),env(BCh(N1,N2),Env:Env))),A{A}(var(y_N2:BV)))"
        );
        assert_eq!(cpe.delta2, vec![IntConstraint::Less(IntVar(1), IntVar(2))]);
        assert_eq!(find_rule("no-llet-in").unwrap().lhs.to_string(), "let(Env1:Env,let(Env2:Env,r:Exp))");
        assert!(find_rule("cp-e").is_none());
    }

    #[test]
    fn renaming_apart_gives_disjoint_names() {
        for t in transformation_rules() {
            let avoid = plain_names(&t.lhs);
            for n in normal_order_rules() {
                let m = n.renamed_apart(&avoid, 0);
                assert!(plain_names(&m.lhs).is_disjoint(&avoid), "{} {}", t.name, n.name);
                assert!(m.is_almost_linear());
            }
        }
    }
}
