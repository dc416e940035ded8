//! Serializable views of unifier, overlap and diagram results, and their
//! text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::calculus::Rule;
use crate::diagrams::{DiagramSet, Schema};
use crate::overlaps::{Fork, Overlap, PairResult};
use crate::unifier::{FinalSystem, Site, Step};

/// Total the critical-pair count is reconciled against.
pub const REFERENCE_TOTAL: usize = 1214;

#[derive(Debug, Clone, Serialize)]
pub struct ForkJson {
    pub source: String,
    pub left: String,
    pub right: String,
}

impl From<&Fork> for ForkJson {
    fn from(f: &Fork) -> ForkJson {
        ForkJson {
            source: f.source.to_string(),
            left: f.left.to_string(),
            right: f.right.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSplitJson {
    pub chain: String,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemJson {
    pub site: Option<Site>,
    pub dvc_ok: bool,
    pub duplicated_binders: Vec<String>,
    pub s_bv: Vec<[String; 2]>,
    pub s_vars: Vec<[String; 2]>,
    pub s_ctx: Vec<[String; 2]>,
    pub s_chain: Vec<ChainSplitJson>,
    pub delta1: Vec<String>,
    pub delta2: Vec<String>,
    pub least_model: BTreeMap<String, u32>,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Step>>,
}

impl SystemJson {
    pub fn new(f: &FinalSystem, with_trace: bool) -> SystemJson {
        let pair = |a: String, b: String| [a, b];
        SystemJson {
            site: f.site,
            dvc_ok: f.dvc_ok(),
            duplicated_binders: f.dvc.duplicated.iter().map(|v| v.to_string()).collect(),
            s_bv: f.s_bv.iter().map(|(a, b)| pair(a.to_string(), b.to_string())).collect(),
            s_vars: f.s_vars.iter().map(|(a, b)| pair(a.to_string(), b.to_string())).collect(),
            s_ctx: f.s_ctx.iter().map(|(a, b)| pair(a.to_string(), b.to_string())).collect(),
            s_chain: f
                .s_chain
                .iter()
                .map(|(a, b, cs)| ChainSplitJson {
                    chain: crate::term::Term::Chain(*a, *b).to_string(),
                    components: cs.iter().map(|c| c.to_string()).collect(),
                })
                .collect(),
            delta1: f.delta1.iter().map(|x| x.to_string()).collect(),
            delta2: f.delta2.iter().map(|c| c.to_string()).collect(),
            least_model: f.least_model.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            text: f.to_string(),
            trace: with_trace.then(|| f.trace.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnifyReport {
    pub transformation: String,
    pub normal_order: String,
    pub lhs: String,
    pub rhs: String,
    pub raw: usize,
    pub states: usize,
    pub exhausted: bool,
    pub finals: Vec<SystemJson>,
}

impl UnifyReport {
    pub fn new(pr: &PairResult, lhs: String, rhs: String, with_trace: bool) -> UnifyReport {
        UnifyReport {
            transformation: pr.t_rule.clone(),
            normal_order: pr.no_rule.clone(),
            lhs,
            rhs,
            raw: pr.raw,
            states: pr.states,
            exhausted: pr.exhausted,
            finals: pr.overlaps.iter().map(|o| SystemJson::new(&o.system, with_trace)).collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} vs {}", self.transformation, self.normal_order);
        let _ = writeln!(s, "  {} =? {}", self.lhs, self.rhs);
        let _ = writeln!(s, "raw {} distinct {} states {}{}", self.raw, self.finals.len(), self.states, exhausted_note(self.exhausted));
        for (i, f) in self.finals.iter().enumerate() {
            let site = match f.site {
                Some(Site::Critical) => "critical",
                Some(Site::Variable) => "variable",
                None => "unplaced",
            };
            let _ = writeln!(s, "#{i} {site} dvc_ok={}", f.dvc_ok);
            let _ = writeln!(s, "  {}", f.text);
        }
        s
    }
}

fn exhausted_note(e: bool) -> &'static str {
    if e {
        " (step budget exhausted)"
    } else {
        ""
    }
}

/// Counts for one rule pair, with the finals split by the rules that
/// produced them.
#[derive(Debug, Clone, Serialize)]
pub struct PairRow {
    pub transformation: String,
    pub normal_order: String,
    pub raw: usize,
    pub distinct: usize,
    pub dvc_ok: usize,
    pub critical: usize,
    pub variable: usize,
    pub merge_p: usize,
    pub merge_p_sym: usize,
    pub merge_fa: usize,
    pub merge_fc: usize,
    pub dec_ch: usize,
    pub states: usize,
    pub exhausted: bool,
}

fn uses(o: &Overlap, rule: &str) -> bool {
    o.system.trace.iter().any(|s| s.rule == rule)
}

impl From<&PairResult> for PairRow {
    fn from(pr: &PairResult) -> PairRow {
        let count = |rule: &str| pr.overlaps.iter().filter(|o| uses(o, rule)).count();
        PairRow {
            transformation: pr.t_rule.clone(),
            normal_order: pr.no_rule.clone(),
            raw: pr.raw,
            distinct: pr.dedup(),
            dvc_ok: pr.dvc_ok(),
            critical: pr.critical(),
            variable: pr.overlaps.iter().filter(|o| o.system.site == Some(Site::Variable)).count(),
            merge_p: count("Merge-P"),
            merge_p_sym: count("Merge-P-sym"),
            merge_fa: count("Merge-FA"),
            merge_fc: count("Merge-FC"),
            dec_ch: count("Dec-Ch"),
            states: pr.states,
            exhausted: pr.exhausted,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub raw: usize,
    pub distinct: usize,
    pub dvc_ok: usize,
    pub critical: usize,
}

/// How the totals compare with [`REFERENCE_TOTAL`].
#[derive(Debug, Clone, Serialize)]
pub struct Reconciliation {
    pub reference: usize,
    /// Name of the total equal to the reference, if any.
    pub matched: Option<String>,
    pub delta_raw: i64,
    pub delta_dvc_ok: i64,
    pub delta_critical: i64,
    /// Finals that need the symmetric Merge-P orientation.
    pub via_merge_p_sym: usize,
    pub via_merge_fc: usize,
    /// Finals rejected by the distinct variable check.
    pub dvc_rejected: usize,
    /// Finals where the transformation redex sits inside a meta-variable.
    pub variable_site: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapJson {
    pub transformation: String,
    pub normal_order: String,
    pub system: SystemJson,
    pub fork: Option<ForkJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapsReport {
    pub totals: Totals,
    pub reconciliation: Reconciliation,
    pub pairs: Vec<PairRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlaps: Option<Vec<OverlapJson>>,
}

impl OverlapsReport {
    /// `raw` keeps every final system; otherwise only critical overlaps are
    /// listed individually.
    pub fn new(results: &[PairResult], list: bool, raw: bool) -> OverlapsReport {
        let pairs: Vec<PairRow> = results.iter().map(PairRow::from).collect();
        let totals = Totals {
            raw: pairs.iter().map(|p| p.raw).sum(),
            distinct: pairs.iter().map(|p| p.distinct).sum(),
            dvc_ok: pairs.iter().map(|p| p.dvc_ok).sum(),
            critical: pairs.iter().map(|p| p.critical).sum(),
        };
        let matched = [("raw", totals.raw), ("dvc_ok", totals.dvc_ok), ("critical", totals.critical)]
            .into_iter()
            .find(|(_, n)| *n == REFERENCE_TOTAL)
            .map(|(k, _)| k.to_string());
        let delta = |n: usize| n as i64 - REFERENCE_TOTAL as i64;
        let reconciliation = Reconciliation {
            reference: REFERENCE_TOTAL,
            matched,
            delta_raw: delta(totals.raw),
            delta_dvc_ok: delta(totals.dvc_ok),
            delta_critical: delta(totals.critical),
            via_merge_p_sym: pairs.iter().map(|p| p.merge_p_sym).sum(),
            via_merge_fc: pairs.iter().map(|p| p.merge_fc).sum(),
            dvc_rejected: totals.distinct - totals.dvc_ok,
            variable_site: pairs.iter().map(|p| p.variable).sum(),
        };
        let overlaps = list.then(|| {
            results
                .iter()
                .flat_map(|pr| &pr.overlaps)
                .filter(|o| raw || o.fork.is_some())
                .map(|o| OverlapJson {
                    transformation: o.t_rule.clone(),
                    normal_order: o.no_rule.clone(),
                    system: SystemJson::new(&o.system, false),
                    fork: o.fork.as_ref().map(ForkJson::from),
                })
                .collect()
        });
        OverlapsReport {
            totals,
            reconciliation,
            pairs,
            overlaps,
        }
    }

    pub fn exhausted(&self) -> bool {
        self.pairs.iter().any(|p| p.exhausted)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let t = &self.totals;
        let _ = writeln!(s, "raw {} distinct {} dvc_ok {} critical {}", t.raw, t.distinct, t.dvc_ok, t.critical);
        let r = &self.reconciliation;
        match &r.matched {
            Some(k) => {
                let _ = writeln!(s, "{k} total equals {}", r.reference);
            }
            None => {
                let _ = writeln!(
                    s,
                    "no total equals {}: raw {:+} dvc_ok {:+} critical {:+}; merge-p-sym {} merge-fc {} dvc-rejected {} variable-site {}",
                    r.reference, r.delta_raw, r.delta_dvc_ok, r.delta_critical, r.via_merge_p_sym, r.via_merge_fc, r.dvc_rejected, r.variable_site
                );
            }
        }
        let _ = writeln!(s, "{:<14} {:<16} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}", "transformation", "normal-order", "raw", "dist", "dvc", "crit", "var", "mp", "mps", "mfa");
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "{:<14} {:<16} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}{}",
                p.transformation, p.normal_order, p.raw, p.distinct, p.dvc_ok, p.critical, p.variable, p.merge_p, p.merge_p_sym, p.merge_fa, exhausted_note(p.exhausted)
            );
        }
        if let Some(os) = &self.overlaps {
            for o in os {
                let _ = writeln!(s, "{} / {}: {}", o.transformation, o.normal_order, o.system.text);
                if let Some(f) = &o.fork {
                    let _ = writeln!(s, "  {} <-no- {} -T-> {}", f.left, f.source, f.right);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramsReport {
    pub max_depth: usize,
    pub sets: Vec<DiagramSet>,
    /// Union of the schemas of all sets.
    pub schemas: Vec<Schema>,
}

impl DiagramsReport {
    pub fn new(max_depth: usize, sets: Vec<DiagramSet>) -> DiagramsReport {
        let mut schemas: Vec<Schema> = sets.iter().flat_map(|s| s.schemas.iter().cloned()).collect();
        schemas.sort();
        schemas.dedup();
        DiagramsReport { max_depth, sets, schemas }
    }

    pub fn exhausted(&self) -> bool {
        self.sets.iter().any(|s| s.exhausted)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for set in &self.sets {
            let _ = writeln!(
                s,
                "{}: forks {} degenerate {} closed {} unclosed {}{}",
                set.transformation,
                set.forks,
                set.degenerate,
                set.diagrams.len(),
                set.unclosed.len(),
                exhausted_note(set.exhausted)
            );
            for sc in &set.schemas {
                let _ = writeln!(s, "  {sc}");
            }
            for u in &set.unclosed {
                let _ = writeln!(s, "  unclosed {} / {}: {} <- {} -> {}", u.t_rule, u.no_rule, u.left, u.source, u.right);
            }
        }
        let _ = writeln!(s, "schemas {}", self.schemas.len());
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub transformations: Vec<crate::calculus::RuleJson>,
    pub normal_order: Vec<crate::calculus::RuleJson>,
}

impl CatalogReport {
    pub fn new(ts: &[&Rule], nos: &[&Rule]) -> CatalogReport {
        CatalogReport {
            transformations: ts.iter().map(|r| r.to_json()).collect(),
            normal_order: nos.iter().map(|r| r.to_json()).collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for r in self.transformations.iter().chain(&self.normal_order) {
            let _ = writeln!(s, "{} [{}]", r.name, r.kind);
            let _ = writeln!(s, "  {} -> {}", r.lhs, r.rhs);
            if !r.delta1.is_empty() || !r.delta2.is_empty() {
                let _ = writeln!(s, "  Δ1={{{}}} Δ2={{{}}}", r.delta1.join(","), r.delta2.join(","));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlaps::{run_all, RuleFilter};
    use crate::unifier::Config;

    #[test]
    fn totals_are_sums_of_rows() {
        let f = RuleFilter {
            transformations: ["cp-e".to_string()].into(),
            normal_order: ["lbeta".to_string()].into(),
        };
        let rs = run_all(&f, &Config::default(), 2).unwrap();
        let rep = OverlapsReport::new(&rs, true, false);
        assert_eq!(rep.totals.raw, rep.pairs.iter().map(|p| p.raw).sum::<usize>());
        assert_eq!(rep.totals.critical, rep.overlaps.as_ref().unwrap().len());
        assert_eq!(rep.reconciliation.delta_raw, rep.totals.raw as i64 - REFERENCE_TOTAL as i64);
        assert_eq!(rep.reconciliation.matched, None);
        let all = OverlapsReport::new(&rs, true, true);
        assert_eq!(all.overlaps.unwrap().len(), all.totals.distinct);
    }
}
