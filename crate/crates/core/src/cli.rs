//! Command-line front end.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::calculus::{find_rule, normal_order_rules, transformation_rules, Rule};
use crate::diagrams::complete_set;
use crate::overlaps::{problem, run_all, run_pair, selected, RuleFilter};
use crate::report::{CatalogReport, DiagramsReport, OverlapsReport, UnifyReport};
use crate::unifier::Config;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "lcsx", version, about = "Critical overlaps and forking diagrams via LC unification")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(short = 'j', long, default_value_t = 1, global = true)]
    pub jobs: usize,
    /// Maximum search states per unification problem.
    #[arg(long, default_value_t = Config::default().step_budget, global = true)]
    pub step_budget: usize,
}

#[derive(Debug, Args, Default)]
pub struct Filters {
    /// Transformation rule or family (repeatable; default all).
    #[arg(short = 't', long = "transformation")]
    pub transformations: Vec<String>,
    /// Normal-order rule or family (repeatable; default all).
    #[arg(short = 'n', long = "normal-order")]
    pub normal_order: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the rule catalog.
    Catalog {
        #[command(flatten)]
        filters: Filters,
    },
    /// Solve one transformation / normal-order pair.
    Unify {
        transformation: String,
        normal_order: String,
        /// Include the rule trace with the measure after each step.
        #[arg(long)]
        trace: bool,
    },
    /// Count overlaps over all selected pairs.
    Overlaps {
        #[command(flatten)]
        filters: Filters,
        /// List every distinct final system instead of only the critical ones.
        #[arg(long)]
        raw: bool,
        /// Only print the counts.
        #[arg(long)]
        summary: bool,
    },
    /// Close the critical forks of the selected transformation families.
    Diagrams {
        #[command(flatten)]
        filters: Filters,
        /// Maximum number of rewrite steps on each side of a diagram.
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
    },
}

fn check_names(names: &[String], rules: &[Rule], what: &str) -> Result<BTreeSet<String>, CliError> {
    for n in names {
        if !rules.iter().any(|r| &r.name == n || r.family == n) {
            return Err(CliError::Usage(format!("unknown {what} rule or family `{n}`")));
        }
    }
    Ok(names.iter().cloned().collect())
}

fn filter_of(f: &Filters) -> Result<RuleFilter, CliError> {
    Ok(RuleFilter {
        transformations: check_names(&f.transformations, transformation_rules(), "transformation")?,
        normal_order: check_names(&f.normal_order, normal_order_rules(), "normal-order")?,
    })
}

/// Rendered output and whether a step budget ran out.
pub struct Rendered {
    pub body: String,
    pub exhausted: bool,
}

fn render<T: Serialize>(v: &T, format: Format, text: impl FnOnce() -> String) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(v)? + "\n",
        Format::Text => text(),
    })
}

pub fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    let c = &cli.common;
    if c.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let cfg = Config { step_budget: c.step_budget };
    match &cli.command {
        Command::Catalog { filters } => {
            let f = filter_of(filters)?;
            let ts: Vec<&Rule> = transformation_rules().iter().filter(|r| selected(&f.transformations, r)).collect();
            let nos: Vec<&Rule> = normal_order_rules().iter().filter(|r| selected(&f.normal_order, r)).collect();
            let rep = CatalogReport::new(&ts, &nos);
            Ok(Rendered {
                body: render(&rep, c.format, || rep.text())?,
                exhausted: false,
            })
        }
        Command::Unify {
            transformation,
            normal_order,
            trace,
        } => {
            let t = find_rule(transformation)
                .filter(|r| transformation_rules().contains(r))
                .ok_or_else(|| CliError::Usage(format!("unknown transformation rule `{transformation}`")))?;
            let no = find_rule(normal_order)
                .filter(|r| normal_order_rules().contains(r))
                .ok_or_else(|| CliError::Usage(format!("unknown normal-order rule `{normal_order}`")))?;
            let (p, _) = problem(t, no);
            let pr = run_pair(t, no, &cfg);
            let rep = UnifyReport::new(&pr, p.lhs.to_string(), p.rhs.to_string(), *trace);
            Ok(Rendered {
                body: render(&rep, c.format, || rep.text())?,
                exhausted: pr.exhausted,
            })
        }
        Command::Overlaps { filters, raw, summary } => {
            let results = run_all(&filter_of(filters)?, &cfg, c.jobs)?;
            let rep = OverlapsReport::new(&results, !summary, *raw);
            Ok(Rendered {
                body: render(&rep, c.format, || rep.text())?,
                exhausted: rep.exhausted(),
            })
        }
        Command::Diagrams { filters, max_depth } => {
            let f = filter_of(filters)?;
            let mut families: Vec<&str> = Vec::new();
            for r in transformation_rules().iter().filter(|r| selected(&f.transformations, r)) {
                if !families.contains(&r.family) {
                    families.push(r.family);
                }
            }
            let mut sets = Vec::new();
            for fam in families {
                sets.push(complete_set(fam, &f.normal_order, *max_depth, &cfg, c.jobs)?);
            }
            let rep = DiagramsReport::new(*max_depth, sets);
            Ok(Rendered {
                body: render(&rep, c.format, || rep.text())?,
                exhausted: rep.exhausted(),
            })
        }
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args(args: &[&str]) -> Result<Rendered, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("lcsx").chain(args.iter().copied())).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli)
}

/// Parses `args`, runs the command and writes its output; returns the exit
/// status.
pub fn main_with<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.common.output {
        Some(path) => std::fs::write(path, &out.body).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            print!("{}", out.body);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if out.exhausted {
        eprintln!("error: step budget exhausted; results are incomplete");
        EXIT_BUDGET
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("lcsx").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with(["lcsx", "bogus"]), EXIT_USAGE);
        assert_eq!(main_with(["lcsx", "unify", "nope", "no-lbeta/1"]), EXIT_USAGE);
        assert_eq!(main_with(["lcsx", "overlaps", "-t", "nope"]), EXIT_USAGE);
    }

    #[test]
    fn tiny_budget_exits_two() {
        let dir = std::env::temp_dir().join(format!("lcsx-cli-{}", std::process::id()));
        let path = dir.with_extension("txt");
        let code = main_with([
            "lcsx",
            "--step-budget",
            "3",
            "-o",
            path.to_str().unwrap(),
            "unify",
            "cp-e/abs",
            "no-cp-e-c/abs",
        ]);
        let _ = std::fs::remove_file(&path);
        assert_eq!(code, EXIT_BUDGET);
    }

    #[test]
    fn global_flags_after_subcommand() {
        let c = parse(&["overlaps", "--format", "json", "-j", "4", "--raw"]);
        assert_eq!(c.common.format, Format::Json);
        assert_eq!(c.common.jobs, 4);
        assert!(matches!(c.command, Command::Overlaps { raw: true, .. }));
    }

    #[test]
    fn catalog_filters_by_family() {
        let c = parse(&["catalog", "-t", "cp-e", "-n", "lapp", "--format", "json"]);
        let out = execute(&c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.body).unwrap();
        let names: Vec<&str> = v["transformations"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
        assert_eq!(names, ["cp-e/var", "cp-e/abs"]);
        assert!(v["normal_order"].as_array().unwrap().iter().all(|r| r["name"].as_str().unwrap().starts_with("no-lapp")));
    }
}
