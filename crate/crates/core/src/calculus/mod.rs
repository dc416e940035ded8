//! The letrec calculus: surface syntax, its term encoding, and rule catalogs.

pub mod catalog;
pub mod expr;

pub use catalog::{find_rule, normal_order_rules, transformation_rules, Rule, RuleJson, RuleKind};
pub use expr::{decode, encode, parse, print_expr, print_meta, Expr, SyntaxError};
