//! Critical overlaps between program transformations and normal-order
//! reduction rules of a call-by-need lambda calculus with `letrec`.
//!
//! The pipeline is:
//!
//! 1. [`calculus`] encodes the rule schemas as many-sorted terms over a small
//!    signature with a left-commutative environment constructor, context
//!    variables of classes A < S < C, and binding-chain components.
//! 2. [`unifier`] runs the rule-based LC unification search on each
//!    `S(l_T) =? l_no` problem and returns final systems.
//! 3. [`overlaps`] turns DVC-respecting final systems into forks.
//! 4. [`diagrams`] closes forks by bounded rewriting and groups the closures
//!    into diagram schemas.

pub mod calculus;
pub mod cli;
pub mod constraints;
pub mod diagrams;
pub mod matching;
pub mod overlaps;
pub mod report;
pub mod term;
pub mod unifier;

pub use term::{Class, CtxVar, Env, IntVar, Name, Sort, Symbol, Term, TermError, Var};
