//! The ground relational language: vocabularies, formulas, theories,
//! models, and the logical operations everything else is built on.
//!
//! A [`Vocabulary`] declares sorts (named finite constant lists) and
//! predicates (name plus argument sorts). Its *atom universe* is the set of
//! all ground instances of the declared predicates — not just the atoms a
//! theory happens to mention. A [`Theory`] couples a vocabulary with ground
//! sentences; [`ground_theory`] expands quantified sentences over the finite
//! sorts first. A [`Model`] is a total assignment over the universe.
//!
//! Satisfiability and entailment run on a small DPLL search with unit
//! propagation; exhaustive model enumeration is available below a
//! configurable universe cap and reports models in a fixed canonical order
//! (lexicographic by atom index, positives first).

mod cnf;
mod formula;
mod model;
mod sat;
mod theory;
mod vocab;

pub use cnf::{to_cnf, Clause, DEFAULT_CNF_BUDGET};
pub use formula::{Formula, Term};
pub use model::Model;
pub use sat::{entails, entails_with_countermodel, find_model, is_satisfiable};
pub use theory::{all_models, for_each_model, ground_theory, Theory};
pub use vocab::{GroundAtom, Literal, Predicate, Sort, Universe, Vocabulary};

pub(crate) use sat::lower_clauses;

use thiserror::Error;

/// Errors raised by vocabulary validation, grounding, evaluation,
/// enumeration, and CNF conversion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),
    #[error("duplicate constant `{constant}` in sort `{sort}`")]
    DuplicateConstant { sort: String, constant: String },
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("predicate `{pred}` refers to undeclared sort `{sort}`")]
    UndeclaredSort { pred: String, sort: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{pred}` expects {expected} argument(s), got {got}")]
    ArityMismatch { pred: String, expected: usize, got: usize },
    #[error("`{constant}` is not a constant of sort `{sort}`")]
    ConstantNotInSort { constant: String, sort: String },
    #[error("unknown sort `{0}` in quantifier")]
    UnknownSort(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula is not ground at `{0}`")]
    NotGround(String),
    #[error("atom `{0}` is outside the universe")]
    AtomOutsideUniverse(String),
    #[error("universe has {atoms} atoms, beyond the enumeration cap {cap}")]
    UniverseTooLarge { atoms: usize, cap: u32 },
    #[error("CNF conversion exceeded the budget of {budget} clauses")]
    CnfBudgetExceeded { budget: usize },
}
