//! Weighted model counting, abstraction checking, and abstraction
//! derivation over ground relational theories.
//!
//! A *theory* is a set of ground sentences over a finite atom universe; a
//! *weight function* assigns a nonnegative value to every literal; the
//! weighted model count of a theory is the sum over its models of the
//! product of the weights of the literals each model makes true.
//! Probabilities of queries are ratios of such counts.
//!
//! On top of that base, a *refinement mapping* translates the atoms of a
//! coarse ("high-level") theory into formulas of a detailed ("low-level")
//! one. This crate decides in what sense the coarse theory abstracts the
//! detailed one — soundness, completeness, their weighted versions,
//! probability-preserving exactness — producing witnesses when a property
//! fails, translates evidence across the two levels, and derives
//! abstractions automatically by clause substitution and bounded search.
//!
//! Module map:
//! - [`lang`]: vocabularies, formulas, grounding, models, CNF, SAT.
//! - [`wmc`]: exact/float values, weight functions, counters, probabilities.
//! - [`mapping`]: refinement mappings, separability, induced profiles.
//! - [`checker`]: the six abstraction classes, fast paths, reports.
//! - [`evidence`]: inverse images and weakenings of low-level evidence.
//! - [`derivation`]: clause/dichotomy substitution, weight derivation,
//!   bounded search, decomposition and composition.
//! - [`gen`]: seeded random instances for the randomized test suites.

pub mod checker;
pub mod derivation;
pub mod evidence;
pub mod gen;
pub mod lang;
pub mod mapping;
pub mod wmc;

pub use lang::{Formula, GroundAtom, Literal, Model, Term, Theory, Vocabulary};
pub use mapping::RefinementMapping;
pub use wmc::{NegationDefault, Probability, Value, WeightFn};

/// Default cap (in atoms) for operations that enumerate a universe.
pub const DEFAULT_ENUMERATION_CAP: u32 = 24;
