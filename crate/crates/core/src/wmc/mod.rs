//! Weighted model counting and conditional probabilities.
//!
//! The weighted model count of a theory is the sum, over its models, of the
//! product of the weights of the literals each model makes true:
//!
//! ```text
//! WMC(Δ, w) = Σ_{M ⊨ Δ} Π_{l ∈ M} w(l)
//! ```
//!
//! Probabilities are ratios of counts: `Pr(φ | e, Δ, w) =
//! WMC(φ ∧ e ∧ Δ, w) / WMC(e ∧ Δ, w)`. Two implementations are kept
//! deliberately: [`wmc_enumerate`] sums the definition over every
//! assignment and exists to be obviously correct; [`wmc`] is a DPLL-style
//! counter (unit propagation, connected-component decomposition with
//! caching) that must return the identical value and is tested against the
//! oracle. Pure-literal elimination is absent on purpose — assigning a pure
//! literal changes the weighted sum even though it preserves
//! satisfiability.

mod engine;
mod value;
mod weights;

pub use engine::{conditional, model_weight, probability, wmc, wmc_enumerate, WmcSession};
pub use value::{ParseValueError, Probability, Value, FLOAT_TOLERANCE};
pub use weights::{NegationDefault, WeightFn};

use thiserror::Error;

use crate::lang::LangError;

/// Errors from weight validation and probability computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WmcError {
    #[error("negative weight {value} for literal `{literal}`")]
    NegativeWeight { literal: String, value: String },
    #[error("weight {value} for `{literal}` must lie in [0, 1] under the complement default")]
    ComplementOutOfRange { literal: String, value: String },
    #[error("duplicate weight entry for `{literal}`")]
    DuplicateWeight { literal: String },
    #[error(
        "the partition function is zero (the theory is unsatisfiable or the \
         weights annihilate every model); probabilities are undefined"
    )]
    ZeroPartition,
    #[error("evidence `{evidence}` has zero weighted count; conditioning on it is undefined")]
    ZeroEvidence { evidence: String },
    #[error(transparent)]
    Lang(#[from] LangError),
}
