//! Conditioning the high-level theory on low-level evidence.
//!
//! Evidence arrives as a single low-level literal `e`. To use it above,
//! it is *concretized*: `m⁻¹(e)` is the disjunction of the high-level
//! atoms in whose mapping targets `e` appears pure (mentioned, complement
//! absent, in CNF). Mapping the concretization back down gives the
//! *weakening* `m(m⁻¹(e))` — the low-level content the high level can
//! actually see. When `e` entails its weakening, `e` is *definable* and a
//! high-level query conditioned on `m⁻¹(e)` answers the low-level query
//! conditioned on the weakening; when `e` is outright equivalent to the
//! weakening, the answer is the low-level answer on `e` itself. Evidence
//! that is not definable is refused rather than silently weakened.
//!
//! All of this presumes the abstraction is weighted exact; the query
//! takes the caller's word for it by default and re-verifies on demand.

use std::fmt;

use thiserror::Error;

use crate::checker::{classify, CheckError, Verdict};
use crate::lang::{
    find_model, to_cnf, Clause, Formula, LangError, Literal, Theory, Universe, Vocabulary,
    DEFAULT_CNF_BUDGET,
};
use crate::mapping::{MappingError, RefinementMapping};
use crate::wmc::{conditional, Probability, WeightFn, WmcError};

/// A single low-level literal observed as evidence.
///
/// Only literal evidence is supported; conjunctions must be rejected by
/// the caller rather than silently decomposed, because concretization is
/// defined literal by literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    literal: Literal,
}

impl Evidence {
    /// Wraps a literal after checking its atom lives in the given
    /// (low-level) universe.
    pub fn new(literal: Literal, universe: &Universe) -> Result<Self, EvidenceError> {
        if !universe.contains(&literal.atom) {
            return Err(EvidenceError::ForeignAtom { atom: literal.atom.to_string() });
        }
        Ok(Evidence { literal })
    }

    pub fn literal(&self) -> &Literal {
        &self.literal
    }

    pub fn formula(&self) -> Formula {
        Formula::lit(&self.literal)
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.literal.fmt(f)
    }
}

/// How a high-level query answers a low-level question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    /// The evidence is equivalent to its weakening: the high-level answer
    /// equals the low-level conditional on `e` itself.
    Exact,
    /// The evidence is definable but strictly stronger than its
    /// weakening: the answer equals the low-level conditional on the
    /// weakening, not on `e`.
    Weakened,
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMode::Exact => "exact",
            QueryMode::Weakened => "weakened",
        })
    }
}

/// Errors from evidence handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvidenceError {
    #[error("evidence atom `{atom}` is not in the low-level universe")]
    ForeignAtom { atom: String },
    #[error(
        "evidence `{evidence}` appears pure in no mapping target; it has no \
         high-level counterpart to condition on"
    )]
    EmptyConcretization { evidence: String },
    #[error(
        "evidence `{evidence}` is not definable: it does not entail its \
         weakening `{weakening}`, so no high-level query can honour it; \
         refusing to answer"
    )]
    NotDefinable { evidence: String, weakening: String },
    #[error("the abstraction is not verified weighted exact: {detail}")]
    NotExact { detail: String },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Wmc(#[from] WmcError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

/// Whether `l` is pure in the clause list: it occurs, and its complement
/// does not. Purity is syntactic — tautological clauses, had they been
/// dropped during CNF conversion, would change the answer, which is why
/// the converter keeps them.
pub fn is_pure(l: &Literal, clauses: &[Clause]) -> bool {
    let complement = l.complement();
    let mut occurs = false;
    for clause in clauses {
        for lit in clause {
            if lit == &complement {
                return false;
            }
            occurs |= lit == l;
        }
    }
    occurs
}

/// The concretization `m⁻¹(e)`: the disjunction of all high-level atoms
/// `p` such that `e` is pure in the CNF of `m(p)`. Errs when no atom
/// qualifies — such evidence is invisible above.
pub fn concretize(m: &RefinementMapping, e: &Evidence) -> Result<Formula, EvidenceError> {
    let mut parts = Vec::new();
    for (atom, target) in m.pairs() {
        let clauses = to_cnf(target, DEFAULT_CNF_BUDGET)?;
        if is_pure(&e.literal, &clauses) {
            parts.push(Formula::atom(atom.clone()));
        }
    }
    if parts.is_empty() {
        return Err(EvidenceError::EmptyConcretization { evidence: e.to_string() });
    }
    Ok(Formula::or(parts))
}

/// The weakening `m(m⁻¹(e))`: the concretization mapped back down — the
/// strongest low-level statement about `e` that survives the round trip.
pub fn weaken(m: &RefinementMapping, e: &Evidence) -> Result<Formula, EvidenceError> {
    let inverse = concretize(m, e)?;
    Ok(m.apply(&inverse)?)
}

/// Whether `e` entails its weakening (validity over the low-level
/// universe, independent of any theory). Fast path: when the weakening's
/// CNF is a single clause, that clause necessarily contains `e` — purity
/// puts `e` somewhere in every concretizing target's CNF, and a one-
/// clause product keeps every contribution — so the entailment is
/// immediate.
pub fn is_definable(m: &RefinementMapping, e: &Evidence) -> Result<bool, EvidenceError> {
    let weakening = weaken(m, e)?;
    let clauses = to_cnf(&weakening, DEFAULT_CNF_BUDGET)?;
    if clauses.len() == 1 {
        return Ok(true);
    }
    entailed_over_universe(m.low_vocab(), &e.formula(), &weakening)
}

/// `premise ⊨ conclusion` over all assignments of the vocabulary's
/// universe, with no theory in play.
fn entailed_over_universe(
    vocab: &Vocabulary,
    premise: &Formula,
    conclusion: &Formula,
) -> Result<bool, EvidenceError> {
    let empty = Theory::empty(vocab.clone());
    let negated = Formula::not(conclusion.clone());
    Ok(find_model(&empty, &[premise, &negated])?.is_none())
}

/// Answers a high-level query `φ` given low-level evidence `e`:
/// `Pr(φ | m⁻¹(e), Δh, wh)`, with the mode saying what that answer means
/// below — the low-level conditional on `e` itself (`exact`, when `e` is
/// equivalent to its weakening) or on the weakening (`weakened`, when `e`
/// is merely definable). Non-definable evidence is refused.
///
/// Both readings assume the abstraction is weighted exact. The
/// precondition is the caller's responsibility by default; passing
/// `verify = Some(cap)` runs [`classify`] first and refuses unless
/// weighted exactness verifiably holds.
#[allow(clippy::too_many_arguments)]
pub fn query_high_level(
    phi: &Formula,
    e: &Evidence,
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
    verify: Option<u32>,
) -> Result<(Probability, QueryMode), EvidenceError> {
    if !m.low_universe().contains(&e.literal.atom) {
        return Err(EvidenceError::ForeignAtom { atom: e.literal.atom.to_string() });
    }
    if let Some(cap) = verify {
        let report = classify(high, wh, low, wl, m, cap)?;
        if let v @ (Verdict::Fails(_) | Verdict::Skipped(_)) = &report.weighted_exact {
            return Err(EvidenceError::NotExact { detail: v.to_string() });
        }
    }

    let weakening = weaken(m, e)?;
    if !is_definable(m, e)? {
        return Err(EvidenceError::NotDefinable {
            evidence: e.to_string(),
            weakening: weakening.to_string(),
        });
    }
    let mode = if entailed_over_universe(m.low_vocab(), &weakening, &e.formula())? {
        QueryMode::Exact
    } else {
        QueryMode::Weakened
    };

    let inverse = concretize(m, e)?;
    let value = conditional(phi, &inverse, high, wh)?;
    Ok((value, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{GroundAtom, Predicate, Sort};
    use crate::mapping::MappingEntry;
    use crate::wmc::{NegationDefault, Value};
    use crate::DEFAULT_ENUMERATION_CAP;

    fn lit(name: &str) -> Literal {
        Literal::pos(GroundAtom::prop(name))
    }

    fn atomf(name: &str) -> Formula {
        Formula::atom(GroundAtom::prop(name))
    }

    #[test]
    fn purity_is_mention_without_complement() {
        let p = lit("p");
        let q = lit("q");
        let p_or_q: Vec<Clause> = vec![vec![p.clone(), q.clone()]];
        let notp_or_q: Vec<Clause> = vec![vec![p.complement(), q.clone()]];
        assert!(is_pure(&p, &p_or_q));
        assert!(!is_pure(&p, &notp_or_q));
        assert!(is_pure(&p.complement(), &notp_or_q));
        assert!(!is_pure(&q.complement(), &p_or_q));
        assert!(!is_pure(&lit("r"), &p_or_q));
    }

    /// High difficulty levels {E, N} refine to {E, M, H}: N covers both
    /// of M and H.
    fn difficulty_instance() -> (Theory, Theory, RefinementMapping) {
        let high_vocab = Vocabulary::new(
            vec![Sort::new("course", ["B"]), Sort::new("level", ["E", "N"])],
            vec![Predicate::new("diff", ["course", "level"])],
        )
        .unwrap();
        let low_vocab = Vocabulary::new(
            vec![Sort::new("course", ["B"]), Sort::new("level", ["E", "M", "H"])],
            vec![Predicate::new("diff", ["course", "level"])],
        )
        .unwrap();

        let h = |l: &str| Formula::atom(GroundAtom::new("diff", ["B", l]));
        // Exactly one level per course, at each granularity.
        let high = Theory::new(
            high_vocab.clone(),
            vec![
                Formula::or([h("E"), h("N")]),
                Formula::not(Formula::and([h("E"), h("N")])),
            ],
        )
        .unwrap();
        let low = Theory::new(
            low_vocab.clone(),
            vec![
                Formula::or([h("E"), h("M"), h("H")]),
                Formula::not(Formula::and([h("E"), h("M")])),
                Formula::not(Formula::and([h("E"), h("H")])),
                Formula::not(Formula::and([h("M"), h("H")])),
            ],
        )
        .unwrap();

        let m = RefinementMapping::new(
            high_vocab,
            low_vocab,
            &[
                MappingEntry::new(h("E"), h("E")),
                MappingEntry::new(h("N"), Formula::or([h("M"), h("H")])),
            ],
        )
        .unwrap();
        (high, low, m)
    }

    fn diff(level: &str) -> GroundAtom {
        GroundAtom::new("diff", ["B", level])
    }

    #[test]
    fn concretization_collects_pure_targets() {
        let (_, low, m) = difficulty_instance();
        let medium = Evidence::new(Literal::pos(diff("M")), low.universe()).unwrap();
        assert_eq!(concretize(&m, &medium).unwrap().to_string(), "diff(B, N)");
        assert_eq!(weaken(&m, &medium).unwrap().to_string(), "diff(B, M) | diff(B, H)");

        let easy = Evidence::new(Literal::pos(diff("E")), low.universe()).unwrap();
        assert_eq!(concretize(&m, &easy).unwrap().to_string(), "diff(B, E)");
        assert_eq!(weaken(&m, &easy).unwrap().to_string(), "diff(B, E)");
    }

    #[test]
    fn purity_survives_the_round_trip() {
        let (_, low, m) = difficulty_instance();
        for level in ["E", "M", "H"] {
            for positive in [true, false] {
                let literal = Literal { atom: diff(level), positive };
                let e = Evidence::new(literal.clone(), low.universe()).unwrap();
                match weaken(&m, &e) {
                    Ok(weakening) => {
                        let clauses = to_cnf(&weakening, DEFAULT_CNF_BUDGET).unwrap();
                        assert!(
                            is_pure(&literal, &clauses),
                            "`{literal}` should stay pure in `{weakening}`"
                        );
                    }
                    // Negative literals are impure in the disjunctive
                    // target, so some concretizations are legitimately
                    // empty.
                    Err(EvidenceError::EmptyConcretization { .. }) => {}
                    Err(other) => panic!("unexpected error: {other}"),
                }
            }
        }
    }

    #[test]
    fn definability_and_modes() {
        let (high, low, m) = difficulty_instance();
        let wl = WeightFn::ones();
        let wh = WeightFn::new(
            [(Literal::pos(diff("N")), Value::integer(2))],
            NegationDefault::One,
        )
        .unwrap();

        // Evidence strictly finer than its weakening: answered, weakened.
        let medium = Evidence::new(Literal::pos(diff("M")), low.universe()).unwrap();
        assert!(is_definable(&m, &medium).unwrap());
        let phi = Formula::atom(diff("E"));
        let (value, mode) = query_high_level(
            &phi,
            &medium,
            &high,
            &wh,
            &low,
            &wl,
            &m,
            Some(DEFAULT_ENUMERATION_CAP),
        )
        .unwrap();
        assert_eq!(mode, QueryMode::Weakened);
        assert!(value.is_zero());
        // The weakening theorem, numerically: the high-level answer is
        // the low-level conditional on the weakening.
        let below =
            conditional(&m.apply(&phi).unwrap(), &weaken(&m, &medium).unwrap(), &low, &wl)
                .unwrap();
        assert!(value.approx_eq(&below));

        // Identity-mapped evidence: equivalent to its weakening, exact.
        let easy = Evidence::new(Literal::pos(diff("E")), low.universe()).unwrap();
        let phi = Formula::atom(diff("N"));
        let (value, mode) =
            query_high_level(&phi, &easy, &high, &wh, &low, &wl, &m, None).unwrap();
        assert_eq!(mode, QueryMode::Exact);
        assert!(value.is_zero());
        let below = conditional(&m.apply(&phi).unwrap(), &easy.formula(), &low, &wl).unwrap();
        assert!(value.approx_eq(&below));
    }

    #[test]
    fn conjunctive_weakenings_can_refuse_evidence() {
        // One high-level atom whose target couples the evidence with an
        // unrelated fact: e = mb is pure in (mb ∨ hb) ∧ hc, but does not
        // entail it.
        let high_vocab = Vocabulary::propositional(["n"]).unwrap();
        let low_vocab = Vocabulary::propositional(["mb", "hb", "hc"]).unwrap();
        let target = Formula::and([Formula::or([atomf("mb"), atomf("hb")]), atomf("hc")]);
        let m = RefinementMapping::new(
            high_vocab.clone(),
            low_vocab.clone(),
            &[MappingEntry::new(atomf("n"), target)],
        )
        .unwrap();
        let high = Theory::empty(high_vocab);
        let low = Theory::empty(low_vocab);
        let w = WeightFn::ones();

        let e = Evidence::new(lit("mb"), low.universe()).unwrap();
        assert_eq!(
            weaken(&m, &e).unwrap().to_string(),
            "(mb | hb) & hc",
            "the weakening is the whole target"
        );
        assert!(!is_definable(&m, &e).unwrap());
        let err = query_high_level(&atomf("n"), &e, &high, &w, &low, &w, &m, None).unwrap_err();
        assert!(matches!(err, EvidenceError::NotDefinable { .. }), "got {err}");
    }

    #[test]
    fn invisible_evidence_is_an_error() {
        let (_, low, m) = difficulty_instance();
        // ¬diff(B,M) is impure in the only target mentioning it.
        let e = Evidence::new(Literal::neg(diff("M")), low.universe()).unwrap();
        assert!(matches!(
            concretize(&m, &e),
            Err(EvidenceError::EmptyConcretization { .. })
        ));
    }

    #[test]
    fn foreign_atoms_are_rejected() {
        let (_, low, _) = difficulty_instance();
        let err = Evidence::new(lit("elsewhere"), low.universe()).unwrap_err();
        assert!(matches!(err, EvidenceError::ForeignAtom { .. }));
    }

    #[test]
    fn verification_gate_refuses_inexact_abstractions() {
        let (high, low, m) = difficulty_instance();
        // Uniform high-level weights break weak exactness (N must weigh
        // twice E to mirror the two low-level levels it covers).
        let w = WeightFn::ones();
        let e = Evidence::new(Literal::pos(diff("M")), low.universe()).unwrap();
        let phi = Formula::atom(diff("E"));
        let err = query_high_level(
            &phi,
            &e,
            &high,
            &w,
            &low,
            &w,
            &m,
            Some(DEFAULT_ENUMERATION_CAP),
        )
        .unwrap_err();
        assert!(matches!(err, EvidenceError::NotExact { .. }), "got {err}");
        // Without the gate the caller's assertion is taken at face value.
        assert!(query_high_level(&phi, &e, &high, &w, &low, &w, &m, None).is_ok());
    }
}
