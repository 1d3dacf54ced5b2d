//! Refinement mappings: translating high-level atoms into low-level
//! formulas.
//!
//! A refinement mapping fixes, for every atom of a coarse ("high-level")
//! vocabulary, a ground formula of a detailed ("low-level") vocabulary.
//! It extends homomorphically to all formulas — negation and the binary
//! connectives pass through — so a whole high-level query can be asked of
//! the low-level theory. Entries may be written per ground atom or as a
//! predicate template with variables instantiated over the predicate's
//! sorts; ground entries override templates, and covering an atom twice at
//! the same specificity is an error rather than a silent choice.
//!
//! A mapping is *separable* when no two high-level atoms' target formulas
//! share a low-level atom. Several abstraction checks have cheaper
//! decision procedures in that regime, so the checker asks.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{
    Formula, GroundAtom, LangError, Model, Term, Universe, Vocabulary,
};

/// Errors from mapping construction and application.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("mapping pattern must be an atom, got `{0}`")]
    BadPattern(String),
    #[error("invalid pattern `{pattern}`: {source}")]
    InvalidPattern { pattern: String, source: LangError },
    #[error("target for `{pattern}` is invalid over the low-level vocabulary: {source}")]
    InvalidTarget { pattern: String, source: LangError },
    #[error("target for `{pattern}` is not ground after instantiation: `{target}`")]
    NonGroundTarget { pattern: String, target: String },
    #[error("high-level atom `{0}` is not covered by any mapping entry")]
    UnmappedAtom(String),
    #[error("high-level atom `{atom}` is covered twice, by `{first}` and `{second}`")]
    DuplicateCoverage { atom: String, first: String, second: String },
    #[error(transparent)]
    Lang(#[from] LangError),
}

/// One entry as written: an atom pattern (possibly with variables) and its
/// target formula (with the same variables).
#[derive(Debug, Clone, PartialEq)]
pub struct MappingEntry {
    pub pattern: Formula,
    pub target: Formula,
}

impl MappingEntry {
    pub fn new(pattern: Formula, target: Formula) -> Self {
        MappingEntry { pattern, target }
    }
}

/// A refinement mapping between two vocabularies, total on the high-level
/// atom universe.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementMapping {
    high_vocab: Vocabulary,
    low_vocab: Vocabulary,
    high_universe: Arc<Universe>,
    low_universe: Arc<Universe>,
    /// Target formula per high-level atom, indexed like the high universe.
    targets: Vec<Formula>,
}

impl RefinementMapping {
    /// Builds a mapping from entries, instantiating templates over the
    /// high-level universe and validating totality and target
    /// well-formedness.
    pub fn new(
        high_vocab: Vocabulary,
        low_vocab: Vocabulary,
        entries: &[MappingEntry],
    ) -> Result<Self, MappingError> {
        let high_universe = high_vocab.universe();
        let low_universe = low_vocab.universe();

        // Validate patterns up front: atom shape, known predicate, arity,
        // constant positions in-sort.
        struct Prepared<'a> {
            predicate: String,
            args: &'a [Term],
            ground: bool,
            entry: &'a MappingEntry,
        }
        let mut prepared = Vec::with_capacity(entries.len());
        for entry in entries {
            let (predicate, args) = match &entry.pattern {
                Formula::Atom { predicate, args } => (predicate.clone(), args.as_slice()),
                other => return Err(MappingError::BadPattern(other.to_string())),
            };
            let invalid = |source| MappingError::InvalidPattern {
                pattern: entry.pattern.to_string(),
                source,
            };
            let declared = high_vocab
                .predicate(&predicate)
                .ok_or_else(|| invalid(LangError::UnknownPredicate(predicate.clone())))?;
            if declared.arg_sorts.len() != args.len() {
                return Err(invalid(LangError::ArityMismatch {
                    pred: predicate.clone(),
                    expected: declared.arg_sorts.len(),
                    got: args.len(),
                }));
            }
            for (arg, sort_name) in args.iter().zip(&declared.arg_sorts) {
                if let Term::Const(c) = arg {
                    let sort = high_vocab.sort(sort_name).expect("argument sort declared");
                    if !sort.constants.contains(c) {
                        return Err(invalid(LangError::ConstantNotInSort {
                            constant: c.clone(),
                            sort: sort_name.clone(),
                        }));
                    }
                }
            }
            let ground = args.iter().all(|t| matches!(t, Term::Const(_)));
            prepared.push(Prepared { predicate, args, ground, entry });
        }

        // Resolve every high-level atom against the entries.
        let mut targets = Vec::with_capacity(high_universe.len());
        for atom in high_universe.atoms() {
            let mut ground_match: Option<&Prepared> = None;
            let mut template_match: Option<(&Prepared, HashMap<String, String>)> = None;
            for p in &prepared {
                let bindings = match match_pattern(&p.predicate, p.args, atom) {
                    Some(b) => b,
                    None => continue,
                };
                if p.ground {
                    if let Some(first) = ground_match {
                        return Err(MappingError::DuplicateCoverage {
                            atom: atom.to_string(),
                            first: first.entry.pattern.to_string(),
                            second: p.entry.pattern.to_string(),
                        });
                    }
                    ground_match = Some(p);
                } else {
                    if let Some((first, _)) = &template_match {
                        return Err(MappingError::DuplicateCoverage {
                            atom: atom.to_string(),
                            first: first.entry.pattern.to_string(),
                            second: p.entry.pattern.to_string(),
                        });
                    }
                    template_match = Some((p, bindings));
                }
            }
            // Ground entries take precedence over templates.
            let (chosen, bindings) = match (ground_match, template_match) {
                (Some(p), _) => (p, HashMap::new()),
                (None, Some((p, b))) => (p, b),
                (None, None) => return Err(MappingError::UnmappedAtom(atom.to_string())),
            };
            let target = chosen.entry.target.substituted(&bindings);
            if !target.is_ground() {
                return Err(MappingError::NonGroundTarget {
                    pattern: chosen.entry.pattern.to_string(),
                    target: target.to_string(),
                });
            }
            for low_atom in target.atoms() {
                low_vocab.validate_atom(&low_atom).map_err(|source| {
                    MappingError::InvalidTarget {
                        pattern: chosen.entry.pattern.to_string(),
                        source,
                    }
                })?;
            }
            targets.push(target);
        }

        Ok(RefinementMapping {
            high_vocab,
            low_vocab,
            high_universe,
            low_universe,
            targets,
        })
    }

    /// The identity mapping over one vocabulary (high = low, every atom to
    /// itself).
    pub fn identity(vocab: Vocabulary) -> Self {
        let universe = vocab.universe();
        let targets = universe.atoms().iter().map(|a| Formula::atom(a.clone())).collect();
        RefinementMapping {
            high_vocab: vocab.clone(),
            low_vocab: vocab,
            high_universe: universe.clone(),
            low_universe: universe,
            targets,
        }
    }

    pub fn high_vocab(&self) -> &Vocabulary {
        &self.high_vocab
    }

    pub fn low_vocab(&self) -> &Vocabulary {
        &self.low_vocab
    }

    pub fn high_universe(&self) -> &Arc<Universe> {
        &self.high_universe
    }

    pub fn low_universe(&self) -> &Arc<Universe> {
        &self.low_universe
    }

    /// The target formula of a high-level atom.
    pub fn target(&self, atom: &GroundAtom) -> Result<&Formula, MappingError> {
        let idx = self
            .high_universe
            .index_of(atom)
            .ok_or_else(|| MappingError::UnmappedAtom(atom.to_string()))?;
        Ok(&self.targets[idx as usize])
    }

    /// Atom → target pairs in high-universe order.
    pub fn pairs(&self) -> impl Iterator<Item = (&GroundAtom, &Formula)> {
        self.high_universe.atoms().iter().zip(&self.targets)
    }

    /// Applies the mapping homomorphically to a ground high-level formula:
    /// atoms through the map, `!`/`&`/`|` node by node, with `->` and `<->`
    /// rewritten into the primitive connectives first.
    pub fn apply(&self, phi: &Formula) -> Result<Formula, MappingError> {
        self.apply_inner(&phi.desugared())
    }

    fn apply_inner(&self, phi: &Formula) -> Result<Formula, MappingError> {
        match phi {
            Formula::True | Formula::False => Ok(phi.clone()),
            Formula::Atom { .. } => {
                let atom = phi
                    .as_ground_atom()
                    .ok_or_else(|| LangError::NotGround(phi.to_string()))?;
                Ok(self.target(&atom)?.clone())
            }
            Formula::Eq(Term::Const(a), Term::Const(b)) => {
                Ok(if a == b { Formula::True } else { Formula::False })
            }
            Formula::Not(f) => Ok(Formula::not(self.apply_inner(f)?)),
            Formula::And(fs) => {
                let parts: Result<Vec<_>, _> = fs.iter().map(|f| self.apply_inner(f)).collect();
                Ok(Formula::and(parts?))
            }
            Formula::Or(fs) => {
                let parts: Result<Vec<_>, _> = fs.iter().map(|f| self.apply_inner(f)).collect();
                Ok(Formula::or(parts?))
            }
            // desugared() has removed ->, <->; anything else is non-ground.
            _ => Err(LangError::NotGround(phi.to_string()).into()),
        }
    }

    /// Whether no two high-level atoms' targets share a low-level atom.
    pub fn is_separable(&self) -> bool {
        let mut seen: HashMap<GroundAtom, usize> = HashMap::new();
        for (idx, target) in self.targets.iter().enumerate() {
            for atom in target.atoms() {
                if let Some(&first) = seen.get(&atom) {
                    if first != idx {
                        return false;
                    }
                } else {
                    seen.insert(atom, idx);
                }
            }
        }
        true
    }

    /// The unique high-level assignment a low-level model induces: atom `p`
    /// is true exactly when the model satisfies `m(p)`.
    pub fn induced_profile(&self, low_model: &Model) -> Result<Model, MappingError> {
        let mut bits = Vec::with_capacity(self.targets.len());
        for target in &self.targets {
            bits.push(low_model.evaluate(target)?);
        }
        Ok(Model::new(self.high_universe.clone(), bits))
    }

    /// Whether `high_model` is exactly the profile `low_model` induces —
    /// i.e. the two models agree on every atom/target pair.
    pub fn is_isomorphic(
        &self,
        high_model: &Model,
        low_model: &Model,
    ) -> Result<bool, MappingError> {
        Ok(*high_model == self.induced_profile(low_model)?)
    }
}

impl fmt::Display for RefinementMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (atom, target) in self.pairs() {
            writeln!(f, "{atom} -> {target}")?;
        }
        Ok(())
    }
}

/// Matches a pattern against a ground atom, returning variable bindings.
/// Repeated variables must bind the same constant.
fn match_pattern(
    predicate: &str,
    args: &[Term],
    atom: &GroundAtom,
) -> Option<HashMap<String, String>> {
    if predicate != atom.predicate || args.len() != atom.args.len() {
        return None;
    }
    let mut bindings = HashMap::new();
    for (pattern_arg, actual) in args.iter().zip(&atom.args) {
        match pattern_arg {
            Term::Const(c) => {
                if c != actual {
                    return None;
                }
            }
            Term::Var(v) => {
                if let Some(prev) = bindings.insert(v.clone(), actual.clone()) {
                    if prev != *actual {
                        return None;
                    }
                }
            }
        }
    }
    Some(bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{Predicate, Sort};

    fn p(name: &str) -> Formula {
        Formula::atom(GroundAtom::prop(name))
    }

    fn pattern(pred: &str, args: &[Term]) -> Formula {
        Formula::Atom { predicate: pred.into(), args: args.to_vec() }
    }

    fn var(v: &str) -> Term {
        Term::Var(v.into())
    }

    fn cst(c: &str) -> Term {
        Term::Const(c.into())
    }

    /// High: diff ∈ {E, N} over course {B}; low: diff ∈ {E, M, H}.
    fn difficulty_mapping() -> RefinementMapping {
        let high = Vocabulary::new(
            vec![Sort::new("course", ["B"]), Sort::new("level", ["E", "N"])],
            vec![Predicate::new("diff", ["course", "level"])],
        )
        .unwrap();
        let low = Vocabulary::new(
            vec![Sort::new("course", ["B"]), Sort::new("level", ["E", "M", "H"])],
            vec![Predicate::new("diff", ["course", "level"])],
        )
        .unwrap();
        let entries = vec![
            MappingEntry::new(
                pattern("diff", &[var("x"), cst("E")]),
                pattern("diff", &[var("x"), cst("E")]),
            ),
            MappingEntry::new(
                pattern("diff", &[var("x"), cst("N")]),
                Formula::or([
                    pattern("diff", &[var("x"), cst("M")]),
                    pattern("diff", &[var("x"), cst("H")]),
                ]),
            ),
        ];
        RefinementMapping::new(high, low, &entries).unwrap()
    }

    #[test]
    fn templates_instantiate_over_the_high_universe() {
        let m = difficulty_mapping();
        let easy = GroundAtom::new("diff", ["B", "E"]);
        let normal = GroundAtom::new("diff", ["B", "N"]);
        assert_eq!(m.target(&easy).unwrap().to_string(), "diff(B, E)");
        assert_eq!(m.target(&normal).unwrap().to_string(), "diff(B, M) | diff(B, H)");
    }

    #[test]
    fn apply_is_homomorphic_and_rewrites_sugar_first() {
        let m = difficulty_mapping();
        let easy = Formula::atom(GroundAtom::new("diff", ["B", "E"]));
        let normal = Formula::atom(GroundAtom::new("diff", ["B", "N"]));

        let negated = m.apply(&Formula::not(normal.clone())).unwrap();
        assert_eq!(negated.to_string(), "!(diff(B, M) | diff(B, H))");

        let conj = m.apply(&Formula::and([easy.clone(), normal.clone()])).unwrap();
        assert_eq!(conj.to_string(), "diff(B, E) & (diff(B, M) | diff(B, H))");

        // a -> b maps as !m(a) | m(b).
        let imp = m
            .apply(&Formula::Implies(Box::new(easy), Box::new(normal)))
            .unwrap();
        assert_eq!(imp.to_string(), "!diff(B, E) | diff(B, M) | diff(B, H)");
    }

    #[test]
    fn ground_entries_override_templates() {
        let vocab_high = Vocabulary::new(
            vec![Sort::new("s", ["a", "b"])],
            vec![Predicate::new("p", ["s"])],
        )
        .unwrap();
        let vocab_low = Vocabulary::new(
            vec![Sort::new("s", ["a", "b"])],
            vec![Predicate::new("q", ["s"]), Predicate::new("r", [] as [&str; 0])],
        )
        .unwrap();
        let entries = vec![
            MappingEntry::new(pattern("p", &[var("x")]), pattern("q", &[var("x")])),
            MappingEntry::new(pattern("p", &[cst("b")]), p("r")),
        ];
        let m = RefinementMapping::new(vocab_high, vocab_low, &entries).unwrap();
        assert_eq!(m.target(&GroundAtom::new("p", ["a"])).unwrap().to_string(), "q(a)");
        assert_eq!(m.target(&GroundAtom::new("p", ["b"])).unwrap().to_string(), "r");
    }

    #[test]
    fn coverage_errors_are_reported() {
        let high = Vocabulary::propositional(["p"]).unwrap();
        let low = Vocabulary::propositional(["a"]).unwrap();

        let missing = RefinementMapping::new(high.clone(), low.clone(), &[]);
        assert_eq!(missing.unwrap_err(), MappingError::UnmappedAtom("p".into()));

        let twice = RefinementMapping::new(
            high.clone(),
            low.clone(),
            &[
                MappingEntry::new(p("p"), p("a")),
                MappingEntry::new(p("p"), Formula::not(p("a"))),
            ],
        );
        assert!(matches!(twice.unwrap_err(), MappingError::DuplicateCoverage { .. }));

        let bad_target = RefinementMapping::new(
            high,
            low,
            &[MappingEntry::new(p("p"), p("zzz"))],
        );
        assert!(matches!(bad_target.unwrap_err(), MappingError::InvalidTarget { .. }));
    }

    #[test]
    fn separability_is_pairwise_target_disjointness() {
        assert!(difficulty_mapping().is_separable());

        let high = Vocabulary::propositional(["p", "q"]).unwrap();
        let low = Vocabulary::propositional(["a", "b", "c"]).unwrap();
        let overlapping = RefinementMapping::new(
            high.clone(),
            low.clone(),
            &[
                MappingEntry::new(p("p"), Formula::or([p("a"), p("b")])),
                MappingEntry::new(p("q"), Formula::or([p("b"), p("c")])),
            ],
        )
        .unwrap();
        assert!(!overlapping.is_separable());

        let identity = RefinementMapping::identity(low);
        assert!(identity.is_separable());
    }

    #[test]
    fn induced_profile_evaluates_targets() {
        let high = Vocabulary::propositional(["p"]).unwrap();
        let low = Vocabulary::propositional(["a", "b"]).unwrap();
        let m = RefinementMapping::new(
            high,
            low.clone(),
            &[MappingEntry::new(p("p"), Formula::and([p("a"), p("b")]))],
        )
        .unwrap();

        let ml = Model::new(low.universe(), vec![true, false]);
        let profile = m.induced_profile(&ml).unwrap();
        assert_eq!(profile.to_string(), "{}");
        assert!(m.is_isomorphic(&profile, &ml).unwrap());

        let flipped = Model::new(m.high_universe().clone(), vec![true]);
        assert!(!m.is_isomorphic(&flipped, &ml).unwrap());
    }

    #[test]
    fn identity_profile_is_the_model_itself() {
        let vocab = Vocabulary::propositional(["a", "b"]).unwrap();
        let m = RefinementMapping::identity(vocab.clone());
        let model = Model::new(vocab.universe(), vec![false, true]);
        assert_eq!(m.induced_profile(&model).unwrap(), model);
    }
}
