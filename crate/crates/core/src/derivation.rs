//! Deriving abstractions instead of merely checking them.
//!
//! Three constructions build correct-by-construction abstractions:
//! [`abstract_clause`] collapses a clause that occurs as a unit into a
//! single fresh atom (weighted exact by construction),
//! [`abstract_dichotomy`] reduces the whole theory to one event/non-event
//! atom, and [`compose`]/[`decompose`] cut a theory into atom-disjoint
//! components and stitch componentwise abstractions back together.
//!
//! When no construction applies, [`search`] enumerates a finite, caller-
//! bounded hypothesis space of (theory, mapping) candidates in a fixed
//! canonical order, derives candidate weights from mapped-literal
//! marginals, prefilters with the cheap per-literal refuters, and
//! confirms every would-be success with a full [`classify`] run — a
//! candidate is never declared good on the strength of a certificate
//! alone. Success and failure are therefore decidable, reproducible
//! answers relative to the space.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::checker::{
    classify, literal_prob_match, sufficient_complete, sufficient_sound, AbstractionClass,
    AbstractionReport, CheckError,
};
use crate::lang::{
    Formula, GroundAtom, LangError, Literal, Predicate, Theory, Universe, Vocabulary,
};
use crate::mapping::{MappingEntry, MappingError, RefinementMapping};
use crate::wmc::{probability, Value, WeightFn, WmcError, WmcSession, NegationDefault};

/// Errors from the derivation operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeriveError {
    #[error("cannot abstract an empty clause (it is unsatisfiable)")]
    EmptyClause,
    #[error("cannot abstract a tautological clause (its complement covers no assignment)")]
    TautologicalClause,
    #[error(
        "atom `{atom}` of the abstracted clause occurs in sentence `{sentence}` \
         outside an occurrence of the clause"
    )]
    OccurrenceViolation { atom: String, sentence: String },
    #[error("sentence `{sentence}` is not a clause; clause abstraction expects a CNF theory")]
    NotAClause { sentence: String },
    #[error("fresh atom `{name}` collides with a retained atom")]
    NameCollision { name: String },
    #[error("the parts' {side}-level vocabularies overlap on {kind} `{name}`")]
    VocabOverlap { side: &'static str, kind: &'static str, name: String },
    #[error("invalid hypothesis space: {detail}")]
    InvalidSpace { detail: String },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Wmc(#[from] WmcError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

/// Flattens a ground atom to a propositional stand-in carrying the same
/// printed name. Propositional atoms are untouched, so on propositional
/// theories the flattening is the identity.
fn flatten_atom(atom: &GroundAtom) -> GroundAtom {
    if atom.args.is_empty() {
        atom.clone()
    } else {
        GroundAtom::prop(atom.to_string())
    }
}

/// Reads a sentence as a clause (a disjunction of literals).
fn sentence_as_clause(sentence: &Formula) -> Result<Vec<Literal>, DeriveError> {
    let not_a_clause = || DeriveError::NotAClause { sentence: sentence.to_string() };
    if let Some(lit) = sentence.as_literal() {
        return Ok(vec![lit]);
    }
    match sentence {
        Formula::Or(children) => children
            .iter()
            .map(|c| c.as_literal().ok_or_else(not_a_clause))
            .collect(),
        _ => Err(not_a_clause()),
    }
}

fn clause_formula(clause: &[Literal]) -> Formula {
    Formula::or(clause.iter().map(Formula::lit))
}

/// Collapses a clause `λ` into a fresh atom `t`.
///
/// The precondition is syntactic: every sentence of the (CNF) low-level
/// theory either avoids `λ`'s atoms entirely or has the shape `λ ∨ ψ`
/// with `ψ` over the remaining atoms. The high-level theory replaces each
/// such occurrence with `t ∨ ψ` and drops `λ`'s atoms from the
/// vocabulary; the mapping sends `t` to `λ` and every retained atom to
/// itself; the weight of `¬t` is the weight of the single assignment of
/// `λ`'s atoms falsifying the clause, and `t` receives the rest of that
/// block's mass. The result is weighted exact relative to the mapping and
/// preserves the partition function exactly — both facts are enforced by
/// the property suites rather than re-checked here.
///
/// Sorted atoms are flattened to propositional stand-ins with the same
/// printed names (the vocabulary loses the dropped atoms, which a sorted
/// signature cannot express).
pub fn abstract_clause(
    low: &Theory,
    wl: &WeightFn,
    lambda: &[Literal],
    t: &str,
) -> Result<(Theory, WeightFn, RefinementMapping), DeriveError> {
    // Normalize λ and rule out the degenerate shapes.
    let mut lambda_set: Vec<Literal> = Vec::new();
    for lit in lambda {
        if !low.universe().contains(&lit.atom) {
            return Err(LangError::AtomOutsideUniverse(lit.atom.to_string()).into());
        }
        if lambda_set.iter().any(|l| *l == lit.complement()) {
            return Err(DeriveError::TautologicalClause);
        }
        if !lambda_set.contains(lit) {
            lambda_set.push(lit.clone());
        }
    }
    if lambda_set.is_empty() {
        return Err(DeriveError::EmptyClause);
    }
    let abstracted: HashSet<&GroundAtom> = lambda_set.iter().map(|l| &l.atom).collect();

    // Split each sentence into "retained" or "λ ∨ ψ".
    enum Shape {
        Retained(Vec<Literal>),
        Replaced(Vec<Literal>), // the residue ψ
    }
    let mut shapes = Vec::with_capacity(low.sentences().len());
    for sentence in low.sentences() {
        let clause = sentence_as_clause(sentence)?;
        let touches = clause.iter().any(|l| abstracted.contains(&l.atom));
        if !touches {
            shapes.push(Shape::Retained(clause));
            continue;
        }
        let mut residue = Vec::new();
        for lit in &clause {
            if lambda_set.contains(lit) {
                continue;
            }
            if abstracted.contains(&lit.atom) {
                return Err(DeriveError::OccurrenceViolation {
                    atom: lit.atom.to_string(),
                    sentence: sentence.to_string(),
                });
            }
            residue.push(lit.clone());
        }
        // All of λ must be present, not just some of it.
        if let Some(missing) = lambda_set.iter().find(|l| !clause.contains(l)) {
            return Err(DeriveError::OccurrenceViolation {
                atom: missing.atom.to_string(),
                sentence: sentence.to_string(),
            });
        }
        shapes.push(Shape::Replaced(residue));
    }

    // High-level vocabulary: a fresh propositional atom per retained
    // atom, plus t.
    let retained: Vec<&GroundAtom> =
        low.universe().atoms().iter().filter(|a| !abstracted.contains(a)).collect();
    let mut rename: HashMap<GroundAtom, GroundAtom> = HashMap::new();
    let mut names: Vec<String> = Vec::with_capacity(retained.len() + 1);
    for atom in &retained {
        let flat = flatten_atom(atom);
        if flat.predicate == t {
            return Err(DeriveError::NameCollision { name: t.to_string() });
        }
        names.push(flat.predicate.clone());
        rename.insert((*atom).clone(), flat);
    }
    names.push(t.to_string());
    let high_vocab = Vocabulary::propositional(names)?;
    let t_atom = GroundAtom::prop(t);

    let rename_lit = |l: &Literal| Literal { atom: rename[&l.atom].clone(), positive: l.positive };
    let sentences: Vec<Formula> = shapes
        .iter()
        .map(|shape| match shape {
            Shape::Retained(clause) => {
                clause_formula(&clause.iter().map(rename_lit).collect::<Vec<_>>())
            }
            Shape::Replaced(residue) => {
                let mut lits = vec![Formula::atom(t_atom.clone())];
                lits.extend(residue.iter().map(|l| Formula::lit(&rename_lit(l))));
                Formula::or(lits)
            }
        })
        .collect();
    let high = Theory::new(high_vocab.clone(), sentences)?;

    // Weights: retained atoms keep theirs; ¬t gets the weight of the one
    // assignment falsifying λ, t the rest of the block's mass.
    let mut falsifying = Value::one();
    let mut block_mass = Value::one();
    for lit in &lambda_set {
        let pos = wl.weight(&Literal::pos(lit.atom.clone()));
        let neg = wl.weight(&Literal::neg(lit.atom.clone()));
        block_mass = block_mass * (&pos + &neg);
        falsifying = falsifying * wl.weight(&lit.complement());
    }
    let mut weights: Vec<(Literal, Value)> = Vec::new();
    for atom in &retained {
        let target = rename[*atom].clone();
        weights.push((Literal::pos(target.clone()), wl.weight(&Literal::pos((*atom).clone()))));
        weights.push((Literal::neg(target), wl.weight(&Literal::neg((*atom).clone()))));
    }
    weights.push((Literal::pos(t_atom.clone()), &block_mass - &falsifying));
    weights.push((Literal::neg(t_atom.clone()), falsifying));
    let wh = WeightFn::new(weights, NegationDefault::One)?;

    // Mapping: t ↦ λ, retained atoms to themselves.
    let mut entries: Vec<MappingEntry> = retained
        .iter()
        .map(|atom| {
            MappingEntry::new(
                Formula::atom(rename[*atom].clone()),
                Formula::atom((*atom).clone()),
            )
        })
        .collect();
    entries.push(MappingEntry::new(Formula::atom(t_atom), clause_formula(&lambda_set)));
    let mapping = RefinementMapping::new(high_vocab, low.vocab().clone(), &entries)?;

    Ok((high, wh, mapping))
}

/// Collapses the whole theory onto a single dichotomy atom `t` standing
/// for an event `λ` (an arbitrary low-level formula); `¬t` stands for the
/// complementary event.
///
/// The weights are chosen so that `Pr(t) = Pr(λ, Δl, wl)` and
/// `Pr(¬t) = Pr(¬λ, Δl, wl)`. When one side of the dichotomy is outright
/// unsatisfiable with the theory, the high-level theory pins the other
/// side with a unit clause so that no high-level model is left without a
/// partner. Only queries over `{t, ¬t}` are meaningful against the
/// result.
pub fn abstract_dichotomy(
    low: &Theory,
    wl: &WeightFn,
    lambda: &Formula,
    t: &str,
) -> Result<(Theory, WeightFn, RefinementMapping), DeriveError> {
    let pr_event = probability(lambda, low, wl)?;
    let negated = Formula::not(lambda.clone());
    let pr_rest = probability(&negated, low, wl)?;

    let high_vocab = Vocabulary::propositional([t])?;
    let t_atom = GroundAtom::prop(t);
    let mut sentences = Vec::new();
    if crate::lang::find_model(low, &[lambda])?.is_none() {
        sentences.push(Formula::not(Formula::atom(t_atom.clone())));
    } else if crate::lang::find_model(low, &[&negated])?.is_none() {
        sentences.push(Formula::atom(t_atom.clone()));
    }
    let high = Theory::new(high_vocab.clone(), sentences)?;

    let wh = WeightFn::new(
        [
            (Literal::pos(t_atom.clone()), pr_event.into_value()),
            (Literal::neg(t_atom.clone()), pr_rest.into_value()),
        ],
        NegationDefault::One,
    )?;
    let mapping = RefinementMapping::new(
        high_vocab,
        low.vocab().clone(),
        &[MappingEntry::new(Formula::atom(t_atom), lambda.clone())],
    )?;
    Ok((high, wh, mapping))
}

/// Derives the one candidate weight function the search considers: each
/// high-level literal weighs what its image is worth below,
/// `wh(±p) = Pr(±m(p), Δl, wl)` — the mapped marginals of the low-level
/// distribution.
///
/// This is a guess, not a guarantee — on coupled instances the marginals
/// cannot reproduce the joint distribution, and the candidate fails the
/// later checks (the tests keep such an instance). It also means the
/// search cannot reach abstractions that need non-marginal weights, such
/// as a clause collapse whose block is correlated with retained atoms;
/// those are [`abstract_clause`]'s job, which picks its weights by mass
/// instead. The high-level theory argument is only consulted for its
/// universe.
pub fn derive_weights(
    m: &RefinementMapping,
    low: &Theory,
    wl: &WeightFn,
    high: &Theory,
) -> Result<WeightFn, DeriveError> {
    if high.universe().as_ref() != m.high_universe().as_ref() {
        return Err(CheckError::UniverseMismatch { side: "high" }.into());
    }
    let mut session = WmcSession::new(low, wl)?;
    let mut weights = Vec::with_capacity(2 * m.high_universe().len());
    for (atom, target) in m.pairs() {
        let pos = session.probability(&[target])?;
        let negated = Formula::not(target.clone());
        let neg = session.probability(&[&negated])?;
        weights.push((Literal::pos(atom.clone()), pos.into_value()));
        weights.push((Literal::neg(atom.clone()), neg.into_value()));
    }
    Ok(WeightFn::new(weights, NegationDefault::One)?)
}

/// The class a search must certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetClass {
    WeakExact,
    WeightedExact,
}

impl TargetClass {
    pub fn class(self) -> AbstractionClass {
        match self {
            TargetClass::WeakExact => AbstractionClass::WeakExact,
            TargetClass::WeightedExact => AbstractionClass::WeightedExact,
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.class().fmt(f)
    }
}

/// Candidate mapping targets, per high-level atom.
#[derive(Debug, Clone)]
pub enum MappingCandidates {
    /// An explicit candidate list per high-level atom name.
    Explicit(Vec<(String, Vec<Formula>)>),
    /// Every clause over the low-level atoms up to the given length, in
    /// canonical order.
    Clauses { max_len: usize },
}

impl Default for MappingCandidates {
    fn default() -> Self {
        MappingCandidates::Clauses { max_len: 3 }
    }
}

/// Bounds on candidate high-level theories.
#[derive(Debug, Clone, Copy)]
pub struct TheoryBound {
    pub max_clause_len: usize,
    pub max_sentences: usize,
}

/// A finite, deterministic space of abstraction candidates.
///
/// The search works over a propositional high-level signature. Partial
/// knowledge narrows the space: atoms named in `partial_mapping` admit
/// only the fixed target, and every candidate theory contains all of
/// `partial_theory`.
#[derive(Debug, Clone)]
pub struct HypothesisSpace {
    /// High-level atom names, in universe order.
    pub high_predicates: Vec<String>,
    pub mapping_candidates: MappingCandidates,
    pub theory_candidates: TheoryBound,
    /// Fixed targets (atom name, target formula) the mapping must extend.
    pub partial_mapping: Vec<(String, Formula)>,
    /// Clauses every candidate theory must contain.
    pub partial_theory: Vec<Formula>,
    pub target_class: TargetClass,
}

/// One derived abstraction, with the report that certified it.
#[derive(Debug, Clone)]
pub struct DerivedAbstraction {
    pub high: Theory,
    pub weights: WeightFn,
    pub mapping: RefinementMapping,
    pub report: AbstractionReport,
}

/// The outcome of a search: the first certified candidate in canonical
/// order, or exhaustion.
#[derive(Debug, Clone)]
pub enum DerivationOutcome {
    Success(Box<DerivedAbstraction>),
    Failure,
}

/// Identifier of the fixed candidate order, recorded in results so runs
/// can be compared across versions.
pub const SEARCH_ORDER: &str = "lexicographic-v1";

#[derive(Debug, Clone)]
pub struct DerivationResult {
    pub outcome: DerivationOutcome,
    pub candidates_tried: u64,
    /// The canonical-order identifier the candidates were visited in.
    pub search_order: &'static str,
}

/// Enumerates (mapping, theory) candidates in canonical order and returns
/// the first that verifiably belongs to the target class.
///
/// Candidates are weighted by [`derive_weights`], refuted early by the
/// per-literal tests where the mapping is separable, and — crucially —
/// confirmed by a full [`classify`] run before being declared a success:
/// the certificates alone are not trusted (they overreach on coupled
/// instances), so every success carries a report in which the target
/// class verifiably holds. A candidate whose exact checks would exceed
/// `cap` is passed over, never guessed at. Exhaustion is the `Failure`
/// value, not an error.
pub fn search(
    low: &Theory,
    wl: &WeightFn,
    space: &HypothesisSpace,
    cap: u32,
) -> Result<DerivationResult, DeriveError> {
    let mut found = None;
    let tried = run_search(low, wl, space, cap, &mut |candidate| {
        found = Some(candidate);
        false
    })?;
    Ok(DerivationResult {
        outcome: match found {
            Some(c) => DerivationOutcome::Success(Box::new(c)),
            None => DerivationOutcome::Failure,
        },
        candidates_tried: tried,
        search_order: SEARCH_ORDER,
    })
}

/// Like [`search`], but keeps going and returns every certified candidate
/// in canonical order, with the total candidate count.
pub fn search_all(
    low: &Theory,
    wl: &WeightFn,
    space: &HypothesisSpace,
    cap: u32,
) -> Result<(Vec<DerivedAbstraction>, u64), DeriveError> {
    let mut found = Vec::new();
    let tried = run_search(low, wl, space, cap, &mut |candidate| {
        found.push(candidate);
        true
    })?;
    Ok((found, tried))
}

fn run_search(
    low: &Theory,
    wl: &WeightFn,
    space: &HypothesisSpace,
    cap: u32,
    on_success: &mut dyn FnMut(DerivedAbstraction) -> bool,
) -> Result<u64, DeriveError> {
    let invalid = |detail: String| DeriveError::InvalidSpace { detail };
    let high_vocab = Vocabulary::propositional(space.high_predicates.iter().cloned())?;
    let high_universe = high_vocab.universe();

    // The low-level distribution must exist before anything is derived.
    let mut probe = WmcSession::new(low, wl)?;
    if probe.partition()?.is_zero() {
        return Err(WmcError::ZeroPartition.into());
    }
    drop(probe);

    // Per-atom candidate target lists, partial mapping first.
    let fixed: HashMap<&str, &Formula> =
        space.partial_mapping.iter().map(|(name, f)| (name.as_str(), f)).collect();
    for (name, target) in &space.partial_mapping {
        if !high_universe.contains(&GroundAtom::prop(name.clone())) {
            return Err(invalid(format!("partial mapping names unknown atom `{name}`")));
        }
        validate_target(low, target)?;
    }
    let generated: Vec<Formula>;
    let explicit: HashMap<&str, &[Formula]>;
    let mut candidates: Vec<Vec<&Formula>> = Vec::with_capacity(high_universe.len());
    match &space.mapping_candidates {
        MappingCandidates::Explicit(lists) => {
            for (name, list) in lists {
                if !high_universe.contains(&GroundAtom::prop(name.clone())) {
                    return Err(invalid(format!("candidate list names unknown atom `{name}`")));
                }
                for f in list {
                    validate_target(low, f)?;
                }
            }
            explicit = lists.iter().map(|(n, l)| (n.as_str(), l.as_slice())).collect();
            for atom in high_universe.atoms() {
                if let Some(target) = fixed.get(atom.predicate.as_str()) {
                    candidates.push(vec![target]);
                    continue;
                }
                let list = explicit
                    .get(atom.predicate.as_str())
                    .copied()
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| {
                        invalid(format!("atom `{atom}` has no mapping candidates"))
                    })?;
                candidates.push(dedup_refs(list));
            }
        }
        MappingCandidates::Clauses { max_len } => {
            if *max_len == 0 {
                return Err(invalid("mapping clause bound must be at least 1".into()));
            }
            generated = clause_candidates(low.universe(), *max_len)
                .iter()
                .map(|c| clause_formula(c))
                .collect();
            if generated.is_empty() {
                return Err(invalid("the low-level universe offers no clauses".into()));
            }
            for atom in high_universe.atoms() {
                match fixed.get(atom.predicate.as_str()) {
                    Some(target) => candidates.push(vec![target]),
                    None => candidates.push(generated.iter().collect()),
                }
            }
        }
    }

    // Candidate theory clauses, with the partial theory always included.
    let bound = space.theory_candidates;
    if space.partial_theory.len() > bound.max_sentences {
        return Err(invalid("partial theory exceeds the sentence bound".into()));
    }
    for sentence in &space.partial_theory {
        let clause = sentence_as_clause(sentence)
            .map_err(|_| invalid(format!("partial theory sentence `{sentence}` is not a clause")))?;
        if clause.len() > bound.max_clause_len {
            return Err(invalid(format!(
                "partial theory clause `{sentence}` exceeds the length bound"
            )));
        }
        for atom in sentence.atoms() {
            if !high_universe.contains(&atom) {
                return Err(invalid(format!("partial theory mentions unknown atom `{atom}`")));
            }
        }
    }
    let theory_clauses: Vec<Formula> = clause_candidates(&high_universe, bound.max_clause_len)
        .iter()
        .map(|c| clause_formula(c))
        .filter(|f| !space.partial_theory.contains(f))
        .collect();
    let extra_max = bound.max_sentences - space.partial_theory.len();

    // The candidate loop: mappings outermost, theories innermost, both
    // lexicographic.
    let mut tried: u64 = 0;
    let limits: Vec<usize> = candidates.iter().map(Vec::len).collect();
    let mut indices = vec![0usize; limits.len()];
    loop {
        let entries: Vec<MappingEntry> = high_universe
            .atoms()
            .iter()
            .zip(&indices)
            .enumerate()
            .map(|(i, (atom, &j))| {
                MappingEntry::new(Formula::atom(atom.clone()), candidates[i][j].clone())
            })
            .collect();
        let mapping = RefinementMapping::new(high_vocab.clone(), low.vocab().clone(), &entries)?;

        let mut subset = SubsetIter::new(theory_clauses.len(), extra_max);
        while let Some(pick) = subset.next() {
            let mut sentences = space.partial_theory.clone();
            sentences.extend(pick.iter().map(|&i| theory_clauses[i].clone()));
            let high = Theory::new(high_vocab.clone(), sentences)?;
            tried += 1;
            if let Some(candidate) = evaluate(low, wl, &high, &mapping, space.target_class, cap)? {
                if !on_success(candidate) {
                    return Ok(tried);
                }
            }
        }

        if !next_index(&mut indices, &limits) {
            break;
        }
    }
    Ok(tried)
}

/// Tests one (theory, mapping) candidate; `Some` means the target class
/// verifiably holds.
fn evaluate(
    low: &Theory,
    wl: &WeightFn,
    high: &Theory,
    mapping: &RefinementMapping,
    target: TargetClass,
    cap: u32,
) -> Result<Option<DerivedAbstraction>, DeriveError> {
    let weights = derive_weights(mapping, low, wl, high)?;

    // Cheap refuters first. Each "false" comes with a genuine
    // counterexample, so rejecting on them never loses a good candidate.
    if mapping.is_separable() {
        let refuted = match target {
            TargetClass::WeakExact => {
                match literal_prob_match(high, &weights, low, wl, mapping) {
                    Ok(ok) => !ok,
                    Err(CheckError::Wmc(WmcError::ZeroPartition)) => true,
                    Err(e) => return Err(e.into()),
                }
            }
            TargetClass::WeightedExact => {
                !sufficient_sound(high, low, mapping)?
                    || !sufficient_complete(high, low, mapping)?
                    || match literal_prob_match(high, &weights, low, wl, mapping) {
                        Ok(ok) => !ok,
                        Err(CheckError::Wmc(WmcError::ZeroPartition)) => true,
                        Err(e) => return Err(e.into()),
                    }
            }
        };
        if refuted {
            return Ok(None);
        }
    }

    // Confirmation: the certificates overreach on coupled instances, so
    // success is only ever declared on a full report.
    let report = match classify(high, &weights, low, wl, mapping, cap) {
        Ok(report) => report,
        Err(CheckError::Wmc(WmcError::ZeroPartition)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    if report.verdict(target.class()).holds() {
        Ok(Some(DerivedAbstraction {
            high: high.clone(),
            weights,
            mapping: mapping.clone(),
            report,
        }))
    } else {
        Ok(None)
    }
}

fn validate_target(low: &Theory, f: &Formula) -> Result<(), DeriveError> {
    let invalid = |detail: String| DeriveError::InvalidSpace { detail };
    if !f.is_ground() {
        return Err(invalid(format!("mapping candidate `{f}` is not ground")));
    }
    for atom in f.atoms() {
        if !low.universe().contains(&atom) {
            return Err(invalid(format!(
                "mapping candidate `{f}` mentions unknown low-level atom `{atom}`"
            )));
        }
    }
    Ok(())
}

fn dedup_refs(list: &[Formula]) -> Vec<&Formula> {
    let mut out: Vec<&Formula> = Vec::with_capacity(list.len());
    for f in list {
        if !out.iter().any(|g| *g == f) {
            out.push(f);
        }
    }
    out
}

/// All clauses over the universe up to `max_len` literals, in canonical
/// order: shorter first, then lexicographic atom combinations, then sign
/// patterns with positives first.
fn clause_candidates(universe: &Universe, max_len: usize) -> Vec<Vec<Literal>> {
    let n = universe.len();
    let mut out = Vec::new();
    for len in 1..=max_len.min(n) {
        let mut combo: Vec<usize> = (0..len).collect();
        loop {
            for signs in 0..(1u32 << len) {
                let clause: Vec<Literal> = combo
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| Literal {
                        atom: universe.atoms()[i].clone(),
                        positive: (signs >> j) & 1 == 0,
                    })
                    .collect();
                out.push(clause);
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    out
}

/// Advances a lexicographic index-combination; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let len = combo.len();
    let mut i = len;
    while i > 0 {
        i -= 1;
        if combo[i] < n - len + i {
            combo[i] += 1;
            for j in i + 1..len {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Advances a mixed-radix odometer (last digit fastest); false when
/// exhausted.
fn next_index(indices: &mut [usize], limits: &[usize]) -> bool {
    let mut i = indices.len();
    while i > 0 {
        i -= 1;
        indices[i] += 1;
        if indices[i] < limits[i] {
            return true;
        }
        indices[i] = 0;
    }
    false
}

/// Subsets of `0..n` of size 0 through `max`, smaller sizes first, each
/// size in lexicographic order.
struct SubsetIter {
    n: usize,
    max: usize,
    size: usize,
    combo: Vec<usize>,
    started: bool,
    done: bool,
}

impl SubsetIter {
    fn new(n: usize, max: usize) -> Self {
        SubsetIter { n, max: max.min(n), size: 0, combo: Vec::new(), started: false, done: false }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.combo); // the empty subset
        }
        if !self.combo.is_empty() && next_combination(&mut self.combo, self.n) {
            return Some(&self.combo);
        }
        // Move up a size.
        if self.size < self.max {
            self.size += 1;
            self.combo = (0..self.size).collect();
            return Some(&self.combo);
        }
        self.done = true;
        None
    }
}

/// Splits a theory into the connected components of its sentence-atom
/// sharing graph: two sentences share a component exactly when a chain of
/// shared atoms links them. Components are returned in order of first
/// appearance, pairwise atom-disjoint, and jointly carrying every
/// sentence. Atoms no sentence mentions are dropped. Sorted atoms are
/// flattened to propositional stand-ins with the same printed names, so
/// components of a propositional theory keep their atoms verbatim.
pub fn decompose(theory: &Theory) -> Result<Vec<Theory>, DeriveError> {
    let sentences = theory.sentences();
    // Union-find over sentence indices, linked through shared atoms.
    let mut parent: Vec<usize> = (0..sentences.len()).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut owner: HashMap<GroundAtom, usize> = HashMap::new();
    for (i, sentence) in sentences.iter().enumerate() {
        for atom in sentence.atoms() {
            match owner.get(&atom) {
                None => {
                    owner.insert(atom, i);
                }
                Some(&j) => {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    for i in 0..sentences.len() {
        let r = root(&mut parent, i);
        let group = groups.entry(r).or_default();
        if group.is_empty() {
            order.push(r);
        }
        group.push(i);
    }

    let mut components = Vec::with_capacity(order.len());
    for r in order {
        let indices = &groups[&r];
        // Component atoms in universe order, flattened.
        let mentioned: HashSet<GroundAtom> =
            indices.iter().flat_map(|&i| sentences[i].atoms()).collect();
        let mut rename: HashMap<GroundAtom, GroundAtom> = HashMap::new();
        let mut names = Vec::new();
        for atom in theory.universe().atoms() {
            if mentioned.contains(atom) {
                let flat = flatten_atom(atom);
                names.push(flat.predicate.clone());
                rename.insert(atom.clone(), flat);
            }
        }
        let vocab = Vocabulary::propositional(names)?;
        let component_sentences: Vec<Formula> =
            indices.iter().map(|&i| rename_atoms(&sentences[i], &rename)).collect();
        components.push(Theory::new(vocab, component_sentences)?);
    }
    Ok(components)
}

fn rename_atoms(f: &Formula, rename: &HashMap<GroundAtom, GroundAtom>) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Eq(_, _) => f.clone(),
        Formula::Atom { .. } => {
            let atom = f.as_ground_atom().expect("theory sentences are ground");
            Formula::atom(rename[&atom].clone())
        }
        Formula::Not(inner) => Formula::not(rename_atoms(inner, rename)),
        Formula::And(children) => {
            Formula::and(children.iter().map(|c| rename_atoms(c, rename)))
        }
        Formula::Or(children) => Formula::or(children.iter().map(|c| rename_atoms(c, rename))),
        Formula::Implies(a, b) => {
            Formula::implies(rename_atoms(a, rename), rename_atoms(b, rename))
        }
        Formula::Equiv(a, b) => Formula::equiv(rename_atoms(a, rename), rename_atoms(b, rename)),
        Formula::Forall(..) | Formula::Exists(..) => {
            unreachable!("theory sentences are ground")
        }
    }
}

/// Stitches componentwise abstractions into one abstraction of the
/// conjoined low-level theory: the high-level theory is the conjunction,
/// the weights and mapping the disjoint unions. Vocabularies must be
/// pairwise disjoint on both levels — sharing is an error, not a merge.
/// Abstraction classes transfer: if every part holds a class, so does the
/// composite (the property suites verify this on random instances).
pub fn compose(
    parts: &[(Theory, WeightFn, RefinementMapping)],
) -> Result<(Theory, WeightFn, RefinementMapping), DeriveError> {
    let mut high_sorts = Vec::new();
    let mut high_preds: Vec<Predicate> = Vec::new();
    let mut low_sorts = Vec::new();
    let mut low_preds: Vec<Predicate> = Vec::new();
    let mut seen: HashMap<(&'static str, &'static str, String), ()> = HashMap::new();
    let mut sentences = Vec::new();
    let mut weights: Vec<(Literal, Value)> = Vec::new();
    let mut entries: Vec<MappingEntry> = Vec::new();

    for (high, wh, m) in parts {
        for (side, vocab) in [("high", high.vocab()), ("low", m.low_vocab())] {
            for sort in vocab.sorts() {
                if seen.insert((side, "sort", sort.name.clone()), ()).is_some() {
                    return Err(DeriveError::VocabOverlap {
                        side,
                        kind: "sort",
                        name: sort.name.clone(),
                    });
                }
            }
            for pred in vocab.predicates() {
                if seen.insert((side, "predicate", pred.name.clone()), ()).is_some() {
                    return Err(DeriveError::VocabOverlap {
                        side,
                        kind: "predicate",
                        name: pred.name.clone(),
                    });
                }
            }
        }
        high_sorts.extend(high.vocab().sorts().iter().cloned());
        high_preds.extend(high.vocab().predicates().iter().cloned());
        low_sorts.extend(m.low_vocab().sorts().iter().cloned());
        low_preds.extend(m.low_vocab().predicates().iter().cloned());
        sentences.extend(high.sentences().iter().cloned());
        // Resolve both polarities explicitly so parts with different
        // negation defaults merge cleanly.
        for atom in high.universe().atoms() {
            for literal in [Literal::pos(atom.clone()), Literal::neg(atom.clone())] {
                let value = wh.weight(&literal);
                weights.push((literal, value));
            }
        }
        for (atom, target) in m.pairs() {
            entries.push(MappingEntry::new(Formula::atom(atom.clone()), target.clone()));
        }
    }

    let high_vocab = Vocabulary::new(high_sorts, high_preds)?;
    let low_vocab = Vocabulary::new(low_sorts, low_preds)?;
    let high = Theory::new(high_vocab.clone(), sentences)?;
    let wh = WeightFn::new(weights, NegationDefault::One)?;
    let mapping = RefinementMapping::new(high_vocab, low_vocab, &entries)?;
    Ok((high, wh, mapping))
}
