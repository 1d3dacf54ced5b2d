//! Verifying that one weighted theory abstracts another.
//!
//! Given a high-level theory `Δh`, a low-level theory `Δl`, and a
//! refinement mapping `m`, six nested abstraction classes are decided:
//!
//! * **sound** — the profile induced by every low-level model satisfies
//!   the high-level theory (the abstraction never invents behaviour);
//! * **complete** — every high-level model has an isomorphic low-level
//!   partner (the abstraction never loses behaviour);
//! * **weighted sound / weighted complete** — the unweighted property
//!   plus transfer of positive probability across the mapping, literal by
//!   literal;
//! * **weakly exact** — probabilities are preserved outright:
//!   `Pr(φ, Δh, wh) = Pr(m(φ), Δl, wl)` for every high-level formula `φ`;
//! * **weighted exact** — sound, complete, and weakly exact at once.
//!
//! Each check returns a three-valued [`Verdict`]: `holds`, `fails` with a
//! concrete [`Witness`], or `skipped` with a reason when the exact
//! procedure would have to enumerate more atoms than the caller's cap
//! allows. Verdicts are decided or skipped, never guessed.
//!
//! [`classify`] runs all six. Where it can, it substitutes cheap
//! per-literal certificates for the exponential procedures — but the two
//! positive certificates ([`sufficient_complete`] and
//! [`literal_prob_match`]) are only conclusive when the instance
//! factorizes into independent mapping blocks, so their "yes" answers are
//! trusted in that regime alone. Their "no" answers come with genuine
//! counterexamples and are accepted unconditionally. The unit tests keep
//! minimal coupled instances on which the certificates would mislabel the
//! abstraction if trusted blindly.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::lang::{
    entails, entails_with_countermodel, find_model, is_satisfiable, for_each_model, Formula,
    GroundAtom, LangError, Literal, Model, Theory, Universe,
};
use crate::mapping::{MappingError, RefinementMapping};
use crate::wmc::{model_weight, Probability, Value, WeightFn, WmcError, WmcSession};

/// The six abstraction classes, in increasing order of strength along
/// each chain (weighted exact implies everything else).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbstractionClass {
    Sound,
    Complete,
    WeightedSound,
    WeightedComplete,
    WeakExact,
    WeightedExact,
}

impl AbstractionClass {
    pub const ALL: [AbstractionClass; 6] = [
        AbstractionClass::Sound,
        AbstractionClass::Complete,
        AbstractionClass::WeightedSound,
        AbstractionClass::WeightedComplete,
        AbstractionClass::WeakExact,
        AbstractionClass::WeightedExact,
    ];
}

impl fmt::Display for AbstractionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AbstractionClass::Sound => "sound",
            AbstractionClass::Complete => "complete",
            AbstractionClass::WeightedSound => "weighted sound",
            AbstractionClass::WeightedComplete => "weighted complete",
            AbstractionClass::WeakExact => "weakly exact",
            AbstractionClass::WeightedExact => "weighted exact",
        };
        f.write_str(name)
    }
}

/// A concrete refutation of an abstraction class.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A model of the low-level theory whose induced profile falsifies
    /// the high-level theory (refutes soundness).
    LowModel(Model),
    /// A model of the high-level theory with no isomorphic low-level
    /// partner (refutes completeness).
    HighModel(Model),
    /// A high-level assignment whose model formula carries a different
    /// probability than its image (refutes weak exactness).
    ModelProbability { model: Model, high: Probability, low: Probability },
    /// A literal whose probability — or whose positive-probability
    /// status — disagrees between the two levels under the mapping.
    Literal { literal: Literal, high: Probability, low: Probability },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::LowModel(m) => write!(f, "low-level model {m}"),
            Witness::HighModel(m) => write!(f, "high-level model {m}"),
            Witness::ModelProbability { model, high, low } => write!(
                f,
                "high-level model {model} has probability {high} but its image has {low}"
            ),
            Witness::Literal { literal, high, low } => write!(
                f,
                "literal `{literal}` has probability {high} but its image has {low}"
            ),
        }
    }
}

/// The outcome of one check: decided one way or the other, or skipped
/// with an explanation — never guessed.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
    Skipped(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn skipped(&self) -> bool {
        matches!(self, Verdict::Skipped(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("holds"),
            Verdict::Fails(w) => write!(f, "fails ({w})"),
            Verdict::Skipped(reason) => write!(f, "skipped ({reason})"),
        }
    }
}

/// Verdicts for all six classes plus two facts about how they were
/// reached.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionReport {
    pub sound: Verdict,
    pub complete: Verdict,
    pub weighted_sound: Verdict,
    pub weighted_complete: Verdict,
    pub weak_exact: Verdict,
    pub weighted_exact: Verdict,
    /// Whether the mapping's targets are pairwise atom-disjoint.
    pub separable: bool,
    /// Whether any verdict came from a per-literal certificate instead of
    /// the exact procedure.
    pub fast_path_used: bool,
}

impl AbstractionReport {
    pub fn verdict(&self, class: AbstractionClass) -> &Verdict {
        match class {
            AbstractionClass::Sound => &self.sound,
            AbstractionClass::Complete => &self.complete,
            AbstractionClass::WeightedSound => &self.weighted_sound,
            AbstractionClass::WeightedComplete => &self.weighted_complete,
            AbstractionClass::WeakExact => &self.weak_exact,
            AbstractionClass::WeightedExact => &self.weighted_exact,
        }
    }

    /// The downward implications between the classes, asserted on every
    /// finished report. A violation is a bug in the checker, never in the
    /// instance.
    fn assert_invariants(&self) {
        if self.weighted_exact.holds() {
            for class in AbstractionClass::ALL {
                assert!(
                    self.verdict(class).holds(),
                    "internal inconsistency: weighted exactness holds but {class} does not"
                );
            }
        }
        if self.weighted_sound.holds() {
            assert!(
                self.sound.holds(),
                "internal inconsistency: weighted soundness holds but soundness does not"
            );
        }
        if self.weighted_complete.holds() {
            assert!(
                self.complete.holds(),
                "internal inconsistency: weighted completeness holds but completeness does not"
            );
        }
    }
}

/// Errors from the abstraction checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(
        "the mapping is not separable, so the per-literal certificate does \
         not apply; use the exact check"
    )]
    NotSeparable,
    #[error("the mapping's {side}-level universe does not match the {side}-level theory")]
    UniverseMismatch { side: &'static str },
    #[error(transparent)]
    Wmc(#[from] WmcError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

fn validate(high: &Theory, low: &Theory, m: &RefinementMapping) -> Result<(), CheckError> {
    if high.universe().as_ref() != m.high_universe().as_ref() {
        return Err(CheckError::UniverseMismatch { side: "high" });
    }
    if low.universe().as_ref() != m.low_universe().as_ref() {
        return Err(CheckError::UniverseMismatch { side: "low" });
    }
    Ok(())
}

/// High-level literals in canonical order: universe order, the positive
/// literal before the negative one. Witness searches follow this order,
/// so the reported literal is deterministic.
fn literals_in_order(universe: &Universe) -> impl Iterator<Item = Literal> + '_ {
    universe
        .atoms()
        .iter()
        .flat_map(|atom| [Literal::pos(atom.clone()), Literal::neg(atom.clone())])
}

/// The image `m(d)` of a high-level literal.
fn mapped_literal(m: &RefinementMapping, lit: &Literal) -> Result<Formula, CheckError> {
    let target = m.target(&lit.atom)?.clone();
    Ok(if lit.positive { target } else { Formula::not(target) })
}

/// The image of a high-level model's model formula, one conjunct per
/// atom: `m(p)` where the model makes `p` true, `¬m(p)` where it does
/// not.
fn image_constraints(
    m: &RefinementMapping,
    high_model: &Model,
) -> Result<Vec<Formula>, CheckError> {
    let mut out = Vec::with_capacity(m.high_universe().len());
    for (atom, target) in m.pairs() {
        let constraint = if high_model.truth(atom)? {
            target.clone()
        } else {
            Formula::not(target.clone())
        };
        out.push(constraint);
    }
    Ok(out)
}

/// Soundness: the profile induced by every model of the low-level theory
/// satisfies the high-level theory.
///
/// Decided exactly by the single entailment `Δl ⊨ m(⋀ Δh)`: a low-level
/// model satisfies `m(φ)` precisely when its induced profile satisfies
/// `φ` (the image is built by substituting targets for atoms, so the two
/// evaluations agree by induction on `φ`). No separability is required,
/// no enumeration is involved, and the check never skips. A countermodel
/// of the entailment is exactly a low-level witness.
pub fn check_sound(
    high: &Theory,
    low: &Theory,
    m: &RefinementMapping,
) -> Result<Verdict, CheckError> {
    validate(high, low, m)?;
    let image = m.apply(&high.conjunction())?;
    match entails_with_countermodel(low, &image)? {
        None => Ok(Verdict::Holds),
        Some(model) => Ok(Verdict::Fails(Witness::LowModel(model))),
    }
}

/// Completeness: every model of the high-level theory has an isomorphic
/// low-level partner.
///
/// Decided by enumerating the high-level models and asking, for each,
/// whether the low-level theory stays satisfiable under that model's
/// image constraints. Skips (rather than guesses) when the high-level
/// universe has more than `cap` atoms; [`classify`] may still decide such
/// instances through the per-literal certificate.
pub fn check_complete(
    high: &Theory,
    low: &Theory,
    m: &RefinementMapping,
    cap: u32,
) -> Result<Verdict, CheckError> {
    validate(high, low, m)?;
    let n = high.universe().len();
    if n as u64 > cap as u64 || n > 63 {
        return Ok(Verdict::Skipped(skip_reason(n, cap)));
    }
    let mut unpartnered: Option<Model> = None;
    let mut error: Option<CheckError> = None;
    for_each_model(high, cap, |mh| {
        match has_partner(low, m, mh) {
            Ok(true) => true,
            Ok(false) => {
                unpartnered = Some(mh.clone());
                false
            }
            Err(e) => {
                error = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = error {
        return Err(e);
    }
    Ok(match unpartnered {
        Some(mh) => Verdict::Fails(Witness::HighModel(mh)),
        None => Verdict::Holds,
    })
}

fn has_partner(low: &Theory, m: &RefinementMapping, mh: &Model) -> Result<bool, CheckError> {
    let constraints = image_constraints(m, mh)?;
    let refs: Vec<&Formula> = constraints.iter().collect();
    Ok(is_satisfiable(low, &refs)?)
}

fn skip_reason(atoms: usize, cap: u32) -> String {
    format!("{atoms} high-level atoms exceed the enumeration cap of {cap}")
}

/// Weighted soundness: soundness plus, for every high-level literal `d`,
/// `Pr(m(d), Δl, wl) > 0 ⇒ Pr(d, Δh, wh) > 0` — whatever the low level
/// considers possible, the high level must not rule out.
///
/// Fails with the unweighted witness when soundness already fails, and
/// with the offending literal (and both probabilities) otherwise. Errors
/// when either partition function is zero.
pub fn check_weighted_sound(
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
) -> Result<Verdict, CheckError> {
    validate(high, low, m)?;
    let mut sessions = Sessions::open(high, wh, low, wl)?;
    let sound = check_sound(high, low, m)?;
    weighted_from_unweighted(sound, &mut sessions, m, Direction::LowToHigh, "soundness")
}

/// Weighted completeness: completeness plus, for every high-level literal
/// `d`, `Pr(d, Δh, wh) > 0 ⇒ Pr(m(d), Δl, wl) > 0` — whatever the high
/// level considers possible must stay possible below.
///
/// The literal condition alone can refute the class even when the
/// unweighted check had to be skipped; certifying it, though, needs the
/// unweighted verdict, so `holds` requires both.
pub fn check_weighted_complete(
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
    cap: u32,
) -> Result<Verdict, CheckError> {
    validate(high, low, m)?;
    let mut sessions = Sessions::open(high, wh, low, wl)?;
    let complete = check_complete(high, low, m, cap)?;
    weighted_from_unweighted(complete, &mut sessions, m, Direction::HighToLow, "completeness")
}

/// Extends an unweighted verdict with the literal positivity condition in
/// the given direction.
fn weighted_from_unweighted(
    unweighted: Verdict,
    sessions: &mut Sessions<'_>,
    m: &RefinementMapping,
    direction: Direction,
    name: &str,
) -> Result<Verdict, CheckError> {
    if let Verdict::Fails(w) = unweighted {
        return Ok(Verdict::Fails(w));
    }
    if let Some(witness) = sessions.positivity_violation(m, direction)? {
        return Ok(Verdict::Fails(witness));
    }
    Ok(match unweighted {
        Verdict::Holds => Verdict::Holds,
        Verdict::Skipped(reason) => {
            Verdict::Skipped(format!("the unweighted {name} check was skipped: {reason}"))
        }
        Verdict::Fails(_) => unreachable!("failures returned above"),
    })
}

/// Weak exactness: `Pr(φ, Δh, wh) = Pr(m(φ), Δl, wl)` for every
/// high-level formula `φ`.
///
/// Decided at model-formula granularity: every formula is equivalent to
/// the disjunction of the model formulas of the assignments satisfying
/// it, the mapping preserves equivalence (it substitutes uniformly), and
/// images of distinct model formulas exclude each other — so both sides
/// of the equation are sums over assignments, and equality for every
/// formula reduces to equality on the 2^n model formulas. Assignments
/// falsifying the high-level theory are included: their probability is
/// zero, and their images must carry zero too. Skips past the cap.
pub fn check_weak_exact(
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
    cap: u32,
) -> Result<Verdict, CheckError> {
    validate(high, low, m)?;
    let mut sessions = Sessions::open(high, wh, low, wl)?;
    sessions.weak_exact_scan(high, wh, m, cap)
}

/// Weighted exactness: sound, complete, and weakly exact at once. Fails
/// with the first failing constituent's witness; skips if a constituent
/// was skipped and none failed.
pub fn check_weighted_exact(
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
    cap: u32,
) -> Result<Verdict, CheckError> {
    let sound = check_sound(high, low, m)?;
    let complete = check_complete(high, low, m, cap)?;
    let weak = check_weak_exact(high, wh, low, wl, m, cap)?;
    Ok(combine_weighted_exact(&sound, &complete, &weak))
}

fn combine_weighted_exact(sound: &Verdict, complete: &Verdict, weak_exact: &Verdict) -> Verdict {
    let parts =
        [(sound, "soundness"), (complete, "completeness"), (weak_exact, "weak exactness")];
    for (verdict, _) in &parts {
        if let Verdict::Fails(w) = verdict {
            return Verdict::Fails(w.clone());
        }
    }
    for (verdict, name) in &parts {
        if let Verdict::Skipped(reason) = verdict {
            return Verdict::Skipped(format!("{name} was skipped: {reason}"));
        }
    }
    Verdict::Holds
}

/// The per-sentence soundness certificate for separable mappings:
/// `Δl ⊨ m(φ)` for every sentence `φ` of the high-level theory.
///
/// This is the published form of the condition and insists on its stated
/// separability hypothesis; [`check_sound`] decides the same entailment
/// for arbitrary mappings.
pub fn sufficient_sound(
    high: &Theory,
    low: &Theory,
    m: &RefinementMapping,
) -> Result<bool, CheckError> {
    validate(high, low, m)?;
    if !m.is_separable() {
        return Err(CheckError::NotSeparable);
    }
    for sentence in high.sentences() {
        if !entails(low, &m.apply(sentence)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The per-literal completeness certificate for separable mappings: every
/// literal `d` satisfiable with the high-level theory keeps `m(d)`
/// satisfiable with the low-level theory.
///
/// A `false` answer genuinely refutes completeness — any model of
/// `Δh ∧ d` is unpartnered. A `true` answer certifies it only when the
/// instance also factorizes into independent mapping blocks (see
/// [`classify`]): with sentences coupling atoms across blocks, the
/// condition can pass while completeness fails, and the tests keep a
/// two-atom instance doing exactly that. Outside the factorized regime,
/// fall back to [`check_complete`].
pub fn sufficient_complete(
    high: &Theory,
    low: &Theory,
    m: &RefinementMapping,
) -> Result<bool, CheckError> {
    validate(high, low, m)?;
    if !m.is_separable() {
        return Err(CheckError::NotSeparable);
    }
    Ok(complete_transfer_violation(high, low, m)?.is_none())
}

/// First literal violating the completeness transfer condition, in
/// canonical order.
fn complete_transfer_violation(
    high: &Theory,
    low: &Theory,
    m: &RefinementMapping,
) -> Result<Option<Literal>, CheckError> {
    for lit in literals_in_order(high.universe()) {
        let d = Formula::lit(&lit);
        if is_satisfiable(high, &[&d])? {
            let image = mapped_literal(m, &lit)?;
            if !is_satisfiable(low, &[&image])? {
                return Ok(Some(lit));
            }
        }
    }
    Ok(None)
}

/// The per-literal probability test for separable mappings:
/// `Pr(d, Δh, wh) = Pr(m(d), Δl, wl)` for every high-level literal `d`.
///
/// Necessary for weak exactness outright (a literal is a formula), so a
/// `false` refutes it for any mapping; sufficient only in the factorized
/// regime — see [`classify`] and the coupled counterexample in the tests.
pub fn literal_prob_match(
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
) -> Result<bool, CheckError> {
    validate(high, low, m)?;
    if !m.is_separable() {
        return Err(CheckError::NotSeparable);
    }
    let mut sessions = Sessions::open(high, wh, low, wl)?;
    Ok(sessions.literal_prob_violation(m)?.is_none())
}

/// Whether the instance factorizes into independent mapping blocks: every
/// high-level sentence mentions at most one atom, and every low-level
/// sentence stays inside one block — the atoms of a single target, or the
/// atoms mentioned by no target at all. In this regime both distributions
/// are products over blocks, so the per-literal certificates multiply out
/// to the global properties and their positive answers can be trusted.
/// Outside it they cannot, and [`classify`] falls back to the exact
/// procedures. Only meaningful for separable mappings, where "the block
/// of an atom" is well defined.
fn product_form(high: &Theory, low: &Theory, m: &RefinementMapping) -> bool {
    if high.sentences().iter().any(|s| s.atoms().len() > 1) {
        return false;
    }
    let mut block: HashMap<GroundAtom, usize> = HashMap::new();
    for (idx, (_, target)) in m.pairs().enumerate() {
        for atom in target.atoms() {
            block.insert(atom, idx);
        }
    }
    // Atoms outside every target share one implicit block.
    const REST: usize = usize::MAX;
    for sentence in low.sentences() {
        let mut blocks =
            sentence.atoms().into_iter().map(|a| block.get(&a).copied().unwrap_or(REST));
        if let Some(first) = blocks.next() {
            if blocks.any(|b| b != first) {
                return false;
            }
        }
    }
    true
}

/// Direction of the positivity-transfer condition on literals.
#[derive(Clone, Copy)]
enum Direction {
    /// `Pr(m(d), Δl, wl) > 0 ⇒ Pr(d, Δh, wh) > 0` (weighted soundness).
    LowToHigh,
    /// `Pr(d, Δh, wh) > 0 ⇒ Pr(m(d), Δl, wl) > 0` (weighted completeness).
    HighToLow,
}

/// The pair of counting sessions a weighted check works with. Opening
/// them verifies both partition functions are positive, so every
/// probability drawn later is well defined.
struct Sessions<'a> {
    high: WmcSession<'a>,
    low: WmcSession<'a>,
}

impl<'a> Sessions<'a> {
    fn open(
        high: &'a Theory,
        wh: &'a WeightFn,
        low: &'a Theory,
        wl: &'a WeightFn,
    ) -> Result<Self, CheckError> {
        let mut high = WmcSession::new(high, wh)?;
        let mut low = WmcSession::new(low, wl)?;
        if high.partition()?.is_zero() || low.partition()?.is_zero() {
            return Err(CheckError::Wmc(WmcError::ZeroPartition));
        }
        Ok(Sessions { high, low })
    }

    /// Both probabilities of a literal: its own, and its image's.
    fn literal_probabilities(
        &mut self,
        m: &RefinementMapping,
        lit: &Literal,
    ) -> Result<(Probability, Probability), CheckError> {
        let d = Formula::lit(lit);
        let image = mapped_literal(m, lit)?;
        let ph = self.high.probability(&[&d])?;
        let pl = self.low.probability(&[&image])?;
        Ok((ph, pl))
    }

    /// First literal breaking positivity transfer in `direction`, in
    /// canonical order.
    fn positivity_violation(
        &mut self,
        m: &RefinementMapping,
        direction: Direction,
    ) -> Result<Option<Witness>, CheckError> {
        for lit in literals_in_order(m.high_universe()) {
            let (ph, pl) = self.literal_probabilities(m, &lit)?;
            let violated = match direction {
                Direction::LowToHigh => pl.is_positive() && ph.is_zero(),
                Direction::HighToLow => ph.is_positive() && pl.is_zero(),
            };
            if violated {
                return Ok(Some(Witness::Literal { literal: lit, high: ph, low: pl }));
            }
        }
        Ok(None)
    }

    /// First literal whose probability differs from its image's, in
    /// canonical order.
    fn literal_prob_violation(
        &mut self,
        m: &RefinementMapping,
    ) -> Result<Option<Witness>, CheckError> {
        for lit in literals_in_order(m.high_universe()) {
            let (ph, pl) = self.literal_probabilities(m, &lit)?;
            if !ph.approx_eq(&pl) {
                return Ok(Some(Witness::Literal { literal: lit, high: ph, low: pl }));
            }
        }
        Ok(None)
    }

    /// The exact weak-exactness scan over all 2^n high-level assignments,
    /// in canonical order.
    fn weak_exact_scan(
        &mut self,
        high: &Theory,
        wh: &WeightFn,
        m: &RefinementMapping,
        cap: u32,
    ) -> Result<Verdict, CheckError> {
        let universe = high.universe();
        let n = universe.len();
        if n as u64 > cap as u64 || n > 63 {
            return Ok(Verdict::Skipped(skip_reason(n, cap)));
        }
        let zh = self.high.partition()?;
        for mask in 0..(1u64 << n) {
            let bits: Vec<bool> = (0..n).map(|j| (mask >> (n - 1 - j)) & 1 == 0).collect();
            let model = Model::new(universe.clone(), bits);
            let ph = if high.satisfied_by(&model)? {
                Probability::new(model_weight(&model, wh) / zh.clone())
            } else {
                Probability::new(Value::zero())
            };
            let constraints = image_constraints(m, &model)?;
            let refs: Vec<&Formula> = constraints.iter().collect();
            let pl = self.low.probability(&refs)?;
            if !ph.approx_eq(&pl) {
                return Ok(Verdict::Fails(Witness::ModelProbability {
                    model,
                    high: ph,
                    low: pl,
                }));
            }
        }
        Ok(Verdict::Holds)
    }
}

/// Runs all six checks and assembles the report.
///
/// Certificates are used asymmetrically. A failed completeness transfer
/// or a literal probability mismatch always produces a genuine
/// counterexample, so refutations are accepted for any mapping. Positive
/// certificate answers are accepted only when the mapping is separable
/// *and* the instance factorizes into independent blocks; everything else
/// falls back to the exact procedures, or to a skipped verdict past the
/// enumeration cap. The factorized fast paths can therefore decide
/// instances far beyond the cap, but no verdict is ever guessed.
///
/// # Panics
///
/// Asserts the downward implications on the finished report (weighted
/// exactness implies all other classes, and each weighted class implies
/// its unweighted counterpart); a violation is a checker bug.
pub fn classify(
    high: &Theory,
    wh: &WeightFn,
    low: &Theory,
    wl: &WeightFn,
    m: &RefinementMapping,
    cap: u32,
) -> Result<AbstractionReport, CheckError> {
    validate(high, low, m)?;
    let separable = m.is_separable();
    // The certificates reason blockwise, which needs at least one block:
    // with an empty high-level universe they are vacuously positive while
    // completeness may still fail (the empty profile needs a low-level
    // model), so empty instances take the — trivial — exact route.
    let factorized =
        separable && high.universe().len() > 0 && product_form(high, low, m);
    let mut fast_path_used = false;

    let mut sessions = Sessions::open(high, wh, low, wl)?;

    let sound = check_sound(high, low, m)?;

    let complete = if separable {
        match complete_transfer_violation(high, low, m)? {
            Some(lit) => {
                fast_path_used = true;
                let d = Formula::lit(&lit);
                let model = find_model(high, &[&d])?
                    .expect("the violating literal is satisfiable with the high-level theory");
                Verdict::Fails(Witness::HighModel(model))
            }
            None if factorized => {
                fast_path_used = true;
                Verdict::Holds
            }
            None => check_complete(high, low, m, cap)?,
        }
    } else {
        check_complete(high, low, m, cap)?
    };

    let weak_exact = match sessions.literal_prob_violation(m)? {
        Some(witness) => {
            fast_path_used = true;
            Verdict::Fails(witness)
        }
        None if factorized => {
            fast_path_used = true;
            Verdict::Holds
        }
        None => sessions.weak_exact_scan(high, wh, m, cap)?,
    };

    let weighted_sound = weighted_from_unweighted(
        sound.clone(),
        &mut sessions,
        m,
        Direction::LowToHigh,
        "soundness",
    )?;
    let weighted_complete = weighted_from_unweighted(
        complete.clone(),
        &mut sessions,
        m,
        Direction::HighToLow,
        "completeness",
    )?;
    let weighted_exact = combine_weighted_exact(&sound, &complete, &weak_exact);

    let report = AbstractionReport {
        sound,
        complete,
        weighted_sound,
        weighted_complete,
        weak_exact,
        weighted_exact,
        separable,
        fast_path_used,
    };
    report.assert_invariants();
    Ok(report)
}
