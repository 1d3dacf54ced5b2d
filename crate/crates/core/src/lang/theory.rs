//! Theories and grounding of quantified sentences over finite sorts.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::formula::{Formula, Term};
use super::model::Model;
use super::vocab::{GroundAtom, Universe, Vocabulary};
use super::LangError;

/// A vocabulary together with ground sentences over it.
///
/// The atom universe is induced by the vocabulary alone — every ground
/// instance of every declared predicate — so two theories over the same
/// vocabulary share a universe even if they mention different atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Theory {
    vocab: Vocabulary,
    universe: Arc<Universe>,
    sentences: Vec<Formula>,
}

impl Theory {
    /// Builds a theory from ground sentences, validating that every atom
    /// instantiates a declared predicate correctly.
    pub fn new(vocab: Vocabulary, sentences: Vec<Formula>) -> Result<Self, LangError> {
        let universe = vocab.universe();
        for sentence in &sentences {
            if !sentence.is_ground() {
                return Err(LangError::NotGround(sentence.to_string()));
            }
            for atom in sentence.atoms() {
                vocab.validate_atom(&atom)?;
            }
        }
        Ok(Theory { vocab, universe, sentences })
    }

    /// The empty theory over a vocabulary: every assignment is a model.
    pub fn empty(vocab: Vocabulary) -> Self {
        let universe = vocab.universe();
        Theory { vocab, universe, sentences: Vec::new() }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn sentences(&self) -> &[Formula] {
        &self.sentences
    }

    /// The conjunction of all sentences.
    pub fn conjunction(&self) -> Formula {
        Formula::and(self.sentences.iter().cloned())
    }

    /// Whether `model` satisfies every sentence.
    pub fn satisfied_by(&self, model: &Model) -> Result<bool, LangError> {
        for sentence in &self.sentences {
            if !model.evaluate(sentence)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sentence in &self.sentences {
            writeln!(f, "{sentence}")?;
        }
        Ok(())
    }
}

/// Grounds quantified sentences over the vocabulary's finite sorts and
/// builds the resulting theory.
///
/// `forall` expands to a conjunction over the sort's constants (`true` when
/// the sort is empty), `exists` to a disjunction (`false` when empty), and
/// term equalities resolve to constants and simplify away. Sentences that
/// ground to `true` are dropped; a sentence grounding to `false` is kept —
/// the theory really is unsatisfiable.
pub fn ground_theory(vocab: Vocabulary, sentences: Vec<Formula>) -> Result<Theory, LangError> {
    let mut ground_sentences = Vec::with_capacity(sentences.len());
    for sentence in &sentences {
        let mut env = HashMap::new();
        let grounded = ground(&vocab, &mut env, sentence)?;
        if grounded != Formula::True {
            ground_sentences.push(grounded);
        }
    }
    Theory::new(vocab, ground_sentences)
}

fn resolve(env: &HashMap<String, String>, term: &Term) -> Result<String, LangError> {
    match term {
        Term::Const(c) => Ok(c.clone()),
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| LangError::UnboundVariable(v.clone())),
    }
}

fn ground(
    vocab: &Vocabulary,
    env: &mut HashMap<String, String>,
    formula: &Formula,
) -> Result<Formula, LangError> {
    match formula {
        Formula::True => Ok(Formula::True),
        Formula::False => Ok(Formula::False),
        Formula::Atom { predicate, args } => {
            let mut resolved = Vec::with_capacity(args.len());
            for arg in args {
                resolved.push(resolve(env, arg)?);
            }
            let atom = GroundAtom { predicate: predicate.clone(), args: resolved };
            vocab.validate_atom(&atom)?;
            Ok(Formula::atom(atom))
        }
        Formula::Eq(a, b) => {
            let (a, b) = (resolve(env, a)?, resolve(env, b)?);
            Ok(if a == b { Formula::True } else { Formula::False })
        }
        Formula::Not(f) => Ok(Formula::not(ground(vocab, env, f)?)),
        Formula::And(fs) => {
            let parts: Result<Vec<_>, _> = fs.iter().map(|f| ground(vocab, env, f)).collect();
            Ok(Formula::and(parts?))
        }
        Formula::Or(fs) => {
            let parts: Result<Vec<_>, _> = fs.iter().map(|f| ground(vocab, env, f)).collect();
            Ok(Formula::or(parts?))
        }
        Formula::Implies(a, b) => Ok(Formula::implies(
            ground(vocab, env, a)?,
            ground(vocab, env, b)?,
        )),
        Formula::Equiv(a, b) => Ok(Formula::equiv(
            ground(vocab, env, a)?,
            ground(vocab, env, b)?,
        )),
        Formula::Forall(var, sort_name, body) | Formula::Exists(var, sort_name, body) => {
            let sort = vocab
                .sort(sort_name)
                .ok_or_else(|| LangError::UnknownSort(sort_name.clone()))?;
            let constants = sort.constants.clone();
            let mut parts = Vec::with_capacity(constants.len());
            for constant in constants {
                let shadowed = env.insert(var.clone(), constant);
                let part = ground(vocab, env, body);
                match shadowed {
                    Some(previous) => {
                        env.insert(var.clone(), previous);
                    }
                    None => {
                        env.remove(var);
                    }
                }
                parts.push(part?);
            }
            Ok(match formula {
                Formula::Forall(..) => Formula::and(parts),
                _ => Formula::or(parts),
            })
        }
    }
}

/// Calls `visit` for every model of the theory, in canonical order:
/// lexicographic by atom index with `true` before `false`, so the all-true
/// assignment comes first. Stops early if `visit` returns `false`.
///
/// Fails with [`LangError::UniverseTooLarge`] if the universe exceeds `cap`
/// atoms.
pub fn for_each_model(
    theory: &Theory,
    cap: u32,
    mut visit: impl FnMut(&Model) -> bool,
) -> Result<(), LangError> {
    let n = theory.universe().len();
    if n as u64 > cap as u64 || n > 63 {
        return Err(LangError::UniverseTooLarge { atoms: n, cap });
    }
    for mask in 0..(1u64 << n) {
        let bits: Vec<bool> = (0..n).map(|j| (mask >> (n - 1 - j)) & 1 == 0).collect();
        let model = Model::new(theory.universe().clone(), bits);
        if theory.satisfied_by(&model)? && !visit(&model) {
            return Ok(());
        }
    }
    Ok(())
}

/// All models of the theory in canonical order (see [`for_each_model`]).
///
/// Materializes the whole list; prefer [`for_each_model`] when scanning
/// large universes.
pub fn all_models(theory: &Theory, cap: u32) -> Result<Vec<Model>, LangError> {
    let mut models = Vec::new();
    for_each_model(theory, cap, |m| {
        models.push(m.clone());
        true
    })?;
    Ok(models)
}
