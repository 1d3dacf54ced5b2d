//! Models: total truth assignments over an atom universe.

use std::fmt;
use std::sync::Arc;

use super::formula::{Formula, Term};
use super::vocab::{GroundAtom, Literal, Universe};
use super::LangError;

/// A total assignment over a universe, one bit per atom in universe order.
///
/// Models carry their universe so witnesses stay self-describing after the
/// theory that produced them is gone.
#[derive(Debug, Clone)]
pub struct Model {
    universe: Arc<Universe>,
    bits: Vec<bool>,
}

impl Model {
    /// A model from explicit bits; `bits.len()` must match the universe.
    pub fn new(universe: Arc<Universe>, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), universe.len(), "model width must match universe");
        Model { universe, bits }
    }

    /// The model making exactly the given atoms true.
    pub fn from_true_atoms<'a>(
        universe: Arc<Universe>,
        atoms: impl IntoIterator<Item = &'a GroundAtom>,
    ) -> Result<Self, LangError> {
        let mut bits = vec![false; universe.len()];
        for atom in atoms {
            let idx = universe
                .index_of(atom)
                .ok_or_else(|| LangError::AtomOutsideUniverse(atom.to_string()))?;
            bits[idx as usize] = true;
        }
        Ok(Model { universe, bits })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Truth value of the atom at a universe index.
    pub fn get(&self, index: u32) -> bool {
        self.bits[index as usize]
    }

    /// Truth value of an atom, or an error if it is outside the universe.
    pub fn truth(&self, atom: &GroundAtom) -> Result<bool, LangError> {
        self.universe
            .index_of(atom)
            .map(|i| self.bits[i as usize])
            .ok_or_else(|| LangError::AtomOutsideUniverse(atom.to_string()))
    }

    /// Evaluates a ground formula under this model.
    pub fn evaluate(&self, formula: &Formula) -> Result<bool, LangError> {
        match formula {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom { .. } => {
                let atom = formula
                    .as_ground_atom()
                    .ok_or_else(|| LangError::NotGround(formula.to_string()))?;
                self.truth(&atom)
            }
            Formula::Eq(Term::Const(a), Term::Const(b)) => Ok(a == b),
            Formula::Eq(..) => Err(LangError::NotGround(formula.to_string())),
            Formula::Not(f) => Ok(!self.evaluate(f)?),
            Formula::And(fs) => {
                for f in fs {
                    if !self.evaluate(f)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if self.evaluate(f)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(a, b) => Ok(!self.evaluate(a)? || self.evaluate(b)?),
            Formula::Equiv(a, b) => Ok(self.evaluate(a)? == self.evaluate(b)?),
            Formula::Forall(..) | Formula::Exists(..) => {
                Err(LangError::NotGround(formula.to_string()))
            }
        }
    }

    /// The model formula: the conjunction of all universe literals as this
    /// model fixes them. It is satisfied by exactly this assignment.
    pub fn model_formula(&self) -> Formula {
        Formula::and(self.literals().map(|l| Formula::lit(&l)))
    }

    /// All universe literals with the polarity this model assigns.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.universe.atoms().iter().zip(&self.bits).map(|(atom, &b)| Literal {
            atom: atom.clone(),
            positive: b,
        })
    }

    /// The atoms this model makes true, in universe order.
    pub fn true_atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.universe
            .atoms()
            .iter()
            .zip(&self.bits)
            .filter_map(|(atom, &b)| b.then_some(atom))
    }
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && self.universe == other.universe
    }
}

impl Eq for Model {}

impl fmt::Display for Model {
    /// Renders the set of true atoms, e.g. `{iq(A), grades(A, 7)}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, atom) in self.true_atoms().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{atom}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Vocabulary;

    fn three_atoms() -> Arc<Universe> {
        Vocabulary::propositional(["p", "q", "r"]).unwrap().universe()
    }

    #[test]
    fn evaluate_connectives() {
        let universe = three_atoms();
        let model = Model::new(universe, vec![true, false, true]);
        let p = Formula::atom(GroundAtom::prop("p"));
        let q = Formula::atom(GroundAtom::prop("q"));
        let r = Formula::atom(GroundAtom::prop("r"));

        assert!(model.evaluate(&Formula::and([p.clone(), r.clone()])).unwrap());
        assert!(!model.evaluate(&Formula::and([p.clone(), q.clone()])).unwrap());
        assert!(model.evaluate(&Formula::or([q.clone(), r.clone()])).unwrap());
        assert!(model
            .evaluate(&Formula::Implies(Box::new(q.clone()), Box::new(p.clone())))
            .unwrap());
        assert!(!model
            .evaluate(&Formula::Equiv(Box::new(p.clone()), Box::new(q.clone())))
            .unwrap());
        assert!(model.evaluate(&Formula::True).unwrap());
        assert!(!model.evaluate(&Formula::False).unwrap());
    }

    #[test]
    fn evaluate_rejects_foreign_atoms_and_non_ground_formulas() {
        let universe = three_atoms();
        let model = Model::new(universe, vec![true, false, true]);
        let foreign = Formula::atom(GroundAtom::prop("s"));
        assert!(matches!(
            model.evaluate(&foreign),
            Err(LangError::AtomOutsideUniverse(_))
        ));
        let open = Formula::Atom {
            predicate: "p".into(),
            args: vec![Term::Var("x".into())],
        };
        assert!(matches!(model.evaluate(&open), Err(LangError::NotGround(_))));
    }

    #[test]
    fn model_formula_pins_down_exactly_one_model() {
        let universe = three_atoms();
        let model = Model::new(universe.clone(), vec![true, false, true]);
        let formula = model.model_formula();
        assert_eq!(formula.to_string(), "p & !q & r");

        // Exactly one of the eight assignments satisfies it.
        let mut satisfying = 0;
        for mask in 0..8u32 {
            let bits: Vec<bool> = (0..3).map(|j| (mask >> (2 - j)) & 1 == 0).collect();
            let m = Model::new(universe.clone(), bits);
            if m.evaluate(&formula).unwrap() {
                assert_eq!(m, model);
                satisfying += 1;
            }
        }
        assert_eq!(satisfying, 1);
    }

    #[test]
    fn display_lists_true_atoms() {
        let universe = three_atoms();
        let model = Model::new(universe, vec![true, false, true]);
        assert_eq!(model.to_string(), "{p, r}");
    }
}
