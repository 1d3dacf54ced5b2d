//! Weight functions: total maps from ground literals to nonnegative values.

use std::collections::HashMap;
use std::fmt;

use crate::lang::{Literal, Universe};

use super::value::Value;
use super::WmcError;

/// How literals without an explicit entry are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegationDefault {
    /// Every unmentioned literal weighs 1. The unweighted (model counting)
    /// setting is the empty map under this default.
    One,
    /// An unmentioned negative literal weighs `1 − w(p)` when its positive
    /// `p` is mentioned (which then must lie in [0, 1]); everything else
    /// unmentioned weighs 1. Matches the usual probabilistic encoding where
    /// an atom's weight is its marginal.
    Complement,
}

impl fmt::Display for NegationDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegationDefault::One => write!(f, "one"),
            NegationDefault::Complement => write!(f, "complement"),
        }
    }
}

/// A total weight function over ground literals: an explicit literal map
/// plus a [`NegationDefault`] for everything unmentioned.
///
/// Weights are nonnegative and may exceed 1 (unnormalized measures),
/// except that under the complement default mentioned positive literals
/// must lie in [0, 1] so their complements stay nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFn {
    entries: HashMap<Literal, Value>,
    default: NegationDefault,
}

impl WeightFn {
    pub fn new(
        entries: impl IntoIterator<Item = (Literal, Value)>,
        default: NegationDefault,
    ) -> Result<Self, WmcError> {
        let mut map = HashMap::new();
        for (literal, value) in entries {
            if value.is_negative() {
                return Err(WmcError::NegativeWeight {
                    literal: literal.to_string(),
                    value: value.to_string(),
                });
            }
            if default == NegationDefault::Complement
                && literal.positive
                && !value.le(&Value::one())
            {
                return Err(WmcError::ComplementOutOfRange {
                    literal: literal.to_string(),
                    value: value.to_string(),
                });
            }
            if map.insert(literal.clone(), value).is_some() {
                return Err(WmcError::DuplicateWeight { literal: literal.to_string() });
            }
        }
        Ok(WeightFn { entries: map, default })
    }

    /// The unweighted setting: every literal weighs 1.
    pub fn ones() -> Self {
        WeightFn { entries: HashMap::new(), default: NegationDefault::One }
    }

    pub fn default_rule(&self) -> NegationDefault {
        self.default
    }

    /// Explicit entries, in no particular order.
    pub fn entries(&self) -> impl Iterator<Item = (&Literal, &Value)> {
        self.entries.iter()
    }

    /// The weight of a literal under the map and default rule.
    pub fn weight(&self, literal: &Literal) -> Value {
        if let Some(value) = self.entries.get(literal) {
            return value.clone();
        }
        if self.default == NegationDefault::Complement && !literal.positive {
            if let Some(positive) = self.entries.get(&literal.complement()) {
                return Value::one() - positive.clone();
            }
        }
        Value::one()
    }

    /// Resolves the whole universe into `[negative, positive]` weight pairs
    /// indexed by atom, so counting loops stop paying for hash lookups.
    pub fn tabulate(&self, universe: &Universe) -> Vec<[Value; 2]> {
        universe
            .atoms()
            .iter()
            .map(|atom| {
                let pos = Literal::pos(atom.clone());
                [self.weight(&pos.complement()), self.weight(&pos)]
            })
            .collect()
    }

    /// The same weights in the floating representation.
    pub fn to_float(&self) -> Self {
        WeightFn {
            entries: self
                .entries
                .iter()
                .map(|(l, v)| (l.clone(), v.to_float()))
                .collect(),
            default: self.default,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::GroundAtom;

    fn pos(name: &str) -> Literal {
        Literal::pos(GroundAtom::prop(name))
    }

    #[test]
    fn one_default_fills_everything_unmentioned() {
        let w = WeightFn::new([(pos("a"), Value::ratio(3, 5))], NegationDefault::One).unwrap();
        assert_eq!(w.weight(&pos("a")), Value::ratio(3, 5));
        assert_eq!(w.weight(&pos("a").complement()), Value::one());
        assert_eq!(w.weight(&pos("b")), Value::one());
    }

    #[test]
    fn complement_default_derives_negative_weights() {
        let w = WeightFn::new(
            [(pos("a"), Value::ratio(7, 10)), (pos("b").complement(), Value::ratio(1, 5))],
            NegationDefault::Complement,
        )
        .unwrap();
        assert_eq!(w.weight(&pos("a").complement()), Value::ratio(3, 10));
        // Explicit entries win over the derived complement.
        assert_eq!(w.weight(&pos("b").complement()), Value::ratio(1, 5));
        // Unmentioned positives (and their negatives) weigh 1.
        assert_eq!(w.weight(&pos("c")), Value::one());
        assert_eq!(w.weight(&pos("c").complement()), Value::one());
    }

    #[test]
    fn validation_rejects_bad_weights() {
        let negative = WeightFn::new([(pos("a"), Value::ratio(-1, 2))], NegationDefault::One);
        assert!(matches!(negative.unwrap_err(), WmcError::NegativeWeight { .. }));

        let above_one =
            WeightFn::new([(pos("a"), Value::ratio(13, 10))], NegationDefault::Complement);
        assert!(matches!(above_one.unwrap_err(), WmcError::ComplementOutOfRange { .. }));

        // Above 1 is fine without the complement rule (unnormalized measure).
        assert!(WeightFn::new([(pos("a"), Value::ratio(13, 10))], NegationDefault::One).is_ok());

        let duplicate = WeightFn::new(
            [(pos("a"), Value::one()), (pos("a"), Value::one())],
            NegationDefault::One,
        );
        assert!(matches!(duplicate.unwrap_err(), WmcError::DuplicateWeight { .. }));
    }

    #[test]
    fn tabulate_resolves_whole_universe() {
        let vocab = crate::lang::Vocabulary::propositional(["a", "b"]).unwrap();
        let universe = vocab.universe();
        let w = WeightFn::new([(pos("a"), Value::ratio(7, 10))], NegationDefault::Complement)
            .unwrap();
        let table = w.tabulate(&universe);
        assert_eq!(table[0], [Value::ratio(3, 10), Value::ratio(7, 10)]);
        assert_eq!(table[1], [Value::one(), Value::one()]);
    }
}
