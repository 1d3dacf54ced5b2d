//! Sorts, predicates, ground atoms, and the atom universe.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use super::LangError;

/// A named finite list of constants, e.g. `grade = {5, 6, 7, 8, 9, 10}`.
///
/// Constant order is significant: it fixes the order of ground atoms in the
/// universe and therefore the canonical model order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    pub constants: Vec<String>,
}

impl Sort {
    pub fn new(name: impl Into<String>, constants: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Sort {
            name: name.into(),
            constants: constants.into_iter().map(Into::into).collect(),
        }
    }
}

/// A predicate declaration: a name and the sorts of its arguments.
/// Propositional atoms are 0-ary predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub arg_sorts: Vec<String>,
}

impl Predicate {
    pub fn new(name: impl Into<String>, arg_sorts: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Predicate {
            name: name.into(),
            arg_sorts: arg_sorts.into_iter().map(Into::into).collect(),
        }
    }
}

/// A fully applied predicate, e.g. `grades(A, B, 7)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// A propositional (0-ary) atom.
    pub fn prop(name: impl Into<String>) -> Self {
        GroundAtom { predicate: name.into(), args: Vec::new() }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(", "))?;
        }
        Ok(())
    }
}

/// A ground atom or its negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: GroundAtom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: GroundAtom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: GroundAtom) -> Self {
        Literal { atom, positive: false }
    }

    /// The literal over the same atom with flipped polarity.
    pub fn complement(&self) -> Self {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "!")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A vocabulary: sort and predicate declarations.
///
/// Validation happens in [`Vocabulary::new`]; a constructed vocabulary is
/// internally consistent (no duplicate names, all argument sorts declared).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    sorts: Vec<Sort>,
    predicates: Vec<Predicate>,
}

impl Vocabulary {
    pub fn new(sorts: Vec<Sort>, predicates: Vec<Predicate>) -> Result<Self, LangError> {
        let mut sort_names = HashSet::new();
        for sort in &sorts {
            if !sort_names.insert(sort.name.clone()) {
                return Err(LangError::DuplicateSort(sort.name.clone()));
            }
            let mut constants = HashSet::new();
            for c in &sort.constants {
                if !constants.insert(c.clone()) {
                    return Err(LangError::DuplicateConstant {
                        sort: sort.name.clone(),
                        constant: c.clone(),
                    });
                }
            }
        }
        let mut pred_names = HashSet::new();
        for pred in &predicates {
            if !pred_names.insert(pred.name.clone()) {
                return Err(LangError::DuplicatePredicate(pred.name.clone()));
            }
            for s in &pred.arg_sorts {
                if !sort_names.contains(s) {
                    return Err(LangError::UndeclaredSort {
                        pred: pred.name.clone(),
                        sort: s.clone(),
                    });
                }
            }
        }
        Ok(Vocabulary { sorts, predicates })
    }

    /// A purely propositional vocabulary: one 0-ary predicate per name.
    pub fn propositional(atoms: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, LangError> {
        let predicates = atoms
            .into_iter()
            .map(|name| Predicate { name: name.into(), arg_sorts: Vec::new() })
            .collect();
        Vocabulary::new(Vec::new(), predicates)
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn sort(&self, name: &str) -> Option<&Sort> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// Checks that `atom` instantiates a declared predicate with constants
    /// of the declared sorts.
    pub fn validate_atom(&self, atom: &GroundAtom) -> Result<(), LangError> {
        let pred = self
            .predicate(&atom.predicate)
            .ok_or_else(|| LangError::UnknownPredicate(atom.predicate.clone()))?;
        if pred.arg_sorts.len() != atom.args.len() {
            return Err(LangError::ArityMismatch {
                pred: pred.name.clone(),
                expected: pred.arg_sorts.len(),
                got: atom.args.len(),
            });
        }
        for (arg, sort_name) in atom.args.iter().zip(&pred.arg_sorts) {
            // Validated in `new`: every argument sort is declared.
            let sort = self.sort(sort_name).expect("argument sort declared");
            if !sort.constants.contains(arg) {
                return Err(LangError::ConstantNotInSort {
                    constant: arg.clone(),
                    sort: sort_name.clone(),
                });
            }
        }
        Ok(())
    }

    /// Builds the atom universe: every ground instance of every predicate,
    /// in declaration order, with argument positions varying
    /// rightmost-fastest.
    pub fn universe(&self) -> Arc<Universe> {
        let mut atoms = Vec::new();
        for pred in &self.predicates {
            let mut args: Vec<Vec<String>> = vec![Vec::new()];
            for sort_name in &pred.arg_sorts {
                let sort = self.sort(sort_name).expect("argument sort declared");
                let mut next = Vec::with_capacity(args.len() * sort.constants.len());
                for prefix in &args {
                    for c in &sort.constants {
                        let mut tuple = prefix.clone();
                        tuple.push(c.clone());
                        next.push(tuple);
                    }
                }
                args = next;
            }
            for tuple in args {
                atoms.push(GroundAtom { predicate: pred.name.clone(), args: tuple });
            }
        }
        Arc::new(Universe::from_atoms(atoms))
    }
}

/// An ordered atom universe with O(1) lookup from atom to index.
///
/// The order is fixed by the vocabulary (predicates in declaration order,
/// argument tuples rightmost-fastest) and determines both model layout and
/// the canonical model order.
#[derive(Debug)]
pub struct Universe {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, u32>,
}

impl Universe {
    pub(crate) fn from_atoms(atoms: Vec<GroundAtom>) -> Self {
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u32))
            .collect();
        Universe { atoms, index }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn atom(&self, index: u32) -> &GroundAtom {
        &self.atoms[index as usize]
    }

    pub fn index_of(&self, atom: &GroundAtom) -> Option<u32> {
        self.index.get(atom).copied()
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.index.contains_key(atom)
    }
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for Universe {}
