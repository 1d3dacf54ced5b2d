//! The formula AST shared by theories, refinement mappings, and queries.

use std::collections::BTreeSet;
use std::fmt;

use super::vocab::{GroundAtom, Literal};

/// A term: a constant or a (quantifier-bound) variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(name) | Term::Var(name) => write!(f, "{name}"),
        }
    }
}

/// A formula over a relational vocabulary.
///
/// Quantifiers range over finite sorts, so every formula grounds out to a
/// propositional one; the logical operations downstream ([`evaluate`],
/// [`to_cnf`], satisfiability) expect ground input.
///
/// [`evaluate`]: crate::lang::Model::evaluate
/// [`to_cnf`]: crate::lang::to_cnf
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom { predicate: String, args: Vec<Term> },
    /// Equality between terms; grounding resolves it to `True`/`False`.
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    /// `Forall(var, sort, body)`.
    Forall(String, String, Box<Formula>),
    /// `Exists(var, sort, body)`.
    Exists(String, String, Box<Formula>),
}

impl Formula {
    /// A ground atom as a formula.
    pub fn atom(atom: GroundAtom) -> Self {
        Formula::Atom {
            predicate: atom.predicate,
            args: atom.args.into_iter().map(Term::Const).collect(),
        }
    }

    /// A literal as a formula: the atom, negated if the literal is negative.
    pub fn lit(literal: &Literal) -> Self {
        let atom = Formula::atom(literal.atom.clone());
        if literal.positive {
            atom
        } else {
            Formula::not(atom)
        }
    }

    /// Negation with constant absorption and double-negation elimination.
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction with light simplification: `True` conjuncts are dropped,
    /// any `False` collapses the whole thing, nested conjunctions are
    /// flattened, a single survivor is unboxed, and an empty conjunction is
    /// `True`.
    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        let mut pending: Vec<Formula> = fs.into_iter().collect();
        pending.reverse();
        while let Some(f) = pending.pop() {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => pending.extend(inner.into_iter().rev()),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction, dual to [`Formula::and`].
    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        let mut pending: Vec<Formula> = fs.into_iter().collect();
        pending.reverse();
        while let Some(f) = pending.pop() {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => pending.extend(inner.into_iter().rev()),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Implication with constant absorption (`φ ⊃ false` becomes `¬φ`, etc.).
    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        match (lhs, rhs) {
            (Formula::True, rhs) => rhs,
            (Formula::False, _) => Formula::True,
            (_, Formula::True) => Formula::True,
            (lhs, Formula::False) => Formula::not(lhs),
            (lhs, rhs) => Formula::Implies(Box::new(lhs), Box::new(rhs)),
        }
    }

    /// Equivalence with constant absorption.
    pub fn equiv(lhs: Formula, rhs: Formula) -> Self {
        match (lhs, rhs) {
            (Formula::True, rhs) => rhs,
            (lhs, Formula::True) => lhs,
            (Formula::False, rhs) => Formula::not(rhs),
            (lhs, Formula::False) => Formula::not(lhs),
            (lhs, rhs) => Formula::Equiv(Box::new(lhs), Box::new(rhs)),
        }
    }

    /// Whether the formula contains no variables (and no quantifiers).
    pub fn is_ground(&self) -> bool {
        match self {
            Formula::True | Formula::False => true,
            Formula::Atom { args, .. } => args.iter().all(|t| matches!(t, Term::Const(_))),
            Formula::Eq(a, b) => {
                matches!(a, Term::Const(_)) && matches!(b, Term::Const(_))
            }
            Formula::Not(f) => f.is_ground(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_ground),
            Formula::Implies(a, b) | Formula::Equiv(a, b) => a.is_ground() && b.is_ground(),
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    /// If the formula is exactly one ground atom, returns it.
    pub fn as_ground_atom(&self) -> Option<GroundAtom> {
        if let Formula::Atom { predicate, args } = self {
            let mut consts = Vec::with_capacity(args.len());
            for arg in args {
                match arg {
                    Term::Const(c) => consts.push(c.clone()),
                    Term::Var(_) => return None,
                }
            }
            Some(GroundAtom { predicate: predicate.clone(), args: consts })
        } else {
            None
        }
    }

    /// If the formula is a ground literal (an atom or a negated atom),
    /// returns it.
    pub fn as_literal(&self) -> Option<Literal> {
        match self {
            Formula::Not(inner) => inner.as_ground_atom().map(Literal::neg),
            _ => self.as_ground_atom().map(Literal::pos),
        }
    }

    /// Collects the ground atoms mentioned anywhere in the formula.
    /// Non-ground atoms are skipped; callers ground first.
    pub fn collect_atoms(&self, out: &mut BTreeSet<GroundAtom>) {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) => {}
            Formula::Atom { .. } => {
                if let Some(atom) = self.as_ground_atom() {
                    out.insert(atom);
                }
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_atoms(out);
                }
            }
            Formula::Implies(a, b) | Formula::Equiv(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Forall(_, _, f) | Formula::Exists(_, _, f) => f.collect_atoms(out),
        }
    }

    /// The set of ground atoms mentioned in the formula.
    pub fn atoms(&self) -> BTreeSet<GroundAtom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    /// Replaces bound variables with their constants; variables without a
    /// binding are left in place (a later groundness check rejects them).
    pub fn substituted(&self, bindings: &std::collections::HashMap<String, String>) -> Formula {
        let term = |t: &Term| match t {
            Term::Var(v) => match bindings.get(v) {
                Some(c) => Term::Const(c.clone()),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
        };
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom { predicate, args } => Formula::Atom {
                predicate: predicate.clone(),
                args: args.iter().map(term).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::Not(f) => Formula::Not(Box::new(f.substituted(bindings))),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.substituted(bindings)).collect())
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substituted(bindings)).collect()),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.substituted(bindings)),
                Box::new(b.substituted(bindings)),
            ),
            Formula::Equiv(a, b) => Formula::Equiv(
                Box::new(a.substituted(bindings)),
                Box::new(b.substituted(bindings)),
            ),
            // Quantified variables shadow outer bindings.
            Formula::Forall(v, s, f) | Formula::Exists(v, s, f) => {
                let inner = if bindings.contains_key(v) {
                    let mut narrowed = bindings.clone();
                    narrowed.remove(v);
                    f.substituted(&narrowed)
                } else {
                    f.substituted(bindings)
                };
                match self {
                    Formula::Forall(..) => Formula::Forall(v.clone(), s.clone(), Box::new(inner)),
                    _ => Formula::Exists(v.clone(), s.clone(), Box::new(inner)),
                }
            }
        }
    }

    /// Rewrites `⊃` and `≡` into `¬`, `∧`, `∨`, leaving everything else
    /// untouched. Used where an operation is defined only over the
    /// primitive connectives (e.g. applying a refinement mapping).
    pub fn desugared(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.desugared()),
            Formula::And(fs) => Formula::And(fs.iter().map(Formula::desugared).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(Formula::desugared).collect()),
            Formula::Implies(a, b) => {
                Formula::Or(vec![Formula::not(a.desugared()), b.desugared()])
            }
            Formula::Equiv(a, b) => {
                let (a, b) = (a.desugared(), b.desugared());
                Formula::Or(vec![
                    Formula::And(vec![a.clone(), b.clone()]),
                    Formula::And(vec![Formula::not(a), Formula::not(b)]),
                ])
            }
            Formula::Forall(v, s, f) => {
                Formula::Forall(v.clone(), s.clone(), Box::new(f.desugared()))
            }
            Formula::Exists(v, s, f) => {
                Formula::Exists(v.clone(), s.clone(), Box::new(f.desugared()))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Equiv(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(_) => 3,
            Formula::And(_) => 4,
            Formula::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < parent;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::False => write!(f, "false")?,
            Formula::Atom { predicate, args } => {
                write!(f, "{predicate}")?;
                if !args.is_empty() {
                    let rendered: Vec<String> = args.iter().map(Term::to_string).collect();
                    write!(f, "({})", rendered.join(", "))?;
                }
            }
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Not(inner) => {
                write!(f, "!")?;
                inner.fmt_prec(f, 6)?;
            }
            Formula::And(fs) => {
                for (i, sub) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    sub.fmt_prec(f, prec + 1)?;
                }
            }
            Formula::Or(fs) => {
                for (i, sub) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    sub.fmt_prec(f, prec + 1)?;
                }
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, prec + 1)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, prec)?;
            }
            Formula::Equiv(a, b) => {
                a.fmt_prec(f, prec + 1)?;
                write!(f, " <-> ")?;
                b.fmt_prec(f, prec + 1)?;
            }
            Formula::Forall(v, s, body) => {
                write!(f, "forall {v}: {s}. ")?;
                body.fmt_prec(f, 1)?;
            }
            Formula::Exists(v, s, body) => {
                write!(f, "exists {v}: {s}. ")?;
                body.fmt_prec(f, 1)?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Formula {
        Formula::atom(GroundAtom::prop(name))
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let f = Formula::implies(
            Formula::or([p("a"), Formula::and([p("b"), Formula::not(p("c"))])]),
            p("d"),
        );
        assert_eq!(f.to_string(), "a | b & !c -> d");

        let g = Formula::and([Formula::or([p("a"), p("b")]), p("c")]);
        assert_eq!(g.to_string(), "(a | b) & c");

        let h = Formula::not(Formula::and([p("a"), p("b")]));
        assert_eq!(h.to_string(), "!(a & b)");
    }

    #[test]
    fn smart_constructors_absorb_constants() {
        assert_eq!(Formula::and([Formula::True, p("a"), Formula::True]), p("a"));
        assert_eq!(Formula::and([p("a"), Formula::False]), Formula::False);
        assert_eq!(Formula::and(Vec::new()), Formula::True);
        assert_eq!(Formula::or([Formula::False, p("a")]), p("a"));
        assert_eq!(Formula::or([p("a"), Formula::True]), Formula::True);
        assert_eq!(Formula::or(Vec::new()), Formula::False);
        assert_eq!(Formula::implies(p("a"), Formula::False), Formula::not(p("a")));
        assert_eq!(Formula::implies(Formula::True, p("b")), p("b"));
        assert_eq!(Formula::equiv(p("a"), Formula::True), p("a"));
    }

    #[test]
    fn desugar_rewrites_implication_and_equivalence() {
        let f = Formula::Implies(Box::new(p("a")), Box::new(p("b")));
        assert_eq!(f.desugared().to_string(), "!a | b");

        let g = Formula::Equiv(Box::new(p("a")), Box::new(p("b")));
        assert_eq!(g.desugared().to_string(), "a & b | !a & !b");
    }

    #[test]
    fn literal_and_atom_views() {
        let atom = GroundAtom::new("grades", ["A", "7"]);
        let f = Formula::not(Formula::atom(atom.clone()));
        assert_eq!(f.as_literal(), Some(Literal::neg(atom.clone())));
        assert_eq!(f.as_ground_atom(), None);
        assert_eq!(Formula::atom(atom.clone()).as_ground_atom(), Some(atom));
        assert_eq!(Formula::and([p("a"), p("b")]).as_literal(), None);
    }

    #[test]
    fn atom_collection_spans_all_connectives() {
        let f = Formula::equiv(
            p("f1"),
            Formula::and([p("iq"), Formula::not(p("diff"))]),
        );
        let names: Vec<String> = f.atoms().iter().map(ToString::to_string).collect();
        assert_eq!(names, vec!["diff", "f1", "iq"]);
    }
}
