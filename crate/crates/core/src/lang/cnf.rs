//! Clausal form by distribution, over the same atoms as the input.
//!
//! No auxiliary atoms are introduced (no Tseitin encoding): downstream
//! syntactic notions — literal purity in particular — inspect the clauses of
//! a formula and must see exactly the input's atoms. For the same reason
//! tautological clauses (containing `l` and `!l`) are kept: they still
//! mention their literals. The price of distribution is worst-case
//! exponential size, so conversion carries a clause budget and fails loudly
//! rather than blowing up.

use super::formula::{Formula, Term};
use super::vocab::Literal;
use super::LangError;

/// A disjunction of literals. An empty clause is unsatisfiable.
pub type Clause = Vec<Literal>;

/// Default clause budget for [`to_cnf`].
pub const DEFAULT_CNF_BUDGET: usize = 4096;

/// Converts a ground formula to CNF by distribution.
///
/// The result is a conjunction of clauses over exactly the input's atoms.
/// An empty clause list means the formula is valid; a list containing an
/// empty clause means it is unsatisfiable at the propositional level.
/// Conversion fails with [`LangError::CnfBudgetExceeded`] if any
/// intermediate clause set would exceed `budget` clauses.
pub fn to_cnf(formula: &Formula, budget: usize) -> Result<Vec<Clause>, LangError> {
    let clauses = convert(formula, true, budget)?;
    Ok(dedupe_clauses(clauses))
}

/// Clausal form of `formula` under the given polarity (`positive = false`
/// converts the negation), with literal-level and constant-level
/// simplification but tautologies kept.
fn convert(formula: &Formula, positive: bool, budget: usize) -> Result<Vec<Clause>, LangError> {
    let result = match formula {
        Formula::True => constant(positive),
        Formula::False => constant(!positive),
        Formula::Atom { .. } => {
            let atom = formula
                .as_ground_atom()
                .ok_or_else(|| LangError::NotGround(formula.to_string()))?;
            vec![vec![Literal { atom, positive }]]
        }
        Formula::Eq(Term::Const(a), Term::Const(b)) => constant((a == b) == positive),
        Formula::Eq(..) => return Err(LangError::NotGround(formula.to_string())),
        Formula::Not(inner) => convert(inner, !positive, budget)?,
        Formula::And(fs) => {
            if positive {
                conjoin(fs.iter().map(|f| convert(f, true, budget)), budget)?
            } else {
                disjoin(fs.iter().map(|f| convert(f, false, budget)), budget)?
            }
        }
        Formula::Or(fs) => {
            if positive {
                disjoin(fs.iter().map(|f| convert(f, true, budget)), budget)?
            } else {
                conjoin(fs.iter().map(|f| convert(f, false, budget)), budget)?
            }
        }
        Formula::Implies(a, b) => {
            if positive {
                // !a | b
                disjoin(
                    [convert(a, false, budget), convert(b, true, budget)].into_iter(),
                    budget,
                )?
            } else {
                // a & !b
                conjoin(
                    [convert(a, true, budget), convert(b, false, budget)].into_iter(),
                    budget,
                )?
            }
        }
        Formula::Equiv(a, b) => {
            // positive: (!a | b) & (!b | a); negative: (a | b) & (!a | !b)
            let first = disjoin(
                [convert(a, !positive, budget), convert(b, true, budget)].into_iter(),
                budget,
            )?;
            let second = disjoin(
                [convert(b, false, budget), convert(a, positive, budget)].into_iter(),
                budget,
            )?;
            conjoin([Ok(first), Ok(second)].into_iter(), budget)?
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            return Err(LangError::NotGround(formula.to_string()))
        }
    };
    if result.len() > budget {
        return Err(LangError::CnfBudgetExceeded { budget });
    }
    Ok(result)
}

/// Clause set for a constant: `true` is the empty conjunction, `false` the
/// conjunction holding one empty clause.
fn constant(value: bool) -> Vec<Clause> {
    if value {
        Vec::new()
    } else {
        vec![Vec::new()]
    }
}

/// Conjunction of clause sets: concatenation.
fn conjoin(
    parts: impl Iterator<Item = Result<Vec<Clause>, LangError>>,
    budget: usize,
) -> Result<Vec<Clause>, LangError> {
    let mut out = Vec::new();
    for part in parts {
        out.extend(part?);
        if out.len() > budget {
            return Err(LangError::CnfBudgetExceeded { budget });
        }
    }
    Ok(out)
}

/// Disjunction of clause sets: the cross product, merging one clause from
/// each set. Duplicate literals in a merged clause are dropped;
/// complementary pairs are kept, so tautological clauses survive.
fn disjoin(
    parts: impl Iterator<Item = Result<Vec<Clause>, LangError>>,
    budget: usize,
) -> Result<Vec<Clause>, LangError> {
    let mut acc: Vec<Clause> = vec![Vec::new()];
    for part in parts {
        let part = part?;
        if acc.len().saturating_mul(part.len()) > budget {
            return Err(LangError::CnfBudgetExceeded { budget });
        }
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for left in &acc {
            for right in &part {
                let mut merged = left.clone();
                for lit in right {
                    if !merged.contains(lit) {
                        merged.push(lit.clone());
                    }
                }
                next.push(merged);
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Drops exact duplicate clauses, keeping first occurrences in order.
fn dedupe_clauses(clauses: Vec<Clause>) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::with_capacity(clauses.len());
    for clause in clauses {
        if !out.contains(&clause) {
            out.push(clause);
        }
    }
    out
}
