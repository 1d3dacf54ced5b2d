//! Satisfiability and entailment over ground theories.
//!
//! A small DPLL search with unit propagation. Branching follows the
//! canonical model order — lowest atom index first, `true` before `false` —
//! so [`find_model`] returns the canonically first satisfying model and
//! witnesses are deterministic.

use super::cnf::to_cnf;
use super::formula::Formula;
use super::model::Model;
use super::theory::Theory;
use super::vocab::Universe;
use super::LangError;

/// Clause budget for internal lowering. Much larger than the public CNF
/// budget: these clauses feed the solver and are never shown to anyone.
const SOLVER_CNF_BUDGET: usize = 1 << 17;

/// Lowers formulas to integer clauses over universe indices
/// (`+(i+1)`/`-(i+1)` for atom `i` true/false). Tautological and duplicate
/// clauses are dropped — the solver doesn't need them.
pub(crate) fn lower_clauses(
    universe: &Universe,
    formulas: &[&Formula],
) -> Result<Vec<Vec<i32>>, LangError> {
    let mut out: Vec<Vec<i32>> = Vec::new();
    for formula in formulas {
        for clause in to_cnf(formula, SOLVER_CNF_BUDGET)? {
            let mut lowered = Vec::with_capacity(clause.len());
            let mut tautological = false;
            for lit in &clause {
                let idx = universe
                    .index_of(&lit.atom)
                    .ok_or_else(|| LangError::AtomOutsideUniverse(lit.atom.to_string()))?;
                let code = if lit.positive { idx as i32 + 1 } else { -(idx as i32 + 1) };
                if lowered.contains(&-code) {
                    tautological = true;
                    break;
                }
                if !lowered.contains(&code) {
                    lowered.push(code);
                }
            }
            if !tautological && !out.contains(&lowered) {
                out.push(lowered);
            }
        }
    }
    Ok(out)
}

struct Solver {
    clauses: Vec<Vec<i32>>,
    /// `0` unassigned, `1` true, `-1` false; index 0 unused.
    assign: Vec<i8>,
}

impl Solver {
    fn new(n: usize, clauses: Vec<Vec<i32>>) -> Self {
        Solver { clauses, assign: vec![0; n + 1] }
    }

    fn value(&self, code: i32) -> i8 {
        let v = self.assign[code.unsigned_abs() as usize];
        if code > 0 {
            v
        } else {
            -v
        }
    }

    /// Unit propagation to fixpoint. Returns the literals assigned (for
    /// undo) and whether a conflict was reached.
    fn propagate(&mut self, trail: &mut Vec<u32>) -> bool {
        loop {
            let mut changed = false;
            for ci in 0..self.clauses.len() {
                let mut unassigned: Option<i32> = None;
                let mut satisfied = false;
                let mut unit = true;
                for k in 0..self.clauses[ci].len() {
                    let code = self.clauses[ci][k];
                    match self.value(code) {
                        1 => {
                            satisfied = true;
                            break;
                        }
                        0 => {
                            if unassigned.is_some() {
                                unit = false;
                                break;
                            }
                            unassigned = Some(code);
                        }
                        _ => {}
                    }
                }
                if satisfied || !unit {
                    continue;
                }
                match unassigned {
                    None => return false, // all literals false: conflict
                    Some(code) => {
                        self.assign[code.unsigned_abs() as usize] = if code > 0 { 1 } else { -1 };
                        trail.push(code.unsigned_abs());
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn undo(&mut self, trail: &[u32]) {
        for &var in trail {
            self.assign[var as usize] = 0;
        }
    }

    /// DFS in canonical order; `true` if a satisfying assignment was found
    /// (left in `self.assign`).
    fn search(&mut self, from: usize) -> bool {
        let next = (from..self.assign.len()).find(|&v| self.assign[v] == 0);
        let var = match next {
            None => return true,
            Some(v) => v,
        };
        for value in [1i8, -1] {
            self.assign[var] = value;
            let mut trail = Vec::new();
            if self.propagate(&mut trail) && self.search(var + 1) {
                return true;
            }
            self.undo(&trail);
            self.assign[var] = 0;
        }
        false
    }

    fn solve(&mut self) -> bool {
        let mut trail = Vec::new();
        if !self.propagate(&mut trail) {
            return false;
        }
        self.search(1)
    }
}

/// Finds the canonically first model of the theory conjoined with `extra`
/// formulas, or `None` if unsatisfiable.
pub fn find_model(theory: &Theory, extra: &[&Formula]) -> Result<Option<Model>, LangError> {
    let universe = theory.universe();
    let mut formulas: Vec<&Formula> = theory.sentences().iter().collect();
    formulas.extend_from_slice(extra);
    let clauses = lower_clauses(universe, &formulas)?;
    let mut solver = Solver::new(universe.len(), clauses);
    if !solver.solve() {
        return Ok(None);
    }
    let bits: Vec<bool> = (1..=universe.len()).map(|v| solver.assign[v] == 1).collect();
    Ok(Some(Model::new(universe.clone(), bits)))
}

/// Whether the theory conjoined with `extra` has a model.
pub fn is_satisfiable(theory: &Theory, extra: &[&Formula]) -> Result<bool, LangError> {
    Ok(find_model(theory, extra)?.is_some())
}

/// Whether every model of the theory satisfies `phi`.
pub fn entails(theory: &Theory, phi: &Formula) -> Result<bool, LangError> {
    Ok(entails_with_countermodel(theory, phi)?.is_none())
}

/// Like [`entails`], but on failure returns a countermodel: a model of the
/// theory falsifying `phi`.
///
/// A top-level conjunction is checked conjunct by conjunct — entailment
/// distributes over `&`, and converting `!(c1 & c2 & ...)` in one piece
/// would multiply the conjuncts' clause sets together.
pub fn entails_with_countermodel(
    theory: &Theory,
    phi: &Formula,
) -> Result<Option<Model>, LangError> {
    let conjuncts: Vec<&Formula> = match phi {
        Formula::And(fs) => fs.iter().collect(),
        other => vec![other],
    };
    for conjunct in conjuncts {
        let negated = Formula::not(conjunct.clone());
        if let Some(model) = find_model(theory, &[&negated])? {
            return Ok(Some(model));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{GroundAtom, Vocabulary};

    fn p(name: &str) -> Formula {
        Formula::atom(GroundAtom::prop(name))
    }

    fn props(names: &[&str], sentences: Vec<Formula>) -> Theory {
        let vocab = Vocabulary::propositional(names.iter().copied()).unwrap();
        Theory::new(vocab, sentences).unwrap()
    }

    #[test]
    fn contradiction_and_tautology() {
        let theory = props(&["s"], vec![]);
        let contradiction = Formula::and([p("s"), Formula::not(p("s"))]);
        assert!(!is_satisfiable(&theory, &[&contradiction]).unwrap());

        let tautology = Formula::or([p("s"), Formula::not(p("s"))]);
        assert!(is_satisfiable(&theory, &[&tautology]).unwrap());
        assert!(entails(&theory, &tautology).unwrap());
    }

    #[test]
    fn find_model_returns_the_canonically_first_model() {
        // Under {} every assignment is a model; the first is all-true.
        let theory = props(&["a", "b"], vec![]);
        let model = find_model(&theory, &[]).unwrap().unwrap();
        assert_eq!(model.to_string(), "{a, b}");

        // !a forces the first model to {b}.
        let theory = props(&["a", "b"], vec![Formula::not(p("a"))]);
        let model = find_model(&theory, &[]).unwrap().unwrap();
        assert_eq!(model.to_string(), "{b}");
    }

    #[test]
    fn disjunction_does_not_entail_its_disjunct() {
        let theory = props(&["a", "b"], vec![Formula::or([p("a"), p("b")])]);
        assert!(!entails(&theory, &p("a")).unwrap());
        // The countermodel satisfies the theory but falsifies a; the
        // canonically first such model is {b}.
        let counter = entails_with_countermodel(&theory, &p("a")).unwrap().unwrap();
        assert_eq!(counter.to_string(), "{b}");

        assert!(entails(&theory, &Formula::or([p("a"), p("b")])).unwrap());
    }

    #[test]
    fn entailment_decomposes_conjunctions() {
        let theory = props(&["a", "b", "c"], vec![p("a"), p("b")]);
        assert!(entails(&theory, &Formula::and([p("a"), p("b")])).unwrap());
        let phi = Formula::and([p("a"), p("c")]);
        let counter = entails_with_countermodel(&theory, &phi).unwrap().unwrap();
        assert!(counter.evaluate(&p("a")).unwrap());
        assert!(!counter.evaluate(&phi).unwrap());
    }

    #[test]
    fn unit_propagation_chains() {
        // a, a -> b, b -> c: entails c; adding !c is unsatisfiable.
        let theory = props(
            &["a", "b", "c"],
            vec![
                p("a"),
                Formula::implies(p("a"), p("b")),
                Formula::implies(p("b"), p("c")),
            ],
        );
        assert!(entails(&theory, &p("c")).unwrap());
        let not_c = Formula::not(p("c"));
        assert!(!is_satisfiable(&theory, &[&not_c]).unwrap());
    }

    #[test]
    fn foreign_atoms_are_rejected() {
        let theory = props(&["a"], vec![]);
        let foreign = p("z");
        assert!(matches!(
            find_model(&theory, &[&foreign]),
            Err(LangError::AtomOutsideUniverse(_))
        ));
    }

    #[test]
    fn empty_theory_over_empty_universe_is_satisfiable() {
        let theory = props(&[], vec![]);
        let model = find_model(&theory, &[]).unwrap().unwrap();
        assert_eq!(model.to_string(), "{}");
        assert!(!is_satisfiable(&theory, &[&Formula::False]).unwrap());
    }
}
