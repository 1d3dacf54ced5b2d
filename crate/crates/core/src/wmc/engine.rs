//! The two counters (enumeration oracle and DPLL) and the probability
//! operations on top of them.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::lang::{lower_clauses, Formula, LangError, Model, Theory};

use super::value::{Probability, Value};
use super::weights::WeightFn;
use super::WmcError;

/// Universe-size guard for the enumeration oracle; it walks all 2^n
/// assignments and exists for testing, not production counting.
const ORACLE_ATOM_LIMIT: usize = 30;

/// The weight of a model: the product of the weights of the literals it
/// makes true (every atom contributes, positively or negatively).
pub fn model_weight(model: &Model, w: &WeightFn) -> Value {
    let mut product = Value::one();
    for literal in model.literals() {
        product = product * w.weight(&literal);
        if product.is_zero() {
            break;
        }
    }
    product
}

/// Weighted model count of `theory` (conjoined with `extra` if supplied),
/// by direct enumeration of every assignment. Exponential and proud of it:
/// this is the reference the optimized counter is tested against.
pub fn wmc_enumerate(
    theory: &Theory,
    w: &WeightFn,
    extra: Option<&Formula>,
) -> Result<Value, WmcError> {
    let universe = theory.universe();
    let n = universe.len();
    if n > ORACLE_ATOM_LIMIT {
        return Err(LangError::UniverseTooLarge { atoms: n, cap: ORACLE_ATOM_LIMIT as u32 }.into());
    }
    let table = w.tabulate(universe);
    let mut bits = vec![false; n];
    let mut total = Value::zero();
    enumerate_rec(theory, extra, &table, &mut bits, 0, Value::one(), &mut total)?;
    Ok(total)
}

fn enumerate_rec(
    theory: &Theory,
    extra: Option<&Formula>,
    table: &[[Value; 2]],
    bits: &mut Vec<bool>,
    idx: usize,
    acc: Value,
    total: &mut Value,
) -> Result<(), WmcError> {
    if idx == bits.len() {
        let model = Model::new(theory.universe().clone(), bits.clone());
        if theory.satisfied_by(&model)? {
            let included = match extra {
                None => true,
                Some(f) => model.evaluate(f)?,
            };
            if included {
                *total = &*total + &acc;
            }
        }
        return Ok(());
    }
    bits[idx] = true;
    enumerate_rec(theory, extra, table, bits, idx + 1, &acc * &table[idx][1], total)?;
    bits[idx] = false;
    enumerate_rec(theory, extra, table, bits, idx + 1, acc * table[idx][0].clone(), total)?;
    Ok(())
}

/// Weighted model count of `theory` (conjoined with `extra` if supplied),
/// via DPLL-style counting: unit propagation with weight accumulation,
/// a factor of `w(p) + w(¬p)` per unconstrained atom, and connected-
/// component decomposition with memoization. Returns exactly the same
/// value as [`wmc_enumerate`].
pub fn wmc(theory: &Theory, w: &WeightFn, extra: Option<&Formula>) -> Result<Value, WmcError> {
    let mut session = WmcSession::new(theory, w)?;
    match extra {
        None => session.count(&[]),
        Some(f) => session.count(&[f]),
    }
}

/// A reusable counting context over one theory and weight function.
///
/// Many checks ask a long series of closely related counts (one per
/// literal, one per model formula); the session lowers the theory once and
/// keeps the component memo cache warm across queries, which is where the
/// repetition pays off.
pub struct WmcSession<'a> {
    theory: &'a Theory,
    table: Vec<[Value; 2]>,
    base: Vec<Vec<i32>>,
    cache: HashMap<Vec<Vec<i32>>, Value>,
    partition: Option<Value>,
}

impl<'a> WmcSession<'a> {
    pub fn new(theory: &'a Theory, w: &WeightFn) -> Result<Self, WmcError> {
        let sentences: Vec<&Formula> = theory.sentences().iter().collect();
        let base = lower_clauses(theory.universe(), &sentences)?;
        let table = w.tabulate(theory.universe());
        Ok(WmcSession { theory, table, base, cache: HashMap::new(), partition: None })
    }

    /// `WMC(Δ ∧ ⋀ extra, w)`.
    pub fn count(&mut self, extra: &[&Formula]) -> Result<Value, WmcError> {
        let mut clauses = self.base.clone();
        if !extra.is_empty() {
            clauses.extend(lower_clauses(self.theory.universe(), extra)?);
        }
        let atoms: Vec<u32> = (0..self.theory.universe().len() as u32).collect();
        let mut counter = Counter { table: &self.table, cache: &mut self.cache };
        Ok(counter.count(clauses, atoms))
    }

    /// `WMC(Δ, w)`, computed once and remembered.
    pub fn partition(&mut self) -> Result<Value, WmcError> {
        if let Some(z) = &self.partition {
            return Ok(z.clone());
        }
        let z = self.count(&[])?;
        self.partition = Some(z.clone());
        Ok(z)
    }

    /// `Pr(⋀ extra, Δ, w)`; fails with a zero-partition error when
    /// `WMC(Δ, w) = 0`.
    pub fn probability(&mut self, extra: &[&Formula]) -> Result<Probability, WmcError> {
        let z = self.partition()?;
        if z.is_zero() {
            return Err(WmcError::ZeroPartition);
        }
        let numerator = self.count(extra)?;
        Ok(Probability::new(numerator / z))
    }
}

/// `Pr(φ, Δ, w) = WMC(φ ∧ Δ, w) / WMC(Δ, w)`.
pub fn probability(phi: &Formula, theory: &Theory, w: &WeightFn) -> Result<Probability, WmcError> {
    let partition = wmc(theory, w, None)?;
    if partition.is_zero() {
        return Err(WmcError::ZeroPartition);
    }
    let numerator = wmc(theory, w, Some(phi))?;
    Ok(Probability::new(numerator / partition))
}

/// `Pr(φ | e, Δ, w) = WMC(φ ∧ e ∧ Δ, w) / WMC(e ∧ Δ, w)`.
pub fn conditional(
    phi: &Formula,
    evidence: &Formula,
    theory: &Theory,
    w: &WeightFn,
) -> Result<Probability, WmcError> {
    let denominator = wmc(theory, w, Some(evidence))?;
    if denominator.is_zero() {
        return Err(WmcError::ZeroEvidence { evidence: evidence.to_string() });
    }
    let both = Formula::and([phi.clone(), evidence.clone()]);
    let numerator = wmc(theory, w, Some(&both))?;
    Ok(Probability::new(numerator / denominator))
}

/// Removes clauses satisfied by `lit` and drops `-lit` from the rest.
/// `None` when a clause becomes empty (conflict).
fn assign(clauses: &[Vec<i32>], lit: i32) -> Option<Vec<Vec<i32>>> {
    let mut out = Vec::with_capacity(clauses.len());
    for clause in clauses {
        if clause.contains(&lit) {
            continue;
        }
        let reduced: Vec<i32> = clause.iter().copied().filter(|&l| l != -lit).collect();
        if reduced.is_empty() {
            return None;
        }
        out.push(reduced);
    }
    Some(out)
}

/// Canonical form of a clause set, used as the memo key.
fn normalize(clauses: &[Vec<i32>]) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = clauses
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable_by_key(|l| (l.unsigned_abs(), *l));
            c
        })
        .collect();
    out.sort_unstable();
    out
}

struct Counter<'a> {
    table: &'a [[Value; 2]],
    cache: &'a mut HashMap<Vec<Vec<i32>>, Value>,
}

impl Counter<'_> {
    /// Counts the clause set over exactly the atoms in `atoms`
    /// (a superset of the atoms occurring in the clauses).
    fn count(&mut self, mut clauses: Vec<Vec<i32>>, mut atoms: Vec<u32>) -> Value {
        if clauses.iter().any(|c| c.is_empty()) {
            return Value::zero();
        }
        let mut factor = Value::one();

        // Unit propagation, accumulating the forced literals' weights.
        while let Some(&lit) = clauses.iter().find(|c| c.len() == 1).map(|c| &c[0]) {
            let var = lit.unsigned_abs() - 1;
            factor = factor * self.table[var as usize][(lit > 0) as usize].clone();
            if factor.is_zero() {
                return Value::zero();
            }
            atoms.retain(|&a| a != var);
            match assign(&clauses, lit) {
                None => return Value::zero(),
                Some(next) => clauses = next,
            }
        }

        // Atoms no clause constrains contribute w(p) + w(!p) each.
        let occurring: HashSet<u32> =
            clauses.iter().flatten().map(|l| l.unsigned_abs() - 1).collect();
        for &a in &atoms {
            if !occurring.contains(&a) {
                let pair = &self.table[a as usize];
                factor = factor * (&pair[0] + &pair[1]);
                if factor.is_zero() {
                    return Value::zero();
                }
            }
        }
        atoms.retain(|a| occurring.contains(a));

        if clauses.is_empty() {
            return factor;
        }

        // Independent components multiply.
        for (component_clauses, component_atoms) in components(&clauses, &atoms) {
            let value = self.count_component(component_clauses, component_atoms);
            if value.is_zero() {
                return Value::zero();
            }
            factor = factor * value;
        }
        factor
    }

    /// Branches on the lowest atom of a connected component, with the
    /// component's value memoized under its canonical clause set.
    fn count_component(&mut self, clauses: Vec<Vec<i32>>, atoms: Vec<u32>) -> Value {
        let key = normalize(&clauses);
        if let Some(value) = self.cache.get(&key) {
            return value.clone();
        }
        let var = atoms[0];
        let rest: Vec<u32> = atoms[1..].to_vec();
        let mut total = Value::zero();
        for (weight_idx, lit) in [(1usize, var as i32 + 1), (0usize, -(var as i32 + 1))] {
            let weight = self.table[var as usize][weight_idx].clone();
            if weight.is_zero() {
                continue;
            }
            if let Some(sub) = assign(&clauses, lit) {
                total = total + weight * self.count(sub, rest.clone());
            }
        }
        self.cache.insert(key, total.clone());
        total
    }
}

/// Splits a clause set into connected components of its clause–atom graph,
/// pairing each with its atom set. `atoms` must be exactly the atoms
/// occurring in `clauses`.
fn components(clauses: &[Vec<i32>], atoms: &[u32]) -> Vec<(Vec<Vec<i32>>, Vec<u32>)> {
    // Union-find over atoms; every clause merges its atoms.
    let mut parent: HashMap<u32, u32> = atoms.iter().map(|&a| (a, a)).collect();

    fn find(parent: &mut HashMap<u32, u32>, a: u32) -> u32 {
        let p = parent[&a];
        if p == a {
            return a;
        }
        let root = find(parent, p);
        parent.insert(a, root);
        root
    }

    for clause in clauses {
        let first = find(&mut parent, clause[0].unsigned_abs() - 1);
        for lit in &clause[1..] {
            let other = find(&mut parent, lit.unsigned_abs() - 1);
            if other != first {
                parent.insert(other, first);
            }
        }
    }

    let mut groups: BTreeMap<u32, (Vec<Vec<i32>>, Vec<u32>)> = BTreeMap::new();
    for &a in atoms {
        let root = find(&mut parent, a);
        groups.entry(root).or_default().1.push(a);
    }
    for clause in clauses {
        let root = find(&mut parent, clause[0].unsigned_abs() - 1);
        groups
            .get_mut(&root)
            .expect("clause atoms grouped")
            .0
            .push(clause.clone());
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{GroundAtom, Literal, Vocabulary};
    use crate::wmc::NegationDefault;

    fn p(name: &str) -> Formula {
        Formula::atom(GroundAtom::prop(name))
    }

    fn pos(name: &str) -> Literal {
        Literal::pos(GroundAtom::prop(name))
    }

    /// Δ = {a ∨ b} with w(a)=3/5, w(!a)=2/5, w(b)=w(!b)=1/2.
    fn a_or_b() -> (Theory, WeightFn) {
        let vocab = Vocabulary::propositional(["a", "b"]).unwrap();
        let theory = Theory::new(vocab, vec![Formula::or([p("a"), p("b")])]).unwrap();
        let w = WeightFn::new(
            [
                (pos("a"), Value::ratio(3, 5)),
                (pos("a").complement(), Value::ratio(2, 5)),
                (pos("b"), Value::ratio(1, 2)),
                (pos("b").complement(), Value::ratio(1, 2)),
            ],
            NegationDefault::One,
        )
        .unwrap();
        (theory, w)
    }

    #[test]
    fn counts_the_two_atom_example() {
        let (theory, w) = a_or_b();
        // 3/5·1/2 + 3/5·1/2 + 2/5·1/2 = 4/5
        assert_eq!(wmc(&theory, &w, None).unwrap(), Value::ratio(4, 5));
        assert_eq!(wmc_enumerate(&theory, &w, None).unwrap(), Value::ratio(4, 5));
    }

    #[test]
    fn unweighted_count_is_the_model_count() {
        let (theory, _) = a_or_b();
        let ones = WeightFn::ones();
        assert_eq!(wmc(&theory, &ones, None).unwrap(), Value::integer(3));
        assert_eq!(wmc_enumerate(&theory, &ones, None).unwrap(), Value::integer(3));
    }

    #[test]
    fn unsatisfiable_theory_counts_zero() {
        let vocab = Vocabulary::propositional(["a"]).unwrap();
        let theory =
            Theory::new(vocab, vec![p("a"), Formula::not(p("a"))]).unwrap();
        let ones = WeightFn::ones();
        assert_eq!(wmc(&theory, &ones, None).unwrap(), Value::zero());
        assert_eq!(wmc_enumerate(&theory, &ones, None).unwrap(), Value::zero());
        assert_eq!(
            probability(&p("a"), &theory, &ones).unwrap_err(),
            WmcError::ZeroPartition
        );
    }

    #[test]
    fn probability_and_conditional_match_the_worked_numbers() {
        let (theory, w) = a_or_b();
        // Pr(a) = (3/10 + 3/10) / (4/5) = 3/4
        let pr_a = probability(&p("a"), &theory, &w).unwrap();
        assert_eq!(*pr_a.value(), Value::ratio(3, 4));
        // Pr(a | b) = (3/10) / (1/2) = 3/5
        let pr_a_given_b = conditional(&p("a"), &p("b"), &theory, &w).unwrap();
        assert_eq!(*pr_a_given_b.value(), Value::ratio(3, 5));
        // Vacuous evidence reduces to the unconditional probability.
        let vacuous = conditional(&p("a"), &Formula::True, &theory, &w).unwrap();
        assert_eq!(vacuous, pr_a);
        // Certain event.
        let certain = probability(&Formula::True, &theory, &w).unwrap();
        assert!(certain.is_one());
    }

    #[test]
    fn conditioning_on_impossible_evidence_errors() {
        let (theory, w) = a_or_b();
        let impossible = Formula::and([p("a"), Formula::not(p("a"))]);
        assert!(matches!(
            conditional(&p("b"), &impossible, &theory, &w),
            Err(WmcError::ZeroEvidence { .. })
        ));
    }

    #[test]
    fn model_weight_is_the_literal_product() {
        let (theory, w) = a_or_b();
        let universe = theory.universe().clone();
        let model = Model::new(universe.clone(), vec![true, false]);
        assert_eq!(model_weight(&model, &w), Value::ratio(3, 10));
        assert_eq!(model_weight(&model, &WeightFn::ones()), Value::one());

        let zero = WeightFn::new([(pos("a"), Value::zero())], NegationDefault::One).unwrap();
        assert_eq!(model_weight(&model, &zero), Value::zero());
    }

    #[test]
    fn unconstrained_atoms_contribute_their_weight_sum() {
        // Theory {a} over {a, b, c}: b and c are free. With all-ones the
        // count is 4. With w(b)=1/4 under the complement default, b's
        // factor is 1/4 + 3/4 = 1 while the untouched c still contributes
        // 1 + 1 = 2, so the count is 1·1·2 = 2.
        let vocab = Vocabulary::propositional(["a", "b", "c"]).unwrap();
        let theory = Theory::new(vocab, vec![p("a")]).unwrap();
        assert_eq!(wmc(&theory, &WeightFn::ones(), None).unwrap(), Value::integer(4));

        let w = WeightFn::new([(pos("b"), Value::ratio(1, 4))], NegationDefault::Complement)
            .unwrap();
        assert_eq!(wmc(&theory, &w, None).unwrap(), Value::integer(2));
        assert_eq!(wmc_enumerate(&theory, &w, None).unwrap(), Value::integer(2));
    }

    #[test]
    fn independent_components_multiply() {
        let vocab = Vocabulary::propositional(["a", "b", "c", "d"]).unwrap();
        let theory = Theory::new(
            vocab,
            vec![Formula::or([p("a"), p("b")]), Formula::or([p("c"), p("d")])],
        )
        .unwrap();
        let ones = WeightFn::ones();
        assert_eq!(wmc(&theory, &ones, None).unwrap(), Value::integer(9));
        assert_eq!(wmc_enumerate(&theory, &ones, None).unwrap(), Value::integer(9));
    }

    #[test]
    fn float_mode_tracks_the_rational_result() {
        let (theory, w) = a_or_b();
        let float_w = w.to_float();
        let exact = wmc(&theory, &w, None).unwrap();
        let float = wmc(&theory, &float_w, None).unwrap();
        assert!(!float.is_rational());
        assert!(float.approx_eq(&exact));
    }

    #[test]
    fn extra_formula_restricts_the_count() {
        let (theory, w) = a_or_b();
        // Models satisfying b: {a,b}, {b} → 3/10 + 1/5 = 1/2.
        assert_eq!(wmc(&theory, &w, Some(&p("b"))).unwrap(), Value::ratio(1, 2));
        assert_eq!(
            wmc_enumerate(&theory, &w, Some(&p("b"))).unwrap(),
            Value::ratio(1, 2)
        );
    }
}
