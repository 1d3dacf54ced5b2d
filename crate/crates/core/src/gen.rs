//! Seeded instance generators for the randomized suites.
//!
//! Everything here is a pure function of the `Rng` it is handed, so a
//! suite seeded with [`seeded`] replays exactly. The generators bias
//! toward instances on which the properties under test are non-vacuous:
//! suites that condition on a verdict (soundness, completeness) get
//! constructions holding it by design, and the certificate-agreement
//! suites get instances from the factorized regime where the
//! certificates are actually theorems.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::derivation::{
    derive_weights, HypothesisSpace, MappingCandidates, TargetClass, TheoryBound,
};
use crate::lang::{
    is_satisfiable, Formula, GroundAtom, Literal, Model, Theory, Universe, Vocabulary,
};
use crate::mapping::{MappingEntry, RefinementMapping};
use crate::wmc::{NegationDefault, Value, WeightFn};

/// The suite RNG: small, fast, and stable across platforms.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `prefix0 .. prefix{n-1}`.
pub fn atom_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A propositional vocabulary over [`atom_names`].
pub fn prop_vocab(prefix: &str, n: usize) -> Vocabulary {
    Vocabulary::propositional(atom_names(prefix, n)).expect("generated names are distinct")
}

/// A uniformly random assignment.
pub fn random_model(rng: &mut impl Rng, universe: &Arc<Universe>) -> Model {
    let bits = (0..universe.len()).map(|_| rng.gen_bool(0.5)).collect();
    Model::new(universe.clone(), bits)
}

/// A nonempty clause over distinct atoms of `pool`, up to `max_len`
/// literals, random signs.
pub fn random_clause(rng: &mut impl Rng, pool: &[GroundAtom], max_len: usize) -> Formula {
    let len = rng.gen_range(1..=max_len.min(pool.len()));
    let mut picks: Vec<usize> = (0..pool.len()).collect();
    picks.shuffle(rng);
    Formula::or(picks[..len].iter().map(|&i| {
        let atom = pool[i].clone();
        if rng.gen_bool(0.5) {
            Formula::atom(atom)
        } else {
            Formula::not(Formula::atom(atom))
        }
    }))
}

/// A random CNF theory: up to `max_clauses` clauses of up to `max_len`
/// literals each over the vocabulary's atoms. An empty vocabulary admits
/// no clauses, so it always yields the empty theory.
pub fn random_cnf_theory(
    rng: &mut impl Rng,
    vocab: Vocabulary,
    max_clauses: usize,
    max_len: usize,
) -> Theory {
    let universe = vocab.universe();
    if universe.is_empty() {
        return Theory::empty(vocab);
    }
    let count = rng.gen_range(0..=max_clauses);
    let sentences = (0..count)
        .map(|_| random_clause(rng, universe.atoms(), max_len))
        .collect();
    Theory::new(vocab, sentences).expect("clauses are over the vocabulary")
}

/// Like [`random_cnf_theory`], but resamples until the theory is
/// satisfiable (suites dividing by the partition function need that).
pub fn random_satisfiable_theory(
    rng: &mut impl Rng,
    vocab: &Vocabulary,
    max_clauses: usize,
    max_len: usize,
) -> Theory {
    loop {
        let theory = random_cnf_theory(rng, vocab.clone(), max_clauses, max_len);
        if is_satisfiable(&theory, &[]).expect("ground theory") {
            return theory;
        }
    }
}

fn small_positive(rng: &mut impl Rng) -> Value {
    Value::ratio(rng.gen_range(1..=4), rng.gen_range(1..=4))
}

/// Strictly positive small rationals on both polarities of every atom.
pub fn random_positive_weights(rng: &mut impl Rng, universe: &Universe) -> WeightFn {
    let entries = universe.atoms().iter().flat_map(|atom| {
        [
            (Literal::pos(atom.clone()), small_positive(rng)),
            (Literal::neg(atom.clone()), small_positive(rng)),
        ]
    });
    let entries: Vec<_> = entries.collect();
    WeightFn::new(entries, NegationDefault::One).expect("positive weights validate")
}

/// Like [`random_positive_weights`], but roughly one literal in eight
/// weighs zero — for suites that must survive measure-zero models.
pub fn random_weights_with_zeros(rng: &mut impl Rng, universe: &Universe) -> WeightFn {
    let mut entries = Vec::with_capacity(2 * universe.len());
    for atom in universe.atoms() {
        for literal in [Literal::pos(atom.clone()), Literal::neg(atom.clone())] {
            let value = if rng.gen_range(0..8) == 0 { Value::zero() } else { small_positive(rng) };
            entries.push((literal, value));
        }
    }
    WeightFn::new(entries, NegationDefault::One).expect("nonnegative weights validate")
}

/// A depth-bounded random formula over the pool: literals at the leaves,
/// `!`, `&`, `|`, `->`, `<->` above them, with the occasional constant.
pub fn random_formula(rng: &mut impl Rng, pool: &[GroundAtom], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => {
                let atom = pool[rng.gen_range(0..pool.len())].clone();
                if rng.gen_bool(0.5) {
                    Formula::atom(atom)
                } else {
                    Formula::not(Formula::atom(atom))
                }
            }
        };
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(random_formula(rng, pool, depth - 1)),
        1 => Formula::and((0..rng.gen_range(2..=3)).map(|_| random_formula(rng, pool, depth - 1))),
        2 => Formula::or((0..rng.gen_range(2..=3)).map(|_| random_formula(rng, pool, depth - 1))),
        3 => Formula::implies(
            random_formula(rng, pool, depth - 1),
            random_formula(rng, pool, depth - 1),
        ),
        _ => Formula::equiv(
            random_formula(rng, pool, depth - 1),
            random_formula(rng, pool, depth - 1),
        ),
    }
}

/// One high-vs-low instance, ready for the checker.
#[derive(Debug, Clone)]
pub struct AbstractionInstance {
    pub high: Theory,
    pub wh: WeightFn,
    pub low: Theory,
    pub wl: WeightFn,
    pub mapping: RefinementMapping,
}

/// Splits a shuffled subset of `atoms` into `count` disjoint nonempty
/// blocks (of one or two atoms each), leaving the rest unmapped.
fn random_blocks(
    rng: &mut impl Rng,
    atoms: &[GroundAtom],
    count: usize,
) -> (Vec<Vec<GroundAtom>>, Vec<GroundAtom>) {
    assert!(atoms.len() >= count, "need at least one low atom per block");
    let mut shuffled: Vec<GroundAtom> = atoms.to_vec();
    shuffled.shuffle(rng);
    let mut blocks = Vec::with_capacity(count);
    let mut next = 0;
    for i in 0..count {
        let spare = shuffled.len() - next - (count - i);
        let take = 1 + usize::from(spare > 0 && rng.gen_bool(0.5));
        blocks.push(shuffled[next..next + take].to_vec());
        next += take;
    }
    (blocks, shuffled[next..].to_vec())
}

/// A separable mapping: per high atom, a random clause over its own block.
fn block_mapping(
    rng: &mut impl Rng,
    high_vocab: &Vocabulary,
    low_vocab: &Vocabulary,
    blocks: &[Vec<GroundAtom>],
) -> RefinementMapping {
    let entries: Vec<MappingEntry> = high_vocab
        .universe()
        .atoms()
        .iter()
        .zip(blocks)
        .map(|(atom, block)| {
            MappingEntry::new(Formula::atom(atom.clone()), random_clause(rng, block, block.len()))
        })
        .collect();
    RefinementMapping::new(high_vocab.clone(), low_vocab.clone(), &entries)
        .expect("block targets are over the low vocabulary")
}

/// An instance that is sound by construction: the low-level theory
/// contains the image of every high-level sentence (entailment is then
/// immediate), plus clauses over the unmapped remainder as noise.
/// Completeness, exactness, and the weighted verdicts are left to chance.
pub fn sound_instance(rng: &mut impl Rng, high_n: usize, low_n: usize) -> AbstractionInstance {
    loop {
        let high_vocab = prop_vocab("h", high_n);
        let low_vocab = prop_vocab("x", low_n);
        let (blocks, rest) = random_blocks(rng, low_vocab.universe().atoms(), high_n);
        let mapping = block_mapping(rng, &high_vocab, &low_vocab, &blocks);
        let high = random_cnf_theory(rng, high_vocab, 3, high_n.min(3));

        let mut low_sentences: Vec<Formula> = high
            .sentences()
            .iter()
            .map(|s| mapping.apply(s).expect("high sentences are over the high vocabulary"))
            .collect();
        if !rest.is_empty() {
            for _ in 0..rng.gen_range(0..=2) {
                low_sentences.push(random_clause(rng, &rest, 2));
            }
        }
        let low = Theory::new(low_vocab, low_sentences).expect("images are over the low vocabulary");
        if !is_satisfiable(&low, &[]).expect("ground theory") {
            continue; // zero-partition instances teach the suites nothing
        }
        let wl = random_positive_weights(rng, low.universe());
        let wh = random_positive_weights(rng, high.universe());
        return AbstractionInstance { high, wh, low, wl, mapping };
    }
}

/// An instance that is complete by construction: the low-level theory
/// only constrains atoms outside every mapping block, so each high-level
/// model extends to a partner by satisfying or falsifying the block
/// clauses independently. Soundness is left to chance.
pub fn complete_instance(rng: &mut impl Rng, high_n: usize, low_n: usize) -> AbstractionInstance {
    complete_with(rng, "h", "x", high_n, low_n)
}

fn complete_with(
    rng: &mut impl Rng,
    high_prefix: &str,
    low_prefix: &str,
    high_n: usize,
    low_n: usize,
) -> AbstractionInstance {
    let high_vocab = prop_vocab(high_prefix, high_n);
    let low_vocab = prop_vocab(low_prefix, low_n);
    let (blocks, rest) = random_blocks(rng, low_vocab.universe().atoms(), high_n);
    let mapping = block_mapping(rng, &high_vocab, &low_vocab, &blocks);
    // Satisfiable on both levels: the suites divide by both partitions.
    let high = loop {
        let candidate = random_cnf_theory(rng, high_vocab.clone(), 3, high_n.min(3));
        if is_satisfiable(&candidate, &[]).expect("ground theory") {
            break candidate;
        }
    };

    let mut low_sentences = Vec::new();
    if !rest.is_empty() {
        loop {
            low_sentences.clear();
            for _ in 0..rng.gen_range(0..=2) {
                low_sentences.push(random_clause(rng, &rest, 2));
            }
            let probe = Theory::new(low_vocab.clone(), low_sentences.clone()).unwrap();
            if is_satisfiable(&probe, &[]).expect("ground theory") {
                break;
            }
        }
    }
    let low = Theory::new(low_vocab, low_sentences).expect("noise is over the low vocabulary");
    let wl = random_positive_weights(rng, low.universe());
    let wh = random_positive_weights(rng, high.universe());
    AbstractionInstance { high, wh, low, wl, mapping }
}

/// An instance from the factorized regime: every high-level sentence is
/// a unit clause, every low-level sentence stays inside one mapping block
/// (the pinned atoms' images) or inside the unmapped remainder, and the
/// high-level weights are the derived mapped marginals. In this regime
/// the per-literal certificates are theorems, so the agreement suites
/// sample from here.
pub fn product_form_instance(
    rng: &mut impl Rng,
    high_n: usize,
    low_n: usize,
) -> AbstractionInstance {
    product_form_with(rng, "h", "x", high_n, low_n)
}

fn product_form_with(
    rng: &mut impl Rng,
    high_prefix: &str,
    low_prefix: &str,
    high_n: usize,
    low_n: usize,
) -> AbstractionInstance {
    let high_vocab = prop_vocab(high_prefix, high_n);
    let low_vocab = prop_vocab(low_prefix, low_n);
    let (blocks, rest) = random_blocks(rng, low_vocab.universe().atoms(), high_n);
    let mapping = block_mapping(rng, &high_vocab, &low_vocab, &blocks);

    // Pin a random subset of high atoms with unit clauses, and give the
    // low level the matching image so soundness comes along.
    let mut high_sentences = Vec::new();
    let mut low_sentences = Vec::new();
    for atom in high_vocab.universe().atoms() {
        if rng.gen_bool(0.4) {
            continue;
        }
        let target = mapping.target(atom).expect("mapping is total").clone();
        if rng.gen_bool(0.5) {
            high_sentences.push(Formula::atom(atom.clone()));
            low_sentences.push(target);
        } else {
            high_sentences.push(Formula::not(Formula::atom(atom.clone())));
            low_sentences.push(Formula::not(target));
        }
    }
    if !rest.is_empty() {
        loop {
            let noise = random_clause(rng, &rest, 2);
            let mut probe_sentences = low_sentences.clone();
            probe_sentences.push(noise.clone());
            let probe = Theory::new(low_vocab.clone(), probe_sentences).unwrap();
            if is_satisfiable(&probe, &[]).expect("ground theory") {
                low_sentences.push(noise);
                break;
            }
        }
    }
    let high = Theory::new(high_vocab, high_sentences).expect("unit clauses are over the vocab");
    let low = Theory::new(low_vocab, low_sentences).expect("images are over the low vocabulary");
    let wl = random_positive_weights(rng, low.universe());
    let wh = derive_weights(&mapping, &low, &wl, &high)
        .expect("the low-level partition is positive by construction");
    AbstractionInstance { high, wh, low, wl, mapping }
}

/// A random instance eligible for clause abstraction: a clause λ over a
/// few designated atoms, and a satisfiable CNF theory in which every
/// sentence either avoids λ's atoms or has the shape λ ∨ ψ.
pub fn eligible_clause_instance(
    rng: &mut impl Rng,
    low_n: usize,
) -> (Theory, WeightFn, Vec<Literal>) {
    assert!(low_n >= 2, "need an atom to retain");
    let vocab = prop_vocab("x", low_n);
    let universe = vocab.universe();
    let lambda_len = rng.gen_range(1..=3.min(low_n - 1));
    let mut shuffled: Vec<GroundAtom> = universe.atoms().to_vec();
    shuffled.shuffle(rng);
    let lambda: Vec<Literal> = shuffled[..lambda_len]
        .iter()
        .map(|atom| {
            if rng.gen_bool(0.5) {
                Literal::pos(atom.clone())
            } else {
                Literal::neg(atom.clone())
            }
        })
        .collect();
    let rest = &shuffled[lambda_len..];
    let lambda_formula = Formula::or(lambda.iter().map(Formula::lit));

    let theory = loop {
        let mut sentences = Vec::new();
        for _ in 0..rng.gen_range(0..=4) {
            if rng.gen_bool(0.5) {
                // λ ∨ ψ, with ψ possibly empty.
                let residue = if rng.gen_bool(0.5) {
                    Formula::False
                } else {
                    random_clause(rng, rest, 2)
                };
                sentences.push(Formula::or([lambda_formula.clone(), residue]));
            } else {
                sentences.push(random_clause(rng, rest, 2));
            }
        }
        let theory = Theory::new(vocab.clone(), sentences).expect("clauses over the vocabulary");
        if is_satisfiable(&theory, &[]).expect("ground theory") {
            break theory;
        }
    };
    let weights = random_positive_weights(rng, theory.universe());
    (theory, weights, lambda)
}

/// `count` instances over pairwise name-disjoint vocabularies, each
/// complete by construction — composition-suite fodder.
pub fn disjoint_complete_parts(rng: &mut impl Rng, count: usize) -> Vec<AbstractionInstance> {
    (0..count)
        .map(|j| {
            let high_n = rng.gen_range(1..=2);
            let low_n = rng.gen_range(high_n + 1..=4);
            complete_with(rng, &format!("p{j}h"), &format!("p{j}x"), high_n, low_n)
        })
        .collect()
}

/// Like [`disjoint_complete_parts`], but each part comes from the
/// factorized regime and is weighted exact.
pub fn disjoint_product_parts(rng: &mut impl Rng, count: usize) -> Vec<AbstractionInstance> {
    (0..count)
        .map(|j| {
            let high_n = rng.gen_range(1..=2);
            let low_n = rng.gen_range(high_n + 1..=4);
            product_form_with(rng, &format!("p{j}h"), &format!("p{j}x"), high_n, low_n)
        })
        .collect()
}

/// A plant-and-find case: a low-level instance together with a hypothesis
/// space guaranteed to contain a candidate of the target class (the block
/// quotient with the empty high-level theory, which is weighted exact in
/// the factorized regime with derived weights). Decoy targets and theory
/// clauses pad the space.
pub fn planted_search_instance(
    rng: &mut impl Rng,
    high_n: usize,
    low_n: usize,
) -> (Theory, WeightFn, HypothesisSpace) {
    let high_vocab = prop_vocab("h", high_n);
    let low_vocab = prop_vocab("x", low_n);
    let (blocks, rest) = random_blocks(rng, low_vocab.universe().atoms(), high_n);
    let mapping = block_mapping(rng, &high_vocab, &low_vocab, &blocks);

    let mut low_sentences = Vec::new();
    if !rest.is_empty() {
        loop {
            low_sentences.clear();
            for _ in 0..rng.gen_range(0..=1) {
                low_sentences.push(random_clause(rng, &rest, 2));
            }
            let probe = Theory::new(low_vocab.clone(), low_sentences.clone()).unwrap();
            if is_satisfiable(&probe, &[]).expect("ground theory") {
                break;
            }
        }
    }
    let low = Theory::new(low_vocab, low_sentences).expect("noise is over the low vocabulary");
    let wl = random_positive_weights(rng, low.universe());

    // The planted candidate's targets, each seeded among decoys drawn
    // over the whole low universe (decoys may even be non-separable —
    // the search has to cope).
    let lists: Vec<(String, Vec<Formula>)> = high_vocab
        .universe()
        .atoms()
        .iter()
        .map(|atom| {
            let truth = mapping.target(atom).expect("mapping is total").clone();
            let mut list = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                list.push(random_clause(rng, low.universe().atoms(), 2));
            }
            list.insert(rng.gen_range(0..=list.len()), truth);
            (atom.predicate.clone(), list)
        })
        .collect();
    let space = HypothesisSpace {
        high_predicates: atom_names("h", high_n),
        mapping_candidates: MappingCandidates::Explicit(lists),
        theory_candidates: TheoryBound { max_clause_len: 2, max_sentences: 1 },
        partial_mapping: Vec::new(),
        partial_theory: Vec::new(),
        target_class: TargetClass::WeightedExact,
    };
    (low, wl, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check_complete, check_sound, classify};
    use crate::derivation::abstract_clause;
    use crate::DEFAULT_ENUMERATION_CAP;

    #[test]
    fn generators_replay_from_the_seed() {
        let mut a = seeded(7);
        let mut b = seeded(7);
        let vocab = prop_vocab("x", 5);
        let ta = random_cnf_theory(&mut a, vocab.clone(), 4, 3);
        let tb = random_cnf_theory(&mut b, vocab, 4, 3);
        assert_eq!(ta.sentences(), tb.sentences());
        let ia = sound_instance(&mut a, 3, 6);
        let ib = sound_instance(&mut b, 3, 6);
        assert_eq!(ia.low.sentences(), ib.low.sentences());
        assert_eq!(ia.high.sentences(), ib.high.sentences());
    }

    #[test]
    fn constructed_verdicts_hold() {
        let mut rng = seeded(11);
        for _ in 0..25 {
            let sound = sound_instance(&mut rng, 3, 6);
            assert!(
                check_sound(&sound.high, &sound.low, &sound.mapping).unwrap().holds(),
                "sound-by-construction instance failed soundness"
            );
            let complete = complete_instance(&mut rng, 3, 6);
            assert!(
                check_complete(&complete.high, &complete.low, &complete.mapping, 24)
                    .unwrap()
                    .holds(),
                "complete-by-construction instance failed completeness"
            );
        }
    }

    #[test]
    fn product_form_instances_are_weighted_exact() {
        let mut rng = seeded(13);
        for _ in 0..25 {
            let inst = product_form_instance(&mut rng, 3, 7);
            let report = classify(
                &inst.high,
                &inst.wh,
                &inst.low,
                &inst.wl,
                &inst.mapping,
                DEFAULT_ENUMERATION_CAP,
            )
            .unwrap();
            assert!(
                report.weighted_exact.holds(),
                "factorized instance not weighted exact: {}",
                report.weighted_exact
            );
        }
    }

    #[test]
    fn eligible_instances_satisfy_the_clause_precondition() {
        let mut rng = seeded(17);
        for _ in 0..50 {
            let (low, wl, lambda) = eligible_clause_instance(&mut rng, 6);
            abstract_clause(&low, &wl, &lambda, "t").expect("generated instance is eligible");
        }
    }
}
