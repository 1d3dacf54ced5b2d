//! Randomized suites for evidence translation: purity survives the
//! round trip, exact evidence queries match the low-level conditional on
//! the evidence itself, and definable evidence matches the conditional
//! on its weakening.

use coarsen::evidence::{
    concretize, is_definable, is_pure, query_high_level, weaken, Evidence, QueryMode,
};
use coarsen::gen::{product_form_instance, random_formula, seeded};
use coarsen::lang::{is_satisfiable, to_cnf, Formula, Literal, Theory, DEFAULT_CNF_BUDGET};
use coarsen::wmc::conditional;
use rand::Rng;

const CAP: u32 = 24;

/// Every evidence literal of the instance, both polarities.
fn evidence_candidates(low: &Theory) -> Vec<Evidence> {
    low.universe()
        .atoms()
        .iter()
        .flat_map(|atom| [Literal::pos(atom.clone()), Literal::neg(atom.clone())])
        .map(|l| Evidence::new(l, low.universe()).expect("literal is over the low universe"))
        .collect()
}

/// Concretizable evidence stays pure in the CNF of its own weakening.
#[test]
fn purity_survives_weakening() {
    let mut rng = seeded(0x6e1);
    let mut concretized = 0;
    for _ in 0..100 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = product_form_instance(&mut rng, hi, lo);
        for e in evidence_candidates(&inst.low) {
            if concretize(&inst.mapping, &e).is_err() {
                continue; // invisible at the high level; nothing to preserve
            }
            concretized += 1;
            let weakening = weaken(&inst.mapping, &e).unwrap();
            let clauses = to_cnf(&weakening, DEFAULT_CNF_BUDGET).unwrap();
            assert!(
                is_pure(e.literal(), &clauses),
                "evidence {e} impure in its weakening {weakening}"
            );
        }
    }
    assert!(concretized >= 50, "suite went vacuous: {concretized} concretizations");
}

/// For weighted-exact instances and evidence equivalent to its weakening,
/// the high-level query equals conditioning the low level on the evidence
/// itself — exactly.
#[test]
fn exact_evidence_queries_match_the_low_level() {
    let mut rng = seeded(0x6e2);
    let mut checked_phis = 0;
    'outer: for _ in 0..40 {
        let hi = rng.gen_range(1..=3);
        let lo = rng.gen_range(3..=6);
        let inst = product_form_instance(&mut rng, hi, lo);
        for e in evidence_candidates(&inst.low) {
            if !matches!(is_definable(&inst.mapping, &e), Ok(true)) {
                continue;
            }
            let weakening = weaken(&inst.mapping, &e).unwrap();
            // Exact evidence: the weakening gives nothing back.
            let empty = Theory::empty(inst.low.vocab().clone());
            let equivalent = !is_satisfiable(
                &empty,
                &[&Formula::and([weakening, Formula::not(e.formula())])],
            )
            .unwrap();
            if !equivalent {
                continue;
            }
            if !is_satisfiable(&inst.low, &[&e.formula()]).unwrap() {
                continue; // evidence impossible below; conditioning is undefined
            }
            for _ in 0..10 {
                let phi = random_formula(&mut rng, inst.mapping.high_universe().atoms(), 3);
                let image = inst.mapping.apply(&phi).unwrap();
                let (got, mode) = query_high_level(
                    &phi,
                    &e,
                    &inst.high,
                    &inst.wh,
                    &inst.low,
                    &inst.wl,
                    &inst.mapping,
                    Some(CAP),
                )
                .unwrap();
                assert_eq!(mode, QueryMode::Exact, "evidence {e} should be exact here");
                let want = conditional(&image, &e.formula(), &inst.low, &inst.wl).unwrap();
                assert_eq!(
                    got.value(),
                    want.value(),
                    "query for {phi} given {e} diverged from the low level"
                );
                checked_phis += 1;
                if checked_phis >= 120 {
                    break 'outer;
                }
            }
        }
    }
    assert!(checked_phis >= 50, "suite went vacuous: {checked_phis} sampled queries");
}

/// Under mere definability the query answers relative to the weakening:
/// it equals the low-level conditional on m(m⁻¹(e)).
#[test]
fn definable_evidence_queries_match_the_weakening() {
    let mut rng = seeded(0x6e3);
    let mut checked_phis = 0;
    let mut weakened_hits = 0;
    'outer: for _ in 0..40 {
        let hi = rng.gen_range(1..=3);
        let lo = rng.gen_range(3..=6);
        let inst = product_form_instance(&mut rng, hi, lo);
        for e in evidence_candidates(&inst.low) {
            if !matches!(is_definable(&inst.mapping, &e), Ok(true)) {
                continue;
            }
            let weakening = weaken(&inst.mapping, &e).unwrap();
            if !is_satisfiable(&inst.low, &[&weakening]).unwrap() {
                continue;
            }
            for _ in 0..5 {
                let phi = random_formula(&mut rng, inst.mapping.high_universe().atoms(), 3);
                let image = inst.mapping.apply(&phi).unwrap();
                let (got, mode) = query_high_level(
                    &phi,
                    &e,
                    &inst.high,
                    &inst.wh,
                    &inst.low,
                    &inst.wl,
                    &inst.mapping,
                    None,
                )
                .unwrap();
                let want = conditional(&image, &weakening, &inst.low, &inst.wl).unwrap();
                assert_eq!(
                    got.value(),
                    want.value(),
                    "query for {phi} given {e} (mode {mode}) diverged from its weakening"
                );
                checked_phis += 1;
                if mode == QueryMode::Weakened {
                    weakened_hits += 1;
                }
                if checked_phis >= 200 {
                    break 'outer;
                }
            }
        }
    }
    assert!(checked_phis >= 50, "suite went vacuous: {checked_phis} sampled queries");
    assert!(weakened_hits > 0, "no genuinely weakened query was ever sampled");
}
