//! Randomized checks of the refinement-mapping theorems: homomorphic
//! evaluation, uniqueness of the induced profile, and preservation of
//! equivalence under substitution.

use coarsen::gen::{complete_instance, random_formula, random_model, seeded};
use coarsen::lang::{is_satisfiable, Formula, Model, Theory};
use rand::Rng;

/// The homomorphism theorem: when Mh is the profile Ml induces,
/// evaluating φ up high and m(φ) down low give the same answer, for
/// every formula.
#[test]
fn induced_profiles_evaluate_homomorphically() {
    let mut rng = seeded(0x3a9);
    for case in 0..200 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = complete_instance(&mut rng, hi, lo);
        let m = &inst.mapping;
        let low_model = random_model(&mut rng, m.low_universe());
        let high_model = m.induced_profile(&low_model).unwrap();
        for _ in 0..10 {
            let phi = random_formula(&mut rng, m.high_universe().atoms(), 4);
            let up = high_model.evaluate(&phi).unwrap();
            let down = low_model.evaluate(&m.apply(&phi).unwrap()).unwrap();
            assert_eq!(up, down, "case {case}: homomorphism broke on {phi}");
        }
    }
}

/// is_isomorphic agrees with the formula-level characterization: an
/// isomorphic pair evaluates every sampled formula identically, and a
/// non-isomorphic pair is already told apart by a single atom.
#[test]
fn isomorphism_is_formula_indistinguishability() {
    let mut rng = seeded(0x3aa);
    for case in 0..200 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = complete_instance(&mut rng, hi, lo);
        let m = &inst.mapping;
        let low_model = random_model(&mut rng, m.low_universe());
        let high_model = random_model(&mut rng, m.high_universe());
        if m.is_isomorphic(&high_model, &low_model).unwrap() {
            for _ in 0..25 {
                let phi = random_formula(&mut rng, m.high_universe().atoms(), 3);
                assert_eq!(
                    high_model.evaluate(&phi).unwrap(),
                    low_model.evaluate(&m.apply(&phi).unwrap()).unwrap(),
                    "case {case}: isomorphic pair disagreed on {phi}"
                );
            }
        } else {
            let witness = m.high_universe().atoms().iter().find(|atom| {
                let up = high_model.truth(atom).unwrap();
                let down =
                    low_model.evaluate(m.target(atom).unwrap()).unwrap();
                up != down
            });
            assert!(
                witness.is_some(),
                "case {case}: non-isomorphic pair with no atomic witness"
            );
        }
    }
}

/// Exactly one high-level assignment is isomorphic to any given low-level
/// model: the induced profile, and nothing else.
#[test]
fn the_induced_profile_is_the_unique_partner() {
    let mut rng = seeded(0x3ab);
    for _ in 0..100 {
        let high_n = rng.gen_range(1..=5);
        let lo = rng.gen_range(high_n + 1..=8);
        let inst = complete_instance(&mut rng, high_n, lo);
        let m = &inst.mapping;
        let low_model = random_model(&mut rng, m.low_universe());
        let mut partners = 0;
        for mask in 0u32..(1 << high_n) {
            let bits: Vec<bool> =
                (0..high_n).map(|j| (mask >> (high_n - 1 - j)) & 1 == 0).collect();
            let candidate = Model::new(m.high_universe().clone(), bits);
            if m.is_isomorphic(&candidate, &low_model).unwrap() {
                partners += 1;
            }
        }
        assert_eq!(partners, 1);
    }
}

/// Uniform substitution preserves semantic equivalence: if φ and ψ agree
/// on every high-level assignment, their images agree on every low-level
/// assignment.
#[test]
fn substitution_preserves_equivalence() {
    let mut rng = seeded(0x3ac);
    let mut equivalent_pairs = 0;
    for case in 0..400 {
        let hi = rng.gen_range(1..=3);
        let lo = rng.gen_range(3..=6);
        let inst = complete_instance(&mut rng, hi, lo);
        let m = &inst.mapping;
        let high_empty = Theory::empty(inst.high.vocab().clone());
        let low_empty = Theory::empty(inst.low.vocab().clone());

        let phi = random_formula(&mut rng, m.high_universe().atoms(), 2);
        let psi = random_formula(&mut rng, m.high_universe().atoms(), 2);
        let high_diff = Formula::not(Formula::equiv(phi.clone(), psi.clone()));
        if is_satisfiable(&high_empty, &[&high_diff]).unwrap() {
            continue; // not equivalent up high; nothing to transfer
        }
        equivalent_pairs += 1;
        let low_diff = Formula::not(Formula::equiv(
            m.apply(&phi).unwrap(),
            m.apply(&psi).unwrap(),
        ));
        assert!(
            !is_satisfiable(&low_empty, &[&low_diff]).unwrap(),
            "case {case}: images of equivalent formulas diverge"
        );
    }
    assert!(
        equivalent_pairs >= 20,
        "suite went vacuous: only {equivalent_pairs} equivalent pairs sampled"
    );
}
