//! Randomized suites for the abstraction-class theorems: the query
//! consequences of soundness and completeness, the weighted extension,
//! certificate/exact agreement in the factorized regime, and the formula
//! form of weak exactness.

use coarsen::checker::{
    check_complete, check_sound, check_weak_exact, check_weighted_sound, classify,
    literal_prob_match, sufficient_complete, sufficient_sound,
};
use coarsen::gen::{
    complete_instance, product_form_instance, random_formula, seeded, sound_instance,
};
use coarsen::wmc::probability;
use coarsen::WeightFn;
use rand::Rng;

const CAP: u32 = 24;

/// A sound abstraction can only add possibilities, never invent
/// impossibilities: whatever is possible below is possible above, and
/// whatever is certain above is certain below (unweighted counting).
#[test]
fn soundness_transfers_possibility_up_and_certainty_down() {
    let mut rng = seeded(0x51d);
    let ones = WeightFn::ones();
    for case in 0..60 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = sound_instance(&mut rng, hi, lo);
        assert!(
            check_sound(&inst.high, &inst.low, &inst.mapping).unwrap().holds(),
            "case {case}: construction failed to be sound"
        );
        for _ in 0..50 {
            let phi = random_formula(&mut rng, inst.mapping.high_universe().atoms(), 3);
            let image = inst.mapping.apply(&phi).unwrap();
            let below = probability(&image, &inst.low, &ones).unwrap();
            let above = probability(&phi, &inst.high, &ones).unwrap();
            if below.is_positive() {
                assert!(above.is_positive(), "case {case}: possibility lost on {phi}");
            }
            if above.is_one() {
                assert!(below.is_one(), "case {case}: certainty lost on {phi}");
            }
        }
    }
}

/// The dual for complete abstractions (unweighted counting): whatever is
/// possible above is possible below, and whatever is certain below is
/// certain above.
#[test]
fn completeness_transfers_possibility_down_and_certainty_up() {
    let mut rng = seeded(0x51e);
    let ones = WeightFn::ones();
    for case in 0..60 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = complete_instance(&mut rng, hi, lo);
        assert!(
            check_complete(&inst.high, &inst.low, &inst.mapping, CAP).unwrap().holds(),
            "case {case}: construction failed to be complete"
        );
        for _ in 0..50 {
            let phi = random_formula(&mut rng, inst.mapping.high_universe().atoms(), 3);
            let image = inst.mapping.apply(&phi).unwrap();
            let below = probability(&image, &inst.low, &ones).unwrap();
            let above = probability(&phi, &inst.high, &ones).unwrap();
            if above.is_positive() {
                assert!(below.is_positive(), "case {case}: phantom possibility in {phi}");
            }
            if below.is_one() {
                assert!(above.is_one(), "case {case}: certainty not lifted for {phi}");
            }
        }
    }
}

/// The weighted extension: when the weighted soundness check passes, the
/// possibility/certainty transfers hold under the instance's own weights,
/// not just under counting.
#[test]
fn weighted_soundness_extends_the_transfers_to_weights() {
    let mut rng = seeded(0x51f);
    let mut held = 0;
    for case in 0..80 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = sound_instance(&mut rng, hi, lo);
        let verdict =
            check_weighted_sound(&inst.high, &inst.wh, &inst.low, &inst.wl, &inst.mapping)
                .unwrap();
        if !verdict.holds() {
            continue; // positivity transfer failed; the theorem does not apply
        }
        held += 1;
        for _ in 0..50 {
            let phi = random_formula(&mut rng, inst.mapping.high_universe().atoms(), 3);
            let image = inst.mapping.apply(&phi).unwrap();
            let below = probability(&image, &inst.low, &inst.wl).unwrap();
            let above = probability(&phi, &inst.high, &inst.wh).unwrap();
            if below.is_positive() {
                assert!(above.is_positive(), "case {case}: weighted possibility lost on {phi}");
            }
            if above.is_one() {
                assert!(below.is_one(), "case {case}: weighted certainty lost on {phi}");
            }
        }
    }
    assert!(held >= 20, "suite went vacuous: weighted soundness held only {held} times");
}

/// In the factorized regime the per-sentence/per-literal certificates
/// agree with the exact checks: a positive certificate is never
/// contradicted by the expensive verdict.
#[test]
fn certificates_agree_with_exact_checks_on_factorized_instances() {
    let mut rng = seeded(0x520);
    for case in 0..200 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = product_form_instance(&mut rng, hi, lo);
        let (high, wh, low, wl, m) = (&inst.high, &inst.wh, &inst.low, &inst.wl, &inst.mapping);
        if sufficient_sound(high, low, m).unwrap() {
            assert!(
                check_sound(high, low, m).unwrap().holds(),
                "case {case}: sound certificate overruled"
            );
        }
        if sufficient_complete(high, low, m).unwrap() {
            assert!(
                check_complete(high, low, m, CAP).unwrap().holds(),
                "case {case}: complete certificate overruled"
            );
        }
        if literal_prob_match(high, wh, low, wl, m).unwrap() {
            assert!(
                check_weak_exact(high, wh, low, wl, m, CAP).unwrap().holds(),
                "case {case}: literal-probability certificate overruled"
            );
        }
    }
}

/// The sound certificate needs no factorization at all: per-sentence
/// entailment of the images is exactly soundness, on any instance.
#[test]
fn sound_certificate_is_exact_everywhere() {
    let mut rng = seeded(0x521);
    for case in 0..100 {
        let inst = if case % 2 == 0 {
            let hi = rng.gen_range(1..=4);
            let lo = rng.gen_range(4..=7);
            sound_instance(&mut rng, hi, lo)
        } else {
            let hi = rng.gen_range(1..=4);
            let lo = rng.gen_range(4..=7);
            complete_instance(&mut rng, hi, lo)
        };
        let fast = sufficient_sound(&inst.high, &inst.low, &inst.mapping).unwrap();
        let exact = check_sound(&inst.high, &inst.low, &inst.mapping).unwrap().holds();
        assert_eq!(fast, exact, "case {case}: sound certificate diverged from the exact check");
    }
}

/// Weak exactness at model-formula granularity really does mean equality
/// for every formula: sampled φ of depth ≤ 4 agree exactly across levels.
#[test]
fn weak_exactness_extends_to_sampled_formulas() {
    let mut rng = seeded(0x522);
    for case in 0..25 {
        let hi = rng.gen_range(1..=4);
        let lo = rng.gen_range(4..=7);
        let inst = product_form_instance(&mut rng, hi, lo);
        let weak =
            check_weak_exact(&inst.high, &inst.wh, &inst.low, &inst.wl, &inst.mapping, CAP)
                .unwrap();
        assert!(weak.holds(), "case {case}: factorized instance not weakly exact: {weak}");
        for _ in 0..10 {
            let phi = random_formula(&mut rng, inst.mapping.high_universe().atoms(), 4);
            let image = inst.mapping.apply(&phi).unwrap();
            let above = probability(&phi, &inst.high, &inst.wh).unwrap();
            let below = probability(&image, &inst.low, &inst.wl).unwrap();
            assert_eq!(
                above.value(),
                below.value(),
                "case {case}: probabilities diverged on {phi}"
            );
        }
    }
}

/// classify's report invariants (the downward implications between the
/// six classes) hold on arbitrary random instances — the report asserts
/// them internally, so a completed call is itself the check.
#[test]
fn reports_are_internally_consistent_on_random_instances() {
    let mut rng = seeded(0x523);
    for case in 0..60 {
        let hi = rng.gen_range(1..=3);
        let lo = rng.gen_range(3..=6);
        let inst = match case % 3 {
            0 => sound_instance(&mut rng, hi, lo),
            1 => complete_instance(&mut rng, hi, lo),
            _ => product_form_instance(&mut rng, hi, lo),
        };
        let report =
            classify(&inst.high, &inst.wh, &inst.low, &inst.wl, &inst.mapping, CAP).unwrap();
        // Spot-check one implication on top of the internal assertions.
        if report.weighted_exact.holds() {
            assert!(report.sound.holds() && report.complete.holds());
        }
    }
}
