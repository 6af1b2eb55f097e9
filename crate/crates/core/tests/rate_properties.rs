use pgcodes::rate::{
    best_labeling, conditional_entropy, nth_permutation, rate_breakdown, symmetric_capacity,
    Conditioning, Objective,
};
use pgcodes::{BuiltinChannel, Channel, DihedralParams, Execution, Labeling, Partition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const D6: DihedralParams = DihedralParams::D6;
const LOG2_6: f64 = 2.584962500721156;

fn random_channel() -> impl Strategy<Value = Channel> {
    (2usize..=8, any::<u64>()).prop_map(|(outputs, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Channel::random(D6, outputs, &mut rng).unwrap()
    })
}

fn permutation() -> impl Strategy<Value = Vec<usize>> {
    (0usize..720).prop_map(|i| nth_permutation(6, i))
}

const CONDITIONINGS: [Conditioning; 4] = [
    Conditioning::Output,
    Conditioning::CosetAndOutput(Partition::RotationCoset),
    Conditioning::CosetAndOutput(Partition::Z6Index3),
    Conditioning::CosetAndOutput(Partition::Z6Index2),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn relabeling_the_channel_matches_relabeling_the_code(ch in random_channel(), perm in permutation()) {
        let labeling = Labeling::from_permutation(perm.clone()).unwrap();
        let moved = ch.relabel(&perm).unwrap();
        let ident = Labeling::identity(6);
        for cond in CONDITIONINGS {
            let a = conditional_entropy(&ch, &labeling, cond);
            let b = conditional_entropy(&moved, &ident, cond);
            prop_assert!((a - b).abs() < 1e-12, "{cond:?}: {a} vs {b}");
        }
    }

    #[test]
    fn breakdown_invariants(ch in random_channel(), perm in permutation()) {
        let labeling = Labeling::from_permutation(perm).unwrap();
        let r = rate_breakdown(&ch, &labeling).unwrap();
        for h in [r.h_x_given_y, r.h_x_given_coset_y, r.h_x_given_z3_y, r.h_x_given_z2_y] {
            prop_assert!((0.0..=LOG2_6 + 1e-12).contains(&h));
        }
        prop_assert_eq!(r.r_star, r.term_full.min(r.term_coset));
        prop_assert_eq!(r.r_abelian, r.term_full.min(r.abelian_term3).min(r.abelian_term_coset3));
        prop_assert!(r.r_star <= symmetric_capacity(&ch, &labeling) + 1e-12);
    }

    #[test]
    fn abelian_rate_never_exceeds_pseudo_group_rate(ch in random_channel()) {
        let r = rate_breakdown(&ch, &Labeling::identity(6)).unwrap();
        prop_assert!(r.r_abelian <= r.r_star + 1e-12, "{} > {}", r.r_abelian, r.r_star);
    }
}

#[test]
fn entropy_anchors() {
    let ident = Labeling::identity(6);
    let rot = BuiltinChannel::RotationRevealing.build(D6).unwrap();
    assert!((conditional_entropy(&rot, &ident, Conditioning::Output) - 1.0).abs() < 1e-12);
    let coset = Conditioning::CosetAndOutput(Partition::RotationCoset);
    assert!(conditional_entropy(&rot, &ident, coset).abs() < 1e-12);

    let useless = BuiltinChannel::Useless { outputs: 6 }.build(D6).unwrap();
    assert!((conditional_entropy(&useless, &ident, Conditioning::Output) - LOG2_6).abs() < 1e-12);
    assert!((conditional_entropy(&useless, &ident, coset) - 3f64.log2()).abs() < 1e-12);
}

#[test]
fn rotation_revealing_breakdown() {
    let rot = BuiltinChannel::RotationRevealing.build(D6).unwrap();
    let r = rate_breakdown(&rot, &Labeling::identity(6)).unwrap();
    assert!((r.term_full - 1.584963).abs() < 1e-6);
    assert!((r.term_coset - LOG2_6).abs() < 1e-12);
    assert!((r.r_star - 3f64.log2()).abs() < 1e-12);
    assert!(r.r_abelian.abs() < 1e-12);
}

#[test]
fn labeling_search_is_mode_independent() {
    let ch = BuiltinChannel::ThreeEps {
        eps1: 0.1,
        eps2: 0.05,
        eps3: 0.02,
    }
    .build(D6)
    .unwrap();
    for objective in Objective::ALL {
        let seq = best_labeling(&ch, objective, Execution::Sequential).unwrap();
        let par = best_labeling(&ch, objective, Execution::Parallel).unwrap();
        assert_eq!(seq.0, par.0, "{}", objective.name());
        assert_eq!(seq.1, par.1);
        let current = objective.evaluate(&ch, &Labeling::identity(6)).unwrap();
        assert!(seq.1 >= current - 1e-12);
    }
}

#[test]
fn larger_groups_are_rejected_by_the_rate_formulas() {
    let d10 = DihedralParams::new(5).unwrap();
    let ch = BuiltinChannel::Identity.build(d10).unwrap();
    assert!(rate_breakdown(&ch, &Labeling::identity(10)).is_err());
}
