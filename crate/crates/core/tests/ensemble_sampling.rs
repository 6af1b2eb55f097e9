use pgcodes::ensemble::{admissible_pairs, sample_element, sample_generator_pair};
use pgcodes::{DihedralParams, GeneratorPair, MessageWord, PseudoGroupCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const D6: DihedralParams = DihedralParams::D6;
const DRAWS: usize = 1_000_000;

/// Chi-square critical values at the 0.001 level.
const CHI2_9_DOF: f64 = 27.877;
const CHI2_5_DOF: f64 = 20.515;

fn chi_square(counts: &[u64], total: usize) -> f64 {
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

#[test]
fn generator_pairs_are_uniform_over_the_admissible_set() {
    let pairs = admissible_pairs(&D6);
    assert_eq!(pairs.len(), 10);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut counts = vec![0u64; pairs.len()];
    for _ in 0..DRAWS {
        let pair = sample_generator_pair(&D6, &mut rng);
        assert!(D6.verify_presentation(pair.g(), pair.h()));
        let idx = pairs
            .iter()
            .position(|p| *p == pair)
            .expect("drawn pair is admissible");
        counts[idx] += 1;
    }
    let stat = chi_square(&counts, DRAWS);
    assert!(stat < CHI2_9_DOF, "chi-square {stat}");

    let freq = |g: &str, h: &str| {
        let pair = GeneratorPair::new(&D6, D6.parse(g).unwrap(), D6.parse(h).unwrap()).unwrap();
        let idx = pairs.iter().position(|p| *p == pair).unwrap();
        counts[idx] as f64 / DRAWS as f64
    };
    assert!((freq("x", "xy") - 0.1).abs() < 0.002);
    assert!((freq("1", "1") - 0.1).abs() < 0.002);
}

#[test]
fn dither_marginal_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut counts = vec![0u64; 6];
    for _ in 0..DRAWS {
        counts[D6.index_of(sample_element(&D6, &mut rng))] += 1;
    }
    for &c in &counts {
        assert!((c as f64 / DRAWS as f64 - 1.0 / 6.0).abs() < 0.002);
    }
    assert!(chi_square(&counts, DRAWS) < CHI2_5_DOF);
}

#[test]
fn transmitted_symbol_is_uniform_for_a_fixed_message() {
    // Over the ensemble, each coordinate of the codeword of a fixed message
    // is uniform; 10^6 symbols from codes of length 10.
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let u = MessageWord::new(vec![D6.parse("xy").unwrap(), D6.parse("x^2").unwrap()]);
    let mut counts = vec![0u64; 6];
    for _ in 0..DRAWS / 10 {
        let code = PseudoGroupCode::sample(2, 10, D6, &mut rng);
        for c in code.encode(&u).unwrap() {
            counts[D6.index_of(c)] += 1;
        }
    }
    assert!(chi_square(&counts, DRAWS) < CHI2_5_DOF);
}

#[test]
fn seeded_codes_are_reproducible() {
    let a = PseudoGroupCode::sample_seeded(3, 7, D6, 99);
    let b = PseudoGroupCode::sample_seeded(3, 7, D6, 99);
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(PseudoGroupCode::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn codebook_covers_every_message() {
    let code = PseudoGroupCode::sample_seeded(2, 5, D6, 5);
    let book = code.enumerate_codebook(1_000).unwrap();
    assert_eq!(book.len(), 36);
    for (u, c) in book.entries() {
        assert_eq!(code.encode(&u).unwrap(), c);
    }
    assert!(code.enumerate_codebook(10).is_err());
}
