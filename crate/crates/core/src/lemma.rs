//! Exact collision probabilities of the `D6` pseudo-group ensemble.
//!
//! For two messages `u != ũ` the ratio `θ = c · c̃⁻¹ = G(u) G(ũ)⁻¹` of their
//! codewords does not depend on the dither, and its coordinates are
//! independent. Each coordinate has law
//!
//! ```text
//! P(θ_i = reflection)            = A(m1)     / (3 · 10^m1)   (each of 3)
//! P(θ_i = 1)                     = B(m1, m2) / (3 · 10^m1)
//! P(θ_i = non-identity rotation) = C(m1, m2) / (3 · 10^m1)   (each of 2)
//! ```
//!
//! with `m1` the number of message positions whose reflection bit differs and
//! `m2` the number where only the rotation part differs:
//!
//! ```text
//! A(m1)     = Σ_{l odd} C(m1, l) 9^l
//! B(m1, m2) = (10^m2 + 2) / 10^m2 + Σ_{l even, l >= 2} C(m1, l) 9^l
//! C(m1, m2) = (10^m2 - 1) / 10^m2 + Σ_{l even, l >= 2} C(m1, l) 9^l
//! ```
//!
//! Everything here is exact ([`BigRational`]). [`brute_force_collision_prob`]
//! recomputes the same quantities by enumerating generator tables and shares
//! no code with the closed forms.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};
use serde::Serialize;

use crate::dihedral::{DihedralElement, DihedralParams};
use crate::ensemble::{admissible_pairs, MessageWord};
use crate::error::{Error, Result};
use crate::exec::Execution;

const D6: DihedralParams = DihedralParams::D6;

/// Number of admissible generator pairs for `D6`.
const PAIRS: u64 = 10;

/// Largest `10^k` the brute-force oracle will enumerate per coordinate.
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// Default search range for [`thresholds`].
pub const DEFAULT_THRESHOLD_CAP: u32 = 40;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn pow(base: i64, e: u32) -> BigInt {
    num::pow(big(base), e as usize)
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

fn binomial(n: u32, r: u32) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * big((n - i) as i64) / big((i + 1) as i64);
    }
    acc
}

/// `Σ_{l odd} C(m1, l) 9^l`.
fn odd_sum(m1: u32) -> BigInt {
    (1..=m1)
        .step_by(2)
        .map(|l| binomial(m1, l) * pow(9, l))
        .sum()
}

/// `Σ_{l even, l >= 2} C(m1, l) 9^l`.
fn even_sum(m1: u32) -> BigInt {
    (2..=m1)
        .step_by(2)
        .map(|l| binomial(m1, l) * pow(9, l))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abc {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

/// `A(m1)`, `B(m1, m2)`, `C(m1, m2)` from their defining sums. `A(0) = 0`.
pub fn abc_functions(m1: u32, m2: u32) -> Abc {
    let ten_m2 = pow(10, m2);
    let even = BigRational::from_integer(even_sum(m1));
    Abc {
        a: BigRational::from_integer(odd_sum(m1)),
        b: ratio(ten_m2.clone() + big(2), ten_m2.clone()) + even.clone(),
        c: ratio(ten_m2.clone() - big(1), ten_m2) + even,
    }
}

/// `(10^m1 - (-8)^m1) / 2`, equal to `A(m1)`.
pub fn a_closed_form(m1: u32) -> BigInt {
    (pow(10, m1) - pow(-8, m1)) / big(2)
}

/// `(10^m1 + (-8)^m1) / 2 - 1`, equal to the even-index sum inside `B`, `C`.
pub fn even_sum_closed_form(m1: u32) -> BigInt {
    (pow(10, m1) + pow(-8, m1)) / big(2) - big(1)
}

/// Class of a coordinate of `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaClass {
    Reflection,
    NonidentityRotation,
    Identity,
}

impl ThetaClass {
    pub const ALL: [ThetaClass; 3] = [
        ThetaClass::Reflection,
        ThetaClass::NonidentityRotation,
        ThetaClass::Identity,
    ];

    pub fn of(a: DihedralElement) -> Self {
        if a.is_reflection() {
            ThetaClass::Reflection
        } else if a.is_identity() {
            ThetaClass::Identity
        } else {
            ThetaClass::NonidentityRotation
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThetaClass::Reflection => "reflection",
            ThetaClass::NonidentityRotation => "nonidentity-rotation",
            ThetaClass::Identity => "identity",
        }
    }
}

/// Type statistics of a message pair and of a codeword ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DifferenceType {
    /// Message positions with different reflection bits.
    pub m1: u32,
    /// Equal reflection bit, different rotation part.
    pub m2: u32,
    /// Equal digits.
    pub m3: u32,
    /// Reflection coordinates of `θ`.
    pub n1: u32,
    /// Non-identity rotation coordinates of `θ`.
    pub n2: u32,
    /// Identity coordinates of `θ`.
    pub n3: u32,
}

/// `(m1, m2, m3)` of a message pair.
pub fn message_type(u: &MessageWord, u_tilde: &MessageWord) -> Result<(u32, u32, u32)> {
    if u.len() != u_tilde.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            found: u_tilde.len(),
        });
    }
    let (mut m1, mut m2, mut m3) = (0, 0, 0);
    for (a, b) in u.digits.iter().zip(&u_tilde.digits) {
        if a.beta != b.beta {
            m1 += 1;
        } else if a.alpha != b.alpha {
            m2 += 1;
        } else {
            m3 += 1;
        }
    }
    Ok((m1, m2, m3))
}

/// `(n1, n2, n3)` of a codeword ratio.
pub fn theta_type(theta: &[DihedralElement]) -> (u32, u32, u32) {
    theta
        .iter()
        .fold((0, 0, 0), |(n1, n2, n3), &t| match ThetaClass::of(t) {
            ThetaClass::Reflection => (n1 + 1, n2, n3),
            ThetaClass::NonidentityRotation => (n1, n2 + 1, n3),
            ThetaClass::Identity => (n1, n2, n3 + 1),
        })
}

impl DifferenceType {
    pub fn of(u: &MessageWord, u_tilde: &MessageWord, theta: &[DihedralElement]) -> Result<Self> {
        let (m1, m2, m3) = message_type(u, u_tilde)?;
        let (n1, n2, n3) = theta_type(theta);
        Ok(Self {
            m1,
            m2,
            m3,
            n1,
            n2,
            n3,
        })
    }
}

/// Probability that one coordinate of `θ` is a given element of `class`.
pub fn per_coordinate_prob(m1: u32, m2: u32, class: ThetaClass) -> Result<BigRational> {
    if m1 == 0 && m2 == 0 {
        return Err(Error::EqualMessages);
    }
    let abc = abc_functions(m1, m2);
    let numer = match class {
        ThetaClass::Reflection => abc.a,
        ThetaClass::Identity => abc.b,
        ThetaClass::NonidentityRotation => abc.c,
    };
    Ok(numer / BigRational::from_integer(big(3) * pow(10, m1)))
}

/// `P(G(ũ) B = c̃ | G(u) B = c)` for `θ = c c̃⁻¹`, as a product of
/// per-coordinate factors.
pub fn pairwise_collision_prob(
    u: &MessageWord,
    u_tilde: &MessageWord,
    theta: &[DihedralElement],
) -> Result<BigRational> {
    let (m1, m2, _) = message_type(u, u_tilde)?;
    if m1 == 0 && m2 == 0 {
        return Err(Error::EqualMessages);
    }
    let (n1, n2, n3) = theta_type(theta);
    let refl = per_coordinate_prob(m1, m2, ThetaClass::Reflection)?;
    let rot = per_coordinate_prob(m1, m2, ThetaClass::NonidentityRotation)?;
    let id = per_coordinate_prob(m1, m2, ThetaClass::Identity)?;
    Ok(num::pow(refl, n1 as usize) * num::pow(rot, n2 as usize) * num::pow(id, n3 as usize))
}

/// Counts of `G_i(u) G_i(ũ)⁻¹` over all `10^k` choices of one generator row,
/// indexed by table index of the element.
pub fn theta_counts(u: &MessageWord, u_tilde: &MessageWord, exec: Execution) -> Result<[u64; 6]> {
    if u.len() != u_tilde.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            found: u_tilde.len(),
        });
    }
    let k = u.len() as u32;
    let size = (PAIRS as u128).checked_pow(k).unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            size,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let pairs = admissible_pairs(&D6);
    let counts = exec.map_reduce(
        size as usize,
        [0u64; 6],
        |mut t| {
            let mut gu = DihedralElement::IDENTITY;
            let mut gv = DihedralElement::IDENTITY;
            for j in 0..k as usize {
                let pair = pairs[t % PAIRS as usize];
                t /= PAIRS as usize;
                gu = D6.mul(gu, pair.apply(&D6, u.digits[j]));
                gv = D6.mul(gv, pair.apply(&D6, u_tilde.digits[j]));
            }
            let mut out = [0u64; 6];
            out[D6.index_of(D6.mul(gu, D6.inv(gv)))] = 1;
            out
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    Ok(counts)
}

/// The same probability as [`pairwise_collision_prob`], obtained by
/// enumerating every generator row for each coordinate.
pub fn brute_force_collision_prob(
    u: &MessageWord,
    u_tilde: &MessageWord,
    theta: &[DihedralElement],
    exec: Execution,
) -> Result<BigRational> {
    if u == u_tilde {
        return Err(Error::EqualMessages);
    }
    let counts = theta_counts(u, u_tilde, exec)?;
    let total = pow(PAIRS as i64, u.len() as u32);
    Ok(theta
        .iter()
        .map(|&t| ratio(big(counts[D6.index_of(t)] as i64), total.clone()))
        .fold(BigRational::one(), |acc, f| acc * f))
}

/// `|T_{m1,m2}(u)| = C(k, m1) C(k - m1, m2) 3^m1 2^m2`, zero when
/// `m1 + m2 > k`.
pub fn count_message_types(k: u32, m1: u32, m2: u32) -> BigInt {
    if m1 + m2 > k {
        return BigInt::zero();
    }
    binomial(k, m1) * binomial(k - m1, m2) * pow(3, m1) * pow(2, m2)
}

/// A disagreement between the closed form and the enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub m1: u32,
    pub m2: u32,
    pub class: ThetaClass,
    pub u: String,
    pub u_tilde: String,
    pub theta: String,
    pub formula: String,
    pub oracle: String,
}

/// Comparisons for one `(m1, m2, class)` combination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeResult {
    pub m1: u32,
    pub m2: u32,
    pub class: ThetaClass,
    /// Closed-form per-coordinate probability.
    pub probability: String,
    pub comparisons: u64,
    pub mismatches: u64,
}

/// Outcome of a full closed-form versus enumeration sweep at fixed `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub k: usize,
    /// One entry per `(m1, m2, class)` exercised, in increasing order.
    pub types: Vec<TypeResult>,
    /// Individual `(u, ũ, θ)` comparisons.
    pub comparisons: u64,
    pub mismatches: Vec<Counterexample>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Distinct `(m1, m2, class)` combinations exercised.
    pub fn types_by_class(&self) -> usize {
        self.types.len()
    }
}

fn render(u: &MessageWord) -> String {
    let parts: Vec<String> = u.digits.iter().map(|d| d.to_string()).collect();
    format!("({})", parts.join(","))
}

type TypeTally = BTreeMap<(u32, u32, ThetaClass), (u64, u64)>;

/// Compares the closed form with the enumeration for every `u`, every
/// `ũ != u` and every single-coordinate `θ`.
pub fn verify_oracle(k: usize, exec: Execution) -> Result<OracleReport> {
    let enumerated = (PAIRS as u128).saturating_pow(k as u32);
    if enumerated > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            size: enumerated,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let size = 6usize.pow(k as u32);
    let total = pow(PAIRS as i64, k as u32);
    let check_u = |ui: usize| -> Result<(TypeTally, Vec<Counterexample>)> {
        let u = MessageWord::from_index(&D6, k, ui as u128);
        let mut tally = TypeTally::new();
        let mut bad = Vec::new();
        for vi in (0..size).filter(|&v| v != ui) {
            let v = MessageWord::from_index(&D6, k, vi as u128);
            let (m1, m2, _) = message_type(&u, &v)?;
            // the inner enumeration stays sequential; the outer loop is parallel
            let counts = theta_counts(&u, &v, Execution::Sequential)?;
            for theta in D6.elements() {
                let class = ThetaClass::of(theta);
                let formula = per_coordinate_prob(m1, m2, class)?;
                let oracle = ratio(big(counts[D6.index_of(theta)] as i64), total.clone());
                let entry = tally.entry((m1, m2, class)).or_default();
                entry.0 += 1;
                if formula != oracle {
                    entry.1 += 1;
                    bad.push(Counterexample {
                        m1,
                        m2,
                        class,
                        u: render(&u),
                        u_tilde: render(&v),
                        theta: theta.to_string(),
                        formula: formula.to_string(),
                        oracle: oracle.to_string(),
                    });
                }
            }
        }
        Ok((tally, bad))
    };
    let (tally, mismatches) =
        exec.map_reduce(size, Ok((TypeTally::new(), Vec::new())), check_u, |a, b| {
            let (mut ta, mut ba) = a?;
            let (tb, bb) = b?;
            for (key, (c, m)) in tb {
                let e = ta.entry(key).or_default();
                e.0 += c;
                e.1 += m;
            }
            ba.extend(bb);
            Ok((ta, ba))
        })?;
    let mut types = Vec::with_capacity(tally.len());
    for ((m1, m2, class), (comparisons, bad)) in tally {
        types.push(TypeResult {
            m1,
            m2,
            class,
            probability: per_coordinate_prob(m1, m2, class)?.to_string(),
            comparisons,
            mismatches: bad,
        });
    }
    Ok(OracleReport {
        k,
        comparisons: types.iter().map(|t| t.comparisons).sum(),
        types,
        mismatches,
    })
}

/// `δ` and `δ'` of the threshold claims, both in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    pub delta: f64,
    pub delta_prime: f64,
}

impl BoundParams {
    pub fn new(delta: f64, delta_prime: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("delta_prime", delta_prime)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self { delta, delta_prime })
    }
}

/// `1 / (2 (1 - δ))` as an exact rational (the float `δ` is taken exactly).
fn half_inverse_complement(delta: f64) -> BigRational {
    let d = BigRational::from_float(delta).expect("delta is finite");
    BigRational::one() / (BigRational::from_integer(big(2)) * (BigRational::one() - d))
}

/// First claim at one `m1`: `A, B, C < 10^m1 / (2 (1 - δ))` for every
/// `m2 <= m2_cap` (the pair `(0, 0)` is skipped).
pub fn first_claim_holds(m1: u32, delta: f64, m2_cap: u32) -> bool {
    let bound = BigRational::from_integer(pow(10, m1)) * half_inverse_complement(delta);
    (0..=m2_cap).filter(|&m2| m1 > 0 || m2 > 0).all(|m2| {
        let abc = abc_functions(m1, m2);
        abc.a < bound && abc.b < bound && abc.c < bound
    })
}

/// Second claim at one `(m1, m2)`, with the `(-8)^m1` sign that makes it
/// true for every `m1`:
///
/// ```text
/// A(m1)     < (10^m1 - (-8)^m1) / (2 (1 - δ'))
/// B, C      < (10^m1 + (-8)^m1) / (2 (1 - δ'))
/// ```
///
/// `A(0) = 0` equals its bound, so at `m1 = 0` the `A` comparison is `<=`.
pub fn second_claim_holds(m1: u32, m2: u32, delta_prime: f64) -> bool {
    let scale = half_inverse_complement(delta_prime);
    let lower = BigRational::from_integer(pow(10, m1) - pow(-8, m1)) * scale.clone();
    let upper = BigRational::from_integer(pow(10, m1) + pow(-8, m1)) * scale;
    let abc = abc_functions(m1, m2);
    let a_ok = if m1 == 0 {
        abc.a <= lower
    } else {
        abc.a < lower
    };
    a_ok && abc.b < upper && abc.c < upper
}

/// The second claim exactly as printed, with `8^m1` in place of `(-8)^m1`.
/// It fails for `m1 = 0` and for odd `m1` below 15; kept to document that.
pub fn second_claim_literal_holds(m1: u32, m2: u32, delta_prime: f64) -> bool {
    let scale = half_inverse_complement(delta_prime);
    let lower = BigRational::from_integer(pow(10, m1) - pow(8, m1)) * scale.clone();
    let upper = BigRational::from_integer(pow(10, m1) + pow(8, m1)) * scale;
    let abc = abc_functions(m1, m2);
    abc.a < lower && abc.b < upper && abc.c < upper
}

/// Result of the threshold search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    /// Smallest `M1` with the first claim holding for all `M1 <= m1 <= cap`.
    pub m1: u32,
    /// Largest per-`m1` threshold over `m1 < M1`, the value the error-bound
    /// split consumes.
    pub m2: u32,
    /// Smallest `M2` for each `m1 in 0..=cap` such that the second claim
    /// holds for all `M2 <= m2 <= cap`.
    pub m2_by_m1: Vec<u32>,
    pub cap: u32,
}

/// Minimal thresholds for both claims, searched exactly up to `cap`.
pub fn thresholds(params: BoundParams, cap: u32) -> Result<Thresholds> {
    let last_first_failure = (0..=cap)
        .rev()
        .find(|&m1| !first_claim_holds(m1, params.delta, cap));
    let m1_threshold = match last_first_failure {
        None => 0,
        Some(f) if f == cap => {
            return Err(Error::ThresholdNotFound {
                claim: "first",
                cap,
            })
        }
        Some(f) => f + 1,
    };
    let mut m2_by_m1 = Vec::with_capacity(cap as usize + 1);
    for m1 in 0..=cap {
        let fail = (0..=cap)
            .rev()
            .find(|&m2| !second_claim_holds(m1, m2, params.delta_prime));
        match fail {
            None => m2_by_m1.push(0),
            Some(f) if f == cap => {
                return Err(Error::ThresholdNotFound {
                    claim: "second",
                    cap,
                })
            }
            Some(f) => m2_by_m1.push(f + 1),
        }
    }
    let m2 = m2_by_m1[..m1_threshold as usize]
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    Ok(Thresholds {
        m1: m1_threshold,
        m2,
        m2_by_m1,
        cap,
    })
}

/// Checks a threshold result against the claims for every `m1, m2 <= cap`.
/// Returns the first `(m1, m2)` that violates a claim in its range.
pub fn verify_thresholds(params: BoundParams, t: &Thresholds) -> Option<(u32, u32)> {
    for m1 in t.m1..=t.cap {
        if !first_claim_holds(m1, params.delta, t.cap) {
            return Some((m1, 0));
        }
    }
    for (m1, &start) in t.m2_by_m1.iter().enumerate() {
        for m2 in start..=t.cap {
            if !second_claim_holds(m1 as u32, m2, params.delta_prime) {
                return Some((m1 as u32, m2));
            }
        }
    }
    None
}

/// `3 A + B + 2 C - 3 · 10^m1`, zero for every `(m1, m2)`.
pub fn normalization_defect(m1: u32, m2: u32) -> BigRational {
    let abc = abc_functions(m1, m2);
    let three = BigRational::from_integer(big(3));
    let two = BigRational::from_integer(big(2));
    three.clone() * abc.a + abc.b + two * abc.c - three * BigRational::from_integer(pow(10, m1))
}

/// `A(m1) >= 10^m1 / 2`. Never true for even `m1`, where `(-8)^m1 > 0`.
pub fn a_exceeds_half(m1: u32) -> bool {
    BigRational::from_integer(a_closed_form(m1)) >= ratio(pow(10, m1), big(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        ratio(big(n), big(d))
    }

    fn word(s: &[&str]) -> MessageWord {
        MessageWord::new(s.iter().map(|x| D6.parse(x).unwrap()).collect())
    }

    #[test]
    fn abc_examples() {
        let abc = abc_functions(1, 0);
        assert_eq!((abc.a, abc.b, abc.c), (r(9, 1), r(3, 1), r(0, 1)));
        let abc = abc_functions(2, 0);
        assert_eq!((abc.a, abc.b, abc.c), (r(18, 1), r(84, 1), r(81, 1)));
        assert_eq!(abc_functions(0, 5).a, r(0, 1));
        assert_eq!(abc_functions(0, 2).b, r(102, 100));
    }

    #[test]
    fn closed_forms_match_sums() {
        for m1 in 0..=20 {
            assert_eq!(odd_sum(m1), a_closed_form(m1), "m1={m1}");
            assert_eq!(even_sum(m1), even_sum_closed_form(m1), "m1={m1}");
        }
    }

    #[test]
    fn normalization() {
        for m1 in 0..=12 {
            for m2 in 0..=12 {
                assert!(normalization_defect(m1, m2).is_zero());
            }
        }
    }

    #[test]
    fn per_coordinate_examples() {
        assert_eq!(
            per_coordinate_prob(1, 0, ThetaClass::Reflection).unwrap(),
            r(3, 10)
        );
        assert_eq!(
            per_coordinate_prob(0, 1, ThetaClass::Identity).unwrap(),
            r(4, 10)
        );
        assert_eq!(
            per_coordinate_prob(0, 1, ThetaClass::NonidentityRotation).unwrap(),
            r(3, 10)
        );
        assert_eq!(
            per_coordinate_prob(0, 0, ThetaClass::Identity),
            Err(Error::EqualMessages)
        );
    }

    #[test]
    fn pairwise_examples() {
        let u = word(&["1"]);
        let v = word(&["y"]);
        let theta = [D6.parse("y").unwrap()];
        assert_eq!(pairwise_collision_prob(&u, &v, &theta).unwrap(), r(3, 10));

        let v = word(&["x"]);
        let theta = [DihedralElement::IDENTITY, D6.parse("x").unwrap()];
        assert_eq!(pairwise_collision_prob(&u, &v, &theta).unwrap(), r(12, 100));
        assert_eq!(
            brute_force_collision_prob(&u, &v, &theta, Execution::Sequential).unwrap(),
            r(12, 100)
        );

        let v = word(&["xy"]);
        let theta = [D6.parse("xy").unwrap()];
        assert_eq!(
            brute_force_collision_prob(&u, &v, &theta, Execution::Sequential).unwrap(),
            r(3, 10)
        );

        let u = word(&["1", "1"]);
        let v = word(&["x", "x^2"]);
        let theta = [DihedralElement::IDENTITY];
        assert_eq!(
            brute_force_collision_prob(&u, &v, &theta, Execution::Parallel).unwrap(),
            r(34, 100)
        );
        assert_eq!(
            pairwise_collision_prob(&u, &u, &theta),
            Err(Error::EqualMessages)
        );
    }

    #[test]
    fn message_type_counts() {
        assert_eq!(count_message_types(2, 1, 1), big(12));
        assert_eq!(count_message_types(2, 0, 0), big(1));
        assert_eq!(count_message_types(2, 2, 1), big(0));
        for k in 0..=6u32 {
            let total: BigInt = (0..=k)
                .flat_map(|m1| (0..=k - m1).map(move |m2| (m1, m2)))
                .map(|(m1, m2)| count_message_types(k, m1, m2))
                .sum();
            assert_eq!(total, pow(6, k));
        }
    }

    #[test]
    fn message_type_counts_match_enumeration() {
        let k = 2;
        let u = word(&["x", "y"]);
        let mut counts = std::collections::HashMap::new();
        for i in 0..36 {
            let v = MessageWord::from_index(&D6, k, i);
            let (m1, m2, _) = message_type(&u, &v).unwrap();
            *counts.entry((m1, m2)).or_insert(0u32) += 1;
        }
        for ((m1, m2), c) in counts {
            assert_eq!(count_message_types(k as u32, m1, m2), big(c as i64));
        }
    }

    #[test]
    fn oracle_sweep_k1_k2() {
        let rep = verify_oracle(1, Execution::Parallel).unwrap();
        assert!(rep.passed(), "{:?}", rep.mismatches);
        assert_eq!(rep.types_by_class(), 6);
        let rep = verify_oracle(2, Execution::Parallel).unwrap();
        assert!(rep.passed(), "{:?}", rep.mismatches.first());
        assert_eq!(rep.types_by_class(), 15);
        assert_eq!(rep.comparisons, 36 * 35 * 6);
    }

    #[test]
    fn thresholds_delta_point_one() {
        let params = BoundParams::new(0.1, 0.1).unwrap();
        let t = thresholds(params, 40).unwrap();
        assert_eq!(t.m1, 10);
        assert!(first_claim_holds(t.m1, 0.1, 40));
        assert!(!first_claim_holds(t.m1 - 1, 0.1, 40));
        assert_eq!(verify_thresholds(params, &t), None);
        assert!(t.m2_by_m1.iter().all(|&m| m <= t.m2 || m <= 40));
    }

    #[test]
    fn thresholds_shrink_as_delta_grows() {
        let mut last = u32::MAX;
        for d in [0.05, 0.1, 0.3, 0.6, 0.9] {
            let t = thresholds(BoundParams::new(d, d).unwrap(), 40).unwrap();
            assert!(t.m1 <= last);
            last = t.m1;
        }
        assert_eq!(last, 0);
    }

    #[test]
    fn literal_second_claim_fails_for_small_odd_m1() {
        for m2 in 0..=40 {
            assert!(!second_claim_literal_holds(1, m2, 0.1));
            assert!(!second_claim_literal_holds(0, m2, 0.1));
        }
        assert!(second_claim_literal_holds(2, 40, 0.1));
    }

    #[test]
    fn a_below_half_for_even_m1() {
        for m1 in (0..=30).step_by(2) {
            assert!(!a_exceeds_half(m1));
        }
        assert!(a_exceeds_half(1));
    }

    #[test]
    fn bound_params_validation() {
        assert!(BoundParams::new(0.0, 0.5).is_err());
        assert!(BoundParams::new(0.5, 1.0).is_err());
        assert!(BoundParams::new(f64::NAN, 0.5).is_err());
    }
}
