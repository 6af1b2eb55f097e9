//! Exact arithmetic on dihedral groups `D_2p = <x, y | x^p = 1, y^2 = 1, xyxy = 1>`.
//!
//! Every element is kept in the canonical form `x^alpha y^beta` with
//! `0 <= alpha < p` and `beta in {0, 1}`. Multiplication uses the relation
//! `y x = x^{-1} y`, so
//!
//! ```text
//! x^a y^b  *  x^c y^d  =  x^{a + (-1)^b c} y^{b + d}
//! ```
//!
//! which is O(1) for any odd prime `p`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::Labeling;
use crate::error::{Error, Result};

/// Order parameter of a dihedral group: the group has `2p` elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct DihedralParams {
    p: u32,
}

/// An element `x^alpha y^beta` in canonical form.
///
/// The element does not carry `p`; validity is checked by [`DihedralParams::element`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DihedralElement {
    pub alpha: u32,
    pub beta: u8,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl DihedralParams {
    /// The group of order 6, the smallest non-Abelian group.
    pub const D6: DihedralParams = DihedralParams { p: 3 };

    pub fn new(p: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of group elements, `2p`.
    pub fn order(&self) -> usize {
        2 * self.p as usize
    }

    pub fn element(&self, alpha: u32, beta: u8) -> Result<DihedralElement> {
        if alpha >= self.p || beta > 1 {
            return Err(Error::InvalidElement {
                alpha,
                beta,
                p: self.p,
            });
        }
        Ok(DihedralElement { alpha, beta })
    }

    pub fn contains(&self, a: DihedralElement) -> bool {
        a.alpha < self.p && a.beta <= 1
    }

    pub fn rotation(&self, alpha: i64) -> DihedralElement {
        DihedralElement {
            alpha: alpha.rem_euclid(self.p as i64) as u32,
            beta: 0,
        }
    }

    pub fn reflection(&self, alpha: i64) -> DihedralElement {
        DihedralElement {
            alpha: alpha.rem_euclid(self.p as i64) as u32,
            beta: 1,
        }
    }

    /// Table position of an element: rotations `1, x, .., x^{p-1}` first,
    /// then reflections `y, xy, .., x^{p-1}y`.
    pub fn index_of(&self, a: DihedralElement) -> usize {
        a.beta as usize * self.p as usize + a.alpha as usize
    }

    pub fn element_at(&self, index: usize) -> DihedralElement {
        debug_assert!(index < self.order());
        let p = self.p as usize;
        DihedralElement {
            alpha: (index % p) as u32,
            beta: (index / p) as u8,
        }
    }

    /// All elements in table order.
    pub fn elements(&self) -> impl Iterator<Item = DihedralElement> + '_ {
        (0..self.order()).map(move |i| self.element_at(i))
    }

    pub fn mul(&self, a: DihedralElement, b: DihedralElement) -> DihedralElement {
        let p = self.p;
        let alpha = if a.beta == 0 {
            (a.alpha + b.alpha) % p
        } else {
            (a.alpha + p - b.alpha) % p
        };
        DihedralElement {
            alpha,
            beta: a.beta ^ b.beta,
        }
    }

    pub fn inv(&self, a: DihedralElement) -> DihedralElement {
        if a.beta == 1 {
            // reflections are involutions
            a
        } else {
            DihedralElement {
                alpha: (self.p - a.alpha) % self.p,
                beta: 0,
            }
        }
    }

    /// `a^e` by square-and-multiply; negative exponents go through the inverse.
    pub fn power(&self, a: DihedralElement, e: i64) -> DihedralElement {
        let mut base = if e < 0 { self.inv(a) } else { a };
        let mut e = e.unsigned_abs();
        let mut acc = DihedralElement::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Left-to-right product of a sequence of elements.
    pub fn product<I: IntoIterator<Item = DihedralElement>>(&self, items: I) -> DihedralElement {
        items
            .into_iter()
            .fold(DihedralElement::IDENTITY, |acc, e| self.mul(acc, e))
    }

    /// True iff `g^p = 1`, `h^2 = 1` and `ghgh = 1`, i.e. `x -> g, y -> h`
    /// extends to a homomorphism out of `D_2p`.
    pub fn verify_presentation(&self, g: DihedralElement, h: DihedralElement) -> bool {
        let one = DihedralElement::IDENTITY;
        let gh = self.mul(g, h);
        self.power(g, self.p as i64) == one && self.mul(h, h) == one && self.mul(gh, gh) == one
    }

    /// Residue label `m` in `Z_2p` with `m = alpha (mod p)` and `m = beta (mod 2)`.
    ///
    /// This is the default correspondence between the group and `Z_2p`; for
    /// `p = 3` it sends the rotation subgroup onto `{0, 2, 4}`.
    pub fn residue_label(&self, a: DihedralElement) -> usize {
        let p = self.p as usize;
        let alpha = a.alpha as usize;
        if alpha % 2 == a.beta as usize {
            alpha
        } else {
            alpha + p
        }
    }

    pub fn from_residue_label(&self, m: usize) -> DihedralElement {
        debug_assert!(m < self.order());
        DihedralElement {
            alpha: (m % self.p as usize) as u32,
            beta: (m % 2) as u8,
        }
    }

    /// Parses an element and checks it against `p`.
    pub fn parse(&self, s: &str) -> Result<DihedralElement> {
        let e: DihedralElement = s.parse()?;
        if !self.contains(e) {
            return Err(Error::InvalidElement {
                alpha: e.alpha,
                beta: e.beta,
                p: self.p,
            });
        }
        Ok(e)
    }

    /// Coset of `a` in the named partition.
    ///
    /// The rotation-coset label is `beta`. The two `Z_2p` partitions are
    /// taken on the residue label `labeling` assigns to `a`: cosets of the
    /// order-`p` subgroup `{0, 2, 4, ..}` are indexed by the label mod 2 and
    /// cosets of the order-2 subgroup `{0, p}` by the label mod `p`.
    pub fn coset_label(
        &self,
        a: DihedralElement,
        partition: Partition,
        labeling: &Labeling,
    ) -> PartitionLabel {
        let value = match partition {
            Partition::RotationCoset => a.beta as usize,
            Partition::Z6Index3 => labeling.input_of(self.residue_label(a)) % 2,
            Partition::Z6Index2 => labeling.input_of(self.residue_label(a)) % self.p as usize,
        };
        PartitionLabel { partition, value }
    }

    /// Number of cosets in a partition.
    pub fn coset_count(&self, partition: Partition) -> usize {
        match partition {
            Partition::RotationCoset | Partition::Z6Index3 => 2,
            Partition::Z6Index2 => self.p as usize,
        }
    }
}

impl TryFrom<u32> for DihedralParams {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Self::new(p)
    }
}

impl From<DihedralParams> for u32 {
    fn from(params: DihedralParams) -> u32 {
        params.p
    }
}

impl Default for DihedralParams {
    fn default() -> Self {
        Self::D6
    }
}

impl DihedralElement {
    pub const IDENTITY: DihedralElement = DihedralElement { alpha: 0, beta: 0 };

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn is_reflection(&self) -> bool {
        self.beta == 1
    }
}

impl fmt::Display for DihedralElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.alpha, self.beta) {
            (0, 0) => write!(f, "1"),
            (0, _) => write!(f, "y"),
            (1, 0) => write!(f, "x"),
            (1, _) => write!(f, "xy"),
            (a, 0) => write!(f, "x^{a}"),
            (a, _) => write!(f, "x^{a}y"),
        }
    }
}

impl FromStr for DihedralElement {
    type Err = Error;

    /// Accepts `1`, `x`, `x^a`, `y`, `xy`, `x^ay` and `x^a y`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "dihedral element",
            input: s.to_string(),
        };
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "1" {
            return Ok(Self::IDENTITY);
        }
        let (rot, beta) = match t.strip_suffix('y') {
            Some(rest) => (rest, 1),
            None => (t.as_str(), 0),
        };
        let alpha = if rot.is_empty() {
            0
        } else if rot == "x" {
            1
        } else if let Some(exp) = rot.strip_prefix("x^") {
            if exp.is_empty() || !exp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            exp.parse::<u32>().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        if rot.is_empty() && beta == 0 {
            return Err(bad());
        }
        Ok(Self { alpha, beta })
    }
}

/// Partitions of the input alphabet used by the rate formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    /// Cosets of the rotation subgroup `{1, x, .., x^{p-1}}`.
    RotationCoset,
    /// Cosets of `{0, 2, 4}` in `Z_6` (order-`p` subgroup of `Z_2p`).
    #[serde(rename = "z6-index3")]
    Z6Index3,
    /// Cosets of `{0, 3}` in `Z_6` (order-2 subgroup of `Z_2p`).
    #[serde(rename = "z6-index2")]
    Z6Index2,
}

impl Partition {
    pub fn id(&self) -> &'static str {
        match self {
            Partition::RotationCoset => "rotation-coset",
            Partition::Z6Index3 => "z6-index3",
            Partition::Z6Index2 => "z6-index2",
        }
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotation-coset" => Ok(Partition::RotationCoset),
            "z6-index3" => Ok(Partition::Z6Index3),
            "z6-index2" => Ok(Partition::Z6Index2),
            other => Err(Error::UnknownPartition(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PartitionLabel {
    pub partition: Partition,
    pub value: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    const D6: DihedralParams = DihedralParams::D6;

    fn el(s: &str) -> DihedralElement {
        D6.parse(s).unwrap()
    }

    /// The D6 multiplication table, row times column, in the order
    /// 1, x, x^2, y, xy, x^2y.
    const TABLE: [[&str; 6]; 6] = [
        ["1", "x", "x^2", "y", "xy", "x^2y"],
        ["x", "x^2", "1", "xy", "x^2y", "y"],
        ["x^2", "1", "x", "x^2y", "y", "xy"],
        ["y", "x^2y", "xy", "1", "x^2", "x"],
        ["xy", "y", "x^2y", "x", "1", "x^2"],
        ["x^2y", "xy", "y", "x^2", "x", "1"],
    ];

    #[test]
    fn reproduces_d6_table() {
        let header = TABLE[0];
        for (r, row) in TABLE.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                assert_eq!(
                    D6.mul(el(header[r]), el(header[c])),
                    el(cell),
                    "{} * {}",
                    header[r],
                    header[c]
                );
            }
        }
    }

    #[test]
    fn table_order_matches_index_of() {
        for (i, name) in TABLE[0].iter().enumerate() {
            assert_eq!(D6.index_of(el(name)), i);
            assert_eq!(D6.element_at(i), el(name));
        }
    }

    #[test]
    fn mul_examples() {
        assert_eq!(D6.mul(el("x"), el("y")), el("xy"));
        assert_eq!(D6.mul(el("1"), el("x^2y")), el("x^2y"));
        assert_eq!(D6.mul(el("y"), el("x")), el("x^2y"));
    }

    #[test]
    fn inv_examples() {
        assert_eq!(D6.inv(el("x")), el("x^2"));
        assert_eq!(D6.inv(el("xy")), el("xy"));
        assert_eq!(D6.inv(el("1")), el("1"));
    }

    #[test]
    fn power_examples() {
        assert_eq!(D6.power(el("x"), 3), DihedralElement::IDENTITY);
        assert_eq!(D6.power(el("y"), 2), DihedralElement::IDENTITY);
        assert_eq!(D6.power(el("x"), -1), el("x^2"));
        assert_eq!(D6.power(el("xy"), 0), DihedralElement::IDENTITY);
        assert_eq!(D6.power(el("xy"), -3), el("xy"));
    }

    #[test]
    fn coset_label_examples() {
        let lab = Labeling::identity(6);
        assert_eq!(
            D6.coset_label(el("x^2"), Partition::RotationCoset, &lab)
                .value,
            0
        );
        assert_eq!(
            D6.coset_label(el("x^2y"), Partition::RotationCoset, &lab)
                .value,
            1
        );
        // y <-> 3, which lies in {0, 3}
        assert_eq!(D6.residue_label(el("y")), 3);
        assert_eq!(D6.coset_label(el("y"), Partition::Z6Index2, &lab).value, 0);
        assert_eq!(D6.coset_label(el("1"), Partition::Z6Index2, &lab).value, 0);
    }

    #[test]
    fn unknown_partition_is_rejected() {
        assert!(matches!(
            "z6-index5".parse::<Partition>(),
            Err(Error::UnknownPartition(_))
        ));
        for p in [
            Partition::RotationCoset,
            Partition::Z6Index3,
            Partition::Z6Index2,
        ] {
            assert_eq!(p.id().parse::<Partition>().unwrap(), p);
        }
    }

    #[test]
    fn presentation_examples() {
        assert!(D6.verify_presentation(el("x"), el("y")));
        assert!(!D6.verify_presentation(el("x"), el("1")));
        assert!(D6.verify_presentation(el("1"), el("1")));
    }

    #[test]
    fn presentation_pairs_count() {
        for p in [3u32, 5, 7, 11] {
            let g = DihedralParams::new(p).unwrap();
            let mut count = 0;
            for a in g.elements() {
                for b in g.elements() {
                    let expected =
                        (a.beta == 0 && b.beta == 1) || (a.is_identity() && b.is_identity());
                    assert_eq!(g.verify_presentation(a, b), expected, "p={p} {a} {b}");
                    count += expected as usize;
                }
            }
            assert_eq!(count, (p * p + 1) as usize);
        }
    }

    #[test]
    fn associativity_exhaustive_d6() {
        for a in D6.elements() {
            for b in D6.elements() {
                for c in D6.elements() {
                    assert_eq!(D6.mul(D6.mul(a, b), c), D6.mul(a, D6.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn non_commutative_for_every_p() {
        for p in [3u32, 5, 7, 13] {
            let g = DihedralParams::new(p).unwrap();
            let x = g.rotation(1);
            let y = g.reflection(0);
            assert_ne!(g.mul(x, y), g.mul(y, x));
        }
    }

    #[test]
    fn rejects_bad_params() {
        for p in [0, 1, 2, 4, 9, 15] {
            assert_eq!(DihedralParams::new(p), Err(Error::InvalidPrime(p)));
        }
        assert!(D6.element(3, 0).is_err());
        assert!(D6.element(0, 2).is_err());
        assert!(D6.parse("x^3").is_err());
    }

    #[test]
    fn residue_labels_are_bijective() {
        for p in [3u32, 5, 7] {
            let g = DihedralParams::new(p).unwrap();
            let mut seen = vec![false; g.order()];
            for a in g.elements() {
                let m = g.residue_label(a);
                assert!(!seen[m]);
                seen[m] = true;
                assert_eq!(g.from_residue_label(m), a);
            }
        }
        // rotations land on the even residues for p = 3
        for a in D6.elements().filter(|a| a.beta == 0) {
            assert_eq!(D6.residue_label(a) % 2, 0);
        }
    }

    #[test]
    fn text_round_trip() {
        for p in [3u32, 5, 7] {
            let g = DihedralParams::new(p).unwrap();
            for a in g.elements() {
                assert_eq!(g.parse(&a.to_string()).unwrap(), a);
            }
        }
        let g = DihedralParams::new(5).unwrap();
        assert_eq!(g.parse("x^4 y").unwrap(), g.reflection(4));
        assert_eq!(g.reflection(4).to_string(), "x^4y");
        for bad in ["", "z", "x^", "x^y", "yx", "2", "x^-1"] {
            assert!(bad.parse::<DihedralElement>().is_err(), "{bad:?}");
        }
    }
}
