//! The pseudo-group code ensemble over `D_2p`.
//!
//! A code is an `n x k` table of generator pairs `(g_ij, h_ij)` plus a dither
//! `B in G^n`. A message `u = (x^{a_1} y^{b_1}, .., x^{a_k} y^{b_k})` is encoded
//! coordinate-wise as
//!
//! ```text
//! c_i = g_i1^{a_1} h_i1^{b_1} g_i2^{a_2} h_i2^{b_2} ... g_ik^{a_k} h_ik^{b_k} * B_i
//! ```
//!
//! evaluated left to right. Each pair satisfies the defining relations of the
//! group (`g^p = h^2 = ghgh = 1`), so `x^a y^b -> g^a h^b` is a homomorphism
//! per position; the product over positions is what makes the code a
//! pseudo-group code rather than a group code.
//!
//! Generator pairs are drawn uniformly from the `p^2 + 1` admissible pairs
//! `{(1, 1)} u {rotations} x {reflections}` (ten pairs for `D6`). This is the
//! only distribution compatible with the `10^{kn}` table count used by the
//! pairwise collision formula in [`crate::lemma`], and the brute-force oracle
//! there re-derives every probability from it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dihedral::{DihedralElement, DihedralParams};
use crate::error::{Error, Result};

/// Default cap on `(2p)^k` for codebook enumeration (`6^8`).
pub const DEFAULT_CODEBOOK_CAP: u128 = 1_679_616;

/// Images `(g, h)` of the group generators `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorPair {
    g: DihedralElement,
    h: DihedralElement,
}

impl GeneratorPair {
    pub const TRIVIAL: GeneratorPair = GeneratorPair {
        g: DihedralElement::IDENTITY,
        h: DihedralElement::IDENTITY,
    };

    pub fn new(params: &DihedralParams, g: DihedralElement, h: DihedralElement) -> Result<Self> {
        if !params.contains(g) || !params.contains(h) || !params.verify_presentation(g, h) {
            return Err(Error::InvalidParameter(format!(
                "({g}, {h}) does not satisfy the group presentation"
            )));
        }
        Ok(Self { g, h })
    }

    pub fn g(&self) -> DihedralElement {
        self.g
    }

    pub fn h(&self) -> DihedralElement {
        self.h
    }

    /// `g^a h^b` for the digit `x^a y^b`.
    pub fn apply(&self, params: &DihedralParams, digit: DihedralElement) -> DihedralElement {
        let gp = params.power(self.g, digit.alpha as i64);
        if digit.beta == 1 {
            params.mul(gp, self.h)
        } else {
            gp
        }
    }
}

/// The admissible pairs in a fixed order: `(1, 1)` first, then
/// `(x^a, x^c y)` with `a` major.
pub fn admissible_pairs(params: &DihedralParams) -> Vec<GeneratorPair> {
    let p = params.p() as i64;
    let mut pairs = Vec::with_capacity((p * p + 1) as usize);
    pairs.push(GeneratorPair::TRIVIAL);
    for a in 0..p {
        for c in 0..p {
            pairs.push(GeneratorPair {
                g: params.rotation(a),
                h: params.reflection(c),
            });
        }
    }
    pairs
}

pub fn sample_generator_pair<R: Rng + ?Sized>(
    params: &DihedralParams,
    rng: &mut R,
) -> GeneratorPair {
    let p = params.p() as usize;
    let idx = rng.gen_range(0..p * p + 1);
    if idx == 0 {
        GeneratorPair::TRIVIAL
    } else {
        let idx = idx - 1;
        GeneratorPair {
            g: params.rotation((idx / p) as i64),
            h: params.reflection((idx % p) as i64),
        }
    }
}

pub fn sample_element<R: Rng + ?Sized>(params: &DihedralParams, rng: &mut R) -> DihedralElement {
    params.element_at(rng.gen_range(0..params.order()))
}

/// `n x k` generator table, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorTable {
    k: usize,
    n: usize,
    entries: Vec<GeneratorPair>,
}

impl GeneratorTable {
    pub fn new(k: usize, n: usize, entries: Vec<GeneratorPair>) -> Result<Self> {
        if entries.len() != k * n {
            return Err(Error::LengthMismatch {
                expected: k * n,
                found: entries.len(),
            });
        }
        Ok(Self { k, n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<GeneratorPair>>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::LengthMismatch {
                expected: k,
                found: bad.len(),
            });
        }
        Ok(Self {
            k,
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Pair at output coordinate `i` and message digit `j` (both 0-based).
    pub fn get(&self, i: usize, j: usize) -> GeneratorPair {
        self.entries[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[GeneratorPair] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }
}

/// A message `u = (u_1, .., u_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MessageWord {
    pub digits: Vec<DihedralElement>,
}

impl MessageWord {
    pub fn new(digits: Vec<DihedralElement>) -> Self {
        Self { digits }
    }

    pub fn identity(k: usize) -> Self {
        Self {
            digits: vec![DihedralElement::IDENTITY; k],
        }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Message number `index` in lexicographic order: digit 1 is the most
    /// significant and digits are ordered as in [`DihedralParams::index_of`].
    pub fn from_index(params: &DihedralParams, k: usize, mut index: u128) -> Self {
        let q = params.order() as u128;
        let mut digits = vec![DihedralElement::IDENTITY; k];
        for d in digits.iter_mut().rev() {
            *d = params.element_at((index % q) as usize);
            index /= q;
        }
        Self { digits }
    }

    pub fn index(&self, params: &DihedralParams) -> u128 {
        let q = params.order() as u128;
        self.digits
            .iter()
            .fold(0u128, |acc, d| acc * q + params.index_of(*d) as u128)
    }

    pub fn sample<R: Rng + ?Sized>(params: &DihedralParams, k: usize, rng: &mut R) -> Self {
        Self {
            digits: (0..k).map(|_| sample_element(params, rng)).collect(),
        }
    }
}

/// One sampled member of the ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoGroupCode {
    params: DihedralParams,
    table: GeneratorTable,
    dither: Vec<DihedralElement>,
    seed: Option<u64>,
}

impl PseudoGroupCode {
    pub fn new(
        params: DihedralParams,
        table: GeneratorTable,
        dither: Vec<DihedralElement>,
    ) -> Result<Self> {
        if dither.len() != table.n() {
            return Err(Error::LengthMismatch {
                expected: table.n(),
                found: dither.len(),
            });
        }
        if let Some(bad) = dither.iter().find(|b| !params.contains(**b)) {
            return Err(Error::InvalidElement {
                alpha: bad.alpha,
                beta: bad.beta,
                p: params.p(),
            });
        }
        Ok(Self {
            params,
            table,
            dither,
            seed: None,
        })
    }

    /// Draws `n * k` independent generator pairs and `n` independent uniform
    /// dither symbols. Pairs are drawn row by row, then the dither.
    pub fn sample<R: Rng + ?Sized>(
        k: usize,
        n: usize,
        params: DihedralParams,
        rng: &mut R,
    ) -> Self {
        let entries = (0..n * k)
            .map(|_| sample_generator_pair(&params, rng))
            .collect();
        let dither = (0..n).map(|_| sample_element(&params, rng)).collect();
        Self {
            params,
            table: GeneratorTable { k, n, entries },
            dither,
            seed: None,
        }
    }

    /// [`Self::sample`] driven by a ChaCha8 stream seeded with `seed`; the seed
    /// is recorded in the code.
    pub fn sample_seeded(k: usize, n: usize, params: DihedralParams, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut code = Self::sample(k, n, params, &mut rng);
        code.seed = Some(seed);
        code
    }

    /// Same generators, dither set to the identity.
    pub fn without_dither(&self) -> Self {
        Self {
            dither: vec![DihedralElement::IDENTITY; self.table.n()],
            ..self.clone()
        }
    }

    pub fn params(&self) -> DihedralParams {
        self.params
    }

    pub fn table(&self) -> &GeneratorTable {
        &self.table
    }

    pub fn dither(&self) -> &[DihedralElement] {
        &self.dither
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    /// `(k / n) log2(2p)` bits per channel use.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64 * (self.params.order() as f64).log2()
    }

    fn check_message(&self, u: &MessageWord) -> Result<()> {
        if u.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                found: u.len(),
            });
        }
        if let Some(bad) = u.digits.iter().find(|d| !self.params.contains(**d)) {
            return Err(Error::InvalidElement {
                alpha: bad.alpha,
                beta: bad.beta,
                p: self.params.p(),
            });
        }
        Ok(())
    }

    /// Undithered coordinate `G_i(u)`.
    fn coordinate(&self, i: usize, u: &MessageWord) -> DihedralElement {
        let row = self.table.row(i);
        self.params.product(
            row.iter()
                .zip(&u.digits)
                .map(|(pair, d)| pair.apply(&self.params, *d)),
        )
    }

    /// `c = G(u) * B`.
    pub fn encode(&self, u: &MessageWord) -> Result<Vec<DihedralElement>> {
        self.check_message(u)?;
        Ok((0..self.n())
            .map(|i| self.params.mul(self.coordinate(i, u), self.dither[i]))
            .collect())
    }

    /// Reflection indicators `beta(c_i)`. With `include_dither = false` the
    /// dither is removed first, and the map from the `b`-digits to the
    /// profile is linear over GF(2).
    pub fn beta_profile(&self, u: &MessageWord, include_dither: bool) -> Result<Vec<u8>> {
        self.check_message(u)?;
        Ok((0..self.n())
            .map(|i| {
                let b = self.coordinate(i, u).beta;
                if include_dither {
                    b ^ self.dither[i].beta
                } else {
                    b
                }
            })
            .collect())
    }

    /// Every message with its codeword, in lexicographic message order.
    pub fn enumerate_codebook(&self, cap: u128) -> Result<Codebook> {
        let q = self.params.order();
        let size = (q as u128)
            .checked_pow(self.k() as u32)
            .unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        let n = self.n();
        // contributions[j][d][i] = g_ij^{a} h_ij^{b} for digit value d at position j
        let contributions: Vec<Vec<Vec<DihedralElement>>> = (0..self.k())
            .map(|j| {
                self.params
                    .elements()
                    .map(|d| {
                        (0..n)
                            .map(|i| self.table.get(i, j).apply(&self.params, d))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut codewords = Vec::with_capacity(size as usize);
        let mut prefix = vec![DihedralElement::IDENTITY; n];
        self.extend_codebook(&contributions, 0, &mut prefix, &mut codewords);
        Ok(Codebook {
            params: self.params,
            k: self.k(),
            codewords,
        })
    }

    fn extend_codebook(
        &self,
        contributions: &[Vec<Vec<DihedralElement>>],
        depth: usize,
        prefix: &mut [DihedralElement],
        out: &mut Vec<Vec<DihedralElement>>,
    ) {
        if depth == contributions.len() {
            out.push(
                prefix
                    .iter()
                    .zip(&self.dither)
                    .map(|(c, b)| self.params.mul(*c, *b))
                    .collect(),
            );
            return;
        }
        let saved = prefix.to_vec();
        for digit in &contributions[depth] {
            for (slot, (s, t)) in prefix.iter_mut().zip(saved.iter().zip(digit)) {
                *slot = self.params.mul(*s, *t);
            }
            self.extend_codebook(contributions, depth + 1, prefix, out);
        }
        prefix.copy_from_slice(&saved);
    }

    pub fn to_record(&self) -> CodeRecord {
        let generators = (0..self.n())
            .map(|i| {
                self.table
                    .row(i)
                    .iter()
                    .map(|pair| {
                        let h = if pair.h.is_identity() {
                            -1
                        } else {
                            pair.h.alpha as i64
                        };
                        (pair.g.alpha, h)
                    })
                    .collect()
            })
            .collect();
        CodeRecord {
            p: self.params.p(),
            k: self.k(),
            n: self.n(),
            generators,
            dither_alpha: self.dither.iter().map(|b| b.alpha).collect(),
            dither_beta: self.dither.iter().map(|b| b.beta).collect(),
            seed: self.seed,
        }
    }

    pub fn from_record(record: &CodeRecord) -> Result<Self> {
        let params = DihedralParams::new(record.p)?;
        if record.generators.len() != record.n {
            return Err(Error::LengthMismatch {
                expected: record.n,
                found: record.generators.len(),
            });
        }
        let mut entries = Vec::with_capacity(record.n * record.k);
        for row in &record.generators {
            if row.len() != record.k {
                return Err(Error::LengthMismatch {
                    expected: record.k,
                    found: row.len(),
                });
            }
            for &(g_alpha, h) in row {
                let g = params.element(g_alpha, 0)?;
                let h = match h {
                    -1 => DihedralElement::IDENTITY,
                    a if a >= 0 && a <= u32::MAX as i64 => params.element(a as u32, 1)?,
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "reflection class {h} out of range"
                        )))
                    }
                };
                entries.push(GeneratorPair::new(&params, g, h)?);
            }
        }
        if record.dither_alpha.len() != record.dither_beta.len() {
            return Err(Error::LengthMismatch {
                expected: record.dither_alpha.len(),
                found: record.dither_beta.len(),
            });
        }
        let dither = record
            .dither_alpha
            .iter()
            .zip(&record.dither_beta)
            .map(|(&a, &b)| params.element(a, b))
            .collect::<Result<Vec<_>>>()?;
        let mut code = Self::new(
            params,
            GeneratorTable::new(record.k, record.n, entries)?,
            dither,
        )?;
        code.seed = record.seed;
        Ok(code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("code records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let record: CodeRecord = serde_json::from_str(s).map_err(|e| Error::Parse {
            what: "code record",
            input: e.to_string(),
        })?;
        Self::from_record(&record)
    }
}

/// Flat serialized form of a code.
///
/// `generators[i][j] = (alpha_g, h)` where `g = x^{alpha_g}` and `h` is the
/// rotation exponent of the reflection `x^h y`, or `-1` when `h = 1` (which
/// forces `g = 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub p: u32,
    pub k: usize,
    pub n: usize,
    pub generators: Vec<Vec<(u32, i64)>>,
    pub dither_alpha: Vec<u32>,
    pub dither_beta: Vec<u8>,
    pub seed: Option<u64>,
}

/// All `(2p)^k` codewords of a code, indexed by message number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    params: DihedralParams,
    k: usize,
    codewords: Vec<Vec<DihedralElement>>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, index: usize) -> &[DihedralElement] {
        &self.codewords[index]
    }

    pub fn codewords(&self) -> &[Vec<DihedralElement>] {
        &self.codewords
    }

    pub fn message(&self, index: usize) -> MessageWord {
        MessageWord::from_index(&self.params, self.k, index as u128)
    }

    pub fn entries(&self) -> impl Iterator<Item = (MessageWord, &[DihedralElement])> + '_ {
        self.codewords
            .iter()
            .enumerate()
            .map(|(i, c)| (self.message(i), c.as_slice()))
    }

    pub fn has_distinct_codewords(&self) -> bool {
        let mut sorted: Vec<_> = self.codewords.iter().collect();
        sorted.sort();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// Terms of the fixed normal series `1 < 1 < .. < 1 < G` used for the
/// windowed form of the encoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesTerm {
    Trivial,
    Whole,
}

/// Windowed (convolutional) description with controllability index `nu`.
///
/// With input and output groups equal to the whole group at every time and
/// the series `F_0 = .. = F_{nu-1} = 1`, `F_nu = G`, all granules are
/// trivial except the last, and the code over a window of `nu + 1` times is
/// generated by one pair `(g^t, h^t) in G^{nu+1} x G^{nu+1}`. Digit `t` is then
/// mapped by the transversal `T_t(x^a y^b) = (g^t)^a (h^t)^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub nu: usize,
}

impl ConstructionSpec {
    pub fn new(nu: usize) -> Self {
        Self { nu }
    }

    /// `F_0, .., F_nu`.
    pub fn normal_series(&self) -> Vec<SeriesTerm> {
        let mut series = vec![SeriesTerm::Trivial; self.nu];
        series.push(SeriesTerm::Whole);
        series
    }

    /// `Gamma_0, .., Gamma_nu`; identical to the series since every step but
    /// the last is trivial.
    pub fn granules(&self) -> Vec<SeriesTerm> {
        self.normal_series()
    }

    /// `T_t(u)`: the `nu + 1` output contributions of digit `u` under the
    /// generator vector `gens = ((g_t0, h_t0), .., (g_tnu, h_tnu))`.
    pub fn transversal(
        &self,
        params: &DihedralParams,
        gens: &[GeneratorPair],
        digit: DihedralElement,
    ) -> Result<Vec<DihedralElement>> {
        if gens.len() != self.nu + 1 {
            return Err(Error::LengthMismatch {
                expected: self.nu + 1,
                found: gens.len(),
            });
        }
        Ok(gens.iter().map(|pair| pair.apply(params, digit)).collect())
    }

    /// The window subcode `C_[0,nu]`: the image of the transversal, which is
    /// a subgroup of `G^{nu+1}`.
    pub fn subcode(
        &self,
        params: &DihedralParams,
        gens: &[GeneratorPair],
    ) -> Result<Vec<Vec<DihedralElement>>> {
        let mut words = params
            .elements()
            .map(|d| self.transversal(params, gens, d))
            .collect::<Result<Vec<_>>>()?;
        words.sort();
        words.dedup();
        Ok(words)
    }

    /// Windowed encoder: `c_i` is the product over the `nu + 1` most recent
    /// digits `u_{i-nu}, .., u_i` of `T_d(u_d)[i - d]`.
    ///
    /// `rows[t]` holds the `nu + 1` generator pairs of time `t`. Digits inside
    /// a window are multiplied in increasing block position; with tail-biting,
    /// positions are taken mod `k`, so with `nu = k - 1` every output uses all
    /// digits in the order `u_1 .. u_k`, the same order as the block encoder.
    /// Without tail-biting, digits before the block start are the identity.
    pub fn encode_windowed(
        &self,
        params: &DihedralParams,
        rows: &[Vec<GeneratorPair>],
        u: &MessageWord,
        tail_biting: bool,
    ) -> Result<Vec<DihedralElement>> {
        let k = u.len();
        if rows.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                found: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != self.nu + 1) {
            return Err(Error::LengthMismatch {
                expected: self.nu + 1,
                found: bad.len(),
            });
        }
        let window = self.nu + 1;
        if (tail_biting && self.nu > k) || (!tail_biting && window > k) {
            return Err(Error::WindowTooLong { window, k });
        }
        let mut out = Vec::with_capacity(k);
        let mut taps: Vec<(usize, usize)> = Vec::with_capacity(window);
        for i in 0..k {
            taps.clear();
            for lag in 0..window {
                if tail_biting {
                    taps.push(((i + lag * (k - 1)) % k, lag));
                } else if lag <= i {
                    taps.push((i - lag, lag));
                }
            }
            // block order, older tap first on a repeated position
            taps.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            out.push(
                params.product(
                    taps.iter()
                        .map(|&(d, lag)| rows[d][lag].apply(params, u.digits[d])),
                ),
            );
        }
        Ok(out)
    }
}
