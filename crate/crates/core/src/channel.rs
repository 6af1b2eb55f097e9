//! Discrete memoryless channels with group-valued inputs.
//!
//! A channel has `2p` input rows and `outputs` columns; row `r` is the law
//! `W(. | r)`. Group elements reach rows through a [`Labeling`]: symbol `m` of
//! `Z_2p`, which is simultaneously the group element with residue label `m`
//! (see [`DihedralParams::residue_label`]), is sent on input row
//! `labeling.input_of(m)`. The identity labeling is the default.

use rand::Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::dihedral::{DihedralElement, DihedralParams};
use crate::error::{Error, Result};

/// Row sums must be within this distance of one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    params: DihedralParams,
    outputs: usize,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(params: DihedralParams, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != params.order() {
            return Err(Error::InvalidChannel(format!(
                "expected {} input rows, found {}",
                params.order(),
                rows.len()
            )));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::InvalidChannel(format!(
                    "row {r} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "row {r} has invalid probability {bad}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidChannel(format!(
                    "row {r} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            params,
            outputs,
            rows,
        })
    }

    /// Channel with independent rows drawn from the flat Dirichlet
    /// distribution on `outputs` symbols.
    pub fn random<R: Rng + ?Sized>(
        params: DihedralParams,
        outputs: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let rows = match outputs {
            0 => return Err(Error::InvalidChannel("empty output alphabet".into())),
            1 => vec![vec![1.0]; params.order()],
            _ => {
                let dirichlet = Dirichlet::new_with_size(1.0, outputs)
                    .map_err(|e| Error::InvalidChannel(e.to_string()))?;
                (0..params.order()).map(|_| dirichlet.sample(rng)).collect()
            }
        };
        Self::new(params, rows)
    }

    pub fn params(&self) -> DihedralParams {
        self.params
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `W(y | input row)`.
    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input][output]
    }

    /// New row `i` is old row `perm[i]`; the output alphabet is untouched.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let labeling = Labeling::from_permutation(perm.to_vec())?;
        if labeling.len() != self.input_size() {
            return Err(Error::LengthMismatch {
                expected: self.input_size(),
                found: perm.len(),
            });
        }
        Ok(Self {
            params: self.params,
            outputs: self.outputs,
            rows: perm.iter().map(|&r| self.rows[r].clone()).collect(),
        })
    }

    /// Row carrying group element `a` under `labeling`.
    pub fn input_of(&self, labeling: &Labeling, a: DihedralElement) -> usize {
        labeling.input_of(self.params.residue_label(a))
    }

    /// Sends each coordinate independently through the channel.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        codeword: &[DihedralElement],
        labeling: &Labeling,
        rng: &mut R,
    ) -> Vec<usize> {
        codeword
            .iter()
            .map(|&c| self.sample_output(self.input_of(labeling, c), rng))
            .collect()
    }

    fn sample_output<R: Rng + ?Sized>(&self, input: usize, rng: &mut R) -> usize {
        let row = &self.rows[input];
        // deterministic rows consume no randomness
        if let Some(pos) = row.iter().position(|&v| v == 1.0) {
            return pos;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (y, &w) in row.iter().enumerate() {
            acc += w;
            if u < acc {
                return y;
            }
        }
        // rounding left u above the cumulative sum; take the last positive entry
        row.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn to_file(&self, labeling: Option<&Labeling>) -> ChannelFile {
        ChannelFile {
            p: self.params.p(),
            outputs: self.outputs,
            rows: self.rows.clone(),
            labels: labeling.map(|l| l.as_slice().to_vec()),
        }
    }

    pub fn to_json(&self, labeling: Option<&Labeling>) -> String {
        serde_json::to_string_pretty(&self.to_file(labeling))
            .expect("channel files always serialize")
    }
}

/// Bijection between `Z_2p` symbols (equivalently group elements, via the
/// residue label) and channel input rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling {
    perm: Vec<usize>,
}

impl Labeling {
    pub fn identity(size: usize) -> Self {
        Self {
            perm: (0..size).collect(),
        }
    }

    /// `perm[m]` is the input row of symbol `m`.
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &r in &perm {
            if r >= perm.len() || seen[r] {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[r] = true;
        }
        Ok(Self { perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn input_of(&self, symbol: usize) -> usize {
        self.perm[symbol]
    }

    pub fn symbol_of(&self, input: usize) -> usize {
        self.perm
            .iter()
            .position(|&r| r == input)
            .expect("labeling is a bijection")
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (m, &r) in self.perm.iter().enumerate() {
            inv[r] = m;
        }
        Self { perm: inv }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }
}

/// Named channel families.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinChannel {
    /// `Y = X`.
    Identity,
    /// Every row uniform over `outputs` symbols.
    Useless { outputs: usize },
    /// `Y = alpha(X)`, outputs `0..p`.
    RotationRevealing,
    /// `Y = beta(X)`, outputs `{0, 1}`.
    ReflectionRevealing,
    /// `Y = X * Z` with `Z` distributed as `noise` (indexed by residue label).
    /// Outputs are residue labels.
    GroupNoise { noise: Vec<f64> },
    /// Circulant family on `Z_6` labels: `W(m + d | m)` is `eps1` for
    /// `d = +-1`, `eps2` for `d = +-2`, `eps3` for `d = 3` and the remainder
    /// for `d = 0`. A synthetic stand-in with three noise levels; not any
    /// particular published channel.
    ThreeEps { eps1: f64, eps2: f64, eps3: f64 },
}

impl BuiltinChannel {
    /// Parses a name and its numeric parameters, e.g. `("three-eps", [0.1, 0.2, 0.15])`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let expect = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match name {
            "identity" => expect(0).map(|_| Self::Identity),
            "useless" => {
                if params.is_empty() {
                    return Ok(Self::Useless { outputs: 6 });
                }
                expect(1)?;
                let n = params[0];
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "useless channel needs a positive integer output count, got {n}"
                    )));
                }
                Ok(Self::Useless {
                    outputs: n as usize,
                })
            }
            "rotation-revealing" => expect(0).map(|_| Self::RotationRevealing),
            "reflection-revealing" => expect(0).map(|_| Self::ReflectionRevealing),
            "group-noise" => Ok(Self::GroupNoise {
                noise: params.to_vec(),
            }),
            "three-eps" => {
                expect(3)?;
                Ok(Self::ThreeEps {
                    eps1: params[0],
                    eps2: params[1],
                    eps3: params[2],
                })
            }
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }

    pub fn build(&self, params: DihedralParams) -> Result<Channel> {
        let q = params.order();
        let rows = match self {
            Self::Identity => (0..q)
                .map(|r| (0..q).map(|y| if y == r { 1.0 } else { 0.0 }).collect())
                .collect(),
            Self::Useless { outputs } => {
                if *outputs == 0 {
                    return Err(Error::InvalidParameter(
                        "useless channel needs outputs > 0".into(),
                    ));
                }
                vec![vec![1.0 / *outputs as f64; *outputs]; q]
            }
            Self::RotationRevealing => (0..q)
                .map(|r| {
                    let alpha = params.from_residue_label(r).alpha as usize;
                    (0..params.p() as usize)
                        .map(|y| if y == alpha { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect(),
            Self::ReflectionRevealing => (0..q)
                .map(|r| {
                    let beta = params.from_residue_label(r).beta as usize;
                    (0..2).map(|y| if y == beta { 1.0 } else { 0.0 }).collect()
                })
                .collect(),
            Self::GroupNoise { noise } => {
                if noise.len() != q {
                    return Err(Error::InvalidParameter(format!(
                        "group noise needs {q} probabilities, got {}",
                        noise.len()
                    )));
                }
                let total: f64 = noise.iter().sum();
                if noise.iter().any(|v| !v.is_finite() || *v < 0.0)
                    || (total - 1.0).abs() > ROW_SUM_TOLERANCE
                {
                    return Err(Error::InvalidParameter(
                        "group noise must be a probability vector".into(),
                    ));
                }
                (0..q)
                    .map(|r| {
                        let x = params.from_residue_label(r);
                        let mut row = vec![0.0; q];
                        for (z_label, &pz) in noise.iter().enumerate() {
                            let z = params.from_residue_label(z_label);
                            row[params.residue_label(params.mul(x, z))] += pz;
                        }
                        row
                    })
                    .collect()
            }
            Self::ThreeEps { eps1, eps2, eps3 } => {
                if params.p() != 3 {
                    return Err(Error::UnsupportedOrder(params.p()));
                }
                let (e1, e2, e3) = (*eps1, *eps2, *eps3);
                let stay = 1.0 - 2.0 * e1 - 2.0 * e2 - e3;
                if [e1, e2, e3].iter().any(|e| !e.is_finite() || *e < 0.0) || stay < 0.0 {
                    return Err(Error::InvalidParameter(
                        "three-eps needs eps >= 0 with 2 eps1 + 2 eps2 + eps3 <= 1".into(),
                    ));
                }
                let by_offset = [stay, e1, e2, e3, e2, e1];
                (0..6)
                    .map(|m| (0..6).map(|y| by_offset[(y + 6 - m) % 6]).collect())
                    .collect()
            }
        };
        Channel::new(params, rows)
    }
}

/// JSON channel file: `{"p": 3, "outputs": N, "rows": [[..], ..], "labels": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub p: u32,
    pub outputs: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
}

/// A channel file problem with its position (1-based) when known.
#[derive(Clone, Debug, PartialEq)]
pub struct FileDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for FileDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<(Channel, Labeling)> {
        let params = DihedralParams::new(self.p)?;
        if self.rows.iter().any(|r| r.len() != self.outputs) {
            return Err(Error::InvalidChannel(format!(
                "every row must have \"outputs\" = {} entries",
                self.outputs
            )));
        }
        let channel = Channel::new(params, self.rows)?;
        let labeling = match self.labels {
            Some(perm) => {
                if perm.len() != params.order() {
                    return Err(Error::LengthMismatch {
                        expected: params.order(),
                        found: perm.len(),
                    });
                }
                Labeling::from_permutation(perm)?
            }
            None => Labeling::identity(params.order()),
        };
        Ok((channel, labeling))
    }
}

/// Parses a JSON channel file. Syntax errors carry serde's line/column;
/// semantic errors are reported at the start of the document.
pub fn parse_channel_json(text: &str) -> std::result::Result<(Channel, Labeling), FileDiagnostic> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| {
        // serde_json appends the position to its message; it is kept separately.
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        FileDiagnostic {
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    })?;
    file.into_channel().map_err(|e| FileDiagnostic {
        line: 1,
        column: 1,
        message: e.to_string(),
    })
}

/// Parses a TSV channel: one row per input, tab-separated probabilities.
/// `p` is inferred from the row count. Blank lines and `#` comments are skipped.
pub fn parse_channel_tsv(text: &str) -> std::result::Result<Channel, FileDiagnostic> {
    let mut rows = Vec::new();
    let mut first_line = 1;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if rows.is_empty() {
            first_line = lineno + 1;
        }
        let mut row = Vec::new();
        let mut column = 1;
        for field in line.split('\t') {
            let value = field.trim().parse::<f64>().map_err(|_| FileDiagnostic {
                line: lineno + 1,
                column,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            row.push(value);
            column += field.len() + 1;
        }
        rows.push(row);
    }
    let diag = |message: String| FileDiagnostic {
        line: first_line,
        column: 1,
        message,
    };
    if rows.len() % 2 != 0 || rows.is_empty() {
        return Err(diag(format!(
            "{} rows is not 2p for an odd prime p",
            rows.len()
        )));
    }
    let params = DihedralParams::new(rows.len() as u32 / 2).map_err(|e| diag(e.to_string()))?;
    Channel::new(params, rows).map_err(|e| diag(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const D6: DihedralParams = DihedralParams::D6;

    fn el(s: &str) -> DihedralElement {
        D6.parse(s).unwrap()
    }

    #[test]
    fn identity_channel_transmits_labels() {
        let ch = BuiltinChannel::Identity.build(D6).unwrap();
        let lab = Labeling::identity(6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c: Vec<_> = D6.elements().collect();
        let y = ch.transmit(&c, &lab, &mut rng);
        let labels: Vec<_> = c.iter().map(|a| D6.residue_label(*a)).collect();
        assert_eq!(y, labels);
    }

    #[test]
    fn rotation_revealing_examples() {
        let ch = BuiltinChannel::RotationRevealing.build(D6).unwrap();
        let lab = Labeling::identity(6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            ch.transmit(&[el("x"), el("x^2y")], &lab, &mut rng),
            vec![1, 2]
        );
        assert_eq!(ch.prob(ch.input_of(&lab, el("x^2y")), 2), 1.0);
        assert_eq!(ch.output_size(), 3);
    }

    #[test]
    fn reflection_revealing_outputs_beta() {
        let ch = BuiltinChannel::ReflectionRevealing.build(D6).unwrap();
        let lab = Labeling::identity(6);
        for a in D6.elements() {
            assert_eq!(ch.prob(ch.input_of(&lab, a), a.beta as usize), 1.0);
        }
    }

    #[test]
    fn useless_rows_are_uniform() {
        let ch = BuiltinChannel::from_name("useless", &[4.0])
            .unwrap()
            .build(D6)
            .unwrap();
        assert!(ch.rows().iter().flatten().all(|&w| w == 0.25));
    }

    #[test]
    fn point_mass_group_noise_is_identity() {
        let mut noise = vec![0.0; 6];
        noise[0] = 1.0;
        let ch = BuiltinChannel::GroupNoise { noise }.build(D6).unwrap();
        assert_eq!(ch, BuiltinChannel::Identity.build(D6).unwrap());
    }

    #[test]
    fn group_noise_depends_on_x_inverse_y() {
        let noise = vec![0.5, 0.1, 0.05, 0.15, 0.12, 0.08];
        let ch = BuiltinChannel::GroupNoise {
            noise: noise.clone(),
        }
        .build(D6)
        .unwrap();
        for x in D6.elements() {
            for y in D6.elements() {
                let z = D6.mul(D6.inv(x), y);
                assert_eq!(
                    ch.prob(D6.residue_label(x), D6.residue_label(y)),
                    noise[D6.residue_label(z)]
                );
            }
        }
    }

    #[test]
    fn three_eps_is_stochastic_and_symmetric() {
        let ch = BuiltinChannel::from_name("three-eps", &[0.1, 0.2, 0.15])
            .unwrap()
            .build(D6)
            .unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(ch.prob(a, b), ch.prob(b, a));
            }
        }
        assert!(BuiltinChannel::from_name("three-eps", &[0.3, 0.3, 0.3])
            .unwrap()
            .build(D6)
            .is_err());
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            BuiltinChannel::from_name("awgn", &[]),
            Err(Error::UnknownChannel(_))
        ));
        assert!(BuiltinChannel::from_name("identity", &[1.0]).is_err());
        assert!(BuiltinChannel::GroupNoise {
            noise: vec![0.5; 6]
        }
        .build(D6)
        .is_err());
    }

    #[test]
    fn relabel_identity_and_inverse() {
        let ch = BuiltinChannel::from_name("three-eps", &[0.05, 0.1, 0.2])
            .unwrap()
            .build(D6)
            .unwrap();
        assert_eq!(ch.relabel(&[0, 1, 2, 3, 4, 5]).unwrap(), ch);
        let perm = vec![3, 0, 5, 1, 2, 4];
        let inv = Labeling::from_permutation(perm.clone()).unwrap().inverse();
        assert_eq!(
            ch.relabel(&perm).unwrap().relabel(inv.as_slice()).unwrap(),
            ch
        );
        assert!(ch.relabel(&[0, 1, 2]).is_err());
        assert!(ch.relabel(&[0, 0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        assert!(Channel::new(D6, vec![vec![0.5, 0.4]; 6]).is_err());
        assert!(Channel::new(D6, vec![vec![1.5, -0.5]; 6]).is_err());
        assert!(Channel::new(D6, vec![vec![1.0]; 5]).is_err());
    }

    #[test]
    fn transmit_is_reproducible() {
        let ch = BuiltinChannel::from_name("three-eps", &[0.1, 0.2, 0.15])
            .unwrap()
            .build(D6)
            .unwrap();
        let lab = Labeling::identity(6);
        let c: Vec<_> = (0..50).map(|i| D6.element_at(i % 6)).collect();
        let a = ch.transmit(&c, &lab, &mut ChaCha8Rng::seed_from_u64(9));
        let b = ch.transmit(&c, &lab, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let ch = BuiltinChannel::RotationRevealing.build(D6).unwrap();
        let lab = Labeling::from_permutation(vec![1, 0, 2, 3, 4, 5]).unwrap();
        let (back, back_lab) = parse_channel_json(&ch.to_json(Some(&lab))).unwrap();
        assert_eq!(back, ch);
        assert_eq!(back_lab, lab);

        let err = parse_channel_json("{\n  \"p\": 3,\n  \"outputs\": 2,\n  \"rows\": [[1, 0]\n")
            .unwrap_err();
        assert!(err.line >= 4, "{err}");
        let err = parse_channel_json(r#"{"p": 4, "outputs": 1, "rows": []}"#).unwrap_err();
        assert!(err.message.contains("odd prime"));
    }

    #[test]
    fn tsv_import() {
        let text = "# rotation revealing\n1\t0\t0\n0\t1\t0\n0\t0\t1\n1\t0\t0\n0\t1\t0\n0\t0\t1\n";
        let ch = parse_channel_tsv(text).unwrap();
        assert_eq!(ch, BuiltinChannel::RotationRevealing.build(D6).unwrap());
        let err = parse_channel_tsv("1\t0\n0\tzero\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
    }
}
