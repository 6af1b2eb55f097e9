//! Monte Carlo estimates of the ensemble-average block error probability.
//!
//! Each trial draws a fresh code from the ensemble, a uniform message, sends
//! the codeword through the channel and decodes. Trial `t` uses its own
//! ChaCha8 stream (`seed`, stream `t`), so reports do not depend on the
//! execution mode or the number of worker threads.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{Channel, Labeling};
use crate::dihedral::DihedralParams;
use crate::ensemble::{Codebook, MessageWord, PseudoGroupCode, DEFAULT_CODEBOOK_CAP};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::typicality::{is_jointly_typical, symbols, JointDistribution, TypicalityParams};

/// Typicality slack used when none is given.
pub const DEFAULT_EPSILON: f64 = 0.2;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959964;

/// One-sided 95% normal quantile.
pub const Z_ONE_SIDED_95: f64 = 1.644854;

/// Redraws allowed per trial when distinct codewords are required.
const DISTINCT_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Ml,
    Typicality,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Ml => "ml",
            DecoderKind::Typicality => "typ",
        }
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(DecoderKind::Ml),
            "typ" | "typicality" => Ok(DecoderKind::Typicality),
            other => Err(Error::InvalidParameter(format!(
                "unknown decoder {other:?}"
            ))),
        }
    }
}

/// Likelihood of `y` given codeword `c`.
fn likelihood(
    y: &[usize],
    c: &[crate::DihedralElement],
    channel: &Channel,
    labeling: &Labeling,
) -> f64 {
    c.iter()
        .zip(y)
        .map(|(&ci, &yi)| channel.prob(channel.input_of(labeling, ci), yi))
        .product()
}

/// Index of the codeword maximizing `Π W(y_i | c_i)`; the smallest index
/// wins ties.
pub fn ml_decode(
    y: &[usize],
    codebook: &Codebook,
    channel: &Channel,
    labeling: &Labeling,
) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, c) in codebook.codewords().iter().enumerate() {
        let v = likelihood(y, c, channel, labeling);
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TypicalityDecision {
    Unique(usize),
    NoCandidate,
    Ambiguous,
}

/// Returns the unique message whose codeword is jointly typical with `y`.
pub fn typicality_decode(
    y: &[usize],
    codebook: &Codebook,
    epsilon: f64,
    channel: &Channel,
    labeling: &Labeling,
) -> TypicalityDecision {
    let joint = JointDistribution::from_channel(channel, labeling);
    let params = TypicalityParams::new(epsilon, y.len().max(1));
    let mut found = None;
    for (i, c) in codebook.codewords().iter().enumerate() {
        if is_jointly_typical(&symbols(channel, c), y, &joint, &params) {
            if found.is_some() {
                return TypicalityDecision::Ambiguous;
            }
            found = Some(i);
        }
    }
    found.map_or(TypicalityDecision::NoCandidate, TypicalityDecision::Unique)
}

/// `k = round(R n / log2 6)`.
pub fn message_length(rate: f64, n: usize, params: &DihedralParams) -> usize {
    (rate * n as f64 / (params.order() as f64).log2()).round() as usize
}

/// Wilson score interval at 95% for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if errors == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo.min(phat), hi.max(phat))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub rate: f64,
    pub n: usize,
    pub decoder: DecoderKind,
    pub trials: u64,
    pub seed: u64,
    pub epsilon: f64,
    /// Redraw each trial's code until its codewords are distinct.
    pub distinct_codewords: bool,
    pub codebook_cap: u128,
}

impl SimulationConfig {
    pub fn new(rate: f64, n: usize, decoder: DecoderKind, trials: u64, seed: u64) -> Self {
        Self {
            rate,
            n,
            decoder,
            trials,
            seed,
            epsilon: DEFAULT_EPSILON,
            distinct_codewords: false,
            codebook_cap: DEFAULT_CODEBOOK_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub n: usize,
    pub k: usize,
    /// Requested rate.
    pub rate: f64,
    /// `(k / n) log2 6` after rounding `k`.
    pub code_rate: f64,
    pub decoder: DecoderKind,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl TrialReport {
    fn from_counts(
        config: &SimulationConfig,
        k: usize,
        decoder: DecoderKind,
        errors: u64,
        params: &DihedralParams,
    ) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, config.trials);
        Self {
            n: config.n,
            k,
            rate: config.rate,
            code_rate: k as f64 / config.n as f64 * (params.order() as f64).log2(),
            decoder,
            trials: config.trials,
            errors,
            error_rate: if config.trials == 0 {
                0.0
            } else {
                errors as f64 / config.trials as f64
            },
            ci_low,
            ci_high,
            seed: config.seed,
        }
    }
}

/// Outcome of one trial for both decoders.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct TrialOutcome {
    ml_error: bool,
    typ_error: bool,
}

fn check_config(channel: &Channel, config: &SimulationConfig) -> Result<usize> {
    if !config.rate.is_finite() || config.rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate must be non-negative, got {}",
            config.rate
        )));
    }
    if config.n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be positive".into(),
        ));
    }
    if config.epsilon.is_nan() || config.epsilon <= 0.0 {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let params = channel.params();
    let k = message_length(config.rate, config.n, &params);
    let size = (params.order() as u128)
        .checked_pow(k as u32)
        .unwrap_or(u128::MAX);
    if size > config.codebook_cap {
        return Err(Error::CapExceeded {
            size,
            cap: config.codebook_cap,
        });
    }
    Ok(k)
}

fn run_trial(
    channel: &Channel,
    labeling: &Labeling,
    config: &SimulationConfig,
    k: usize,
    trial: u64,
    decoders: (bool, bool),
) -> Result<TrialOutcome> {
    let params = channel.params();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let mut attempts = 0;
    let codebook = loop {
        let code = PseudoGroupCode::sample(k, config.n, params, &mut rng);
        let book = code.enumerate_codebook(config.codebook_cap)?;
        if !config.distinct_codewords || book.has_distinct_codewords() {
            break book;
        }
        attempts += 1;
        if attempts >= DISTINCT_ATTEMPTS {
            return Err(Error::InvalidParameter(format!(
                "no code with distinct codewords in {DISTINCT_ATTEMPTS} draws (k = {k}, n = {})",
                config.n
            )));
        }
    };
    let u = MessageWord::sample(&params, k, &mut rng);
    let sent = u.index(&params) as usize;
    let y = channel.transmit(codebook.codeword(sent), labeling, &mut rng);
    let mut outcome = TrialOutcome::default();
    if decoders.0 {
        outcome.ml_error = ml_decode(&y, &codebook, channel, labeling) != sent;
    }
    if decoders.1 {
        outcome.typ_error = typicality_decode(&y, &codebook, config.epsilon, channel, labeling)
            != TypicalityDecision::Unique(sent);
    }
    Ok(outcome)
}

fn run_trials(
    channel: &Channel,
    labeling: &Labeling,
    config: &SimulationConfig,
    k: usize,
    decoders: (bool, bool),
    exec: Execution,
) -> Result<[u64; 4]> {
    // counts: [ml errors, typ errors, both, typ only]
    exec.map_reduce(
        config.trials as usize,
        Ok([0u64; 4]),
        |t| {
            let o = run_trial(channel, labeling, config, k, t as u64, decoders)?;
            Ok([
                o.ml_error as u64,
                o.typ_error as u64,
                (o.ml_error && o.typ_error) as u64,
                (o.typ_error && !o.ml_error) as u64,
            ])
        },
        |a: Result<[u64; 4]>, b: Result<[u64; 4]>| {
            let (a, b) = (a?, b?);
            Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
        },
    )
}

/// Estimates the block error probability of `config.decoder`.
pub fn estimate_error(
    channel: &Channel,
    labeling: &Labeling,
    config: &SimulationConfig,
    exec: Execution,
) -> Result<TrialReport> {
    let k = check_config(channel, config)?;
    let decoders = match config.decoder {
        DecoderKind::Ml => (true, false),
        DecoderKind::Typicality => (false, true),
    };
    let counts = run_trials(channel, labeling, config, k, decoders, exec)?;
    let errors = match config.decoder {
        DecoderKind::Ml => counts[0],
        DecoderKind::Typicality => counts[1],
    };
    Ok(TrialReport::from_counts(
        config,
        k,
        config.decoder,
        errors,
        &channel.params(),
    ))
}

/// Both decoders run on the same codes, messages and outputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedReport {
    pub ml: TrialReport,
    pub typicality: TrialReport,
    /// Trials where only the typicality decoder failed.
    pub typicality_only: u64,
    /// Trials where only the ML decoder failed.
    pub ml_only: u64,
}

impl PairedReport {
    /// One-sided McNemar-style z statistic for "ML errs less often".
    pub fn z_ml_better(&self) -> f64 {
        let discordant = (self.typicality_only + self.ml_only) as f64;
        if discordant == 0.0 {
            return 0.0;
        }
        (self.typicality_only as f64 - self.ml_only as f64) / discordant.sqrt()
    }

    /// True unless the data show ML erring more often at the 95% level.
    pub fn ml_not_worse(&self) -> bool {
        -self.z_ml_better() < Z_ONE_SIDED_95
    }
}

pub fn estimate_paired(
    channel: &Channel,
    labeling: &Labeling,
    config: &SimulationConfig,
    exec: Execution,
) -> Result<PairedReport> {
    let k = check_config(channel, config)?;
    let counts = run_trials(channel, labeling, config, k, (true, true), exec)?;
    let params = channel.params();
    let ml_only = counts[0] - counts[2];
    Ok(PairedReport {
        ml: TrialReport::from_counts(config, k, DecoderKind::Ml, counts[0], &params),
        typicality: TrialReport::from_counts(
            config,
            k,
            DecoderKind::Typicality,
            counts[1],
            &params,
        ),
        typicality_only: counts[3],
        ml_only,
    })
}

/// One-sided two-proportion z statistic for `p_a > p_b`.
pub fn two_proportion_z(errors_a: u64, trials_a: u64, errors_b: u64, trials_b: u64) -> f64 {
    let (na, nb) = (trials_a as f64, trials_b as f64);
    let (pa, pb) = (errors_a as f64 / na, errors_b as f64 / nb);
    let pooled = (errors_a + errors_b) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    (pa - pb) / se
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendResult {
    /// z statistic of each consecutive pair (earlier minus later).
    pub z_scores: Vec<f64>,
    /// Every consecutive decrease is significant at the one-sided 95% level.
    pub decreasing: bool,
}

/// Tests that error rates strictly decrease along `reports`.
pub fn decreasing_trend(reports: &[TrialReport]) -> TrendResult {
    let z_scores: Vec<f64> = reports
        .windows(2)
        .map(|w| two_proportion_z(w[0].errors, w[0].trials, w[1].errors, w[1].trials))
        .collect();
    let decreasing = z_scores.iter().all(|&z| z > Z_ONE_SIDED_95);
    TrendResult {
        z_scores,
        decreasing,
    }
}
