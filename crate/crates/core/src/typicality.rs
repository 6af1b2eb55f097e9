//! Joint epsilon-typicality of sequence pairs.
//!
//! `(x^n, y^n)` is jointly typical with respect to `p(a, b)` when every pair
//! frequency is within `epsilon / (|X| |Y|)` of `p(a, b)` and no pair with
//! `p(a, b) = 0` occurs.

use crate::channel::{Channel, Labeling};
use crate::dihedral::DihedralElement;

/// Absolute slack on frequency comparisons, to absorb rounding of `N / n`.
const FREQUENCY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypicalityParams {
    pub epsilon: f64,
    pub n: usize,
}

impl TypicalityParams {
    pub fn new(epsilon: f64, n: usize) -> Self {
        assert!(epsilon > 0.0, "epsilon must be positive");
        assert!(n >= 1, "block length must be positive");
        Self { epsilon, n }
    }
}

/// Joint pmf on `X x Y`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), rows * cols);
        Self { rows, cols, probs }
    }

    /// `p(m, y) = W(y | input_of(m)) / |X|` with `X` uniform over symbols.
    pub fn from_channel(channel: &Channel, labeling: &Labeling) -> Self {
        let q = channel.input_size();
        let cols = channel.output_size();
        let mut probs = Vec::with_capacity(q * cols);
        for m in 0..q {
            let row = labeling.input_of(m);
            probs.extend((0..cols).map(|y| channel.prob(row, y) / q as f64));
        }
        Self {
            rows: q,
            cols,
            probs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.cols + b]
    }

    /// Maximum allowed deviation of a pair frequency.
    pub fn tolerance(&self, epsilon: f64) -> f64 {
        epsilon / (self.rows * self.cols) as f64
    }
}

/// `N(a, b | x^n, y^n)`.
pub fn count_occurrences(a: usize, b: usize, x: &[usize], y: &[usize]) -> usize {
    x.iter()
        .zip(y)
        .filter(|&(&xi, &yi)| xi == a && yi == b)
        .count()
}

/// Typicality test. Sequences of different length, or of length other than
/// `params.n`, are never typical.
pub fn is_jointly_typical(
    x: &[usize],
    y: &[usize],
    joint: &JointDistribution,
    params: &TypicalityParams,
) -> bool {
    if x.len() != y.len() || x.len() != params.n {
        return false;
    }
    let mut counts = vec![0usize; joint.rows * joint.cols];
    for (&a, &b) in x.iter().zip(y) {
        if a >= joint.rows || b >= joint.cols {
            return false;
        }
        counts[a * joint.cols + b] += 1;
    }
    counts_are_typical(&counts, joint, params)
}

pub(crate) fn counts_are_typical(
    counts: &[usize],
    joint: &JointDistribution,
    params: &TypicalityParams,
) -> bool {
    let n = params.n as f64;
    let tol = joint.tolerance(params.epsilon) + FREQUENCY_SLACK;
    counts.iter().zip(&joint.probs).all(|(&c, &p)| {
        if p == 0.0 {
            c == 0
        } else {
            (c as f64 / n - p).abs() <= tol
        }
    })
}

/// Residue-label symbols of a codeword under the channel's group.
pub fn symbols(channel: &Channel, codeword: &[DihedralElement]) -> Vec<usize> {
    let params = channel.params();
    codeword.iter().map(|&c| params.residue_label(c)).collect()
}
