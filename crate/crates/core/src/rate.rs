//! Achievable rates for pseudo-group codes over `D6` and group codes over `Z6`.
//!
//! With `X` uniform over the six channel inputs:
//!
//! ```text
//! R*        = min( log2 6 - H(X|Y),
//!                  (log2 6 / log2 3) (log2 3 - H(X | [X] Y)) )
//! R_abelian = min( log2 6 - H(X|Y),
//!                  (log2 6 / log2 3) (log2 3 - H(X | [X]_3 Y)),
//!                  log2 6 (1 - H(X | [X]_2 Y)) )
//! ```
//!
//! where `[X]` is the coset of the rotations, `[X]_3` the coset of `{0, 2, 4}`
//! and `[X]_2` the coset of `{0, 3}`. Under the residue-label correspondence
//! `[X]` and `[X]_3` coincide, so `R_abelian <= R*` always holds. Terms are
//! reported raw; negative values are kept.

use serde::Serialize;

use crate::channel::{Channel, Labeling};
use crate::dihedral::Partition;
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioning {
    /// `H(X | Y)`
    Output,
    /// `H(X | [X]_partition, Y)`
    CosetAndOutput(Partition),
}

/// `H(X | ...)` in bits, `X` uniform over the `2p` inputs, `0 log 0 = 0`.
pub fn conditional_entropy(
    channel: &Channel,
    labeling: &Labeling,
    conditioning: Conditioning,
) -> f64 {
    let params = channel.params();
    let q = channel.input_size();
    let outputs = channel.output_size();
    let corr = Labeling::identity(q);
    let class = |m: usize| match conditioning {
        Conditioning::Output => 0,
        Conditioning::CosetAndOutput(part) => {
            params
                .coset_label(params.from_residue_label(m), part, &corr)
                .value
        }
    };
    let classes = match conditioning {
        Conditioning::Output => 1,
        Conditioning::CosetAndOutput(part) => params.coset_count(part),
    };
    let px = 1.0 / q as f64;
    let mut marginal = vec![0.0; classes * outputs];
    for m in 0..q {
        let row = labeling.input_of(m);
        for y in 0..outputs {
            marginal[class(m) * outputs + y] += px * channel.prob(row, y);
        }
    }
    let mut h = 0.0;
    for m in 0..q {
        let row = labeling.input_of(m);
        for y in 0..outputs {
            let joint = px * channel.prob(row, y);
            if joint > 0.0 {
                h -= joint * (joint / marginal[class(m) * outputs + y]).log2();
            }
        }
    }
    // rounding can leave -0.0 or -1e-17 on deterministic channels
    h.max(0.0)
}

/// Mutual information under a uniform input, `log2 |G| - H(X|Y)`.
pub fn symmetric_capacity(channel: &Channel, labeling: &Labeling) -> f64 {
    (channel.input_size() as f64).log2()
        - conditional_entropy(channel, labeling, Conditioning::Output)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PseudoGroupRate {
    pub h_x_given_y: f64,
    pub h_x_given_coset_y: f64,
    pub term_full: f64,
    pub term_coset: f64,
    pub r_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AbelianRate {
    pub h_x_given_y: f64,
    pub h_x_given_z3_y: f64,
    pub h_x_given_z2_y: f64,
    pub term_full: f64,
    pub abelian_term_coset3: f64,
    pub abelian_term3: f64,
    pub r_abelian: f64,
}

/// Both rate formulas for one channel and labeling, in bits per channel use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub h_x_given_y: f64,
    pub h_x_given_coset_y: f64,
    pub h_x_given_z3_y: f64,
    pub h_x_given_z2_y: f64,
    pub term_full: f64,
    pub term_coset: f64,
    pub r_star: f64,
    pub abelian_term3: f64,
    pub abelian_term_coset3: f64,
    pub r_abelian: f64,
}

impl RateBreakdown {
    /// Rate actually achieved by pseudo-group codes, `max(0, r_star)`.
    pub fn achieved_r_star(&self) -> f64 {
        self.r_star.max(0.0)
    }

    pub fn achieved_r_abelian(&self) -> f64 {
        self.r_abelian.max(0.0)
    }
}

fn log2_6() -> f64 {
    6f64.log2()
}

fn log2_3() -> f64 {
    3f64.log2()
}

fn require_d6(channel: &Channel) -> Result<()> {
    if channel.params().p() != 3 {
        return Err(Error::UnsupportedOrder(channel.params().p()));
    }
    Ok(())
}

pub fn pseudo_group_rate(channel: &Channel, labeling: &Labeling) -> Result<PseudoGroupRate> {
    require_d6(channel)?;
    let h_y = conditional_entropy(channel, labeling, Conditioning::Output);
    let h_cy = conditional_entropy(
        channel,
        labeling,
        Conditioning::CosetAndOutput(Partition::RotationCoset),
    );
    let term_full = log2_6() - h_y;
    let term_coset = log2_6() / log2_3() * (log2_3() - h_cy);
    Ok(PseudoGroupRate {
        h_x_given_y: h_y,
        h_x_given_coset_y: h_cy,
        term_full,
        term_coset,
        r_star: term_full.min(term_coset),
    })
}

pub fn abelian_rate(channel: &Channel, labeling: &Labeling) -> Result<AbelianRate> {
    require_d6(channel)?;
    let h_y = conditional_entropy(channel, labeling, Conditioning::Output);
    let h_z3 = conditional_entropy(
        channel,
        labeling,
        Conditioning::CosetAndOutput(Partition::Z6Index3),
    );
    let h_z2 = conditional_entropy(
        channel,
        labeling,
        Conditioning::CosetAndOutput(Partition::Z6Index2),
    );
    let term_full = log2_6() - h_y;
    let term_coset3 = log2_6() / log2_3() * (log2_3() - h_z3);
    let term3 = log2_6() * (1.0 - h_z2);
    Ok(AbelianRate {
        h_x_given_y: h_y,
        h_x_given_z3_y: h_z3,
        h_x_given_z2_y: h_z2,
        term_full,
        abelian_term_coset3: term_coset3,
        abelian_term3: term3,
        r_abelian: term_full.min(term_coset3).min(term3),
    })
}

pub fn rate_breakdown(channel: &Channel, labeling: &Labeling) -> Result<RateBreakdown> {
    let pg = pseudo_group_rate(channel, labeling)?;
    let ab = abelian_rate(channel, labeling)?;
    Ok(RateBreakdown {
        h_x_given_y: pg.h_x_given_y,
        h_x_given_coset_y: pg.h_x_given_coset_y,
        h_x_given_z3_y: ab.h_x_given_z3_y,
        h_x_given_z2_y: ab.h_x_given_z2_y,
        term_full: pg.term_full,
        term_coset: pg.term_coset,
        r_star: pg.r_star,
        abelian_term3: ab.abelian_term3,
        abelian_term_coset3: ab.abelian_term_coset3,
        r_abelian: ab.r_abelian,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    RStar,
    RAbelian,
    Symmetric,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::RStar, Objective::RAbelian, Objective::Symmetric];

    pub fn name(&self) -> &'static str {
        match self {
            Objective::RStar => "r_star",
            Objective::RAbelian => "r_abelian",
            Objective::Symmetric => "symmetric",
        }
    }

    pub fn evaluate(&self, channel: &Channel, labeling: &Labeling) -> Result<f64> {
        match self {
            Objective::RStar => Ok(pseudo_group_rate(channel, labeling)?.r_star),
            Objective::RAbelian => Ok(abelian_rate(channel, labeling)?.r_abelian),
            Objective::Symmetric => Ok(symmetric_capacity(channel, labeling)),
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r_star" | "r-star" => Ok(Objective::RStar),
            "r_abelian" | "r-abelian" => Ok(Objective::RAbelian),
            "symmetric" => Ok(Objective::Symmetric),
            other => Err(Error::InvalidParameter(format!(
                "unknown objective {other:?}"
            ))),
        }
    }
}

/// The `index`-th permutation of `0..size` in lexicographic order.
pub fn nth_permutation(size: usize, mut index: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..size).collect();
    let mut fact: usize = (1..size).product();
    let mut perm = Vec::with_capacity(size);
    for remaining in (1..=size).rev() {
        let pos = index / fact;
        index %= fact;
        perm.push(pool.remove(pos));
        if remaining > 1 {
            fact /= remaining - 1;
        }
    }
    perm
}

/// Values closer than this are treated as ties.
const TIE_RESOLUTION: f64 = 1e-9;

/// Exhaustive search over all `6! = 720` labelings.
///
/// Returns the labeling with the largest objective; labelings whose values
/// agree to `1e-9` tie and the lexicographically smallest permutation wins.
pub fn best_labeling(
    channel: &Channel,
    objective: Objective,
    exec: Execution,
) -> Result<(Labeling, f64)> {
    require_d6(channel)?;
    let size = channel.input_size();
    let count: usize = (1..=size).product();
    let evaluate = |i: usize| -> Option<(i64, usize, f64)> {
        let labeling = Labeling::from_permutation(nth_permutation(size, i)).ok()?;
        let v = objective.evaluate(channel, &labeling).ok()?;
        Some(((v / TIE_RESOLUTION).round() as i64, i, v))
    };
    let best = exec.map_reduce(count, None, evaluate, |a, b| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            // larger key wins, then smaller index
            if (b.0, std::cmp::Reverse(b.1)) > (a.0, std::cmp::Reverse(a.1)) {
                Some(b)
            } else {
                Some(a)
            }
        }
    });
    let (_, index, value) =
        best.ok_or_else(|| Error::InvalidChannel("no labeling evaluated".into()))?;
    Ok((
        Labeling::from_permutation(nth_permutation(size, index))?,
        value,
    ))
}
