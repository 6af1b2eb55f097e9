//! Maximum joint entropy of `(X, W)` on `D6 x D6` under marginal constraints,
//! and the typical-set intersection counts it controls.
//!
//! The program is
//!
//! ```text
//! maximize   H(X, W)
//! subject to Σ_w p(g, w)        = P_X(g)   for every g
//!            Σ_w p(g w⁻¹, w)    = P_X(g)   for every g   (X·W has law P_X)
//!            Σ_{w rotation} p   = α
//! ```
//!
//! With `p = P_X(rotations)` it is feasible exactly when `α >= |1 - 2p|`, and
//! the maximizer is `κ · P_X(x) P_X(x·w)` with one constant `κ` per block:
//!
//! ```text
//! x, w rotations          κ = (2p - 1 + α) / (2 p²)
//! x reflection, w rotation κ = (1 - 2p + α) / (2 (1 - p)²)
//! w reflection            κ = (1 - α) / (2 p (1 - p))
//! ```
//!
//! Its entropy is `2 H(X) + h(q) - 2 h(p)` with
//! `q = ((2p - 1 + α)/2, (1 - 2p + α)/2, (1 - α)/2, (1 - α)/2)`.
//! [`numeric_entropy_max`] solves the same program by Newton's method on the
//! convex dual and serves as the independent check. All entropies are in bits.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::Serialize;

use crate::channel::{Channel, Labeling};
use crate::dihedral::{DihedralElement, DihedralParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::typicality::{counts_are_typical, JointDistribution, TypicalityParams};

const D6: DihedralParams = DihedralParams::D6;
const G: usize = 6;

/// Tolerance on `Σ P_X = 1` and on `α >= |1 - 2p|`.
const INPUT_TOLERANCE: f64 = 1e-12;

/// Largest block length for exact intersection counting.
pub const MAX_INTERSECTION_N: usize = 12;

/// `-Σ q log2 q` with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Joint pmf over `D6 x D6`, indexed by table index (`1, x, x², y, xy, x²y`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointPmf {
    probs: [[f64; G]; G],
}

impl JointPmf {
    pub fn from_array(probs: [[f64; G]; G]) -> Self {
        Self { probs }
    }

    pub fn get(&self, x: usize, w: usize) -> f64 {
        self.probs[x][w]
    }

    pub fn as_array(&self) -> &[[f64; G]; G] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(self.probs.as_flattened())
    }

    pub fn min_entry(&self) -> f64 {
        self.probs
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn is_rotation_index(i: usize) -> bool {
    i < G / 2
}

/// Table index of `x · w`.
fn product_index(x: usize, w: usize) -> usize {
    D6.index_of(D6.mul(D6.element_at(x), D6.element_at(w)))
}

/// `P_X(rotations)`.
pub fn rotation_mass(px: &[f64; G]) -> f64 {
    px[..G / 2].iter().sum()
}

/// `|1 - 2p|`, the smallest feasible `α`.
pub fn alpha_threshold(p: f64) -> f64 {
    (1.0 - 2.0 * p).abs()
}

fn check_px(px: &[f64; G]) -> Result<()> {
    if px.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "P_X has a negative or non-finite entry: {px:?}"
        )));
    }
    let total: f64 = px.iter().sum();
    if (total - 1.0).abs() > INPUT_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "P_X sums to {total}, not 1"
        )));
    }
    Ok(())
}

fn check_alpha(p: f64, alpha: f64) -> Result<()> {
    let threshold = alpha_threshold(p);
    if alpha.is_nan() || alpha > 1.0 + INPUT_TOLERANCE || alpha < threshold - INPUT_TOLERANCE {
        return Err(Error::InvalidAlpha { alpha, threshold });
    }
    Ok(())
}

/// `num / den`, or zero when the block it scales has zero mass anyway.
fn coefficient(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// The closed-form maximizer.
pub fn optimal_joint_pmf(px: &[f64; G], alpha: f64) -> Result<JointPmf> {
    check_px(px)?;
    let p = rotation_mass(px);
    check_alpha(p, alpha)?;
    let rot_rot = coefficient(2.0 * p - 1.0 + alpha, 2.0 * p * p);
    let refl_rot = coefficient(1.0 - 2.0 * p + alpha, 2.0 * (1.0 - p) * (1.0 - p));
    let any_refl = coefficient(1.0 - alpha, 2.0 * p * (1.0 - p));
    let mut probs = [[0.0; G]; G];
    for (x, row) in probs.iter_mut().enumerate() {
        for (w, cell) in row.iter_mut().enumerate() {
            let kappa = match (is_rotation_index(x), is_rotation_index(w)) {
                (true, true) => rot_rot,
                (false, true) => refl_rot,
                (_, false) => any_refl,
            };
            *cell = (kappa * px[x] * px[product_index(x, w)]).max(0.0);
        }
    }
    Ok(JointPmf { probs })
}

/// `2 H(X) + h(q) - 2 h(p)` for the block masses `q` of the maximizer.
pub fn closed_form_entropy(px: &[f64; G], alpha: f64) -> Result<f64> {
    check_px(px)?;
    let p = rotation_mass(px);
    check_alpha(p, alpha)?;
    Ok(2.0 * entropy_bits(px) + entropy_bits(&block_masses(p, alpha)) - 2.0 * binary_entropy(p))
}

/// `((2p - 1 + α)/2, (1 - 2p + α)/2, (1 - α)/2, (1 - α)/2)`, clamped at zero.
pub fn block_masses(p: f64, alpha: f64) -> [f64; 4] {
    [
        ((2.0 * p - 1.0 + alpha) / 2.0).max(0.0),
        ((1.0 - 2.0 * p + alpha) / 2.0).max(0.0),
        ((1.0 - alpha) / 2.0).max(0.0),
        ((1.0 - alpha) / 2.0).max(0.0),
    ]
}

/// Largest absolute violation of each constraint family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    pub row_marginal: f64,
    pub product_marginal: f64,
    pub rotation_mass: f64,
    pub total: f64,
    pub negativity: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        [
            self.row_marginal,
            self.product_marginal,
            self.rotation_mass,
            self.total,
            self.negativity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn constraint_residuals(pmf: &JointPmf, px: &[f64; G], alpha: f64) -> ConstraintResiduals {
    let mut rows = [0.0; G];
    let mut products = [0.0; G];
    let mut rot = 0.0;
    for x in 0..G {
        for w in 0..G {
            let v = pmf.get(x, w);
            rows[x] += v;
            products[product_index(x, w)] += v;
            if is_rotation_index(w) {
                rot += v;
            }
        }
    }
    let dev = |a: &[f64; G]| {
        a.iter()
            .zip(px)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    ConstraintResiduals {
        row_marginal: dev(&rows),
        product_marginal: dev(&products),
        rotation_mass: (rot - alpha).abs(),
        total: (pmf.total() - 1.0).abs(),
        negativity: (-pmf.min_entry()).max(0.0),
    }
}

/// Constraint matrix (13 x 36) and right-hand side of the program.
fn constraint_system(px: &[f64; G], alpha: f64) -> (DMatrix<f64>, DVector<f64>) {
    let rows = 2 * G + 1;
    let mut a = DMatrix::zeros(rows, G * G);
    let mut b = DVector::zeros(rows);
    for x in 0..G {
        for w in 0..G {
            let col = x * G + w;
            a[(x, col)] = 1.0;
            a[(G + product_index(x, w), col)] = 1.0;
            if is_rotation_index(w) {
                a[(2 * G, col)] = 1.0;
            }
        }
    }
    for g in 0..G {
        b[g] = px[g];
        b[G + g] = px[g];
    }
    b[2 * G] = alpha;
    (a, b)
}

/// Result of the numerical maximization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericMax {
    /// Entropy of the returned pmf.
    pub value: f64,
    /// Dual objective at the final multipliers; an upper bound on the optimum.
    pub upper_bound: f64,
    pub pmf: JointPmf,
    pub iterations: usize,
    /// Largest constraint violation of the returned pmf.
    pub residual: f64,
}

const NEWTON_MAX_ITERATIONS: usize = 500;

/// Maximizes `H(X, W)` over the constraint polytope by damped Newton steps on
/// the dual `D(λ) = Σ_i exp((Aᵀλ)_i - 1) - λᵀb` (in nats internally).
///
/// Every `λ` gives `D(λ) >= max H`, and `D(λ) - H(q_λ) = λᵀ(A q_λ - b)`, so
/// iteration stops once both that gap and the residual are below
/// `tolerance / 10`.
pub fn numeric_entropy_max(px: &[f64; G], alpha: f64, tolerance: f64) -> Result<NumericMax> {
    check_px(px)?;
    let p = rotation_mass(px);
    check_alpha(p, alpha)?;
    let (a, b) = constraint_system(px, alpha);
    let m = a.nrows();
    let primal = |lambda: &DVector<f64>| -> DVector<f64> {
        (a.transpose() * lambda).map(|s| (s - 1.0).exp())
    };
    let dual = |lambda: &DVector<f64>, q: &DVector<f64>| q.sum() - lambda.dot(&b);

    let mut lambda = DVector::zeros(m);
    let mut q = primal(&lambda);
    let mut iterations = 0;
    let target = tolerance / 10.0;
    while iterations < NEWTON_MAX_ITERATIONS {
        let residual = &a * &q - &b;
        let gap = lambda.dot(&residual).abs() / std::f64::consts::LN_2;
        if residual.amax() < target.min(1e-13) && gap < target {
            break;
        }
        iterations += 1;
        let weighted = DMatrix::from_fn(m, a.ncols(), |r, c| a[(r, c)] * q[c]);
        let mut hessian = &weighted * a.transpose();
        let damping = 1e-12 * hessian.diagonal().amax().max(1e-300);
        for i in 0..m {
            hessian[(i, i)] += damping;
        }
        let step = match hessian.clone().cholesky() {
            Some(ch) => ch.solve(&(-&residual)),
            None => {
                for i in 0..m {
                    hessian[(i, i)] += 1e-8;
                }
                hessian
                    .lu()
                    .solve(&(-&residual))
                    .ok_or_else(|| Error::Infeasible("singular Newton system".into()))?
            }
        };
        let current = dual(&lambda, &q);
        let slope = residual.dot(&step);
        let mut t = 1.0;
        loop {
            let trial = &lambda + &step * t;
            let q_trial = primal(&trial);
            let value = dual(&trial, &q_trial);
            if value.is_finite() && value <= current + 1e-4 * t * slope {
                lambda = trial;
                q = q_trial;
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                break;
            }
        }
        if t < 1e-20 {
            break;
        }
        if !lambda.iter().all(|v| v.is_finite()) {
            return Err(Error::Infeasible("dual iterates diverged".into()));
        }
    }
    let mut probs = [[0.0; G]; G];
    for x in 0..G {
        for w in 0..G {
            probs[x][w] = q[x * G + w];
        }
    }
    let pmf = JointPmf { probs };
    let residual = constraint_residuals(&pmf, px, alpha).max();
    if residual > tolerance {
        return Err(Error::Infeasible(format!(
            "no feasible point found, residual {residual:e}"
        )));
    }
    Ok(NumericMax {
        value: pmf.entropy(),
        upper_bound: dual(&lambda, &q) / std::f64::consts::LN_2,
        pmf,
        iterations,
        residual,
    })
}

/// Random `P_X` from the flat Dirichlet and `α` uniform on `[|1 - 2p|, 1]`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> ([f64; G], f64) {
    let sample = Dirichlet::new_with_size(1.0, G)
        .expect("flat Dirichlet on six symbols")
        .sample(rng);
    let mut px = [0.0; G];
    px.copy_from_slice(&sample);
    let lo = alpha_threshold(rotation_mass(&px));
    let alpha = lo + (1.0 - lo) * rng.gen::<f64>();
    (px, alpha)
}

const IPF_SWEEPS: usize = 5000;

/// A random feasible point: a random positive pmf fitted to the constraints
/// by iterative proportional fitting.
pub fn random_feasible_pmf<R: Rng + ?Sized>(
    px: &[f64; G],
    alpha: f64,
    rng: &mut R,
) -> Result<JointPmf> {
    check_px(px)?;
    check_alpha(rotation_mass(px), alpha)?;
    let mut probs = [[0.0; G]; G];
    for row in probs.iter_mut() {
        for cell in row.iter_mut() {
            // heavy-tailed start so samples spread over the polytope
            *cell = (-(1.0 - rng.gen::<f64>()).ln()).powi(3);
        }
    }
    let scale =
        |cells: &mut [[f64; G]; G], pick: &dyn Fn(usize, usize) -> usize, target: &[f64]| {
            let mut sums = vec![0.0; target.len()];
            for (x, row) in cells.iter().enumerate() {
                for (w, &v) in row.iter().enumerate() {
                    sums[pick(x, w)] += v;
                }
            }
            for (x, row) in cells.iter_mut().enumerate() {
                for (w, v) in row.iter_mut().enumerate() {
                    let k = pick(x, w);
                    *v = if sums[k] > 0.0 {
                        *v * target[k] / sums[k]
                    } else {
                        0.0
                    };
                }
            }
        };
    let block_target = [alpha, 1.0 - alpha];
    for _ in 0..IPF_SWEEPS {
        scale(&mut probs, &|x, _| x, px);
        scale(&mut probs, &|x, w| product_index(x, w), px);
        scale(
            &mut probs,
            &|_, w| usize::from(!is_rotation_index(w)),
            &block_target,
        );
        let pmf = JointPmf { probs };
        if constraint_residuals(&pmf, px, alpha).max() < 1e-13 {
            return Ok(pmf);
        }
    }
    let pmf = JointPmf { probs };
    let r = constraint_residuals(&pmf, px, alpha).max();
    if r < 1e-9 {
        Ok(pmf)
    } else {
        Err(Error::Infeasible(format!(
            "fitting stalled at residual {r:e}"
        )))
    }
}

/// Two sides of an inequality and whether it holds (with `1e-12` slack).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

const INEQUALITY_SLACK: f64 = 1e-12;

fn check_domain(p: f64, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "p = {p}, alpha = {alpha} outside [0, 1]"
        )));
    }
    check_alpha(p, alpha)
}

/// `h(q) <= h(α) + h(p)` for the block masses `q`.
pub fn entropy_inequality_check(p: f64, alpha: f64) -> Result<InequalityCheck> {
    check_domain(p, alpha)?;
    let lhs = entropy_bits(&block_masses(p, alpha));
    let rhs = binary_entropy(alpha) + binary_entropy(p);
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + INEQUALITY_SLACK,
    })
}

/// The chord step behind the inequality:
/// `α h((2p - 1 + α) / (2α)) + (1 - α) <= h(p)`, for `α > 0`.
pub fn chord_check(p: f64, alpha: f64) -> Result<InequalityCheck> {
    check_domain(p, alpha)?;
    if alpha == 0.0 {
        return Err(Error::InvalidAlpha {
            alpha,
            threshold: f64::MIN_POSITIVE,
        });
    }
    let x1 = ((2.0 * p - 1.0 + alpha) / (2.0 * alpha)).clamp(0.0, 1.0);
    let lhs = alpha * binary_entropy(x1) + (1.0 - alpha);
    let rhs = binary_entropy(p);
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + INEQUALITY_SLACK,
    })
}

/// `side x side` points `(p, α)` covering the feasible region, with `p`
/// uniform on `[0, 1]` and `α` uniform on `[|1 - 2p|, 1]`.
pub fn feasible_grid(side: usize) -> Vec<(f64, f64)> {
    assert!(side >= 2);
    let step = 1.0 / (side - 1) as f64;
    let mut points = Vec::with_capacity(side * side);
    for i in 0..side {
        let p = i as f64 * step;
        let lo = alpha_threshold(p);
        for j in 0..side {
            points.push((p, lo + (1.0 - lo) * j as f64 * step));
        }
    }
    points
}

/// One row of the randomized closed-form versus numeric comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropySweepRow {
    pub p: f64,
    pub alpha: f64,
    pub closed_form: f64,
    pub numeric: f64,
    pub gap: f64,
}

/// Compares closed form and numeric optimum on `count` random instances.
/// Instance `i` is drawn from its own stream of `seed`.
pub fn entropy_sweep(
    count: usize,
    seed: u64,
    tolerance: f64,
    exec: Execution,
) -> Result<Vec<EntropySweepRow>> {
    exec.map_collect(count, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let (px, alpha) = random_instance(&mut rng);
        let closed_form = closed_form_entropy(&px, alpha)?;
        let numeric = numeric_entropy_max(&px, alpha, tolerance)?.value;
        Ok(EntropySweepRow {
            p: rotation_mass(&px),
            alpha,
            closed_form,
            numeric,
            gap: (closed_form - numeric).abs(),
        })
    })
    .into_iter()
    .collect()
}

/// Feasibility of the closed form and its optimality against random
/// feasible points, over random instances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub instances: usize,
    /// Largest constraint violation of any closed-form maximizer.
    pub worst_residual: f64,
    pub feasible_samples: usize,
    /// Feasible samples whose entropy exceeds the closed form by over `1e-9`.
    pub beaten: usize,
}

pub fn optimality_sweep(
    instances: usize,
    samples_per_instance: usize,
    seed: u64,
) -> Result<OptimalityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_residual: f64 = 0.0;
    let mut beaten = 0;
    for _ in 0..instances {
        let (px, alpha) = random_instance(&mut rng);
        let pmf = optimal_joint_pmf(&px, alpha)?;
        worst_residual = worst_residual.max(constraint_residuals(&pmf, &px, alpha).max());
        let best = closed_form_entropy(&px, alpha)?;
        for _ in 0..samples_per_instance {
            if random_feasible_pmf(&px, alpha, &mut rng)?.entropy() > best + 1e-9 {
                beaten += 1;
            }
        }
    }
    Ok(OptimalityReport {
        instances,
        worst_residual,
        feasible_samples: instances * samples_per_instance,
        beaten,
    })
}

/// Inequality and chord checks over [`feasible_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub points: usize,
    pub inequality_failures: usize,
    pub chord_failures: usize,
}

pub fn inequality_sweep(side: usize) -> Result<InequalityReport> {
    let grid = feasible_grid(side);
    let mut report = InequalityReport {
        points: grid.len(),
        inequality_failures: 0,
        chord_failures: 0,
    };
    for (p, alpha) in grid {
        if !entropy_inequality_check(p, alpha)?.holds {
            report.inequality_failures += 1;
        }
        if alpha > 0.0 && !chord_check(p, alpha)?.holds {
            report.chord_failures += 1;
        }
    }
    Ok(report)
}

/// Exact sizes of `c · S(n1, n2) ∩ A_ε(X | y)`, where `S(n1, n2)` is the set
/// of words with `n1` reflections, `n2` non-identity rotations and identity
/// elsewhere (all placements). Typicality is joint typicality of `(x, y)`
/// under the uniform input. Entry `[n1][n2]` holds the count.
pub fn typical_intersection_counts(
    c: &[DihedralElement],
    y: &[usize],
    channel: &Channel,
    epsilon: f64,
) -> Result<Vec<Vec<u64>>> {
    if channel.params() != D6 {
        return Err(Error::UnsupportedOrder(channel.params().p()));
    }
    let n = c.len();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n == 0 || n > MAX_INTERSECTION_N {
        return Err(Error::CapExceeded {
            size: (G as u128).pow(n as u32),
            cap: (G as u128).pow(MAX_INTERSECTION_N as u32),
        });
    }
    if y.iter().any(|&b| b >= channel.output_size()) {
        return Err(Error::InvalidParameter("output symbol out of range".into()));
    }
    let joint = JointDistribution::from_channel(channel, &Labeling::identity(G));
    let params = TypicalityParams::new(epsilon, n);
    let mut search = IntersectionSearch::new(c, y, &joint, params);
    search.run(0);
    Ok(search.buckets)
}

/// Single-bucket form of [`typical_intersection_counts`].
pub fn typical_intersection_count(
    c: &[DihedralElement],
    y: &[usize],
    n1: usize,
    n2: usize,
    channel: &Channel,
    epsilon: f64,
) -> Result<u64> {
    let buckets = typical_intersection_counts(c, y, channel, epsilon)?;
    Ok(buckets
        .get(n1)
        .and_then(|row| row.get(n2))
        .copied()
        .unwrap_or(0))
}

/// `C(n, n1) · 2^{n H + ε n log2 6}`.
pub fn intersection_bound(n: usize, n1: usize, h_val: f64, epsilon: f64) -> f64 {
    let binom: f64 = (0..n1).map(|i| (n - i) as f64 / (i + 1) as f64).product();
    binom * (n as f64 * (h_val + epsilon * (G as f64).log2())).exp2()
}

struct IntersectionSearch<'a> {
    c_inv: Vec<DihedralElement>,
    y: &'a [usize],
    joint: &'a JointDistribution,
    params: TypicalityParams,
    cols: usize,
    counts: Vec<usize>,
    upper: Vec<usize>,
    lower: Vec<usize>,
    /// `remaining[i][b]`: positions `>= i` with output `b`.
    remaining: Vec<Vec<usize>>,
    n1: usize,
    n2: usize,
    buckets: Vec<Vec<u64>>,
}

impl<'a> IntersectionSearch<'a> {
    fn new(
        c: &[DihedralElement],
        y: &'a [usize],
        joint: &'a JointDistribution,
        params: TypicalityParams,
    ) -> Self {
        let n = c.len();
        let cols = joint.cols();
        let tol = joint.tolerance(params.epsilon);
        let mut upper = Vec::with_capacity(G * cols);
        let mut lower = Vec::with_capacity(G * cols);
        for a in 0..G {
            for b in 0..cols {
                let pr = joint.get(a, b);
                if pr == 0.0 {
                    upper.push(0);
                    lower.push(0);
                } else {
                    let hi = (n as f64 * (pr + tol) + 1e-9).floor().max(0.0);
                    let lo = (n as f64 * (pr - tol) - 1e-9).ceil().max(0.0);
                    upper.push(hi as usize);
                    lower.push(lo as usize);
                }
            }
        }
        let mut remaining = vec![vec![0; cols]; n + 1];
        for i in (0..n).rev() {
            remaining[i] = remaining[i + 1].clone();
            remaining[i][y[i]] += 1;
        }
        Self {
            c_inv: c.iter().map(|&e| D6.inv(e)).collect(),
            y,
            joint,
            params,
            cols,
            counts: vec![0; G * cols],
            upper,
            lower,
            remaining,
            n1: 0,
            n2: 0,
            buckets: vec![vec![0; n + 1]; n + 1],
        }
    }

    fn feasible_below(&self, i: usize) -> bool {
        // every pair still short of its minimum must be reachable
        (0..self.cols).all(|b| {
            let short: usize = (0..G)
                .map(|a| {
                    self.lower[a * self.cols + b].saturating_sub(self.counts[a * self.cols + b])
                })
                .sum();
            short <= self.remaining[i][b]
        })
    }

    fn run(&mut self, i: usize) {
        if i == self.y.len() {
            if counts_are_typical(&self.counts, self.joint, &self.params) {
                self.buckets[self.n1][self.n2] += 1;
            }
            return;
        }
        let b = self.y[i];
        for x in D6.elements() {
            let a = D6.residue_label(x);
            let slot = a * self.cols + b;
            if self.counts[slot] >= self.upper[slot] {
                continue;
            }
            self.counts[slot] += 1;
            if self.feasible_below(i + 1) {
                let s = D6.mul(self.c_inv[i], x);
                let (d1, d2) = if s.is_reflection() {
                    (1, 0)
                } else if s.is_identity() {
                    (0, 0)
                } else {
                    (0, 1)
                };
                self.n1 += d1;
                self.n2 += d2;
                self.run(i + 1);
                self.n1 -= d1;
                self.n2 -= d2;
            }
            self.counts[slot] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BuiltinChannel;
    use crate::dihedral::Partition;
    use crate::rate::{conditional_entropy, Conditioning};

    const UNIFORM: [f64; 6] = [1.0 / 6.0; 6];

    #[test]
    fn uniform_half_is_uniform_joint() {
        let pmf = optimal_joint_pmf(&UNIFORM, 0.5).unwrap();
        for x in 0..6 {
            for w in 0..6 {
                assert!((pmf.get(x, w) - 1.0 / 36.0).abs() < 1e-15);
            }
        }
        let h = closed_form_entropy(&UNIFORM, 0.5).unwrap();
        assert!((h - (18f64.log2() + 1.0)).abs() < 1e-12);
        assert!((h - 5.169925).abs() < 1e-6);
        assert!((pmf.entropy() - h).abs() < 1e-12);
    }

    #[test]
    fn alpha_one_kills_reflection_block() {
        let pmf = optimal_joint_pmf(&UNIFORM, 1.0).unwrap();
        for x in 0..6 {
            for w in 3..6 {
                assert_eq!(pmf.get(x, w), 0.0);
            }
            for w in 0..3 {
                assert!((pmf.get(x, w) - 1.0 / 18.0).abs() < 1e-15);
            }
        }
        let h = closed_form_entropy(&UNIFORM, 1.0).unwrap();
        assert!((h - (2.0 * 6f64.log2() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_alpha_rejected() {
        let px = [0.3, 0.3, 0.3, 0.05, 0.03, 0.02];
        assert!(matches!(
            optimal_joint_pmf(&px, 0.5),
            Err(Error::InvalidAlpha { .. })
        ));
        assert!(numeric_entropy_max(&px, 0.5, 1e-6).is_err());
        assert!(optimal_joint_pmf(&[0.5; 6], 0.5).is_err());
    }

    #[test]
    fn closed_form_feasible_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (px, alpha) = random_instance(&mut rng);
            let pmf = optimal_joint_pmf(&px, alpha).unwrap();
            assert!(constraint_residuals(&pmf, &px, alpha).max() < 1e-12);
            let h = closed_form_entropy(&px, alpha).unwrap();
            assert!((pmf.entropy() - h).abs() < 1e-9);
        }
    }

    #[test]
    fn numeric_matches_spot_value() {
        let r = numeric_entropy_max(&UNIFORM, 0.5, 1e-9).unwrap();
        assert!((r.value - 5.169925001442312).abs() < 1e-6, "{r:?}");
        assert!(r.upper_bound >= r.value - 1e-9);
    }

    #[test]
    fn numeric_matches_closed_form_at_boundary() {
        let px = [0.2, 0.1, 0.1, 0.3, 0.2, 0.1];
        let alpha = alpha_threshold(rotation_mass(&px));
        let cf = closed_form_entropy(&px, alpha).unwrap();
        let r = numeric_entropy_max(&px, alpha, 1e-9).unwrap();
        assert!((cf - r.value).abs() < 1e-6, "{cf} vs {}", r.value);
    }

    #[test]
    fn random_feasible_points_do_not_beat_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (px, alpha) = random_instance(&mut rng);
        let best = closed_form_entropy(&px, alpha).unwrap();
        for _ in 0..20 {
            let pmf = random_feasible_pmf(&px, alpha, &mut rng).unwrap();
            assert!(constraint_residuals(&pmf, &px, alpha).max() < 1e-9);
            assert!(pmf.entropy() <= best + 1e-9);
        }
    }

    #[test]
    fn inequality_examples() {
        let c = entropy_inequality_check(0.5, 0.5).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-12 && (c.rhs - 2.0).abs() < 1e-12 && c.holds);
        let c = entropy_inequality_check(0.5, 0.0).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-12 && (c.rhs - 1.0).abs() < 1e-12 && c.holds);
        assert!(entropy_inequality_check(0.9, 0.1).is_err());
        assert!(entropy_inequality_check(1.5, 1.0).is_err());
    }

    #[test]
    fn inequality_and_chord_on_grid() {
        for (p, alpha) in feasible_grid(60) {
            assert!(
                entropy_inequality_check(p, alpha).unwrap().holds,
                "{p} {alpha}"
            );
            if alpha > 0.0 {
                assert!(chord_check(p, alpha).unwrap().holds, "{p} {alpha}");
            }
        }
    }

    #[test]
    fn intersection_trivial_cases() {
        let ch = BuiltinChannel::Identity.build(D6).unwrap();
        let c: Vec<_> = (0..6).map(|i| D6.element_at(i)).collect();
        let y: Vec<_> = c.iter().map(|&e| D6.residue_label(e)).collect();
        let buckets = typical_intersection_counts(&c, &y, &ch, 0.01).unwrap();
        assert_eq!(buckets[0][0], 1);
        let total: u64 = buckets.iter().flatten().sum();
        assert_eq!(total, 1);
        // not typical with a shifted output
        let mut y2 = y.clone();
        y2.rotate_left(1);
        let total: u64 = typical_intersection_counts(&c, &y2, &ch, 0.01)
            .unwrap()
            .iter()
            .flatten()
            .sum();
        assert_eq!(
            typical_intersection_count(&c, &y2, 0, 0, &ch, 0.01).unwrap(),
            0
        );
        assert!(total <= 1);
    }

    #[test]
    fn intersection_count_within_bound_rotation_revealing() {
        let ch = BuiltinChannel::RotationRevealing.build(D6).unwrap();
        let h = conditional_entropy(
            &ch,
            &Labeling::identity(6),
            Conditioning::CosetAndOutput(Partition::RotationCoset),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        for _ in 0..5 {
            let c: Vec<_> = (0..n)
                .map(|_| crate::ensemble::sample_element(&D6, &mut rng))
                .collect();
            let y = ch.transmit(&c, &Labeling::identity(6), &mut rng);
            for eps in [0.1, 0.2] {
                let buckets = typical_intersection_counts(&c, &y, &ch, eps).unwrap();
                for (n1, row) in buckets.iter().enumerate() {
                    let bound = intersection_bound(n, n1, h, eps);
                    assert!(row.iter().sum::<u64>() as f64 <= bound);
                }
            }
        }
    }

    #[test]
    fn intersection_cap() {
        let ch = BuiltinChannel::Identity.build(D6).unwrap();
        let c = vec![DihedralElement::IDENTITY; 13];
        let y = vec![0; 13];
        assert!(matches!(
            typical_intersection_counts(&c, &y, &ch, 0.1),
            Err(Error::CapExceeded { .. })
        ));
    }
}
