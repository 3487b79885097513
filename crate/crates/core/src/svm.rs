//! Linear soft-margin SVM trained by stochastic subgradient descent.
//!
//! Minimizes
//!
//! ```text
//! C * sum_i [ y_i * cost1(z_i) + (1 - y_i) * cost0(z_i) ] + 1/2 * |theta|^2
//! ```
//!
//! with `z = theta . x + bias`, `cost1(z) = max(0, 1 - z)` and
//! `cost0(z) = max(0, 1 + z)`. The bias is not regularized.
//!
//! Each epoch visits the samples in a seeded random order. The objective is
//! split evenly into per-sample terms `C * hinge_i + |theta|^2 / (2m)`, and
//! every visit takes one subgradient step on its term with the step size
//! given by [`StepSchedule`] (by default `1 / (1 + epoch)`). The weight vector
//! is stored as `scale * w` so the regularizer shrink is O(1) per step
//! regardless of dimension.
//!
//! At the end of each epoch the bias is replaced by the midpoint of the
//! interval of biases that minimize the objective for the current weights.
//! This is an exact line search along the unregularized direction; it never
//! raises the objective.
//!
//! Candidates for the returned model are the zero model, every end-of-epoch
//! iterate, and the average of the end-of-epoch iterates over the second
//! half of training. The one with the lowest objective wins, so training
//! never increases the objective.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vectorize::SparseVector;

/// Below this the scaled representation is folded back into `w`.
const MIN_SCALE: f64 = 1e-9;

/// Step size rule for epoch `t` (counting from 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSchedule {
    /// `1 / (1 + t)`
    #[default]
    InverseEpoch,
    /// `1 / sqrt(1 + t)`
    InverseSqrtEpoch,
}

impl StepSchedule {
    pub fn step(self, epoch: usize) -> f64 {
        let t = 1.0 + epoch as f64;
        match self {
            StepSchedule::InverseEpoch => 1.0 / t,
            StepSchedule::InverseSqrtEpoch => 1.0 / t.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    /// Penalty on the hinge terms.
    pub c: f64,
    /// Number of epochs.
    pub max_iter: usize,
    pub schedule: StepSchedule,
    pub seed: u64,
    /// Stop once an epoch improves the objective by less than this.
    /// `None` always runs `max_iter` epochs.
    pub tolerance: Option<f64>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            max_iter: 100,
            schedule: StepSchedule::InverseEpoch,
            seed: 0,
            tolerance: None,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!("C must be positive, got {}", self.c)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if matches!(self.tolerance, Some(t) if t.is_nan() || t < 0.0) {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub theta: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    pub fn zeros(dimension: usize) -> Self {
        SvmModel {
            theta: vec![0.0; dimension],
            bias: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.theta.len()
    }

    pub fn decision_value(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.dimension(), x)?;
        Ok(x.dot_dense(&self.theta) + self.bias)
    }

    /// Positive iff the decision value is `>= 0`.
    pub fn predict(&self, x: &SparseVector) -> Result<bool> {
        Ok(self.decision_value(x)? >= 0.0)
    }

    pub fn objective_value(&self, xs: &[SparseVector], ys: &[bool], c: f64) -> Result<f64> {
        check_len(xs, ys)?;
        let mut hinge = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            hinge += hinge_loss(self.decision_value(x)?, y);
        }
        let reg: f64 = self.theta.iter().map(|t| t * t).sum();
        Ok(c * hinge + 0.5 * reg)
    }
}

fn hinge_loss(z: f64, y: bool) -> f64 {
    if y {
        (1.0 - z).max(0.0)
    } else {
        (1.0 + z).max(0.0)
    }
}

fn check_dim(expected: usize, x: &SparseVector) -> Result<()> {
    if x.dimension() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.dimension(),
        });
    }
    Ok(())
}

fn check_len(xs: &[SparseVector], ys: &[bool]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors but {} labels",
            xs.len(),
            ys.len()
        )));
    }
    Ok(())
}

/// Interval of bias values minimizing the hinge sum for fixed margins `scores`.
///
/// The hinge sum is convex and piecewise linear in the bias, so its minimizers
/// form a closed interval whose finite ends are breakpoints `1 - s` (positive
/// samples) or `-1 - s` (negative samples). Unbounded ends are infinite.
fn optimal_bias_interval(scores: &[f64], ys: &[bool]) -> (f64, f64) {
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    for (&s, &y) in scores.iter().zip(ys) {
        if y {
            pos.push(1.0 - s);
        } else {
            neg.push(-1.0 - s);
        }
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let mut breakpoints: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    breakpoints.sort_by(f64::total_cmp);

    // right derivative: -#{p > b} + #{q <= b}
    let right = |b: f64| {
        let above = pos.len() - pos.partition_point(|&p| p <= b);
        let below = neg.partition_point(|&q| q <= b);
        below as i64 - above as i64
    };
    // left derivative: -#{p >= b} + #{q < b}
    let left = |b: f64| {
        let above = pos.len() - pos.partition_point(|&p| p < b);
        let below = neg.partition_point(|&q| q < b);
        below as i64 - above as i64
    };

    let lo = if pos.is_empty() {
        f64::NEG_INFINITY
    } else {
        let k = breakpoints.partition_point(|&b| right(b) < 0);
        breakpoints[k.min(breakpoints.len() - 1)]
    };
    let hi = if neg.is_empty() {
        f64::INFINITY
    } else {
        let k = breakpoints.partition_point(|&b| left(b) <= 0);
        breakpoints[k.saturating_sub(1)]
    };
    (lo, hi)
}

/// Moves the bias to the middle of its optimal interval (or one margin unit
/// inside a half-bounded interval), away from the hinge kinks.
fn recentered_bias(scores: &[f64], ys: &[bool], current: f64) -> f64 {
    let (lo, hi) = optimal_bias_interval(scores, ys);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => current.max(lo + 1.0),
        (false, true) => current.min(hi - 1.0),
        (false, false) => current,
    }
}

pub fn train(xs: &[SparseVector], ys: &[bool], config: &SvmConfig) -> Result<SvmModel> {
    config.validate()?;
    check_len(xs, ys)?;
    let Some(first) = xs.first() else {
        return Err(Error::invalid("cannot train an SVM on zero samples"));
    };
    let dim = first.dimension();
    for x in xs {
        check_dim(dim, x)?;
    }

    let m = xs.len() as f64;
    let c = config.c;
    let mut w = vec![0.0; dim];
    let mut scale = 1.0;
    let mut bias = 0.0;

    let mut best = SvmModel::zeros(dim);
    let mut best_obj = best.objective_value(xs, ys, c)?;
    let mut prev_obj = best_obj;

    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let tail_start = config.max_iter / 2;
    let mut tail_sum = SvmModel::zeros(dim);
    let mut tail_len = 0usize;

    for epoch in 0..config.max_iter {
        let eta = config.schedule.step(epoch);
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &xs[i];
            let z = scale * x.dot_dense(&w) + bias;
            // d(hinge)/dz for this sample's class.
            let g = match (ys[i], z) {
                (true, z) if z < 1.0 => -1.0,
                (false, z) if z > -1.0 => 1.0,
                _ => 0.0,
            };

            let shrink = 1.0 - eta / m;
            if shrink <= 0.0 {
                w.fill(0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if g != 0.0 {
                let step = eta * c * g;
                for &(j, v) in x.entries() {
                    w[j] -= step * v / scale;
                }
                bias -= step;
            }
            if scale < MIN_SCALE {
                w.iter_mut().for_each(|wj| *wj *= scale);
                scale = 1.0;
            }
        }

        let theta: Vec<f64> = w.iter().map(|wj| wj * scale).collect();
        let scores: Vec<f64> = xs.iter().map(|x| x.dot_dense(&theta)).collect();
        bias = recentered_bias(&scores, ys, bias);
        let current = SvmModel { theta, bias };
        if epoch >= tail_start {
            for (acc, t) in tail_sum.theta.iter_mut().zip(&current.theta) {
                *acc += t;
            }
            tail_sum.bias += current.bias;
            tail_len += 1;
        }
        let obj = current.objective_value(xs, ys, c)?;
        if obj < best_obj {
            best_obj = obj;
            best = current;
        }
        if let Some(tol) = config.tolerance {
            if prev_obj - obj < tol {
                break;
            }
        }
        prev_obj = obj;
    }

    if tail_len > 1 {
        let k = tail_len as f64;
        let averaged = SvmModel {
            theta: tail_sum.theta.iter().map(|t| t / k).collect(),
            bias: tail_sum.bias / k,
        };
        if averaged.objective_value(xs, ys, c)? < best_obj {
            best = averaged;
        }
    }
    Ok(best)
}
