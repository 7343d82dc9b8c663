//! The beta kernel density estimator: f̂_b(t) = (1/n) Σ_k K_{t,b}(X_k).
//!
//! Evaluation is exact summation — the kernel family is not translation
//! invariant, so binning/FFT tricks do not apply. Grid evaluation
//! parallelizes over nodes; each node keeps a fixed summation order, so
//! results do not depend on the worker count.

use crate::specfun::log_beta_unchecked;
use crate::{Error, Result};
use rayon::prelude::*;

/// An observed sample; every point lies in [0,1] and order is preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    points: Vec<f64>,
}

impl Sample {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        for &x in &points {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                return Err(Error::SampleRange(x));
            }
        }
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// A fitted estimator: the sample plus a bandwidth b ∈ (0,1).
///
/// Log-transforms of the sample are precomputed at fit time; the per-point
/// kernel weight is then a single fused multiply-add and exp per evaluation.
#[derive(Debug, Clone)]
pub struct EstimatorFit {
    sample: Sample,
    b: f64,
    ln_x: Vec<f64>,
    ln_1mx: Vec<f64>,
}

impl EstimatorFit {
    pub fn new(sample: Sample, b: f64) -> Result<Self> {
        if !b.is_finite() || b <= 0.0 || b >= 1.0 {
            return Err(Error::Bandwidth(b));
        }
        let ln_x = sample.points.iter().map(|&x| x.ln()).collect();
        let ln_1mx = sample.points.iter().map(|&x| (-x).ln_1p()).collect();
        Ok(Self { sample, b, ln_x, ln_1mx })
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// f̂_b(t) for t ∈ [0,1].
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("estimator argument must lie in [0,1], got {t}")));
        }
        Ok(self.evaluate_unchecked(t))
    }

    pub(crate) fn evaluate_unchecked(&self, t: f64) -> f64 {
        let a = t / self.b;
        let c = (1.0 - t) / self.b;
        let ln_b = log_beta_unchecked(a + 1.0, c + 1.0);
        let mut acc = 0.0;
        // hoist the zero-exponent endpoint cases out of the hot loop; a zero
        // exponent must contribute nothing even when ln(x) = -inf
        if a == 0.0 {
            for &l1 in &self.ln_1mx {
                acc += (c * l1 - ln_b).exp();
            }
        } else if c == 0.0 {
            for &lx in &self.ln_x {
                acc += (a * lx - ln_b).exp();
            }
        } else {
            for (&lx, &l1) in self.ln_x.iter().zip(&self.ln_1mx) {
                acc += (a * lx + c * l1 - ln_b).exp();
            }
        }
        acc / self.sample.n() as f64
    }

    /// Pointwise evaluation on a sorted grid in [0,1]; exact O(n·G), nodes
    /// evaluated in parallel with deterministic per-node summation.
    pub fn evaluate_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let sorted = grid.windows(2).all(|w| w[0] <= w[1]);
        let in_range = grid.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x));
        if !sorted || !in_range {
            return Err(Error::Grid);
        }
        Ok(grid.par_iter().map(|&t| self.evaluate_unchecked(t)).collect())
    }
}

/// Fit an estimator; alias of `EstimatorFit::new`.
pub fn fit(sample: Sample, b: f64) -> Result<EstimatorFit> {
    EstimatorFit::new(sample, b)
}

/// Bandwidth rule b = c·n^{-2/(2β+1)}; errors when the result leaves (0,1).
pub fn theoretical_bandwidth(n: usize, beta: f64, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if !(beta > 0.0 && beta.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!(
            "bandwidth rule needs positive finite beta and c, got ({beta}, {c})"
        )));
    }
    let b = c * (n as f64).powf(-2.0 / (2.0 * beta + 1.0));
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::BandwidthRule { b, n });
    }
    Ok(b)
}
