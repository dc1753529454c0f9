//! Finite-sum objectives `f(x) = (1/n) Σ f_i(x)` with analytic minibatch
//! gradients, and a central-difference gradient oracle.

mod finite_diff;
mod init;
mod mlp;
mod quadratic;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use finite_diff::{central_diffs_with_kinks, finite_diff_coords, CentralDiff, finite_diff_grad, one_sided_diffs, OneSided, DEFAULT_FD_STEP};
pub use init::{glorot_bound, glorot_init};
pub use mlp::{MlpLsrProblem, Target};
pub use quadratic::{exact_smoothness, QuadraticProblem};

use crate::error::{Error, Result};

/// A named, contiguous slice of the parameter vector (one network layer, or
/// the whole vector for single-group problems).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub name: String,
    pub range: Range<usize>,
}

impl ParamGroup {
    pub fn new(name: impl Into<String>, range: Range<usize>) -> Self {
        Self {
            name: name.into(),
            range,
        }
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

/// Loss over a batch. `total` is the optimized objective (data term plus any
/// regularizer); `data` excludes the regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loss {
    pub data: f64,
    pub total: f64,
}

impl Loss {
    pub fn unregularized(value: f64) -> Self {
        Self {
            data: value,
            total: value,
        }
    }
}

pub trait FiniteSumObjective: Send + Sync {
    /// Number of samples `n`.
    fn num_samples(&self) -> usize;

    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    /// Disjoint groups covering `[0, d)` in order.
    fn groups(&self) -> Vec<ParamGroup>;

    /// Mean loss over `batch`; when `grad` is given it receives the mean
    /// gradient over the same batch.
    fn evaluate(&self, x: &[f64], batch: &[usize], grad: Option<&mut [f64]>) -> Result<Loss>;

    /// Loss on held-out data, when the problem has any.
    fn held_out_loss(&self, _x: &[f64]) -> Option<Result<Loss>> {
        None
    }

    /// Objective value together with a fingerprint of the piecewise-smooth
    /// region `x` lies in (the ReLU activation pattern for networks).
    /// Smooth problems return `None` for the fingerprint.
    fn value_with_pattern(&self, x: &[f64], batch: &[usize]) -> Result<(f64, Option<Vec<bool>>)> {
        Ok((self.evaluate(x, batch, None)?.total, None))
    }

    fn full_batch(&self) -> Vec<usize> {
        (0..self.num_samples()).collect()
    }

    fn full_value(&self, x: &[f64]) -> Result<Loss> {
        self.evaluate(x, &self.full_batch(), None)
    }
}

/// Mean gradient of the objective over `batch`.
pub fn minibatch_grad(obj: &dyn FiniteSumObjective, x: &[f64], batch: &[usize]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; obj.dim()];
    obj.evaluate(x, batch, Some(&mut g))?;
    Ok(g)
}

pub(crate) fn validate_batch(batch: &[usize], n: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    match batch.iter().find(|&&i| i >= n) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len: n }),
        None => Ok(()),
    }
}

pub(crate) fn validate_point(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x.len(),
        });
    }
    Ok(())
}
