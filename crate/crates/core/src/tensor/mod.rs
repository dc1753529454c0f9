//! Dense numeric kernel: vector norms, 2x2 eigen and Lyapunov solvers,
//! row-major matrix products and the seeded random number generator.
//!
//! Parameter vectors are plain `[f64]` slices. Every entry is expected to be
//! finite; the checked helpers here report the first offending index so the
//! caller can turn it into a divergence signal.

mod gemm;
mod matrix2;
mod rng;

pub use gemm::{matmul, Layout};
pub use matrix2::{
    cond2, eig2x2, is_positive_definite, solve_discrete_lyapunov2, spectral_radius2, EigenPair,
    LyapunovSolution, Matrix2, PD_TOLERANCE,
};
pub use rng::SeededRng;

use crate::error::{Error, Result};

/// Euclidean norm. Fails on the first non-finite entry.
pub fn l2_norm(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::invalid("v", "norm of an empty vector"));
    }
    check_finite(v, "l2_norm")?;
    Ok(norm_unchecked(v))
}

/// `‖a − b‖₂` without materializing the difference.
pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let d = lane_sum(a.len(), |i| (a[i] - b[i]) * (a[i] - b[i])).sqrt();
    if d.is_finite() {
        Ok(d)
    } else {
        let index = a
            .iter()
            .zip(b)
            .position(|(x, y)| !(x - y).is_finite())
            .unwrap_or(0);
        Err(Error::NonFinite {
            index,
            context: "l2_distance",
        })
    }
}

pub(crate) fn norm_unchecked(v: &[f64]) -> f64 {
    sum_squares(v).sqrt()
}

pub fn sum_squares(v: &[f64]) -> f64 {
    lane_sum(v.len(), |i| v[i] * v[i])
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    lane_sum(a.len(), |i| a[i] * b[i])
}

/// `Σ f(i)` over eight independent accumulators, so long reductions are not
/// bound by the latency of a single add chain.
#[inline(always)]
fn lane_sum(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    let mut acc = [0.0f64; 8];
    let full = n / 8 * 8;
    for c in (0..full).step_by(8) {
        for (k, a) in acc.iter_mut().enumerate() {
            *a += f(c + k);
        }
    }
    for i in full..n {
        acc[0] += f(i);
    }
    acc.iter().sum()
}

/// Returns the index of the first NaN/Inf entry as an error.
pub fn check_finite(v: &[f64], context: &'static str) -> Result<()> {
    // x·0 is 0 for finite x and NaN otherwise; scan for the index only then.
    if lane_sum(v.len(), |i| v[i] * 0.0) == 0.0 {
        return Ok(());
    }
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index, context }),
        None => Ok(()),
    }
}
