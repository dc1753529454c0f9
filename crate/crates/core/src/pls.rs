//! Predictive local smoothness.
//!
//! Each parameter group keeps its previous iterate and gradient. At step `t`
//! the local Lipschitz constant is predicted from the two most recent
//! (iterate, gradient) pairs,
//!
//! ```text
//! L_t = ‖g_t − g_{t−1}‖ / (‖x_t − x_{t−1}‖ + ε₁)
//! ```
//!
//! and the step size is set inversely to it: `η_t = η₀ / (L_t + ε₂)`, or
//! `η₀ / (√t (L_t + ε₂))` with the decaying schedule. `ε₁` guards the
//! denominator against a stalled iterate; `ε₂` caps the rate at `η₀ / ε₂`.
//!
//! The first call has no history: it records `(x, g)` and returns `L = 0`
//! with the base rate `η₀` (clamped to the `η₀ / ε₂` cap).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{check_finite, l2_distance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    #[default]
    Constant,
    InverseSqrtT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlsConfig {
    pub eta0: f64,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default)]
    pub decay: DecayMode,
}

impl PlsConfig {
    pub fn new(eta0: f64, eps: f64) -> Self {
        Self {
            eta0,
            eps1: eps,
            eps2: eps,
            decay: DecayMode::Constant,
        }
    }

    pub fn with_decay(mut self, decay: DecayMode) -> Self {
        self.decay = decay;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eta0.is_finite() || self.eta0 == 0.0 {
            return Err(Error::invalid("eta0", format!("must be finite and non-zero, got {}", self.eta0)));
        }
        for (name, v) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Step size for a predicted smoothness `l_hat` at iteration `t >= 1`.
    pub fn rate(&self, l_hat: f64, t: u64) -> f64 {
        adaptive_rate(self, l_hat, t)
    }
}

/// `η₀ / (L + ε₂)`, divided by `√t` in the decaying schedule.
pub fn adaptive_rate(config: &PlsConfig, l_hat: f64, t: u64) -> f64 {
    let base = config.eta0 / (l_hat + config.eps2);
    match config.decay {
        DecayMode::Constant => base,
        DecayMode::InverseSqrtT => base / (t.max(1) as f64).sqrt(),
    }
}

/// Whether `η₀` lies in the admissible window `1 − ρ ≤ η₀ ≤ 1` for PLS-SGD
/// to contract at rate `ρ` under `η_t = η₀ / L`.
pub fn theorem1_rate_bound(eta0: f64, rho: f64) -> Result<bool> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("rho", format!("must lie in (0, 1), got {rho}")));
    }
    Ok(1.0 - rho <= eta0 && eta0 <= 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReading {
    pub group_id: usize,
    /// Iteration counter after this update (1 on the bootstrap call).
    pub t: u64,
    pub l_hat: f64,
    pub eta: f64,
    pub bootstrap: bool,
}

/// Per-group predictor state.
#[derive(Debug, Clone)]
pub struct SmoothnessEstimator {
    group_id: usize,
    config: PlsConfig,
    history: Option<(Vec<f64>, Vec<f64>)>,
    t: u64,
    fixed_smoothness: Option<f64>,
}

impl SmoothnessEstimator {
    pub fn new(group_id: usize, config: PlsConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            group_id,
            config,
            history: None,
            t: 0,
            fixed_smoothness: None,
        })
    }

    /// Replace the prediction with a constant. The estimator then behaves as
    /// a fixed step size `η₀ / (L + ε₂)` from the first call on.
    pub fn with_fixed_smoothness(mut self, l: f64) -> Self {
        self.fixed_smoothness = Some(l);
        self
    }

    pub fn config(&self) -> &PlsConfig {
        &self.config
    }

    pub fn iterations(&self) -> u64 {
        self.t
    }

    pub fn predict(&mut self, x: &[f64], g: &[f64]) -> Result<SmoothnessReading> {
        if x.len() != g.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: g.len(),
            });
        }
        let previous = self.history.take();
        if let Some((px, _)) = &previous {
            if px.len() != x.len() {
                let expected = px.len();
                self.history = previous;
                return Err(Error::DimensionMismatch {
                    expected,
                    actual: x.len(),
                });
            }
        }
        // One pass over the four vectors for the distances and the finite
        // check; the precise index is only located on the slow path.
        let sums = match &previous {
            Some((px, pg)) => distance_sums(x, px, g, pg),
            None => distance_sums(x, x, g, g),
        };
        let (dx, dg) = match sums {
            Some(d) => d,
            None => {
                let checked = check_finite(x, "pls iterate")
                    .and_then(|_| check_finite(g, "pls gradient"))
                    .and_then(|_| match &previous {
                        Some((px, pg)) => Ok((l2_distance(x, px)?, l2_distance(g, pg)?)),
                        None => Ok((0.0, 0.0)),
                    });
                match checked {
                    Ok(d) => d,
                    Err(e) => {
                        self.history = previous;
                        return Err(e);
                    }
                }
            }
        };
        self.t += 1;
        let reading = match (self.fixed_smoothness, &previous) {
            (Some(l), _) => self.reading(l, false),
            (None, None) => SmoothnessReading {
                group_id: self.group_id,
                t: self.t,
                l_hat: 0.0,
                eta: self.config.eta0 / self.config.eps2.max(1.0),
                bootstrap: true,
            },
            (None, Some(_)) => self.reading(dg / (dx + self.config.eps1), false),
        };
        // Reuse the old buffers for the new history.
        let (mut hx, mut hg) = previous.unwrap_or_default();
        hx.clear();
        hx.extend_from_slice(x);
        hg.clear();
        hg.extend_from_slice(g);
        self.history = Some((hx, hg));
        Ok(reading)
    }

    fn reading(&self, l_hat: f64, bootstrap: bool) -> SmoothnessReading {
        SmoothnessReading {
            group_id: self.group_id,
            t: self.t,
            l_hat,
            eta: self.config.rate(l_hat, self.t),
            bootstrap,
        }
    }
}

/// `(‖x − px‖, ‖g − pg‖)` when every entry of `x` and `g` is finite and no
/// square overflows; `None` otherwise. With `px = x` it is a plain finite
/// check of `x` and `g`.
fn distance_sums(x: &[f64], px: &[f64], g: &[f64], pg: &[f64]) -> Option<(f64, f64)> {
    const LANES: usize = 8;
    let (mut sx, mut sg, mut probe) = ([0.0f64; LANES], [0.0f64; LANES], [0.0f64; LANES]);
    let n = x.len() / LANES * LANES;
    for c in (0..n).step_by(LANES) {
        for k in 0..LANES {
            let i = c + k;
            let (dx, dg) = (x[i] - px[i], g[i] - pg[i]);
            sx[k] += dx * dx;
            sg[k] += dg * dg;
            // Inf·0 and NaN·0 are NaN, so this stays 0 only for finite entries.
            probe[k] += x[i] * 0.0 + g[i] * 0.0;
        }
    }
    for i in n..x.len() {
        let (dx, dg) = (x[i] - px[i], g[i] - pg[i]);
        sx[0] += dx * dx;
        sg[0] += dg * dg;
        probe[0] += x[i] * 0.0 + g[i] * 0.0;
    }
    let (sx, sg, probe): (f64, f64, f64) = (sx.iter().sum(), sg.iter().sum(), probe.iter().sum());
    (sx.is_finite() && sg.is_finite() && probe == 0.0).then(|| (sx.sqrt(), sg.sqrt()))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn estimator(eps1: f64, eps2: f64) -> SmoothnessEstimator {
        SmoothnessEstimator::new(
            0,
            PlsConfig {
                eta0: 0.001,
                eps1,
                eps2,
                decay: DecayMode::Constant,
            },
        )
        .unwrap()
    }

    #[test]
    fn bootstrap_then_norm_ratio() {
        let mut est = estimator(1e-300, 0.01);
        let first = est.predict(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(first.bootstrap);
        assert_eq!(first.l_hat, 0.0);
        assert_eq!(first.eta, 0.001);
        let second = est.predict(&[1.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!(!second.bootstrap);
        assert_eq!(second.l_hat, 5.0);
        assert_eq!(second.t, 2);
    }

    #[test]
    fn stationary_point_predicts_zero() {
        let mut est = estimator(0.01, 0.01);
        est.predict(&[1.0, 2.0], &[0.5, 0.5]).unwrap();
        let r = est.predict(&[1.0, 2.0], &[0.5, 0.5]).unwrap();
        assert_eq!(r.l_hat, 0.0);
        assert_eq!(r.eta, 0.1);
    }

    #[test]
    fn scalar_quadratic_recovers_curvature() {
        // f = x², gradient 2x; x: 1 → 0.9.
        let mut est = estimator(1e-8, 0.01);
        est.predict(&[1.0], &[2.0]).unwrap();
        let r = est.predict(&[0.9], &[1.8]).unwrap();
        let oracle = 0.2 / (0.1 + 1e-8);
        assert!((r.l_hat - oracle).abs() < 1e-12);
        assert!((r.l_hat - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rate_examples() {
        let cfg = PlsConfig::new(0.001, 0.01);
        assert!((adaptive_rate(&cfg, 0.0, 1) - 0.1).abs() < 1e-15);
        assert!((adaptive_rate(&cfg, 1.99, 1) - 0.0005).abs() < 1e-15);
        let decay = PlsConfig {
            eta0: 0.01,
            eps1: 0.1,
            eps2: 0.1,
            decay: DecayMode::InverseSqrtT,
        };
        assert!((adaptive_rate(&decay, 0.9, 4) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn theorem1_window() {
        assert!(theorem1_rate_bound(0.75, 0.5).unwrap());
        assert!(!theorem1_rate_bound(0.25, 0.5).unwrap());
        assert!(theorem1_rate_bound(1.0, 0.9).unwrap());
        assert!(theorem1_rate_bound(0.5, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SmoothnessEstimator::new(0, PlsConfig::new(0.1, 0.0)).is_err());
        let mut est = estimator(0.01, 0.01);
        assert!(est.predict(&[1.0], &[1.0, 2.0]).is_err());
        est.predict(&[1.0], &[1.0]).unwrap();
        assert!(matches!(
            est.predict(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            est.predict(&[1.0], &[f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
        // The failed calls leave the history and counter intact.
        assert_eq!(est.iterations(), 1);
        assert!(!est.predict(&[1.0], &[1.0]).unwrap().bootstrap);
    }

    #[test]
    fn isotropic_quadratic_exactness() {
        for c in [0.1, 1.0, 10.0] {
            for eps1 in [0.0, 1e-8, 1e-3] {
                let mut est = SmoothnessEstimator::new(
                    0,
                    PlsConfig {
                        eta0: 0.5,
                        eps1: if eps1 == 0.0 { f64::MIN_POSITIVE } else { eps1 },
                        eps2: 0.01,
                        decay: DecayMode::Constant,
                    },
                )
                .unwrap();
                let x0 = [0.3, -1.2, 2.0];
                let x1 = [0.1, -0.7, 1.1];
                let g = |x: &[f64; 3]| x.map(|v| c * v);
                est.predict(&x0, &g(&x0)).unwrap();
                let r = est.predict(&x1, &g(&x1)).unwrap();
                let dist = l2_distance(&x0, &x1).unwrap();
                let expect = c * dist / (dist + eps1);
                assert!((r.l_hat - expect).abs() < 1e-12, "c={c} eps1={eps1}");
            }
        }
    }

    proptest! {
        #[test]
        fn rate_is_non_increasing_and_capped(
            eta0 in 1e-4f64..1.0,
            eps2 in 1e-4f64..1.0,
            l1 in 0.0f64..100.0,
            dl in 0.0f64..100.0,
            t in 1u64..10_000,
        ) {
            for decay in [DecayMode::Constant, DecayMode::InverseSqrtT] {
                let cfg = PlsConfig { eta0, eps1: 0.01, eps2, decay };
                let lo = adaptive_rate(&cfg, l1, t);
                let hi = adaptive_rate(&cfg, l1 + dl, t);
                prop_assert!(hi <= lo);
                prop_assert!(lo <= eta0 / eps2);
            }
        }

        #[test]
        fn scale_covariance(
            s in 1e-3f64..1e3,
            x0 in prop::collection::vec(-5.0f64..5.0, 4),
            step in prop::collection::vec(-1.0f64..1.0, 4),
            g0 in prop::collection::vec(-5.0f64..5.0, 4),
            dg in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let x1: Vec<f64> = x0.iter().zip(&step).map(|(a, b)| a + b).collect();
            let g1: Vec<f64> = g0.iter().zip(&dg).map(|(a, b)| a + b).collect();
            prop_assume!(l2_distance(&x0, &x1).unwrap() > 1e-3);
            let cfg = PlsConfig { eta0: 0.1, eps1: f64::MIN_POSITIVE, eps2: 0.01, decay: DecayMode::Constant };
            let predict = |scale: f64| {
                let mut est = SmoothnessEstimator::new(0, cfg).unwrap();
                let sc = |v: &[f64]| v.iter().map(|a| a * scale).collect::<Vec<_>>();
                est.predict(&sc(&x0), &sc(&g0)).unwrap();
                est.predict(&sc(&x1), &sc(&g1)).unwrap().l_hat
            };
            let base = predict(1.0);
            prop_assert!((predict(s) - base).abs() <= 1e-9 * base.max(1.0));
        }
    }
}
