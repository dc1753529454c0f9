use serde::{Deserialize, Serialize};

use super::{check_rates, StepRule};
use crate::error::{Error, Result};
use crate::problems::ParamGroup;
use crate::tensor::check_finite;

/// The AccSGD mixing constant.
const C: f64 = 0.7;

/// Initial value of the auxiliary sequence `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumInit {
    /// `m₀ = x₀`.
    #[default]
    Iterate,
    Zero,
}

/// `α = 1 − 0.49 ξ/κ`, `a = κ/0.7`, `b = (1 − α)/(0.7 + 1 − α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccsgdCoefficients {
    pub kappa: f64,
    pub xi: f64,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl AccsgdCoefficients {
    /// Requires `κ ≥ 1` and `0 < ξ ≤ √κ`.
    pub fn new(kappa: f64, xi: f64) -> Result<Self> {
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(Error::invalid("kappa", format!("must be at least 1, got {kappa}")));
        }
        if !(xi > 0.0 && xi <= kappa.sqrt()) {
            return Err(Error::invalid(
                "xi",
                format!("must lie in (0, sqrt(kappa)] = (0, {}], got {xi}", kappa.sqrt()),
            ));
        }
        let alpha = 1.0 - 0.49 * xi / kappa;
        Ok(Self::from_alpha(alpha, kappa, xi))
    }

    /// Coefficients from an explicit `α`; used to examine limits outside
    /// the `(κ, ξ)` parameterisation, e.g. `α = 0`.
    pub fn from_alpha(alpha: f64, kappa: f64, xi: f64) -> Self {
        Self {
            kappa,
            xi,
            alpha,
            a: kappa / C,
            b: (1.0 - alpha) / (C + 1.0 - alpha),
        }
    }

    /// Weight on the gradient step in the iterate update, `0.7/(0.7 + 1 − α)`.
    pub fn gradient_weight(&self) -> f64 {
        C / (C + 1.0 - self.alpha)
    }
}

#[derive(Debug, Clone)]
pub struct AccsgdState {
    coeffs: AccsgdCoefficients,
    init: MomentumInit,
    m: Option<Vec<f64>>,
    t: u64,
}

impl AccsgdState {
    pub fn new(coeffs: AccsgdCoefficients, init: MomentumInit) -> Self {
        Self {
            coeffs,
            init,
            m: None,
            t: 0,
        }
    }

    pub fn coefficients(&self) -> &AccsgdCoefficients {
        &self.coeffs
    }

    pub fn momentum(&self) -> Option<&[f64]> {
        self.m.as_deref()
    }

    pub fn iterations(&self) -> u64 {
        self.t
    }

    pub fn step_uniform(&mut self, x: &mut [f64], g: &[f64], eta: f64) -> Result<()> {
        let group = [ParamGroup::new("x", 0..x.len())];
        self.step(x, g, &group, &[eta])
    }
}

impl StepRule for AccsgdState {
    fn step(&mut self, x: &mut [f64], g: &[f64], groups: &[ParamGroup], rates: &[f64]) -> Result<()> {
        check_rates(x, g, groups, rates)?;
        check_finite(g, "accsgd gradient")?;
        let init = self.init;
        let m = self.m.get_or_insert_with(|| match init {
            MomentumInit::Iterate => x.to_vec(),
            MomentumInit::Zero => vec![0.0; x.len()],
        });
        if m.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: m.len(),
                actual: x.len(),
            });
        }
        self.t += 1;
        let AccsgdCoefficients { alpha, a, b, .. } = self.coeffs;
        let w = self.coeffs.gradient_weight();
        for (group, &eta) in groups.iter().zip(rates) {
            for i in group.range.clone() {
                m[i] = alpha * m[i] + (1.0 - alpha) * (x[i] - a * eta * g[i]);
                x[i] = w * (x[i] - eta * g[i]) + b * m[i];
            }
        }
        check_finite(x, "accsgd update")
    }
}
