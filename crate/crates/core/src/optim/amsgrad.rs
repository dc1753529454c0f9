use serde::{Deserialize, Serialize};

use super::{check_rates, StepRule};
use crate::error::{Error, Result};
use crate::problems::ParamGroup;
use crate::tensor::check_finite;

/// Floor on `√v̂` in the denominator.
pub const VHAT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Beta1Schedule {
    #[default]
    Constant,
    /// `β₁ / t`.
    InverseT,
}

/// AMSGrad moments. `v̂` never decreases.
#[derive(Debug, Clone)]
pub struct AmsgradState {
    beta1: f64,
    beta2: f64,
    schedule: Beta1Schedule,
    m: Vec<f64>,
    v: Vec<f64>,
    vhat: Vec<f64>,
    t: u64,
}

impl AmsgradState {
    pub fn new(dim: usize, beta1: f64, beta2: f64, schedule: Beta1Schedule) -> Result<Self> {
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid(name, format!("must lie in [0, 1), got {b}")));
            }
        }
        Ok(Self {
            beta1,
            beta2,
            schedule,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            vhat: vec![0.0; dim],
            t: 0,
        })
    }

    pub fn iterations(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    pub fn vhat(&self) -> &[f64] {
        &self.vhat
    }

    /// `√v̂` per coordinate with the floor applied, as used by the update.
    pub fn sqrt_vhat(&self) -> Vec<f64> {
        self.vhat.iter().map(|v| v.sqrt().max(VHAT_FLOOR)).collect()
    }

    fn current_beta1(&self) -> f64 {
        match self.schedule {
            Beta1Schedule::Constant => self.beta1,
            Beta1Schedule::InverseT => self.beta1 / self.t.max(1) as f64,
        }
    }

    /// One step with a single rate for every coordinate.
    pub fn step_uniform(&mut self, x: &mut [f64], g: &[f64], eta: f64) -> Result<()> {
        let group = [ParamGroup::new("x", 0..x.len())];
        self.step(x, g, &group, &[eta])
    }
}

impl StepRule for AmsgradState {
    fn step(&mut self, x: &mut [f64], g: &[f64], groups: &[ParamGroup], rates: &[f64]) -> Result<()> {
        check_rates(x, g, groups, rates)?;
        if x.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                expected: self.m.len(),
                actual: x.len(),
            });
        }
        check_finite(g, "amsgrad gradient")?;
        self.t += 1;
        let b1 = self.current_beta1();
        let b2 = self.beta2;
        for (group, &eta) in groups.iter().zip(rates) {
            for i in group.range.clone() {
                let gi = g[i];
                self.m[i] = b1 * self.m[i] + (1.0 - b1) * gi;
                self.v[i] = b2 * self.v[i] + (1.0 - b2) * gi * gi;
                self.vhat[i] = self.vhat[i].max(self.v[i]);
                x[i] -= eta * self.m[i] / self.vhat[i].sqrt().max(VHAT_FLOOR);
            }
        }
        check_finite(x, "amsgrad update")
    }
}
