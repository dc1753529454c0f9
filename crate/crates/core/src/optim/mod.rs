//! SGD, AMSGrad and AccSGD step rules behind one interface, and the rate
//! sources that drive them. A PLS variant is the base rule driven by a
//! [`LearningRateSource::Pls`] source; nothing else differs.

mod accsgd;
mod amsgrad;
mod run;
mod sgd;

use serde::{Deserialize, Serialize};

pub use accsgd::{AccsgdCoefficients, AccsgdState, MomentumInit};
pub use amsgrad::{AmsgradState, Beta1Schedule, VHAT_FLOOR};
pub use run::{run_optimizer, RunOptions, TrainRecord, Trajectory, DIVERGENCE_LOSS};
pub use sgd::{sgd_step, Sgd};

use crate::error::{Error, Result};
use crate::pls::{DecayMode, PlsConfig};
use crate::problems::ParamGroup;

/// One parameter update. `rates[k]` is the step size for `groups[k]` and
/// scales only that group's coordinates.
pub trait StepRule: Send {
    fn step(&mut self, x: &mut [f64], g: &[f64], groups: &[ParamGroup], rates: &[f64]) -> Result<()>;
}

/// Where `η_t` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearningRateSource {
    /// Constant `η`.
    Fixed { eta: f64 },
    /// `η₀ / √t`.
    FixedDecay { eta0: f64 },
    /// Predictive local smoothness, one estimator per parameter group unless
    /// `global` is set.
    Pls {
        eta0: f64,
        eps1: f64,
        eps2: f64,
        #[serde(default)]
        decay: DecayMode,
        #[serde(default)]
        global: bool,
    },
}

impl LearningRateSource {
    pub fn pls(eta0: f64, eps: f64) -> Self {
        Self::from_pls(PlsConfig::new(eta0, eps), false)
    }

    pub fn from_pls(config: PlsConfig, global: bool) -> Self {
        LearningRateSource::Pls {
            eta0: config.eta0,
            eps1: config.eps1,
            eps2: config.eps2,
            decay: config.decay,
            global,
        }
    }

    /// The predictor settings, for the PLS source.
    pub fn pls_config(&self) -> Option<PlsConfig> {
        match *self {
            LearningRateSource::Pls {
                eta0,
                eps1,
                eps2,
                decay,
                ..
            } => Some(PlsConfig {
                eta0,
                eps1,
                eps2,
                decay,
            }),
            _ => None,
        }
    }

    pub fn is_pls(&self) -> bool {
        matches!(self, LearningRateSource::Pls { .. })
    }

    /// The base rate (`η` or `η₀`).
    pub fn base_rate(&self) -> f64 {
        match self {
            LearningRateSource::Fixed { eta } => *eta,
            LearningRateSource::FixedDecay { eta0 } => *eta0,
            LearningRateSource::Pls { eta0, .. } => *eta0,
        }
    }

    pub fn validate(&self, allow_negative: bool) -> Result<()> {
        if let Some(config) = self.pls_config() {
            config.validate()?;
        }
        let rate = self.base_rate();
        if !rate.is_finite() || rate == 0.0 || (rate < 0.0 && !allow_negative) {
            return Err(Error::invalid(
                "rate",
                format!("learning rate must be finite and positive, got {rate}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Algorithm {
    Sgd,
    Amsgrad {
        #[serde(default = "defaults::beta1")]
        beta1: f64,
        #[serde(default = "defaults::beta2")]
        beta2: f64,
        #[serde(default)]
        beta1_schedule: Beta1Schedule,
    },
    Accsgd {
        #[serde(default = "defaults::kappa")]
        kappa: f64,
        #[serde(default = "defaults::xi")]
        xi: f64,
        #[serde(default)]
        momentum_init: MomentumInit,
        /// Permit a negative base rate (the AccSGD stability window can
        /// extend below zero).
        #[serde(default)]
        allow_negative_rate: bool,
    },
}

mod defaults {
    pub fn beta1() -> f64 {
        0.9
    }
    pub fn beta2() -> f64 {
        0.999
    }
    pub fn kappa() -> f64 {
        1000.0
    }
    pub fn xi() -> f64 {
        10.0
    }
}

impl Algorithm {
    pub fn amsgrad() -> Self {
        Algorithm::Amsgrad {
            beta1: defaults::beta1(),
            beta2: defaults::beta2(),
            beta1_schedule: Beta1Schedule::Constant,
        }
    }

    pub fn accsgd() -> Self {
        Algorithm::Accsgd {
            kappa: defaults::kappa(),
            xi: defaults::xi(),
            momentum_init: MomentumInit::Iterate,
            allow_negative_rate: false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Amsgrad { .. } => "amsgrad",
            Algorithm::Accsgd { .. } => "accsgd",
        }
    }

    pub fn allows_negative_rate(&self) -> bool {
        matches!(
            self,
            Algorithm::Accsgd {
                allow_negative_rate: true,
                ..
            }
        )
    }

    /// Fresh optimizer state for a `dim`-dimensional parameter vector.
    pub fn build(&self, dim: usize) -> Result<Box<dyn StepRule>> {
        Ok(match *self {
            Algorithm::Sgd => Box::new(Sgd),
            Algorithm::Amsgrad {
                beta1,
                beta2,
                beta1_schedule,
            } => Box::new(AmsgradState::new(dim, beta1, beta2, beta1_schedule)?),
            Algorithm::Accsgd {
                kappa,
                xi,
                momentum_init,
                ..
            } => Box::new(AccsgdState::new(AccsgdCoefficients::new(kappa, xi)?, momentum_init)),
        })
    }
}

pub(crate) fn check_rates(x: &[f64], g: &[f64], groups: &[ParamGroup], rates: &[f64]) -> Result<()> {
    if x.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: g.len(),
        });
    }
    if groups.len() != rates.len() {
        return Err(Error::DimensionMismatch {
            expected: groups.len(),
            actual: rates.len(),
        });
    }
    if let Some(gr) = groups.iter().find(|gr| gr.range.end > x.len()) {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: gr.range.end,
        });
    }
    Ok(())
}
