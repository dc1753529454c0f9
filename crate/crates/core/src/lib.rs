//! Adaptive step sizes from predictive local smoothness (PLS) for SGD,
//! AMSGrad and AccSGD, stability certificates for the linearized updates,
//! and an experiment harness.
//!
//! ```
//! use pls_lab::optim::{run_optimizer, Algorithm, LearningRateSource, RunOptions};
//! use pls_lab::problems::QuadraticProblem;
//!
//! let problem = QuadraticProblem::isotropic(4, 2.0);
//! let opts = RunOptions { steps: 20, ..Default::default() };
//! let lr = LearningRateSource::pls(0.5, 1e-8);
//! let run = run_optimizer(&problem, &[1.0; 4], &Algorithm::Sgd, &lr, &opts).unwrap();
//! assert!(run.final_x.iter().all(|v| v.abs() < 1e-4));
//! ```

pub mod error;
pub mod harness;
pub mod optim;
pub mod pls;
pub mod problems;
pub mod stability;
pub mod tensor;

pub use error::{Error, Result};
