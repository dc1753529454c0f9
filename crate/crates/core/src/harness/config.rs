//! JSON experiment configuration. Unknown keys are rejected everywhere.
//!
//! ```json
//! {
//!   "problem": { "kind": "mlp", "hidden": [500, 500], "target": "classification",
//!                "data_dir": "../data/mnist-subset", "l2": 1e-4 },
//!   "algorithm": { "name": "sgd" },
//!   "rate": { "kind": "pls", "eta0": 0.002, "eps1": 0.01, "eps2": 0.01 },
//!   "steps": 500,
//!   "seed": 1
//! }
//! ```
//!
//! Relative `data_dir` paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dataset::load_mnist;
use crate::error::{Error, Result};
use crate::optim::{Algorithm, LearningRateSource, RunOptions};
use crate::problems::{glorot_init, FiniteSumObjective, MlpLsrProblem, QuadraticProblem, Target};
use crate::tensor::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub algorithm: Algorithm,
    pub rate: LearningRateSource,
    pub steps: usize,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::test_every")]
    pub test_every: usize,
    /// Adds elapsed milliseconds to every record. Off by default: it makes
    /// repeated runs differ.
    #[serde(default)]
    pub record_wall_clock: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub gradcheck: GradcheckConfig,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Sum of axis-aligned quadratics with the given curvatures.
    Quadratic {
        curvature: Vec<f64>,
        #[serde(default = "defaults::one")]
        samples: usize,
        /// Centers uniform in `[-spread, spread]^d`.
        #[serde(default)]
        spread: f64,
        /// Start uniform in `[-init_scale, init_scale]^d`.
        #[serde(default = "defaults::unit")]
        init_scale: f64,
    },
    /// Least-squares ReLU network on an IDX dataset directory.
    Mlp {
        hidden: Vec<usize>,
        target: TargetKind,
        data_dir: PathBuf,
        #[serde(default)]
        l2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limit: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Classification,
    Reconstruction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckConfig {
    #[serde(default = "defaults::points")]
    pub points: usize,
    /// Coordinates checked per point (stratified over parameter groups)
    /// when the problem has more.
    #[serde(default = "defaults::max_coords")]
    pub max_coords: usize,
    #[serde(default = "defaults::batch_size")]
    pub batch: usize,
    #[serde(default = "defaults::fd_step")]
    pub step: f64,
    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            points: defaults::points(),
            max_coords: defaults::max_coords(),
            batch: defaults::batch_size(),
            step: defaults::fd_step(),
            tolerance: defaults::tolerance(),
        }
    }
}

mod defaults {
    pub fn batch_size() -> usize {
        100
    }
    pub fn test_every() -> usize {
        50
    }
    pub fn one() -> usize {
        1
    }
    pub fn unit() -> f64 {
        1.0
    }
    pub fn points() -> usize {
        20
    }
    pub fn max_coords() -> usize {
        200
    }
    pub fn fd_step() -> f64 {
        crate::problems::DEFAULT_FD_STEP
    }
    pub fn tolerance() -> f64 {
        1e-4
    }
}

/// A problem instance ready to optimize.
pub struct BuiltProblem {
    pub objective: Box<dyn FiniteSumObjective>,
    pub x0: Vec<f64>,
    /// Seed for minibatch sampling.
    pub sampling_seed: u64,
    /// Draws further starting points from the problem's initializer.
    pub init: Initializer,
}

#[derive(Debug, Clone)]
pub enum Initializer {
    Uniform { dim: usize, scale: f64 },
    Glorot { sizes: Vec<usize> },
}

impl Initializer {
    pub fn draw(&self, rng: &mut SeededRng) -> Vec<f64> {
        match self {
            Initializer::Uniform { dim, scale } => (0..*dim).map(|_| rng.uniform(-scale, *scale)).collect(),
            Initializer::Glorot { sizes } => glorot_init(sizes, rng),
        }
    }
}

fn field(path: &str, e: Error) -> Error {
    Error::Config(format!("{path}: {e}"))
}

impl ExperimentConfig {
    pub fn new(problem: ProblemConfig, algorithm: Algorithm, rate: LearningRateSource, steps: usize) -> Self {
        Self {
            problem,
            algorithm,
            rate,
            steps,
            batch_size: defaults::batch_size(),
            seed: 0,
            test_every: defaults::test_every(),
            record_wall_clock: false,
            out: None,
            gradcheck: GradcheckConfig::default(),
            base_dir: None,
        }
    }

    /// Parses and validates. Relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path.parent()).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn base_dir(&self) -> Option<&Path> {
        self.base_dir.as_deref()
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size: must be positive".into()));
        }
        self.rate
            .validate(self.algorithm.allows_negative_rate())
            .map_err(|e| field("rate", e))?;
        self.algorithm.build(1).map_err(|e| field("algorithm", e))?;
        match &self.problem {
            ProblemConfig::Quadratic {
                curvature,
                samples,
                spread,
                init_scale,
            } => {
                if curvature.is_empty() || curvature.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
                    return Err(Error::Config(
                        "problem.curvature: need at least one positive, finite entry".into(),
                    ));
                }
                if *samples == 0 {
                    return Err(Error::Config("problem.samples: must be positive".into()));
                }
                if !(*spread >= 0.0) || !spread.is_finite() {
                    return Err(Error::Config("problem.spread: must be >= 0".into()));
                }
                if !(*init_scale >= 0.0) || !init_scale.is_finite() {
                    return Err(Error::Config("problem.init_scale: must be >= 0".into()));
                }
            }
            ProblemConfig::Mlp { hidden, l2, limit, .. } => {
                if hidden.contains(&0) {
                    return Err(Error::Config("problem.hidden: layer widths must be positive".into()));
                }
                if !(*l2 >= 0.0) || !l2.is_finite() {
                    return Err(Error::Config("problem.l2: must be >= 0".into()));
                }
                if *limit == Some(0) {
                    return Err(Error::Config("problem.limit: must be positive".into()));
                }
            }
        }
        let g = &self.gradcheck;
        if g.points == 0 || g.max_coords == 0 || g.batch == 0 || !(g.step > 0.0) || !(g.tolerance > 0.0) {
            return Err(Error::Config(
                "gradcheck: points, max_coords, batch, step and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn run_options(&self, sampling_seed: u64) -> RunOptions {
        RunOptions {
            steps: self.steps,
            batch_size: self.batch_size,
            seed: sampling_seed,
            test_every: self.test_every,
            record_wall_clock: self.record_wall_clock,
        }
    }

    /// Dataset directory for MLP problems, resolved.
    pub fn data_dir(&self) -> Option<PathBuf> {
        match &self.problem {
            ProblemConfig::Mlp { data_dir, .. } => Some(match &self.base_dir {
                Some(base) if data_dir.is_relative() => base.join(data_dir),
                _ => data_dir.clone(),
            }),
            ProblemConfig::Quadratic { .. } => None,
        }
    }

    /// Builds the objective and starting point. The seed fans out into
    /// independent streams for problem data, initialization and sampling;
    /// `limit` overrides the config's dataset cap.
    pub fn build(&self, limit: Option<usize>) -> Result<BuiltProblem> {
        let mut master = SeededRng::new(self.seed);
        let mut data_rng = master.fork();
        let mut init_rng = master.fork();
        let sampling_seed = master.next_u64();
        let (objective, init): (Box<dyn FiniteSumObjective>, Initializer) = match &self.problem {
            ProblemConfig::Quadratic {
                curvature,
                samples,
                spread,
                init_scale,
            } => (
                Box::new(QuadraticProblem::random(curvature, *samples, *spread, &mut data_rng)?),
                Initializer::Uniform {
                    dim: curvature.len(),
                    scale: *init_scale,
                },
            ),
            ProblemConfig::Mlp {
                hidden,
                target,
                l2,
                limit: cfg_limit,
                ..
            } => {
                let dir = self.data_dir().expect("mlp has a data dir");
                let (train, test) = load_mnist(&dir, limit.or(*cfg_limit), self.seed)?;
                let target = match target {
                    TargetKind::Classification => Target::OneHot {
                        classes: train.num_classes().unwrap_or(10),
                    },
                    TargetKind::Reconstruction => Target::Reconstruction,
                };
                let mlp = MlpLsrProblem::new(hidden, target, *l2, Arc::new(train), Some(Arc::new(test)))?;
                let sizes = mlp.layer_sizes().to_vec();
                (Box::new(mlp), Initializer::Glorot { sizes })
            }
        };
        let x0 = init.draw(&mut init_rng);
        Ok(BuiltProblem {
            objective,
            x0,
            sampling_seed,
            init,
        })
    }
}
