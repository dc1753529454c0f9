//! The training loop shared by every optimizer/rate-source pairing.
//!
//! Rows of the trajectory:
//! - row 0 is the starting point: full-objective loss and held-out loss at
//!   `x₀`, no rates;
//! - row `t ≥ 1` describes step `t`: the minibatch loss at `x_{t−1}` (the
//!   loss whose gradient drove the step), the per-group rates and smoothness
//!   predictions used, and the held-out loss at `x_t` on test iterations.

use std::time::Instant;

use serde::Serialize;

use super::{Algorithm, LearningRateSource};
use crate::error::{Error, Result};
use crate::pls::SmoothnessEstimator;
use crate::problems::FiniteSumObjective;
use crate::tensor::{check_finite, SeededRng};

/// Loss above which a run counts as diverged.
pub const DIVERGENCE_LOSS: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub steps: usize,
    /// Minibatch size; values `>= n` mean full-batch steps.
    pub batch_size: usize,
    /// Seed for minibatch sampling.
    pub seed: u64,
    /// Held-out loss every this many steps (and on the last step); 0 never.
    pub test_every: usize,
    pub record_wall_clock: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            steps: 100,
            batch_size: 100,
            seed: 0,
            test_every: 50,
            record_wall_clock: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainRecord {
    pub iter: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    /// Step size per group (empty on row 0).
    pub lr: Vec<f64>,
    /// Predicted smoothness per group, PLS sources only.
    pub l_hat: Option<Vec<f64>>,
    pub wall_ms: Option<f64>,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrainRecord>,
    pub final_x: Vec<f64>,
    /// Step at which the run halted on divergence.
    pub diverged_at: Option<usize>,
    /// Reason for the halt.
    pub divergence: Option<String>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    /// Minibatch losses of rows `1..`.
    pub fn train_losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().skip(1).map(|r| r.train_loss)
    }

    /// `(iter, loss)` for every row with a held-out loss.
    pub fn test_losses(&self) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.test_loss.map(|l| (r.iter, l)))
            .collect()
    }
}

enum Rates {
    Fixed(f64),
    Decay(f64),
    Pls(Vec<SmoothnessEstimator>, bool),
}

/// Runs `steps` iterations from `x0`. Divergence (loss above
/// [`DIVERGENCE_LOSS`], or any non-finite loss, gradient or parameter) halts
/// the run with a flagged final row instead of an error; configuration
/// problems are errors.
pub fn run_optimizer(
    obj: &dyn FiniteSumObjective,
    x0: &[f64],
    algorithm: &Algorithm,
    lr: &LearningRateSource,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let d = obj.dim();
    if x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x0.len(),
        });
    }
    lr.validate(algorithm.allows_negative_rate())?;
    if opts.batch_size == 0 {
        return Err(Error::invalid("batch_size", "must be positive"));
    }
    let groups = obj.groups();
    let mut rule = algorithm.build(d)?;
    let mut rates = match *lr {
        LearningRateSource::Fixed { eta } => Rates::Fixed(eta),
        LearningRateSource::FixedDecay { eta0 } => Rates::Decay(eta0),
        LearningRateSource::Pls { global, .. } => {
            let config = lr.pls_config().expect("pls source");
            let count = if global { 1 } else { groups.len() };
            let ests = (0..count)
                .map(|k| SmoothnessEstimator::new(k, config))
                .collect::<Result<Vec<_>>>()?;
            Rates::Pls(ests, global)
        }
    };

    let start = Instant::now();
    let clock = |on: bool| on.then(|| start.elapsed().as_secs_f64() * 1e3);
    let n = obj.num_samples();
    let mut rng = SeededRng::new(opts.seed);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut step_rates = vec![0.0; groups.len()];
    let held_out = |x: &[f64]| obj.held_out_loss(x).transpose().map(|l| l.map(|l| l.total));

    let initial = obj.full_value(&x)?.total;
    let mut records = vec![TrainRecord {
        iter: 0,
        train_loss: initial,
        test_loss: if opts.test_every > 0 { held_out(&x)? } else { None },
        lr: Vec::new(),
        l_hat: None,
        wall_ms: clock(opts.record_wall_clock),
        diverged: false,
    }];
    let mut halt = None;
    if !initial.is_finite() || initial > DIVERGENCE_LOSS {
        records[0].diverged = true;
        halt = Some((0, format!("initial loss {initial}")));
    }

    let full: Vec<usize> = (0..n).collect();
    for t in 1..=opts.steps {
        if halt.is_some() {
            break;
        }
        let sampled;
        let batch = if opts.batch_size >= n {
            &full
        } else {
            sampled = rng.sample_indices(n, opts.batch_size);
            &sampled
        };
        let loss = obj.evaluate(&x, batch, Some(&mut g))?.total;
        let mut row = TrainRecord {
            iter: t,
            train_loss: loss,
            test_loss: None,
            lr: Vec::new(),
            l_hat: None,
            wall_ms: None,
            diverged: false,
        };
        let failure = if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            Some(format!("loss {loss}"))
        } else if let Err(Error::NonFinite { index, .. }) = check_finite(&g, "gradient") {
            Some(format!("non-finite gradient at coordinate {index}"))
        } else {
            match fill_rates(&mut rates, &groups, &x, &g, t, &mut step_rates) {
                Ok(l_hat) => {
                    row.lr = step_rates.clone();
                    row.l_hat = l_hat;
                    match rule.step(&mut x, &g, &groups, &step_rates) {
                        Ok(()) => None,
                        Err(Error::NonFinite { index, .. }) => {
                            Some(format!("non-finite parameter at coordinate {index}"))
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::NonFinite { index, context }) => Some(format!("{context}: non-finite at {index}")),
                Err(e) => return Err(e),
            }
        };
        match failure {
            Some(reason) => {
                row.diverged = true;
                halt = Some((t, reason));
            }
            None => {
                let test_due = opts.test_every > 0 && (t % opts.test_every == 0 || t == opts.steps);
                if test_due {
                    row.test_loss = held_out(&x)?;
                }
            }
        }
        row.wall_ms = clock(opts.record_wall_clock);
        records.push(row);
    }

    let (diverged_at, divergence) = match halt {
        Some((t, reason)) => (Some(t), Some(reason)),
        None => (None, None),
    };
    Ok(Trajectory {
        records,
        final_x: x,
        diverged_at,
        divergence,
    })
}

fn fill_rates(
    rates: &mut Rates,
    groups: &[crate::problems::ParamGroup],
    x: &[f64],
    g: &[f64],
    t: usize,
    out: &mut [f64],
) -> Result<Option<Vec<f64>>> {
    match rates {
        Rates::Fixed(eta) => {
            out.fill(*eta);
            Ok(None)
        }
        Rates::Decay(eta0) => {
            out.fill(*eta0 / (t as f64).sqrt());
            Ok(None)
        }
        Rates::Pls(ests, true) => {
            let reading = ests[0].predict(x, g)?;
            out.fill(reading.eta);
            Ok(Some(vec![reading.l_hat; groups.len()]))
        }
        Rates::Pls(ests, false) => {
            let mut l_hat = Vec::with_capacity(groups.len());
            for ((est, group), slot) in ests.iter_mut().zip(groups).zip(out.iter_mut()) {
                let r = group.range.clone();
                let reading = est.predict(&x[r.clone()], &g[r])?;
                *slot = reading.eta;
                l_hat.push(reading.l_hat);
            }
            Ok(Some(l_hat))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;

    fn quad() -> QuadraticProblem {
        let mut rng = SeededRng::new(3);
        QuadraticProblem::random(&[4.0, 1.0, 0.25], 20, 1.0, &mut rng).unwrap()
    }

    #[test]
    fn zero_steps_gives_initial_row_only() {
        let p = quad();
        let opts = RunOptions {
            steps: 0,
            ..Default::default()
        };
        let tr = run_optimizer(&p, &[1.0; 3], &Algorithm::Sgd, &LearningRateSource::Fixed { eta: 0.1 }, &opts)
            .unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.final_x, vec![1.0; 3]);
    }

    #[test]
    fn row_count_and_rates() {
        let p = quad();
        let opts = RunOptions {
            steps: 25,
            batch_size: 5,
            ..Default::default()
        };
        let lr = LearningRateSource::pls(0.5, 0.01);
        let tr = run_optimizer(&p, &[1.0; 3], &Algorithm::Sgd, &lr, &opts).unwrap();
        assert_eq!(tr.records.len(), 26);
        assert!(tr.records[1].l_hat.as_ref().unwrap()[0] == 0.0);
        assert!(tr.records.iter().skip(1).all(|r| r.lr.len() == 1 && r.l_hat.is_some()));
        assert!(!tr.diverged());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let p = quad();
        let opts = RunOptions {
            steps: 30,
            batch_size: 4,
            seed: 11,
            ..Default::default()
        };
        for alg in [Algorithm::Sgd, Algorithm::amsgrad(), Algorithm::accsgd()] {
            let lr = LearningRateSource::pls(0.01, 0.01);
            let a = run_optimizer(&p, &[0.5; 3], &alg, &lr, &opts).unwrap();
            let b = run_optimizer(&p, &[0.5; 3], &alg, &lr, &opts).unwrap();
            assert_eq!(a.records, b.records);
            assert_eq!(a.final_x, b.final_x);
        }
    }

    #[test]
    fn fixed_smoothness_pls_equals_fixed_rate() {
        // Swap the prediction for a constant and the PLS run must reproduce
        // the fixed-rate run bit for bit.
        let p = quad();
        let opts = RunOptions {
            steps: 40,
            batch_size: 5,
            seed: 2,
            ..Default::default()
        };
        let (eta0, eps, l) = (0.3, 0.01, 2.0);
        let eta = eta0 / (l + eps);
        for alg in [Algorithm::Sgd, Algorithm::amsgrad(), Algorithm::accsgd()] {
            let fixed = run_optimizer(&p, &[1.0; 3], &alg, &LearningRateSource::Fixed { eta }, &opts).unwrap();

            let config = crate::pls::PlsConfig::new(eta0, eps);
            let mut est = SmoothnessEstimator::new(0, config).unwrap().with_fixed_smoothness(l);
            let mut rule = alg.build(3).unwrap();
            let groups = p.groups();
            let mut x = vec![1.0; 3];
            let mut g = vec![0.0; 3];
            let mut rng = SeededRng::new(opts.seed);
            for _ in 0..opts.steps {
                let batch = rng.sample_indices(p.num_samples(), opts.batch_size);
                p.evaluate(&x, &batch, Some(&mut g)).unwrap();
                let reading = est.predict(&x, &g).unwrap();
                rule.step(&mut x, &g, &groups, &[reading.eta]).unwrap();
            }
            assert_eq!(x, fixed.final_x, "{}", alg.label());
        }
    }

    #[test]
    fn divergence_halts_with_flag() {
        let p = QuadraticProblem::isotropic(2, 10.0);
        let opts = RunOptions {
            steps: 500,
            batch_size: 1,
            ..Default::default()
        };
        let tr = run_optimizer(&p, &[1.0, 1.0], &Algorithm::Sgd, &LearningRateSource::Fixed { eta: 1.0 }, &opts)
            .unwrap();
        let at = tr.diverged_at.expect("must diverge");
        assert!(at < 500);
        assert_eq!(tr.records.len(), at + 1);
        assert!(tr.records.last().unwrap().diverged);
        assert!(tr.records.iter().rev().skip(1).all(|r| !r.diverged));
    }

    #[test]
    fn bad_inputs_are_errors() {
        let p = quad();
        let opts = RunOptions::default();
        let sgd = Algorithm::Sgd;
        assert!(run_optimizer(&p, &[1.0; 2], &sgd, &LearningRateSource::Fixed { eta: 0.1 }, &opts).is_err());
        assert!(run_optimizer(&p, &[1.0; 3], &sgd, &LearningRateSource::Fixed { eta: -0.1 }, &opts).is_err());
    }
}
