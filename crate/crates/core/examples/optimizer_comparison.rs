// SGD, AMSGrad and AccSGD, each with PLS rates, on a small MNIST network.

use pls_lab::harness::{run_experiment, ExperimentConfig, ProblemConfig, TargetKind};
use pls_lab::optim::{Algorithm, LearningRateSource};

fn run_example() -> pls_lab::Result<Vec<(String, Option<f64>)>> {
    let data_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/mnist-subset");
    let problem = ProblemConfig::Mlp {
        hidden: vec![32],
        target: TargetKind::Classification,
        data_dir: data_dir.into(),
        l2: 1e-4,
        limit: Some(300),
    };
    let mut out = Vec::new();
    for alg in [Algorithm::Sgd, Algorithm::amsgrad(), Algorithm::accsgd()] {
        let cfg = ExperimentConfig::new(problem.clone(), alg, LearningRateSource::pls(0.002, 0.01), 60);
        let outcome = run_experiment(&cfg, None)?;
        let s = &outcome.summary;
        println!("{:<8} final train loss {:?}  diverged={}", s.algorithm, s.final_train_loss, s.diverged);
        out.push((s.algorithm.clone(), s.final_train_loss));
    }
    Ok(out)
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}
