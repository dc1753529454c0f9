// PLS-SGD against fixed step sizes on an ill-conditioned quadratic.

use pls_lab::optim::{run_optimizer, Algorithm, LearningRateSource, RunOptions};
use pls_lab::problems::QuadraticProblem;
use pls_lab::tensor::SeededRng;

fn run_example() -> pls_lab::Result<Vec<(String, f64)>> {
    let mut rng = SeededRng::new(7);
    let problem = QuadraticProblem::random(&[1.0, 1.3, 1.6, 1.9], 1, 0.0, &mut rng)?;
    let x0 = [1.0, -1.0, 0.5, 2.0];
    let opts = RunOptions {
        steps: 60,
        batch_size: 1,
        test_every: 0,
        ..Default::default()
    };
    let rates = [
        ("pls eta0=0.5".to_string(), LearningRateSource::pls(0.5, 1e-8)),
        ("fixed 0.1".to_string(), LearningRateSource::Fixed { eta: 0.1 }),
        ("fixed 1.2 (> 2/L)".to_string(), LearningRateSource::Fixed { eta: 1.2 }),
    ];
    let mut finals = Vec::new();
    for (name, rate) in rates {
        let tr = run_optimizer(&problem, &x0, &Algorithm::Sgd, &rate, &opts)?;
        let last = tr.records.last().expect("initial row");
        let status = match &tr.divergence {
            Some(reason) => format!("diverged at {} ({reason})", tr.diverged_at.unwrap_or(0)),
            None => "finite".into(),
        };
        println!("{name:<20} loss {:>12.4e} after {:>2} steps  {status}", last.train_loss, last.iter);
        finals.push((name, last.train_loss));
    }
    Ok(finals)
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}
