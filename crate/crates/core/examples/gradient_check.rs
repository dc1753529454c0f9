// Backpropagation against central differences on a small random network.

use std::sync::Arc;

use pls_lab::harness::{check_gradients, Dataset, GradcheckConfig, GradcheckOptions};
use pls_lab::problems::{glorot_init, MlpLsrProblem, Target};
use pls_lab::tensor::SeededRng;

fn run_example() -> pls_lab::Result<(f64, f64)> {
    let mut rng = SeededRng::new(11);
    let n = 40;
    let features: Vec<f64> = (0..n * 10).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let labels: Vec<u8> = (0..n).map(|i| (i % 5) as u8).collect();
    let data = Arc::new(Dataset::new(features, 10, Some(labels), Some(5))?);
    let mlp = MlpLsrProblem::new(&[8], Target::OneHot { classes: 5 }, 1e-3, data, None)?;
    let sizes = mlp.layer_sizes().to_vec();
    let draw = |rng: &mut SeededRng| {
        let mut x = glorot_init(&sizes, rng);
        x.iter_mut().for_each(|v| *v += rng.uniform(-0.05, 0.05));
        x
    };
    let cfg = GradcheckConfig::default();
    let honest = check_gradients(&mlp, draw, &cfg, 0, GradcheckOptions::default())?;
    let broken = check_gradients(&mlp, draw, &cfg, 0, GradcheckOptions { corrupt_gradient: true })?;
    println!("10-8-5 network, {} points", honest.points.len());
    println!("  max relative error           {:.3e}  passed={}", honest.max_rel_error, honest.passed);
    println!("  with a corrupted gradient    {:.3e}  passed={}", broken.max_rel_error, broken.passed);
    Ok((honest.max_rel_error, broken.max_rel_error))
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}
