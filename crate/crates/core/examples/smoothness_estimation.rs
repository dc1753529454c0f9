// Watch the local smoothness predictor lock onto the curvature of a
// quadratic after its bootstrap call.

use pls_lab::optim::sgd_step;
use pls_lab::pls::{PlsConfig, SmoothnessEstimator};
use pls_lab::problems::{minibatch_grad, QuadraticProblem};

fn run_example() -> pls_lab::Result<Vec<f64>> {
    let mut readings = Vec::new();
    for c in [0.1, 1.0, 10.0] {
        let problem = QuadraticProblem::isotropic(3, c);
        let mut est = SmoothnessEstimator::new(0, PlsConfig::new(0.5, 1e-8))?;
        let mut x = vec![1.0, -2.0, 0.5];
        for _ in 0..3 {
            let g = minibatch_grad(&problem, &x, &[0])?;
            let r = est.predict(&x, &g)?;
            println!("c = {c:<5} t = {}  L_hat = {:<12.8} eta = {:.6}", r.t, r.l_hat, r.eta);
            if !r.bootstrap {
                readings.push(r.l_hat);
            }
            x = sgd_step(&x, &g, r.eta)?;
        }
    }
    Ok(readings)
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}
