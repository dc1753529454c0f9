// Runs the bundled classification config for a few steps and writes its
// records into a temporary directory.

use pls_lab::harness::{run_experiment, write_outcome, ExperimentConfig};

fn run_example() -> pls_lab::Result<std::path::PathBuf> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/classification-mnist.json");
    let mut cfg = ExperimentConfig::from_file(path)?;
    cfg.steps = 20;
    cfg.test_every = 10;
    let outcome = run_experiment(&cfg, Some(200))?;
    for row in outcome.trajectory.records.iter().step_by(5) {
        println!("iter {:>3}  loss {:.5}  lr {:?}", row.iter, row.train_loss, row.lr);
    }
    let dir = std::env::temp_dir().join(format!("pls-lab-example-{}", std::process::id()));
    write_outcome(&outcome, &dir)?;
    println!("records written to {}", dir.display());
    Ok(dir)
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}
