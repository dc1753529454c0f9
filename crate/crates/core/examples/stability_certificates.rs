// Convergence certificates for SGD, AMSGrad and AccSGD linearizations, plus
// a common Lyapunov matrix for a slowly varying sequence.

use pls_lab::harness::reports::{stability_t1, stability_t2, stability_t3};
use pls_lab::stability::{certify_sequence, AmsgradSystem};

fn run_example() -> pls_lab::Result<bool> {
    let t1 = stability_t1(2.0, 0.9, 0.4)?;
    println!("SGD      L=2 eta=0.4 rho=0.9  stable={} radius={:.3}", t1.stable, t1.spectral_radius);

    let t2 = stability_t2(0.9, 1.0, 1.0, 0.05, None)?;
    println!(
        "AMSGrad  beta1=0.9 eta=0.05     stable={} radius={:.6} (sqrt beta1 = {:.6})",
        t2.stable,
        t2.spectral_radius,
        0.9f64.sqrt()
    );

    let t3 = stability_t3(1000.0, 10.0, 1.0, 0.5, 0.999)?;
    println!(
        "AccSGD   kappa=1000 xi=10 eta=0.5 stable={} closed form {:?}",
        t3.stable, t3.closed_form_eigenvalues
    );
    println!("         {}", t3.note);

    // Learning rates drifting within the window share one certificate.
    let mats: Vec<_> = (0..20)
        .map(|t| AmsgradSystem::new(0.9, 0.04 + 0.0002 * t as f64, 1.0, 1.0).map(|s| s.matrix()))
        .collect::<pls_lab::Result<_>>()?;
    let cert = certify_sequence(&mats, 0.99)?;
    println!("sequence of 20 AMSGrad steps: common P found = {}", cert.common_p.is_some());
    Ok(t1.stable && t2.stable && cert.all_radii_below_rho)
}

fn main() -> pls_lab::Result<()> {
    run_example().map(|_| ())
}
