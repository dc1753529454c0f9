//! JSON reports behind `pls-lab stability t1|t2|t3`.

use serde::Serialize;

use crate::error::Result;
use crate::stability::{
    amsgrad_default_rho, lmi_check, simulate_linear_system, theorem1_check, theorem2_interval, theorem3_check,
    AccsgdSystem, AmsgradSystem, DecayReport, Interval, StabilityVerdict,
};
use crate::tensor::{EigenPair, Matrix2};

/// Steps in the simulated decay envelope.
pub const ENVELOPE_STEPS: usize = 100;
const ZETA0: [f64; 2] = [1.0, 1.0];

#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

fn eigenvalues(e: &EigenPair) -> Vec<Eigenvalue> {
    [e.first, e.second]
        .iter()
        .map(|z| Eigenvalue {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        })
        .collect()
}

fn envelope(m: &Matrix2, rho: f64, verdict: &StabilityVerdict) -> Result<DecayReport> {
    simulate_linear_system(&vec![*m; ENVELOPE_STEPS], ZETA0, rho, verdict.lyapunov_p.as_ref())
}

#[derive(Debug, Clone, Serialize)]
pub struct T1Report {
    pub theorem: &'static str,
    /// `η` lies in the window.
    pub stable: bool,
    pub smoothness: f64,
    pub rho: f64,
    pub eta: f64,
    pub interval: Interval,
    pub factor: f64,
    pub spectral_radius: f64,
    pub contracting: bool,
    pub lmi: StabilityVerdict,
    pub envelope: DecayReport,
    pub note: Option<String>,
}

pub fn stability_t1(smoothness: f64, rho: f64, eta: f64) -> Result<T1Report> {
    let rep = theorem1_check(smoothness, rho, eta)?;
    // The scalar recursion acts identically on every coordinate.
    let m = Matrix2::diagonal(rep.factor, rep.factor);
    let lmi = lmi_check(&m, rho)?;
    Ok(T1Report {
        theorem: "t1",
        stable: rep.stable,
        smoothness,
        rho,
        eta,
        interval: rep.interval,
        factor: rep.factor,
        spectral_radius: rep.spectral_radius,
        contracting: rep.contracting,
        envelope: envelope(&m, rho, &lmi)?,
        lmi,
        note: rep.note,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct T2Report {
    pub theorem: &'static str,
    /// `η` lies in the open window.
    pub stable: bool,
    pub beta1: f64,
    pub sqrt_vhat: f64,
    pub smoothness: f64,
    pub eta: f64,
    pub rho: f64,
    pub interval: Interval,
    pub matrix: Matrix2,
    pub eigenvalues: Vec<Eigenvalue>,
    pub spectral_radius: f64,
    pub sqrt_beta1: f64,
    pub discriminant: f64,
    pub lmi: StabilityVerdict,
    pub envelope: DecayReport,
}

/// `rho` defaults to `√β₁` plus a small margin.
pub fn stability_t2(beta1: f64, sqrt_vhat: f64, smoothness: f64, eta: f64, rho: Option<f64>) -> Result<T2Report> {
    let interval = theorem2_interval(beta1, sqrt_vhat, smoothness)?;
    let sys = AmsgradSystem::new(beta1, eta, smoothness, sqrt_vhat)?;
    let rho = rho.unwrap_or_else(|| amsgrad_default_rho(beta1));
    let m = sys.matrix();
    let lmi = lmi_check(&m, rho)?;
    Ok(T2Report {
        theorem: "t2",
        stable: interval.contains(eta),
        beta1,
        sqrt_vhat,
        smoothness,
        eta,
        rho,
        interval,
        matrix: m,
        eigenvalues: eigenvalues(&sys.eigenvalues()),
        spectral_radius: lmi.spectral_radius,
        sqrt_beta1: beta1.sqrt(),
        discriminant: sys.discriminant(),
        envelope: envelope(&m, rho, &lmi)?,
        lmi,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct T3Report {
    pub theorem: &'static str,
    /// `α < ρ` and `η` in the window.
    pub stable: bool,
    pub kappa: f64,
    pub xi: f64,
    pub smoothness: f64,
    pub eta: f64,
    pub rho: f64,
    pub alpha: f64,
    pub alpha_below_rho: bool,
    pub interval: Interval,
    pub eta_inside: bool,
    pub matrix: Matrix2,
    /// `(α, (1−b)(1−ηL))`: the row-reduced diagonal the window is built on.
    pub closed_form_eigenvalues: (f64, f64),
    /// The spectrum of the matrix itself.
    pub eigenvalues: Vec<Eigenvalue>,
    pub spectral_radius: f64,
    pub lmi: StabilityVerdict,
    pub envelope: DecayReport,
    pub note: &'static str,
}

pub fn stability_t3(kappa: f64, xi: f64, smoothness: f64, eta: f64, rho: f64) -> Result<T3Report> {
    let rep = theorem3_check(kappa, xi, smoothness, eta, rho)?;
    let sys = AccsgdSystem::new(kappa, xi, eta, smoothness)?;
    let m = sys.matrix();
    let lmi = lmi_check(&m, rho)?;
    Ok(T3Report {
        theorem: "t3",
        stable: rep.stable,
        kappa,
        xi,
        smoothness,
        eta,
        rho,
        alpha: rep.alpha,
        alpha_below_rho: rep.alpha_below_rho,
        interval: rep.interval,
        eta_inside: rep.eta_inside,
        matrix: m,
        closed_form_eigenvalues: rep.closed_form_eigenvalues,
        eigenvalues: eigenvalues(&sys.eigenvalues()),
        spectral_radius: rep.spectral_radius,
        envelope: envelope(&m, rho, &lmi)?,
        lmi,
        note: "closed_form_eigenvalues share the determinant of the matrix but not its trace; \
               `eigenvalues` is the actual spectrum",
    })
}
