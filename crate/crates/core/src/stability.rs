//! Linearized update maps of the three optimizers and their convergence
//! certificates.
//!
//! Each optimizer is reduced to a 2x2 (or scalar) linear recursion around a
//! minimizer with a local smoothness `L`:
//!
//! - SGD: `x_{t+1} − x* = (1 − ηL)(x_t − x*)`;
//! - AMSGrad: `ζ_{t+1} = A_t ζ_t` with
//!   `A_t = [[β, (1−β)L], [−ηβ/s, 1 − (1−β)ηL/s]]`, `s = √v̂`;
//! - AccSGD: `ζ_{t+1} = B_t ζ_t` with
//!   `B_t = [[α, (1−α)(1−aηL)], [bα, (1−b)(1−ηL) + b(1−α)(1−aηL)]]`.
//!
//! `det A_t = β` exactly, so in the complex-root regime both eigenvalues
//! sit on the circle of radius `√β`: certification at `ρ = √β` is marginal
//! and needs a small margin.
//!
//! The AccSGD step-size window is `0 < (1−b)(1−ηL) < ρ` together with
//! `α < ρ`, i.e. the conditions on the diagonal of `B_t` after subtracting
//! `b` times its first row from its second. That row operation keeps
//! `det B_t = α(1−b)(1−ηL)` but not the trace, so `α` and `(1−b)(1−ηL)` are
//! not the eigenvalues of `B_t` unless `b(1−α)(1−aηL) = 0`. Reports carry
//! both the row-reduced diagonal and the true spectrum. The window's lower
//! end can be negative.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{AccsgdCoefficients, AmsgradState};
use crate::tensor::{
    cond2, eig2x2, l2_norm, solve_discrete_lyapunov2, spectral_radius2, EigenPair, LyapunovSolution, Matrix2,
};

/// Agreement tolerance between the Lyapunov and spectral routes.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lmi,
    Interval,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub rho_used: f64,
    pub spectral_radius: f64,
    pub lyapunov_p: Option<Matrix2>,
    pub cond_p: Option<f64>,
    pub method: Method,
}

/// Step-size window. `closed` tells whether the endpoints belong to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl Interval {
    pub fn contains(&self, eta: f64) -> bool {
        if self.closed {
            self.lo <= eta && eta <= self.hi
        } else {
            self.lo < eta && eta < self.hi
        }
    }

    pub fn is_empty(&self) -> bool {
        if self.closed {
            self.lo > self.hi
        } else {
            self.lo >= self.hi
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn unit_open(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// SGD

/// The scalar contraction factor `1 − ηL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SgdLinearFactor {
    pub eta: f64,
    pub smoothness: f64,
}

impl SgdLinearFactor {
    pub fn new(eta: f64, smoothness: f64) -> Result<Self> {
        finite("eta", eta)?;
        finite("L", smoothness)?;
        if smoothness < 0.0 {
            return Err(Error::invalid("L", format!("must be non-negative, got {smoothness}")));
        }
        Ok(Self { eta, smoothness })
    }

    pub fn factor(&self) -> f64 {
        1.0 - self.eta * self.smoothness
    }
}

/// `[(1−ρ)/L, 1/L]`: step sizes for which SGD contracts at rate `ρ` with a
/// non-negative factor.
pub fn theorem1_interval(smoothness: f64, rho: f64) -> Result<Interval> {
    positive("L", smoothness)?;
    unit_open("rho", rho)?;
    Ok(Interval {
        lo: (1.0 - rho) / smoothness,
        hi: 1.0 / smoothness,
        closed: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub interval: Interval,
    pub inside_interval: bool,
    pub factor: f64,
    pub spectral_radius: f64,
    pub contracting: bool,
    /// `inside_interval`, the window's own verdict.
    pub stable: bool,
    pub note: Option<String>,
}

pub fn theorem1_check(smoothness: f64, rho: f64, eta: f64) -> Result<Theorem1Report> {
    let interval = theorem1_interval(smoothness, rho)?;
    let factor = SgdLinearFactor::new(eta, smoothness)?.factor();
    let inside = interval.contains(eta);
    let radius = factor.abs();
    let shown = short(radius);
    let note = match (inside, radius < 1.0) {
        (false, true) => Some(format!(
            "outside interval, spectral radius {shown}: contracting but not covered by the window"
        )),
        (false, false) => Some(format!("outside interval, spectral radius {shown}: not contracting")),
        _ => None,
    };
    Ok(Theorem1Report {
        interval,
        inside_interval: inside,
        factor,
        spectral_radius: radius,
        contracting: radius < 1.0,
        stable: inside,
        note,
    })
}

/// Twelve decimals, trailing zeros dropped.
fn short(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

// ---------------------------------------------------------------------------
// AMSGrad

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmsgradSystem {
    pub beta1: f64,
    pub eta: f64,
    pub smoothness: f64,
    pub sqrt_vhat: f64,
}

impl AmsgradSystem {
    pub fn new(beta1: f64, eta: f64, smoothness: f64, sqrt_vhat: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta1) {
            return Err(Error::invalid("beta1", format!("must lie in [0, 1), got {beta1}")));
        }
        finite("eta", eta)?;
        finite("L", smoothness)?;
        positive("sqrt_vhat", sqrt_vhat)?;
        Ok(Self {
            beta1,
            eta,
            smoothness,
            sqrt_vhat,
        })
    }

    pub fn matrix(&self) -> Matrix2 {
        let (b, l, e, s) = (self.beta1, self.smoothness, self.eta, self.sqrt_vhat);
        Matrix2::new(b, (1.0 - b) * l, -e * b / s, 1.0 - (1.0 - b) * e * l / s)
    }

    /// Trace of `A_t`: `1 + β − (1−β)ηL/s`.
    pub fn trace(&self) -> f64 {
        1.0 + self.beta1 - (1.0 - self.beta1) * self.eta * self.smoothness / self.sqrt_vhat
    }

    /// Characteristic polynomial `λ² − tr·λ + β`.
    pub fn char_poly(&self, lambda: Complex64) -> Complex64 {
        lambda * lambda - lambda * self.trace() + self.beta1
    }

    /// `Γ = tr² − 4β`; negative exactly inside the step-size window.
    pub fn discriminant(&self) -> f64 {
        let tr = self.trace();
        tr * tr - 4.0 * self.beta1
    }

    pub fn eigenvalues(&self) -> EigenPair {
        eig2x2(&self.matrix())
    }
}

/// Open window `((1−√β)/(1+√β)·s/L, (1+√β)/(1−√β)·s/L)` in which the
/// eigenvalues of `A_t` are complex with modulus `√β`.
pub fn theorem2_interval(beta1: f64, sqrt_vhat: f64, smoothness: f64) -> Result<Interval> {
    unit_open("beta1", beta1)?;
    positive("sqrt_vhat", sqrt_vhat)?;
    positive("L", smoothness)?;
    let r = beta1.sqrt();
    let scale = sqrt_vhat / smoothness;
    Ok(Interval {
        lo: (1.0 - r) / (1.0 + r) * scale,
        hi: (1.0 + r) / (1.0 - r) * scale,
        closed: false,
    })
}

/// The same window written as `(1∓√β)²/(1−β)·s/L`.
pub fn theorem2_interval_squared_form(beta1: f64, sqrt_vhat: f64, smoothness: f64) -> Result<Interval> {
    unit_open("beta1", beta1)?;
    positive("sqrt_vhat", sqrt_vhat)?;
    positive("L", smoothness)?;
    let r = beta1.sqrt();
    let scale = sqrt_vhat / smoothness / (1.0 - beta1);
    Ok(Interval {
        lo: (1.0 - r).powi(2) * scale,
        hi: (1.0 + r).powi(2) * scale,
        closed: false,
    })
}

/// Default certification rate for an AMSGrad system: `√β` plus a margin,
/// since `√β` itself is the exact eigenvalue modulus.
pub fn amsgrad_default_rho(beta1: f64) -> f64 {
    beta1.sqrt() + 1e-6
}

/// Lyapunov certificate for `A_t` at rate `ρ`.
pub fn theorem2_lmi_check(a: &Matrix2, rho: f64) -> Result<StabilityVerdict> {
    lmi_check(a, rho)
}

/// Solves `MᵀPM − ρ²P = −I` and requires `P ≻ 0`. The verdict is
/// cross-checked against `spectral_radius(M) < ρ`; a disagreement further
/// than [`CONSISTENCY_TOLERANCE`] from the boundary is an error.
pub fn lmi_check(m: &Matrix2, rho: f64) -> Result<StabilityVerdict> {
    positive("rho", rho)?;
    if !m.is_finite() {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    let radius = spectral_radius2(m);
    let spectral = radius < rho;
    let certificate = match solve_discrete_lyapunov2(m, rho) {
        Ok(LyapunovSolution::Certified(p)) => Some(p),
        Ok(LyapunovSolution::Indefinite(_)) | Err(Error::SingularLyapunov) => None,
        Err(e) => return Err(e),
    };
    let feasible = certificate.is_some();
    if feasible != spectral && (radius - rho).abs() > CONSISTENCY_TOLERANCE {
        return Err(Error::InconsistentVerdict {
            spectral_radius: radius,
            rho,
            lmi_feasible: feasible,
        });
    }
    // Inside the tolerance band the spectral route decides.
    let p = certificate.filter(|_| spectral);
    Ok(StabilityVerdict {
        stable: spectral,
        rho_used: rho,
        spectral_radius: radius,
        lyapunov_p: p,
        cond_p: p.map(|p| cond2(&p)).transpose()?,
        method: Method::Lmi,
    })
}

/// Spectral-radius verdict, no certificate.
pub fn spectral_check(m: &Matrix2, rho: f64) -> Result<StabilityVerdict> {
    positive("rho", rho)?;
    let radius = spectral_radius2(m);
    Ok(StabilityVerdict {
        stable: radius < rho,
        rho_used: rho,
        spectral_radius: radius,
        lyapunov_p: None,
        cond_p: None,
        method: Method::Spectral,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VhatReading {
    pub label: &'static str,
    pub sqrt_vhat: f64,
    pub interval: Interval,
    pub verdict: StabilityVerdict,
}

/// Evaluates `A_t` of a live AMSGrad state with the smallest, mean and
/// largest `√v̂` coordinate as the scalar stand-in.
pub fn amsgrad_vhat_bracket(
    state: &AmsgradState,
    beta1: f64,
    eta: f64,
    smoothness: f64,
    rho: f64,
) -> Result<Vec<VhatReading>> {
    let s = state.sqrt_vhat();
    if s.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    [("min", min), ("mean", mean), ("max", max)]
        .into_iter()
        .map(|(label, sqrt_vhat)| {
            let sys = AmsgradSystem::new(beta1, eta, smoothness, sqrt_vhat)?;
            Ok(VhatReading {
                label,
                sqrt_vhat,
                interval: theorem2_interval(beta1, sqrt_vhat, smoothness)?,
                verdict: lmi_check(&sys.matrix(), rho)?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// AccSGD

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccsgdSystem {
    pub coeffs: AccsgdCoefficients,
    pub eta: f64,
    pub smoothness: f64,
}

impl AccsgdSystem {
    pub fn new(kappa: f64, xi: f64, eta: f64, smoothness: f64) -> Result<Self> {
        finite("eta", eta)?;
        finite("L", smoothness)?;
        Ok(Self {
            coeffs: AccsgdCoefficients::new(kappa, xi)?,
            eta,
            smoothness,
        })
    }

    pub fn matrix(&self) -> Matrix2 {
        let AccsgdCoefficients { alpha, a, b, .. } = self.coeffs;
        let el = self.eta * self.smoothness;
        let u = (1.0 - alpha) * (1.0 - a * el);
        Matrix2::new(alpha, u, b * alpha, (1.0 - b) * (1.0 - el) + b * u)
    }

    /// Diagonal of the row-reduced matrix, `(α, (1−b)(1−ηL))`. Its product
    /// is `det B_t`; it is the spectrum of `B_t` only when
    /// [`AccsgdSystem::trace_gap`] vanishes.
    pub fn closed_form_eigenvalues(&self) -> (f64, f64) {
        let c = &self.coeffs;
        (c.alpha, (1.0 - c.b) * (1.0 - self.eta * self.smoothness))
    }

    /// `tr B_t − α − (1−b)(1−ηL) = b(1−α)(1−aηL)`.
    pub fn trace_gap(&self) -> f64 {
        let c = &self.coeffs;
        c.b * (1.0 - c.alpha) * (1.0 - c.a * self.eta * self.smoothness)
    }

    pub fn eigenvalues(&self) -> EigenPair {
        eig2x2(&self.matrix())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem3Report {
    pub alpha: f64,
    /// `0 < α < ρ`.
    pub alpha_below_rho: bool,
    pub interval: Interval,
    pub eta_inside: bool,
    /// Both window conditions hold.
    pub stable: bool,
    /// `(α, (1−b)(1−ηL))`.
    pub closed_form_eigenvalues: (f64, f64),
    /// Moduli of the actual eigenvalues of `B_t`, largest first.
    pub eigenvalue_moduli: (f64, f64),
    pub complex_eigenvalues: bool,
    pub spectral_radius: f64,
    /// `spectral_radius < ρ`.
    pub spectrally_stable: bool,
}

/// The AccSGD step-size window `((1 − ρ(κ+0.7ξ)/κ)/L, 1/L)` and the `α < ρ`
/// clause. The window is empty of meaning when the clause fails.
pub fn theorem3_interval(kappa: f64, xi: f64, smoothness: f64, rho: f64) -> Result<(Interval, bool)> {
    let c = AccsgdCoefficients::new(kappa, xi)?;
    positive("L", smoothness)?;
    positive("rho", rho)?;
    let lo = (1.0 - rho * (kappa + 0.7 * xi) / kappa) / smoothness;
    Ok((
        Interval {
            lo,
            hi: 1.0 / smoothness,
            closed: false,
        },
        0.0 < c.alpha && c.alpha < rho,
    ))
}

pub fn theorem3_check(kappa: f64, xi: f64, smoothness: f64, eta: f64, rho: f64) -> Result<Theorem3Report> {
    let (interval, alpha_ok) = theorem3_interval(kappa, xi, smoothness, rho)?;
    let sys = AccsgdSystem::new(kappa, xi, eta, smoothness)?;
    let inside = interval.contains(eta);
    let eig = sys.eigenvalues();
    let [m1, m2] = eig.magnitudes();
    let radius = m1.max(m2);
    Ok(Theorem3Report {
        alpha: sys.coeffs.alpha,
        alpha_below_rho: alpha_ok,
        interval,
        eta_inside: inside,
        stable: alpha_ok && inside,
        closed_form_eigenvalues: sys.closed_form_eigenvalues(),
        eigenvalue_moduli: (radius, m1.min(m2)),
        complex_eigenvalues: eig.is_complex(),
        spectral_radius: radius,
        spectrally_stable: radius < rho,
    })
}

// ---------------------------------------------------------------------------
// Simulation

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub steps: usize,
    /// `max_t ‖ζ_t‖ / (ρᵗ ‖ζ₀‖)` over `t = 0..=steps`.
    pub max_envelope_ratio: f64,
    /// `√cond(P)` when a certificate was supplied.
    pub envelope_bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub final_norm: f64,
    pub overflow: bool,
}

/// Iterates `ζ_{t+1} = M_t ζ_t` over the sequence and measures the decay
/// envelope against `ρᵗ`.
pub fn simulate_linear_system(
    matrices: &[Matrix2],
    zeta0: [f64; 2],
    rho: f64,
    p: Option<&Matrix2>,
) -> Result<DecayReport> {
    positive("rho", rho)?;
    if let Some(i) = matrices.iter().position(|m| !m.is_finite()) {
        return Err(Error::invalid("matrices", format!("matrix {i} is not finite")));
    }
    let norm0 = l2_norm(&zeta0)?;
    let envelope_bound = p.map(|p| cond2(p).map(f64::sqrt)).transpose()?;
    let mut zeta = zeta0;
    let mut ratio: f64 = if norm0 > 0.0 { 1.0 } else { 0.0 };
    let mut overflow = false;
    let mut rho_t = 1.0;
    for m in matrices {
        zeta = m.apply(zeta);
        rho_t *= rho;
        let norm = zeta[0].hypot(zeta[1]);
        if !norm.is_finite() {
            overflow = true;
            ratio = f64::INFINITY;
            break;
        }
        if norm0 > 0.0 {
            ratio = ratio.max(norm / (rho_t * norm0));
        }
    }
    let final_norm = if overflow { f64::INFINITY } else { zeta[0].hypot(zeta[1]) };
    Ok(DecayReport {
        steps: matrices.len(),
        max_envelope_ratio: ratio,
        envelope_bound,
        // Float slack on the bound.
        within_bound: envelope_bound.map(|b| !overflow && ratio <= b * (1.0 + 1e-9)),
        final_norm,
        overflow,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceCertificate {
    pub rho: f64,
    /// `P` from the first step's Lyapunov solve, if it certifies every step.
    pub common_p: Option<Matrix2>,
    pub cond_p: Option<f64>,
    pub per_step_radii: Vec<f64>,
    pub all_radii_below_rho: bool,
    pub note: Option<String>,
}

/// Certifies a time-varying sequence: a common `P` (taken from the first
/// step) must satisfy `M_tᵀPM_t − ρ²P ≺ 0` for every `t`. Without one, the
/// per-step spectral radii are reported instead.
pub fn certify_sequence(matrices: &[Matrix2], rho: f64) -> Result<SequenceCertificate> {
    positive("rho", rho)?;
    let first = matrices.first().ok_or(Error::EmptyBatch)?;
    let radii: Vec<f64> = matrices.iter().map(spectral_radius2).collect();
    let all_below = radii.iter().all(|&r| r < rho);
    let candidate = match solve_discrete_lyapunov2(first, rho) {
        Ok(LyapunovSolution::Certified(p)) => Some(p),
        Ok(_) | Err(Error::SingularLyapunov) => None,
        Err(e) => return Err(e),
    };
    let common = candidate.filter(|p| {
        matrices.iter().all(|m| {
            let r = m.lyapunov_residual(p, rho);
            crate::tensor::is_positive_definite(&r.scale(-1.0))
        })
    });
    let note = match (candidate, common) {
        (_, Some(_)) => None,
        (None, None) => Some("no common certificate: first step is not certifiable at this rho".to_string()),
        (Some(_), None) => Some("no common certificate: first-step P fails on a later step".to_string()),
    };
    Ok(SequenceCertificate {
        rho,
        common_p: common,
        cond_p: common.map(|p| cond2(&p)).transpose()?,
        per_step_radii: radii,
        all_radii_below_rho: all_below,
        note,
    })
}
