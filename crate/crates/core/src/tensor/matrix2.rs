use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the leading-principal-minor positive-definiteness test.
pub const PD_TOLERANCE: f64 = 1e-12;

/// A real 2x2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn diagonal(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }

    pub fn scale(&self, s: f64) -> Matrix2 {
        Matrix2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn sub(&self, rhs: &Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// `Mᵀ P M − ρ² P`, the quantity that must be negative definite for a
    /// quadratic Lyapunov function `ζᵀPζ` to certify decay at rate `ρ`.
    pub fn lyapunov_residual(&self, p: &Matrix2, rho: f64) -> Matrix2 {
        self.transpose().mul(p).mul(self).sub(&p.scale(rho * rho))
    }

    pub fn to_rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }
}

/// The two roots of `λ² − tr·λ + det = 0`. Complex pairs are stored as
/// `(re + i·im, re − i·im)`; real roots are ordered by decreasing magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub first: Complex64,
    pub second: Complex64,
}

impl EigenPair {
    pub fn is_complex(&self) -> bool {
        self.first.im != 0.0
    }

    pub fn magnitudes(&self) -> [f64; 2] {
        [self.first.norm(), self.second.norm()]
    }

    /// Real parts, sorted ascending. Only meaningful for real spectra.
    pub fn sorted_real(&self) -> [f64; 2] {
        let (a, b) = (self.first.re, self.second.re);
        if a <= b {
            [a, b]
        } else {
            [b, a]
        }
    }
}

pub fn eig2x2(m: &Matrix2) -> EigenPair {
    let tr = m.trace();
    let det = m.det();
    // (a11 − a22)² + 4·a12·a21 equals tr² − 4·det but keeps accuracy for
    // nearly triangular matrices.
    if m.a12 == 0.0 || m.a21 == 0.0 {
        // Triangular: the diagonal is the spectrum, exactly.
        return EigenPair {
            first: Complex64::new(m.a11, 0.0),
            second: Complex64::new(m.a22, 0.0),
        };
    }
    let half_gap = 0.5 * (m.a11 - m.a22);
    let disc = half_gap * half_gap + m.a12 * m.a21;
    let half_tr = 0.5 * tr;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
        let small = if big != 0.0 { det / big } else { 0.0 };
        EigenPair {
            first: Complex64::new(big, 0.0),
            second: Complex64::new(small, 0.0),
        }
    } else {
        let im = (-disc).sqrt();
        EigenPair {
            first: Complex64::new(half_tr, im),
            second: Complex64::new(half_tr, -im),
        }
    }
}

pub fn spectral_radius2(m: &Matrix2) -> f64 {
    let [a, b] = eig2x2(m).magnitudes();
    a.max(b)
}

/// Leading principal minors of a symmetric matrix, both above [`PD_TOLERANCE`].
pub fn is_positive_definite(p: &Matrix2) -> bool {
    p.a11 > PD_TOLERANCE && p.det() > PD_TOLERANCE
}

/// Outcome of solving `Mᵀ P M − ρ² P = −I` for symmetric `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LyapunovSolution {
    /// The unique solution is positive definite: `M` contracts at rate `ρ`.
    Certified(Matrix2),
    /// A unique solution exists but is not positive definite.
    Indefinite(Matrix2),
}

impl LyapunovSolution {
    pub fn certificate(&self) -> Option<Matrix2> {
        match self {
            LyapunovSolution::Certified(p) => Some(*p),
            LyapunovSolution::Indefinite(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LyapunovSolution::Certified(_))
    }

    pub fn matrix(&self) -> Matrix2 {
        match self {
            LyapunovSolution::Certified(p) | LyapunovSolution::Indefinite(p) => *p,
        }
    }
}

/// Solves the discrete Lyapunov equation `Mᵀ P M − ρ² P = −I` over the three
/// free entries of a symmetric `P` and classifies the solution.
///
/// A positive definite solution exists iff `spectral_radius2(M) < ρ`. The
/// linear system is singular when `ρ²` equals a product of two eigenvalues
/// of `M`, which is reported as [`Error::SingularLyapunov`].
pub fn solve_discrete_lyapunov2(m: &Matrix2, rho: f64) -> Result<LyapunovSolution> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite {
            index: 0,
            context: "solve_discrete_lyapunov2",
        });
    }
    let Matrix2 { a11: a, a12: b, a21: c, a22: d } = *m;
    let r2 = rho * rho;
    // Unknowns (p, q, r) for P = [[p, q], [q, r]].
    let mut sys = [
        [a * a - r2, 2.0 * a * c, c * c, -1.0],
        [a * b, a * d + b * c - r2, c * d, 0.0],
        [b * b, 2.0 * b * d, d * d - r2, -1.0],
    ];
    let [p, q, r] = solve3(&mut sys).ok_or(Error::SingularLyapunov)?;
    let sol = Matrix2::new(p, q, q, r);
    if is_positive_definite(&sol) {
        Ok(LyapunovSolution::Certified(sol))
    } else {
        Ok(LyapunovSolution::Indefinite(sol))
    }
}

/// Gaussian elimination with partial pivoting on an augmented 3x4 system.
fn solve3(sys: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    let scale = sys
        .iter()
        .flat_map(|row| row[..3].iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let tiny = scale * 1e-14;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| sys[i][col].abs().total_cmp(&sys[j][col].abs()))
            .expect("non-empty range");
        if sys[pivot][col].abs() <= tiny {
            return None;
        }
        sys.swap(col, pivot);
        for row in col + 1..3 {
            let f = sys[row][col] / sys[col][col];
            for k in col..4 {
                sys[row][k] -= f * sys[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = sys[row][3];
        for k in row + 1..3 {
            acc -= sys[row][k] * x[k];
        }
        x[row] = acc / sys[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Condition number `σ_max / σ_min` of a symmetric positive definite matrix.
pub fn cond2(p: &Matrix2) -> Result<f64> {
    if !is_positive_definite(p) {
        return Err(Error::NotPositiveDefinite);
    }
    let mean = 0.5 * (p.a11 + p.a22);
    let radius = (0.5 * (p.a11 - p.a22)).hypot(0.5 * (p.a12 + p.a21));
    let largest = mean + radius;
    let smallest = p.det() / largest;
    Ok(largest / smallest)
}
