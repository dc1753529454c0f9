use super::{validate_batch, validate_point, FiniteSumObjective, Loss, ParamGroup};
use crate::error::{Error, Result};
use crate::tensor::SeededRng;

/// `f_i(x) = ½ Σ_j D_j (x_j − c_ij)²` with positive curvatures `D`.
///
/// The minimizer of the average is the mean center, and the full gradient is
/// Lipschitz with constant exactly `max(D)`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    curvature: Vec<f64>,
    /// `n x d`, row-major.
    centers: Vec<f64>,
    n: usize,
}

impl QuadraticProblem {
    pub fn new(curvature: Vec<f64>, centers: Vec<Vec<f64>>) -> Result<Self> {
        let d = curvature.len();
        if d == 0 {
            return Err(Error::invalid("curvature", "must be non-empty"));
        }
        if let Some(c) = curvature.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::invalid("curvature", format!("entries must be positive, got {c}")));
        }
        if centers.is_empty() {
            return Err(Error::invalid("centers", "need at least one sample"));
        }
        let n = centers.len();
        let mut flat = Vec::with_capacity(n * d);
        for row in &centers {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            curvature,
            centers: flat,
            n,
        })
    }

    /// Single sample centered at the origin with curvature `c` on every axis.
    pub fn isotropic(dim: usize, c: f64) -> Self {
        Self::new(vec![c; dim], vec![vec![0.0; dim]]).expect("valid isotropic quadratic")
    }

    /// `n` centers drawn uniformly from `[-spread, spread]^d`.
    pub fn random(curvature: &[f64], n: usize, spread: f64, rng: &mut SeededRng) -> Result<Self> {
        let d = curvature.len();
        let centers = (0..n)
            .map(|_| (0..d).map(|_| rng.uniform(-spread, spread)).collect())
            .collect();
        Self::new(curvature.to_vec(), centers)
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    /// The equilibrium `x*` (mean of the centers), where the full gradient vanishes.
    pub fn optimum(&self) -> Vec<f64> {
        let d = self.curvature.len();
        let mut mean = vec![0.0; d];
        for row in self.centers.chunks_exact(d) {
            for (m, c) in mean.iter_mut().zip(row) {
                *m += c;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        mean
    }
}

/// Lipschitz constant of the full gradient: the largest curvature.
pub fn exact_smoothness(problem: &QuadraticProblem) -> f64 {
    problem.curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl FiniteSumObjective for QuadraticProblem {
    fn num_samples(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.curvature.len()
    }

    fn groups(&self) -> Vec<ParamGroup> {
        vec![ParamGroup::new("x", 0..self.dim())]
    }

    fn evaluate(&self, x: &[f64], batch: &[usize], grad: Option<&mut [f64]>) -> Result<Loss> {
        let d = self.dim();
        validate_point(x, d)?;
        validate_batch(batch, self.n)?;
        let scale = 1.0 / batch.len() as f64;
        let mut value = 0.0;
        for &i in batch {
            let row = &self.centers[i * d..(i + 1) * d];
            for j in 0..d {
                let r = x[j] - row[j];
                value += 0.5 * self.curvature[j] * r * r;
            }
        }
        if let Some(g) = grad {
            validate_point(g, d)?;
            let mut mean_center = vec![0.0; d];
            for &i in batch {
                for (m, c) in mean_center.iter_mut().zip(&self.centers[i * d..(i + 1) * d]) {
                    *m += c;
                }
            }
            for j in 0..d {
                g[j] = self.curvature[j] * (x[j] - mean_center[j] * scale);
            }
        }
        Ok(Loss::unregularized(value * scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::minibatch_grad;
    use crate::tensor::l2_distance;

    #[test]
    fn full_gradient_vanishes_at_optimum() {
        let mut rng = SeededRng::new(9);
        let q = QuadraticProblem::random(&[2.0, 5.0, 1.0], 12, 3.0, &mut rng).unwrap();
        let g = minibatch_grad(&q, &q.optimum(), &q.full_batch()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn scalar_gradient_is_linear() {
        let q = QuadraticProblem::isotropic(1, 2.0);
        for x in [-3.0, 0.0, 0.7, 3.0] {
            assert_eq!(minibatch_grad(&q, &[x], &[0]).unwrap(), vec![2.0 * x]);
        }
    }

    #[test]
    fn smoothness_is_largest_curvature() {
        let q = QuadraticProblem::new(vec![2.0, 5.0, 1.0], vec![vec![0.0; 3]]).unwrap();
        assert_eq!(exact_smoothness(&q), 5.0);
        assert_eq!(exact_smoothness(&QuadraticProblem::isotropic(4, 0.3)), 0.3);
    }

    #[test]
    fn gradient_is_lipschitz_with_exact_constant() {
        let mut rng = SeededRng::new(21);
        let q = QuadraticProblem::random(&[2.0, 5.0, 1.0, 0.1], 5, 1.0, &mut rng).unwrap();
        let l = exact_smoothness(&q);
        let batch = q.full_batch();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.uniform(-10.0, 10.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.uniform(-10.0, 10.0)).collect();
            let gx = minibatch_grad(&q, &x, &batch).unwrap();
            let gy = minibatch_grad(&q, &y, &batch).unwrap();
            let lhs = l2_distance(&gx, &gy).unwrap();
            let rhs = l * l2_distance(&x, &y).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rejects_bad_curvature() {
        assert!(QuadraticProblem::new(vec![1.0, 0.0], vec![vec![0.0, 0.0]]).is_err());
        assert!(QuadraticProblem::new(vec![], vec![vec![]]).is_err());
        assert!(QuadraticProblem::new(vec![1.0], vec![]).is_err());
    }
}
