use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{validate_batch, validate_point, FiniteSumObjective, Loss, ParamGroup};
use crate::error::{Error, Result};
use crate::harness::Dataset;
use crate::tensor::{matmul, Layout};

/// What the network regresses onto under the least-squares loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// One-hot encoding of the class label.
    OneHot { classes: usize },
    /// The input itself (autoencoder).
    Reconstruction,
}

#[derive(Debug, Clone, Copy)]
struct LayerSpan {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
}

/// Fully connected ReLU network with a linear output layer, trained with the
/// least-squares loss `(1/2B) Σ_b ‖ŷ_b − y_b‖²` plus `(λ/2) Σ_l ‖W_l‖²`.
///
/// Parameters are laid out layer by layer: the `fan_in x fan_out` row-major
/// weight matrix followed by the bias vector. Biases are not regularized.
/// The ReLU derivative at exactly zero is taken as zero.
#[derive(Debug, Clone)]
pub struct MlpLsrProblem {
    sizes: Vec<usize>,
    spans: Vec<LayerSpan>,
    l2: f64,
    target: Target,
    train: Arc<Dataset>,
    test: Option<Arc<Dataset>>,
}

struct Forward {
    /// `acts[0]` is the gathered input batch; `acts[l]` for `0 < l < L` are
    /// post-ReLU hidden activations and `acts[L]` is the linear output.
    acts: Vec<Vec<f64>>,
}

impl MlpLsrProblem {
    pub fn new(
        hidden: &[usize],
        target: Target,
        l2: f64,
        train: Arc<Dataset>,
        test: Option<Arc<Dataset>>,
    ) -> Result<Self> {
        if !(l2 >= 0.0) || !l2.is_finite() {
            return Err(Error::invalid("l2", format!("must be >= 0, got {l2}")));
        }
        if hidden.contains(&0) {
            return Err(Error::invalid("hidden", "layer sizes must be >= 1"));
        }
        let output = match target {
            Target::OneHot { classes } => {
                if train.num_classes() != Some(classes) {
                    return Err(Error::invalid(
                        "target",
                        format!(
                            "one-hot target with {classes} classes needs a labelled dataset with {classes} classes"
                        ),
                    ));
                }
                classes
            }
            Target::Reconstruction => train.dim(),
        };
        if let Some(test) = &test {
            if test.dim() != train.dim() {
                return Err(Error::DimensionMismatch {
                    expected: train.dim(),
                    actual: test.dim(),
                });
            }
        }
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(train.dim());
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        let mut spans = Vec::with_capacity(sizes.len() - 1);
        let mut offset = 0;
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            spans.push(LayerSpan {
                fan_in,
                fan_out,
                weights: offset,
                bias: offset + fan_in * fan_out,
            });
            offset += fan_in * fan_out + fan_out;
        }
        Ok(Self {
            sizes,
            spans,
            l2,
            target,
            train,
            test,
        })
    }

    /// Layer widths including input and output.
    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn train_set(&self) -> &Dataset {
        &self.train
    }

    fn forward(&self, data: &Dataset, x: &[f64], batch: &[usize]) -> Forward {
        let b = batch.len();
        let mut input = Vec::with_capacity(b * data.dim());
        for &i in batch {
            input.extend_from_slice(data.row(i));
        }
        let mut acts = Vec::with_capacity(self.spans.len() + 1);
        acts.push(input);
        let last = self.spans.len() - 1;
        for (l, span) in self.spans.iter().enumerate() {
            let w = &x[span.weights..span.bias];
            let bias = &x[span.bias..span.bias + span.fan_out];
            let mut z = Vec::with_capacity(b * span.fan_out);
            for _ in 0..b {
                z.extend_from_slice(bias);
            }
            matmul(
                b,
                span.fan_in,
                span.fan_out,
                1.0,
                &acts[l],
                Layout::Normal,
                w,
                Layout::Normal,
                1.0,
                &mut z,
            );
            if l < last {
                for v in z.iter_mut() {
                    if !(*v > 0.0) {
                        *v = 0.0;
                    }
                }
            }
            acts.push(z);
        }
        Forward { acts }
    }

    fn residuals(&self, data: &Dataset, fwd: &Forward, batch: &[usize]) -> Vec<f64> {
        let out = fwd.acts.last().expect("output layer");
        let mut diff = out.clone();
        match self.target {
            Target::OneHot { classes } => {
                for (row, &i) in diff.chunks_exact_mut(classes).zip(batch) {
                    let label = data.label(i).expect("labelled dataset") as usize;
                    row[label] -= 1.0;
                }
            }
            Target::Reconstruction => {
                for (d, y) in diff.iter_mut().zip(&fwd.acts[0]) {
                    *d -= y;
                }
            }
        }
        diff
    }

    fn regularizer(&self, x: &[f64]) -> f64 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        let sq: f64 = self
            .spans
            .iter()
            .map(|s| crate::tensor::sum_squares(&x[s.weights..s.bias]))
            .sum();
        0.5 * self.l2 * sq
    }

    fn loss_on(
        &self,
        data: &Dataset,
        x: &[f64],
        batch: &[usize],
        grad: Option<&mut [f64]>,
    ) -> Result<Loss> {
        validate_point(x, self.dim())?;
        validate_batch(batch, data.len())?;
        let fwd = self.forward(data, x, batch);
        let diff = self.residuals(data, &fwd, batch);
        let b = batch.len() as f64;
        let data_loss = diff.iter().map(|d| d * d).sum::<f64>() / (2.0 * b);
        let loss = Loss {
            data: data_loss,
            total: data_loss + self.regularizer(x),
        };
        if let Some(g) = grad {
            validate_point(g, self.dim())?;
            self.backward(x, fwd, diff, batch.len(), g);
        }
        Ok(loss)
    }

    fn backward(&self, x: &[f64], fwd: Forward, mut delta: Vec<f64>, b: usize, g: &mut [f64]) {
        let inv_b = 1.0 / b as f64;
        delta.iter_mut().for_each(|d| *d *= inv_b);
        for (l, span) in self.spans.iter().enumerate().rev() {
            let input = &fwd.acts[l];
            let w = &x[span.weights..span.bias];
            let (gw, rest) = g[span.weights..].split_at_mut(span.bias - span.weights);
            let gb = &mut rest[..span.fan_out];
            // dW = inputᵀ · delta + λ W
            gw.copy_from_slice(w);
            matmul(
                span.fan_in,
                b,
                span.fan_out,
                1.0,
                input,
                Layout::Transposed,
                &delta,
                Layout::Normal,
                self.l2,
                gw,
            );
            gb.iter_mut().for_each(|v| *v = 0.0);
            for row in delta.chunks_exact(span.fan_out) {
                for (acc, d) in gb.iter_mut().zip(row) {
                    *acc += d;
                }
            }
            if l > 0 {
                let mut upstream = vec![0.0; b * span.fan_in];
                matmul(
                    b,
                    span.fan_out,
                    span.fan_in,
                    1.0,
                    &delta,
                    Layout::Normal,
                    w,
                    Layout::Transposed,
                    0.0,
                    &mut upstream,
                );
                for (u, a) in upstream.iter_mut().zip(input) {
                    if !(*a > 0.0) {
                        *u = 0.0;
                    }
                }
                delta = upstream;
            }
        }
    }
}

impl FiniteSumObjective for MlpLsrProblem {
    fn num_samples(&self) -> usize {
        self.train.len()
    }

    fn dim(&self) -> usize {
        let last = self.spans.last().expect("at least one layer");
        last.bias + last.fan_out
    }

    fn groups(&self) -> Vec<ParamGroup> {
        self.spans
            .iter()
            .enumerate()
            .map(|(l, s)| ParamGroup::new(format!("layer{l}"), s.weights..s.bias + s.fan_out))
            .collect()
    }

    fn evaluate(&self, x: &[f64], batch: &[usize], grad: Option<&mut [f64]>) -> Result<Loss> {
        self.loss_on(&self.train, x, batch, grad)
    }

    fn held_out_loss(&self, x: &[f64]) -> Option<Result<Loss>> {
        let test = self.test.as_ref()?;
        let all: Vec<usize> = (0..test.len()).collect();
        Some(self.loss_on(test, x, &all, None))
    }

    fn value_with_pattern(&self, x: &[f64], batch: &[usize]) -> Result<(f64, Option<Vec<bool>>)> {
        validate_point(x, self.dim())?;
        validate_batch(batch, self.train.len())?;
        let fwd = self.forward(&self.train, x, batch);
        let diff = self.residuals(&self.train, &fwd, batch);
        let value = diff.iter().map(|d| d * d).sum::<f64>() / (2.0 * batch.len() as f64)
            + self.regularizer(x);
        let hidden = &fwd.acts[1..fwd.acts.len() - 1];
        let pattern = hidden.iter().flat_map(|h| h.iter().map(|v| *v > 0.0)).collect();
        Ok((value, Some(pattern)))
    }
}
