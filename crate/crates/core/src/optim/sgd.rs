use super::{check_rates, StepRule};
use crate::error::Result;
use crate::problems::ParamGroup;
use crate::tensor::check_finite;

/// `x_{t+1} = x_t − η_t g_t`.
pub fn sgd_step(x: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
    let mut next = x.to_vec();
    Sgd.step(&mut next, g, &[ParamGroup::new("x", 0..x.len())], &[eta])?;
    Ok(next)
}

/// Plain SGD; stateless.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sgd;

impl StepRule for Sgd {
    fn step(&mut self, x: &mut [f64], g: &[f64], groups: &[ParamGroup], rates: &[f64]) -> Result<()> {
        check_rates(x, g, groups, rates)?;
        let mut probe = [0.0f64; 8];
        for (group, &eta) in groups.iter().zip(rates) {
            let r = group.range.clone();
            for (xs, gs) in x[r.clone()].chunks_mut(8).zip(g[r].chunks(8)) {
                for (k, (xi, gi)) in xs.iter_mut().zip(gs).enumerate() {
                    *xi -= eta * gi;
                    // Stays 0 unless some entry is NaN or infinite.
                    probe[k] += *xi * 0.0;
                }
            }
        }
        if probe.iter().sum::<f64>() == 0.0 {
            Ok(())
        } else {
            check_finite(x, "sgd update")
        }
    }
}
