use super::FiniteSumObjective;
use crate::error::{Error, Result};

/// Base step for central differences; the step on coordinate `i` is
/// `h · max(1, |x_i|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Central-difference gradient over every coordinate.
pub fn finite_diff_grad(
    obj: &dyn FiniteSumObjective,
    x: &[f64],
    batch: &[usize],
    h: f64,
) -> Result<Vec<f64>> {
    let coords: Vec<usize> = (0..x.len()).collect();
    finite_diff_coords(obj, x, batch, &coords, h)
}

/// Central-difference partial derivatives for the listed coordinates only.
pub fn finite_diff_coords(
    obj: &dyn FiniteSumObjective,
    x: &[f64],
    batch: &[usize],
    coords: &[usize],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    coords
        .iter()
        .map(|&i| {
            let (plus, minus, step) = probe_pair(obj, &mut probe, batch, i, h)?;
            Ok((plus.0 - minus.0) / (2.0 * step))
        })
        .collect()
}

/// A central difference together with whether its two probes fell in
/// different smooth pieces of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralDiff {
    pub value: f64,
    pub kink: bool,
}

/// Central differences for the listed coordinates, flagging any coordinate
/// whose probes change the activation pattern.
pub fn central_diffs_with_kinks(
    obj: &dyn FiniteSumObjective,
    x: &[f64],
    batch: &[usize],
    coords: &[usize],
    h: f64,
) -> Result<Vec<CentralDiff>> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("step must be positive, got {h}")));
    }
    let center = obj.value_with_pattern(x, batch)?.1;
    let mut probe = x.to_vec();
    coords
        .iter()
        .map(|&i| {
            let (plus, minus, step) = probe_pair(obj, &mut probe, batch, i, h)?;
            let kink = plus.1 != minus.1 || plus.1 != center;
            Ok(CentralDiff {
                value: (plus.0 - minus.0) / (2.0 * step),
                kink,
            })
        })
        .collect()
}

/// Forward, backward and central differences at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSided {
    pub forward: f64,
    pub backward: f64,
    pub central: f64,
    /// The two probes fall in different smooth pieces (a ReLU flipped), so
    /// the central difference straddles a kink.
    pub kink: bool,
}

impl OneSided {
    pub fn discrepancy(&self) -> f64 {
        (self.forward - self.backward).abs()
    }
}

pub fn one_sided_diffs(
    obj: &dyn FiniteSumObjective,
    x: &[f64],
    batch: &[usize],
    coord: usize,
    h: f64,
) -> Result<OneSided> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    let center = obj.value_with_pattern(x, batch)?;
    let (plus, minus, step) = probe_pair(obj, &mut probe, batch, coord, h)?;
    let kink = match (&plus.1, &minus.1) {
        (Some(p), Some(m)) => p != m || center.1.as_ref().is_some_and(|c| c != p),
        _ => false,
    };
    Ok(OneSided {
        forward: (plus.0 - center.0) / step,
        backward: (center.0 - minus.0) / step,
        central: (plus.0 - minus.0) / (2.0 * step),
        kink,
    })
}

type Probe = (f64, Option<Vec<bool>>);

fn probe_pair(
    obj: &dyn FiniteSumObjective,
    probe: &mut [f64],
    batch: &[usize],
    i: usize,
    h: f64,
) -> Result<(Probe, Probe, f64)> {
    let xi = probe[i];
    let hi = h * xi.abs().max(1.0);
    // Divide by the step actually representable around x_i.
    let up = xi + hi;
    let step = up - xi;
    probe[i] = up;
    let plus = obj.value_with_pattern(probe, batch)?;
    probe[i] = xi - step;
    let minus = obj.value_with_pattern(probe, batch)?;
    probe[i] = xi;
    Ok((plus, minus, step))
}
