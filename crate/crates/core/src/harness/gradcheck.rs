//! Analytic gradients against central differences at random points.

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::problems::{central_diffs_with_kinks, minibatch_grad, FiniteSumObjective, ParamGroup};
use crate::tensor::SeededRng;

/// Resampling budget for points that land on a kink, per requested point.
const ATTEMPTS_PER_POINT: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct PointCheck {
    /// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)` over the checked
    /// coordinates.
    pub rel_error: f64,
    pub max_abs_error: f64,
    pub coords_checked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub points: Vec<PointCheck>,
    pub max_rel_error: f64,
    /// Points discarded because a probe crossed a ReLU kink.
    pub kink_points_skipped: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Test hook: perturb the analytic gradient so the check must fail.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradcheckOptions {
    pub corrupt_gradient: bool,
}

/// Coordinates to check: all of them, or `max` spread evenly over groups.
fn pick_coords(groups: &[ParamGroup], max: usize, rng: &mut SeededRng) -> Vec<usize> {
    let dim: usize = groups.iter().map(ParamGroup::len).sum();
    if dim <= max {
        return groups.iter().flat_map(|g| g.range.clone()).collect();
    }
    let per = (max / groups.len()).max(1);
    let mut coords = Vec::new();
    for g in groups {
        let k = per.min(g.len());
        let mut pick: Vec<usize> = rng.sample_indices(g.len(), k).into_iter().map(|i| g.range.start + i).collect();
        pick.sort_unstable();
        coords.extend(pick);
    }
    coords
}

/// Checks `points` random non-kink points drawn by `draw`.
pub fn check_gradients(
    obj: &dyn FiniteSumObjective,
    mut draw: impl FnMut(&mut SeededRng) -> Vec<f64>,
    cfg: &super::config::GradcheckConfig,
    seed: u64,
    opts: GradcheckOptions,
) -> Result<GradcheckReport> {
    let mut rng = SeededRng::new(seed);
    let groups = obj.groups();
    let n = obj.num_samples();
    let mut points = Vec::with_capacity(cfg.points);
    let mut skipped = 0;
    let mut attempts = 0;
    while points.len() < cfg.points {
        if attempts == cfg.points * ATTEMPTS_PER_POINT {
            return Err(Error::Config(format!(
                "gradcheck: only {} of {} points avoided ReLU kinks after {attempts} draws",
                points.len(),
                cfg.points
            )));
        }
        attempts += 1;
        let x = draw(&mut rng);
        let batch = rng.sample_indices(n, cfg.batch.min(n));
        let coords = pick_coords(&groups, cfg.max_coords, &mut rng);
        let numeric = central_diffs_with_kinks(obj, &x, &batch, &coords, cfg.step)?;
        if numeric.iter().any(|d| d.kink) {
            skipped += 1;
            continue;
        }
        let full = minibatch_grad(obj, &x, &batch)?;
        let mut analytic: Vec<f64> = coords.iter().map(|&i| full[i]).collect();
        if opts.corrupt_gradient {
            analytic.iter_mut().for_each(|a| *a = *a * 1.05 + 1e-3);
        }
        let (mut diff2, mut a2, mut n2, mut max_abs) = (0.0, 0.0, 0.0, 0.0f64);
        for (a, d) in analytic.iter().zip(&numeric) {
            diff2 += (a - d.value).powi(2);
            a2 += a * a;
            n2 += d.value * d.value;
            max_abs = max_abs.max((a - d.value).abs());
        }
        let scale = f64::max(a2, n2).sqrt().max(1e-12);
        points.push(PointCheck {
            rel_error: diff2.sqrt() / scale,
            max_abs_error: max_abs,
            coords_checked: coords.len(),
        });
    }
    let max_rel_error = points.iter().map(|p| p.rel_error).fold(0.0, f64::max);
    Ok(GradcheckReport {
        max_rel_error,
        kink_points_skipped: skipped,
        tolerance: cfg.tolerance,
        passed: max_rel_error <= cfg.tolerance,
        points,
    })
}

/// Gradient check for a configured problem. Points come from the problem's
/// initializer, shifted by a small uniform jitter so zero-initialized biases
/// do not sit exactly on a kink.
pub fn gradcheck(config: &ExperimentConfig, limit: Option<usize>, opts: GradcheckOptions) -> Result<GradcheckReport> {
    config.validate()?;
    let built = config.build(limit)?;
    let init = built.init.clone();
    let draw = move |rng: &mut SeededRng| {
        let mut x = init.draw(rng);
        x.iter_mut().for_each(|v| *v += rng.uniform(-0.05, 0.05));
        x
    };
    check_gradients(built.objective.as_ref(), draw, &config.gradcheck, config.seed, opts)
}
