use crate::tensor::SeededRng;

/// Half-width `√(6 / (fan_in + fan_out))` of the normalized uniform initializer.
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Parameters for a network with the given layer widths, in the
/// [`MlpLsrProblem`](super::MlpLsrProblem) layout: each weight uniform in
/// `[-bound, bound]` for its layer, biases zero.
pub fn glorot_init(sizes: &[usize], rng: &mut SeededRng) -> Vec<f64> {
    assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s >= 1), "need >= 2 non-empty layers");
    let total: usize = sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum();
    let mut x = Vec::with_capacity(total);
    for pair in sizes.windows(2) {
        let bound = glorot_bound(pair[0], pair[1]);
        x.extend((0..pair[0] * pair[1]).map(|_| rng.uniform(-bound, bound)));
        x.extend(std::iter::repeat(0.0).take(pair[1]));
    }
    x
}
