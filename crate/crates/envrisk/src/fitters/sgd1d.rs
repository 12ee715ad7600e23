//! One-pass averaged SGD for the one-dimensional population squared-hinge
//! problem `min E max(0, 1 - y (w x + b))^2`. Used to locate the optimal
//! linear predictor of a single-index classification model, where the first
//! order condition zeroes every other coordinate.

/// Runs `n_steps` of SGD with step `step0 / sqrt(t)` over fresh draws from
/// `sampler` and returns the averaged iterate `(w, b)`.
pub fn one_pass_sgd_1d(
    mut sampler: impl FnMut() -> (f64, f64),
    init: (f64, f64),
    step0: f64,
    n_steps: usize,
) -> (f64, f64) {
    let (mut w, mut b) = init;
    let (mut w_sum, mut b_sum) = (0.0, 0.0);
    for t in 1..=n_steps {
        let (x, y) = sampler();
        let m = 1.0 - y * (w * x + b);
        if m > 0.0 {
            let step = step0 / (t as f64).sqrt();
            let g = -2.0 * y * m;
            w -= step * g * x;
            b -= step * g;
        }
        w_sum += w;
        b_sum += b;
    }
    (w_sum / n_steps as f64, b_sum / n_steps as f64)
}
