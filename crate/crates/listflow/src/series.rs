//! Small helpers for uniformly sampled time series: finite-difference
//! derivatives, cumulative quadrature, and convergence-order estimates.
//!
//! Derivatives use five-point fourth-order stencils everywhere when the
//! series is long enough (biased stencils near the ends), so the stencil
//! error stays far below the O(h²) spatial error of the fields being
//! differentiated. Monotonicity checks use plain forward differences.

/// d/dt of a uniformly sampled series. Fourth order for len ≥ 5,
/// second order for 3 ≤ len < 5, first order for len = 2.
pub fn derivative(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 2, "need at least two samples to differentiate");
    assert!(dt > 0.0);
    let f = values;
    let mut out = vec![0.0; n];
    if n >= 5 {
        out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4])
            / (12.0 * dt);
        out[1] =
            (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * dt);
        for j in 2..n - 2 {
            out[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * dt);
        }
        out[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4]
            - f[n - 5])
            / (12.0 * dt);
        out[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
            + 3.0 * f[n - 5])
            / (12.0 * dt);
    } else if n >= 3 {
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
        for j in 1..n - 1 {
            out[j] = (f[j + 1] - f[j - 1]) / (2.0 * dt);
        }
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    } else {
        let d = (f[1] - f[0]) / dt;
        out[0] = d;
        out[1] = d;
    }
    out
}

/// Cumulative trapezoid of (times, values); entry j approximates
/// ∫_{t_0}^{t_j} v dt. Exact for piecewise-linear integrands.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for j in 0..times.len() {
        if j > 0 {
            acc += 0.5 * (values[j - 1] + values[j]) * (times[j] - times[j - 1]);
        }
        out.push(acc);
    }
    out
}

/// Observed convergence order from two error levels under refinement by
/// `ratio` (e.g. ratio 2 for h → h/2).
pub fn convergence_order(err_coarse: f64, err_fine: f64, ratio: f64) -> f64 {
    assert!(ratio > 1.0);
    if err_fine == 0.0 {
        return f64::INFINITY;
    }
    (err_coarse / err_fine).ln() / ratio.ln()
}

/// Largest per-step decrease of a series (0 when nondecreasing).
pub fn max_forward_drop(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max)
}
