//! Composite quadrature on (possibly non-uniform) grids.

use alloc::vec;
use alloc::vec::Vec;

/// Composite Simpson weights for the nodes `times`.
///
/// Interval pairs use the non-uniform three-point rule; with an odd number of
/// intervals the last one is integrated with the three-point formula over
/// the final three nodes. On a uniform grid every weight is positive and the
/// weights sum to `times[last] − times[0]`.
pub fn simpson_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            let h = times[1] - times[0];
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
            return w;
        }
        _ => {}
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut i = 0;
    while i < paired {
        let h0 = times[i + 1] - times[i];
        let h1 = times[i + 2] - times[i + 1];
        let s = (h0 + h1) / 6.0;
        w[i] += s * (2.0 - h1 / h0);
        w[i + 1] += s * (h0 + h1) * (h0 + h1) / (h0 * h1);
        w[i + 2] += s * (2.0 - h0 / h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        let (a, b, c) = (n - 3, n - 2, n - 1);
        let h0 = times[b] - times[a];
        let h1 = times[c] - times[b];
        w[c] += (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        w[b] += (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        w[a] -= h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    w
}

pub fn simpson(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    simpson_weights(times)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Running integral `∫_{t_0}^{t_k} f` by the trapezoid rule.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    debug_assert_eq!(times.len(), values.len());
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for k in 0..times.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// `n + 1` equally spaced nodes spanning `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| {
            if k == n {
                b
            } else {
                a + (b - a) * k as f64 / n as f64
            }
        })
        .collect()
}
