//! Small composite quadrature engine for one-dimensional integrals.
//!
//! The evolution kernels use their own grid-aligned sums; this module covers
//! the free-standing integrals (closed-form identity checks, mollifier mass,
//! time integration of sampled series).

use alloc::vec::Vec;

/// Composite midpoint rule with `n` cells on [a, b].
pub fn composite_midpoint(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n > 0 && b > a);
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Composite trapezoid rule with `n` cells on [a, b].
pub fn composite_trapezoid(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n > 0 && b > a);
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

/// Trapezoid rule over uniformly spaced samples.
pub fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    (inner + 0.5 * (values[0] + values[values.len() - 1])) * h
}

/// Running trapezoid antiderivative at each sample time.
pub fn cumulative_trapezoid(values: &[f64], times: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), times.len());
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..values.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson rule over uniformly spaced samples. With an odd interval
/// count the final interval falls back to the trapezoid rule.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let intervals = n - 1;
    let even_intervals = intervals - intervals % 2;
    let mut acc = values[0] + values[even_intervals];
    let mut i = 1;
    while i < even_intervals {
        acc += 4.0 * values[i];
        if i + 1 < even_intervals {
            acc += 2.0 * values[i + 1];
        }
        i += 2;
    }
    let mut total = acc * h / 3.0;
    if intervals % 2 == 1 {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}
