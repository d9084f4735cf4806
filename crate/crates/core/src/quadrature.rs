//! Composite rules on uniform grids.

use num_complex::Complex64 as C64;

/// Fourth-order composite rule over `values.len() − 1` intervals of width `h`.
///
/// Simpson for an even interval count; for an odd count the last three
/// intervals use Simpson's 3/8 rule. One interval falls back to the trapezoid.
pub fn simpson(values: &[C64], h: f64) -> C64 {
    let m = values.len().saturating_sub(1);
    match m {
        0 => C64::new(0.0, 0.0),
        1 => (values[0] + values[1]) * (0.5 * h),
        _ if m.is_multiple_of(2) => simpson_even(values, h),
        3 => three_eighths(values, h),
        _ => simpson_even(&values[..m - 2], h) + three_eighths(&values[m - 3..], h),
    }
}

fn simpson_even(values: &[C64], h: f64) -> C64 {
    let m = values.len() - 1;
    debug_assert!(m.is_multiple_of(2));
    let mut odd = C64::new(0.0, 0.0);
    let mut even = C64::new(0.0, 0.0);
    for (i, v) in values.iter().enumerate().take(m).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    (values[0] + values[m] + odd * 4.0 + even * 2.0) * (h / 3.0)
}

fn three_eighths(values: &[C64], h: f64) -> C64 {
    debug_assert_eq!(values.len(), 4);
    (values[0] + (values[1] + values[2]) * 3.0 + values[3]) * (3.0 * h / 8.0)
}

/// Real-valued convenience wrapper.
pub fn simpson_real(values: &[f64], h: f64) -> f64 {
    let c: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    simpson(&c, h).re
}
