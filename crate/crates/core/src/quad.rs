//! Composite Simpson quadrature on uniform grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Quadrature weights for `n` equally spaced samples with spacing `h`.
///
/// Odd `n` uses composite Simpson. Even `n >= 4` closes the last three
/// intervals with the 3/8 rule. `n = 2` is the trapezoid.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        _ => {
            let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
            if simpson_end > 0 {
                w[0] += h / 3.0;
                w[simpson_end] += h / 3.0;
                for (i, wi) in w.iter_mut().enumerate().take(simpson_end).skip(1) {
                    *wi += if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
                }
            }
            if n % 2 == 0 {
                let c = 3.0 * h / 8.0;
                w[n - 4] += c;
                w[n - 3] += 3.0 * c;
                w[n - 2] += 3.0 * c;
                w[n - 1] += c;
            }
        }
    }
    w
}

/// Integral of complex samples with spacing `h`.
pub fn integrate(values: &[C64], h: f64) -> C64 {
    let n = values.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    if n % 2 == 1 {
        // Fast path without allocating weights.
        let mut acc = values[0] + values[n - 1];
        for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
            acc += if i % 2 == 1 { v * 4.0 } else { v * 2.0 };
        }
        return acc * (h / 3.0);
    }
    simpson_weights(n, h)
        .iter()
        .zip(values)
        .fold(C64::new(0.0, 0.0), |acc, (w, v)| acc + v * *w)
}

/// Integral of real samples with spacing `h`.
pub fn integrate_real(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Double integral of a row-major `nr x nl` array.
pub fn integrate_2d(values: &[C64], nr: usize, nl: usize, hr: f64, hl: f64) -> C64 {
    debug_assert_eq!(values.len(), nr * nl);
    let wr = simpson_weights(nr, hr);
    let wl = simpson_weights(nl, hl);
    let mut acc = C64::new(0.0, 0.0);
    for (i, row) in values.chunks_exact(nl).enumerate() {
        let inner = wl
            .iter()
            .zip(row)
            .fold(C64::new(0.0, 0.0), |a, (w, v)| a + v * *w);
        acc += inner * wr[i];
    }
    acc
}
