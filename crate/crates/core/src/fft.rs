//! Iterative radix-2 complex FFT.
//!
//! Grid sizes are powers of two by construction, so a plain Cooley-Tukey
//! decimation-in-time transform is all that is needed. Twiddle factors are
//! evaluated per index with `libm::sincos` (no recurrences) to keep round-trip
//! error at a few ulps.

use alloc::vec::Vec;
use num_complex::Complex;

pub type C64 = Complex<f64>;

/// In-place FFT. `inverse = false` computes `X_k = sum_j x_j e^{-2pi i jk/n}`,
/// `inverse = true` uses the `+` sign. No normalization is applied.
pub fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }

    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        if j > i {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2usize;
    while len <= n {
        let half = len / 2;
        let ang0 = sign * 2.0 * core::f64::consts::PI / len as f64;
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let (s, c) = libm::sincos(ang0 * j as f64);
                let w = C64::new(c, s);
                let a = buf[start + j];
                let b = buf[start + j + half] * w;
                buf[start + j] = a + b;
                buf[start + j + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Forward FFT of real samples into a freshly allocated buffer.
pub fn fft_real_forward(samples: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf
}
