//! Phase and frequency extraction for sampled complex series.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};


use crate::linalg::{C64, ZERO};
use crate::spectral::difference_stencil;

/// In-place iterative radix-2 FFT. `buf.len()` must be a power of two.
/// The inverse transform is unnormalised.
pub fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let step = C64::from_polar(1.0, sign * TAU / len as f64);
        for start in (0..n).step_by(len) {
            let mut w = C64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
                w *= step;
            }
        }
        len <<= 1;
    }
}

/// Analytic signal `x + i·H[x]` of a real series sampled on a uniform grid,
/// via FFT with zero padding to at least twice the length.
pub fn analytic_signal(x: &[f64]) -> Vec<C64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let size = (2 * n).next_power_of_two();
    let mut buf = vec![ZERO; size];
    for (b, v) in buf.iter_mut().zip(x) {
        *b = C64::new(*v, 0.0);
    }
    fft_in_place(&mut buf, false);
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 || k == size / 2 {
            continue;
        } else if k < size / 2 {
            *b *= 2.0;
        } else {
            *b = ZERO;
        }
    }
    fft_in_place(&mut buf, true);
    let scale = 1.0 / size as f64;
    buf.truncate(n);
    buf.iter().map(|z| z * scale).collect()
}

/// Removes `2π` jumps between consecutive phases.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let mut d = p - q;
            while d > PI {
                d -= TAU;
                offset -= TAU;
            }
            while d < -PI {
                d += TAU;
                offset += TAU;
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

/// Second-order derivative of a sampled series (one-sided at the ends).
pub fn gradient(times: &[f64], values: &[f64]) -> Vec<f64> {
    if times.len() < 3 {
        return vec![0.0; times.len()];
    }
    (0..times.len())
        .map(|k| {
            let (idx, w) = difference_stencil(times, k);
            w[0] * values[idx[0]] + w[1] * values[idx[1]] + w[2] * values[idx[2]]
        })
        .collect()
}

/// Median of the finite entries, `NaN` when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
