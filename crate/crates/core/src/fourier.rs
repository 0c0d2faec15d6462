use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Signed DFT frequency index for bin `k` of an `n`-point transform.
pub(crate) fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Angular wavenumbers of an `n`-point periodic grid with spacing `step`.
pub(crate) fn wavenumbers(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * signed_index(k, n) as f64 / (n as f64 * step)).collect()
}

/// Forward/inverse FFT pair of one length, with unnormalised inverse.
pub(crate) struct FftPair {
    pub(crate) forward: Arc<dyn Fft<f64>>,
    pub(crate) inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }
}

/// Multipliers `(ik)^order` for spectral differentiation; the unpaired
/// Nyquist bin is zeroed for odd orders.
pub(crate) fn derivative_multipliers(n: usize, step: f64, order: u32) -> Vec<C64> {
    let ks = wavenumbers(n, step);
    ks.iter()
        .enumerate()
        .map(|(idx, &k)| {
            if order % 2 == 1 && n.is_multiple_of(2) && idx == n / 2 {
                C64::default()
            } else {
                C64::new(0.0, k).powu(order)
            }
        })
        .collect()
}

/// Fraction of spectral energy in the top quarter of frequencies.
pub(crate) fn spectral_tail(spectrum: &[C64]) -> f64 {
    let n = spectrum.len();
    let total: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let cutoff = (3 * n / 8) as i64;
    let tail: f64 = spectrum
        .iter()
        .enumerate()
        .filter(|(k, _)| signed_index(*k, n).abs() > cutoff)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    tail / total
}
