//! Fractional Gaussian noise by circulant embedding (Davies–Harte).

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{to_unit_mean_load, GeneratorMeta, TrafficSeries};
use crate::error::{Error, Result};
use crate::rng;

pub const MIN_FGN_LENGTH: usize = 64;

/// Autocovariance of unit-variance fGn at lag `k`.
fn autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Zero-mean, unit-variance fGn increments with exponent `hurst`.
///
/// The covariance is embedded in a circulant matrix of size `2n` whose
/// eigenvalues are non-negative for every `hurst` in (0, 1); the sample is the
/// real part of a spectrally weighted complex Gaussian vector.
pub fn fgn_increments<R: Rng + ?Sized>(hurst: f64, n: usize, rng: &mut R) -> Vec<f64> {
    assert!(hurst > 0.0 && hurst < 1.0, "hurst must lie in (0, 1)");
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![rng.sample(StandardNormal)];
    }
    let m = 2 * n;
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = planner.plan_fft_forward(m);

    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex::new(autocovariance(hurst, lag), 0.0)
        })
        .collect();
    fft.process(&mut row);

    let scale = 1.0 / m as f64;
    let mut spectrum: Vec<Complex<f64>> = row
        .iter()
        .map(|ev| {
            // tiny negative eigenvalues are round-off
            let amp = (ev.re.max(0.0) * scale).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(amp * re, amp * im)
        })
        .collect();
    fft.process(&mut spectrum);
    spectrum[..n].iter().map(|c| c.re).collect()
}

/// Signed long-memory signal with scaling exponent `exponent` in (0, 2).
///
/// Below 1 this is fGn with that Hurst exponent; from 1 upward it is the
/// running sum of fGn with exponent `exponent - 1` (an fBm path), whose
/// detrended fluctuations scale with exponent `exponent`.
pub fn long_memory_signal<R: Rng + ?Sized>(exponent: f64, n: usize, rng: &mut R) -> Vec<f64> {
    assert!(
        exponent > 0.0 && exponent < 2.0,
        "exponent must lie in (0, 2)"
    );
    if exponent < 1.0 {
        return fgn_increments(exponent, n, rng);
    }
    let inner = (exponent - 1.0).clamp(0.02, 0.98);
    let mut path = fgn_increments(inner, n, rng);
    let mut acc = 0.0;
    for v in path.iter_mut() {
        acc += *v;
        *v = acc;
    }
    path
}

/// Non-negative fGn load series: raw increments shifted by their minimum and
/// rescaled to unit mean.
pub fn generate_fgn(hurst: f64, length: usize, seed: u64) -> Result<TrafficSeries> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::config(format!(
            "hurst must lie in (0, 1), got {hurst}"
        )));
    }
    if length < MIN_FGN_LENGTH {
        return Err(Error::config(format!(
            "fgn length must be at least {MIN_FGN_LENGTH}, got {length}"
        )));
    }
    let mut stream = rng::substream(seed, "fgn");
    let mut values = fgn_increments(hurst, length, &mut stream);
    to_unit_mean_load(&mut values);
    TrafficSeries::new(values, GeneratorMeta::fgn(hurst, seed))
}
