//! Detrended fluctuation analysis, mono- and multifractal.
//!
//! The series is integrated into a profile, the profile is cut into
//! non-overlapping segments of length `s` starting from both ends, a linear
//! trend is removed from every segment, and the residual variances are
//! combined into the `q`-th order fluctuation function `F_q(s)`. The
//! generalized Hurst exponent `h(q)` is the slope of `ln F_q(s)` against
//! `ln s`.

use super::regression::ols;
use super::{EstimatorMethod, HurstEstimate, MultifractalSpectrum};
use crate::error::{Error, Result};

pub const MIN_DFA_LENGTH: usize = 256;
pub const MIN_MFDFA_LENGTH: usize = 1024;
pub const DEFAULT_MIN_SCALE: usize = 16;
pub const DEFAULT_SCALE_COUNT: usize = 20;

/// Lower bound on a segment's RMS fluctuation entering non-positive moments.
pub const SEGMENT_FLUCTUATION_FLOOR: f64 = 1e-12;
const VARIANCE_FLOOR: f64 = SEGMENT_FLUCTUATION_FLOOR * SEGMENT_FLUCTUATION_FLOOR;

/// Most negative `Δh` accepted as estimation noise.
const DELTA_H_NOISE: f64 = -0.1;

/// `{−5, −3, −2, −1, 1, 2, 3, 5}`.
pub fn default_q_grid() -> Vec<f64> {
    vec![-5.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 5.0]
}

/// `steps` evenly spaced orders from `q_min` to `q_max`, with `q = 0`
/// dropped and `q = 2` inserted if the spacing misses it.
pub fn q_grid_linspace(q_min: f64, q_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(q_min < q_max) || steps < 2 {
        return Err(Error::config(
            "q grid needs q_min < q_max and at least two steps",
        ));
    }
    let mut grid: Vec<f64> = (0..steps)
        .map(|i| q_min + (q_max - q_min) * i as f64 / (steps - 1) as f64)
        .filter(|q| q.abs() > 1e-9)
        .collect();
    if !grid.iter().any(|q| (q - 2.0).abs() < 1e-12) {
        grid.push(2.0);
        grid.sort_by(f64::total_cmp);
    }
    Ok(grid)
}

/// Up to `count` distinct integer scales, logarithmically spaced over
/// `[min, max]`.
pub fn log_spaced_scales(min: usize, max: usize, count: usize) -> Vec<usize> {
    if count <= 1 || min >= max {
        return vec![min];
    }
    let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
    let mut scales: Vec<usize> = (0..count)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .exp()
                .round() as usize
        })
        .map(|s| s.clamp(min, max))
        .collect();
    scales.dedup();
    scales
}

fn resolve_scale_range(
    len: usize,
    scale_range: Option<(usize, usize)>,
    min_allowed: usize,
) -> Result<(usize, usize)> {
    let (lo, hi) = scale_range.unwrap_or((DEFAULT_MIN_SCALE, len / 4));
    if lo < min_allowed || hi > len / 4 || lo >= hi {
        return Err(Error::config(format!(
            "scale range ({lo}, {hi}) must satisfy {min_allowed} <= min < max <= {}",
            len / 4
        )));
    }
    Ok((lo, hi))
}

fn check_not_constant(series: &[f64]) -> Result<()> {
    let first = series[0];
    if series.iter().all(|v| *v == first) {
        return Err(Error::DegenerateSeries(
            "series is constant; fluctuations vanish at every scale".into(),
        ));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("series contains non-finite values"));
    }
    Ok(())
}

fn profile(series: &[f64]) -> Vec<f64> {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let mut acc = 0.0;
    series
        .iter()
        .map(|v| {
            acc += v - mean;
            acc
        })
        .collect()
}

/// Residual variance of one segment around its least-squares line.
fn detrended_variance(segment: &[f64]) -> f64 {
    let s = segment.len() as f64;
    let t_mean = (s - 1.0) / 2.0;
    let y_mean = segment.iter().sum::<f64>() / s;
    let mut syy = 0.0;
    let mut sty = 0.0;
    for (t, y) in segment.iter().enumerate() {
        let dy = y - y_mean;
        syy += dy * dy;
        sty += (t as f64 - t_mean) * dy;
    }
    let stt = s * (s * s - 1.0) / 12.0;
    ((syy - sty * sty / stt) / s).max(0.0)
}

/// Segment variances at `scale`, forward and backward segmentations pooled.
fn segment_variances(profile: &[f64], scale: usize) -> Vec<f64> {
    let n = profile.len();
    let segments = n / scale;
    let offset = n - segments * scale;
    let forward = profile[..segments * scale].chunks_exact(scale);
    let backward = profile[offset..].chunks_exact(scale);
    forward.chain(backward).map(detrended_variance).collect()
}

fn fluctuation(variances: &[f64], q: f64) -> f64 {
    let n = variances.len() as f64;
    if q.abs() < 1e-12 {
        let mean_log = variances
            .iter()
            .map(|v| v.max(VARIANCE_FLOOR).ln())
            .sum::<f64>()
            / n;
        return (0.5 * mean_log).exp();
    }
    let moment = if q < 0.0 {
        variances
            .iter()
            .map(|v| v.max(VARIANCE_FLOOR).powf(q / 2.0))
            .sum::<f64>()
            / n
    } else {
        variances.iter().map(|v| v.powf(q / 2.0)).sum::<f64>() / n
    };
    moment.powf(1.0 / q)
}

/// DFA-1 Hurst exponent: slope of `ln F_2(s)` against `ln s`.
///
/// `scale_range` defaults to `(16, len / 4)`; about twenty log-spaced scales
/// are fitted.
pub fn estimate_hurst_dfa(
    series: &[f64],
    scale_range: Option<(usize, usize)>,
) -> Result<HurstEstimate> {
    if series.len() < MIN_DFA_LENGTH {
        return Err(Error::InsufficientData {
            needed: MIN_DFA_LENGTH,
            got: series.len(),
        });
    }
    check_not_constant(series)?;
    let range = resolve_scale_range(series.len(), scale_range, 8)?;
    let scales = log_spaced_scales(range.0, range.1, DEFAULT_SCALE_COUNT);
    let profile = profile(series);

    let mut log_s = Vec::with_capacity(scales.len());
    let mut log_f = Vec::with_capacity(scales.len());
    for &s in &scales {
        let f = fluctuation(&segment_variances(&profile, s), 2.0);
        if !(f > 0.0) {
            return Err(Error::DegenerateSeries(format!(
                "zero detrended fluctuation at scale {s}"
            )));
        }
        log_s.push((s as f64).ln());
        log_f.push(f.ln());
    }
    let fit = ols(&log_s, &log_f)?;
    Ok(HurstEstimate {
        hurst: fit.slope,
        stderr: fit.slope_stderr,
        method: EstimatorMethod::DFA,
        scale_range: range,
    })
}

/// Multifractal DFA over `q_grid`.
///
/// `q_grid` must be ascending and contain 2; `q = 0` is accepted and uses the
/// logarithmic average. Segment fluctuations below [`SEGMENT_FLUCTUATION_FLOOR`]
/// are floored for `q <= 0`.
pub fn mfdfa(
    series: &[f64],
    q_grid: &[f64],
    scale_range: Option<(usize, usize)>,
) -> Result<MultifractalSpectrum> {
    if q_grid.is_empty() {
        return Err(Error::config("q grid is empty"));
    }
    if q_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config("q grid must be strictly ascending"));
    }
    if !q_grid.iter().any(|q| (q - 2.0).abs() < 1e-12) {
        return Err(Error::config("q grid must contain q = 2"));
    }
    if series.len() < MIN_MFDFA_LENGTH {
        return Err(Error::InsufficientData {
            needed: MIN_MFDFA_LENGTH,
            got: series.len(),
        });
    }
    check_not_constant(series)?;
    let range = resolve_scale_range(series.len(), scale_range, 8)?;
    let scales = log_spaced_scales(range.0, range.1, DEFAULT_SCALE_COUNT);
    let profile = profile(series);

    let per_scale: Vec<Vec<f64>> = scales
        .iter()
        .map(|&s| segment_variances(&profile, s))
        .collect();
    let log_s: Vec<f64> = scales.iter().map(|s| (*s as f64).ln()).collect();

    let mut h_of_q = Vec::with_capacity(q_grid.len());
    let mut intercepts = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let mut log_f = Vec::with_capacity(scales.len());
        for (variances, s) in per_scale.iter().zip(&scales) {
            let f = fluctuation(variances, q);
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::DegenerateSeries(format!(
                    "fluctuation function of order {q} is {f} at scale {s}"
                )));
            }
            log_f.push(f.ln());
        }
        let fit = ols(&log_s, &log_f)?;
        h_of_q.push(fit.slope);
        intercepts.push(fit.intercept);
    }

    let delta_h = h_of_q[0] - h_of_q[h_of_q.len() - 1];
    if delta_h < DELTA_H_NOISE {
        return Err(Error::Domain(format!(
            "h(q) increases with q (Δh = {delta_h:.3}); the series is not a valid multifractal input"
        )));
    }
    Ok(MultifractalSpectrum {
        q_grid: q_grid.to_vec(),
        h_of_q,
        delta_h,
        intercepts,
        scale_range: range,
    })
}
