use super::dfa::{log_spaced_scales, DEFAULT_SCALE_COUNT, MIN_DFA_LENGTH};
use super::regression::ols;
use super::{EstimatorMethod, HurstEstimate};
use crate::error::{Error, Result};

/// Rescaled-range (R/S) Hurst estimate over non-overlapping blocks.
///
/// Coarser than DFA and biased upward for short blocks; kept as a
/// cross-check.
pub fn estimate_hurst_rs(
    series: &[f64],
    scale_range: Option<(usize, usize)>,
) -> Result<HurstEstimate> {
    let n = series.len();
    if n < MIN_DFA_LENGTH {
        return Err(Error::InsufficientData {
            needed: MIN_DFA_LENGTH,
            got: n,
        });
    }
    let (lo, hi) = scale_range.unwrap_or((16, n / 4));
    if lo < 8 || hi > n / 4 || lo >= hi {
        return Err(Error::config(format!(
            "scale range ({lo}, {hi}) must satisfy 8 <= min < max <= {}",
            n / 4
        )));
    }

    let mut log_s = Vec::new();
    let mut log_rs = Vec::new();
    for s in log_spaced_scales(lo, hi, DEFAULT_SCALE_COUNT) {
        let mut total = 0.0;
        let mut count = 0usize;
        for block in series.chunks_exact(s) {
            let mean = block.iter().sum::<f64>() / s as f64;
            let mut acc = 0.0;
            let (mut min, mut max) = (0.0f64, 0.0f64);
            let mut ss = 0.0;
            for v in block {
                let d = v - mean;
                acc += d;
                min = min.min(acc);
                max = max.max(acc);
                ss += d * d;
            }
            let sd = (ss / s as f64).sqrt();
            if sd > 0.0 {
                total += (max - min) / sd;
                count += 1;
            }
        }
        if count > 0 {
            log_s.push((s as f64).ln());
            log_rs.push((total / count as f64).ln());
        }
    }
    if log_s.len() < 2 {
        return Err(Error::DegenerateSeries(
            "series has zero variance in every block".into(),
        ));
    }
    let fit = ols(&log_s, &log_rs)?;
    Ok(HurstEstimate {
        hurst: fit.slope,
        stderr: fit.slope_stderr,
        method: EstimatorMethod::RS,
        scale_range: (lo, hi),
    })
}
