use super::regression::ols;
use crate::error::{Error, Result};

/// How block aggregates are formed before taking moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Block sums of the raw values. A constant positive series gives slope
    /// `q` exactly.
    Raw,
    /// Block sums of deviations from the series mean, so zero-mean
    /// fluctuations set the scaling rather than the mean level.
    #[default]
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureFit {
    /// Estimates `q * h(q)`.
    pub slope: f64,
    /// Estimates `ln c(q)`.
    pub intercept: f64,
    pub residual_sum_squares: f64,
}

/// Moment scaling of block aggregates: OLS of `ln mean |S_m|^q` on `ln m`,
/// where `S_m` are sums over non-overlapping blocks of `m` ticks.
pub fn structure_function(
    series: &[f64],
    q: f64,
    scales: &[usize],
    aggregation: Aggregation,
) -> Result<StructureFit> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::config("moment order q must be finite and non-zero"));
    }
    let n = series.len();
    if scales.len() < 2 {
        return Err(Error::config(
            "structure function needs at least two scales",
        ));
    }
    if let Some(bad) = scales.iter().find(|s| **s < 2 || **s > n / 4) {
        return Err(Error::config(format!("scale {bad} outside [2, {}]", n / 4)));
    }
    if q < 0.0 && series.contains(&0.0) {
        return Err(Error::Domain(format!(
            "negative moment order {q} on a series containing zeros"
        )));
    }

    let offset = match aggregation {
        Aggregation::Raw => 0.0,
        Aggregation::Centered => series.iter().sum::<f64>() / n as f64,
    };
    let mut log_m = Vec::with_capacity(scales.len());
    let mut log_moment = Vec::with_capacity(scales.len());
    for &m in scales {
        let blocks = series.chunks_exact(m);
        let count = blocks.len() as f64;
        let mut acc = 0.0;
        for block in blocks {
            let s = block.iter().map(|v| v - offset).sum::<f64>().abs();
            if s == 0.0 && q < 0.0 {
                return Err(Error::Domain(format!(
                    "zero block aggregate at scale {m} under negative order {q}"
                )));
            }
            acc += s.powf(q);
        }
        let moment = acc / count;
        if !(moment > 0.0) || !moment.is_finite() {
            return Err(Error::DegenerateSeries(format!(
                "moment of order {q} is {moment} at scale {m}"
            )));
        }
        log_m.push((m as f64).ln());
        log_moment.push(moment.ln());
    }
    let fit = ols(&log_m, &log_moment)?;
    Ok(StructureFit {
        slope: fit.slope,
        intercept: fit.intercept,
        residual_sum_squares: fit.residual_sum_squares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_an_exact_power_law() {
        let x = vec![0.25; 4096];
        let fit = structure_function(&x, 1.0, &[2, 4, 8, 16, 64], Aggregation::Raw).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 0.25f64.ln()).abs() < 1e-12);
        assert!(fit.residual_sum_squares < 1e-20);
    }

    #[test]
    fn negative_order_on_zeros_is_a_domain_error() {
        let mut x = vec![1.0; 1024];
        x[10] = 0.0;
        assert!(matches!(
            structure_function(&x, -2.0, &[2, 4], Aggregation::Raw),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn argument_validation() {
        let x = vec![1.0; 64];
        assert!(matches!(
            structure_function(&x, 0.0, &[2, 4], Aggregation::Raw),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            structure_function(&x, 1.0, &[2, 32], Aggregation::Raw),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            structure_function(&x, 1.0, &[2], Aggregation::Raw),
            Err(Error::Config(_))
        ));
    }
}
