use super::cascade::{cascade_masses, MAX_CASCADE_DEPTH};
use super::fgn::long_memory_signal;
use super::{GeneratorMeta, TrafficSeries};
use crate::error::{Error, Result};
use crate::rng;

/// Power applied to the normalized cascade before it modulates the signal.
pub const MODULATION_EXPONENT: f64 = 0.5;

/// Each cascade cell spans this many ticks (`log2` of it is subtracted from
/// the depth); it matches the smallest default fluctuation scale.
pub const CASCADE_CELL_TICKS: usize = 16;
const CELL_LEVELS: u32 = CASCADE_CELL_TICKS.trailing_zeros();

/// Coefficient of variation of the load before troughs are clipped at zero.
pub const LOAD_CV: f64 = 0.7;

/// Smallest and largest accepted long-memory exponents.
pub(crate) const ENVELOPE_RANGE: (f64, f64) = (0.05, 1.6);

/// Cascade-modulated long-memory traffic.
///
/// A cascade of depth `depth - 4`, held constant over cells of
/// [`CASCADE_CELL_TICKS`] ticks, normalized to unit mean and raised to
/// [`MODULATION_EXPONENT`], acts as a local volatility on a signed long-memory
/// signal with exponent `envelope_hurst`. Holding cells keeps the signal's
/// short-range correlation intact inside each cell. The product is
/// standardized to `1 + LOAD_CV * z`, clipped at zero and rescaled to unit
/// mean. `envelope_hurst` mainly sets the measured Hurst exponent and
/// `multiplier_spread` mainly sets the generalized-Hurst range.
pub fn generate_composite(
    depth: u32,
    multiplier_spread: f64,
    envelope_hurst: f64,
    seed: u64,
) -> Result<TrafficSeries> {
    if !(CELL_LEVELS + 1..=MAX_CASCADE_DEPTH).contains(&depth) {
        return Err(Error::config(format!(
            "composite depth must lie in [{}, {MAX_CASCADE_DEPTH}], got {depth}",
            CELL_LEVELS + 1
        )));
    }
    if !(multiplier_spread > 0.0) || !multiplier_spread.is_finite() {
        return Err(Error::config(format!(
            "multiplier_spread must be positive, got {multiplier_spread}"
        )));
    }
    let (lo, hi) = ENVELOPE_RANGE;
    if !(envelope_hurst >= lo && envelope_hurst <= hi) {
        return Err(Error::config(format!(
            "envelope_hurst must lie in [{lo}, {hi}], got {envelope_hurst}"
        )));
    }

    let n = 1usize << depth;
    let mut cascade_rng = rng::substream(seed, "cascade");
    let mut envelope_rng = rng::substream(seed, "envelope");
    let masses = cascade_masses(depth - CELL_LEVELS, multiplier_spread, &mut cascade_rng);
    let signal = long_memory_signal(envelope_hurst, n, &mut envelope_rng);

    let mass_mean = masses.iter().sum::<f64>() / masses.len() as f64;
    let mut values: Vec<f64> = signal
        .chunks_exact(CASCADE_CELL_TICKS)
        .zip(&masses)
        .flat_map(|(cell, m)| {
            let volatility = (m / mass_mean).powf(MODULATION_EXPONENT);
            cell.iter().map(move |s| volatility * s)
        })
        .collect();
    standardize_load(&mut values, LOAD_CV);

    TrafficSeries::new(
        values,
        GeneratorMeta::composite(depth, multiplier_spread, envelope_hurst, seed),
    )
}

/// Maps `values` to `1 + cv * z` with `z` the standard score, clips at zero
/// and rescales to unit mean. A constant input maps to all ones.
fn standardize_load(values: &mut [f64], cv: f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(sd > 0.0) {
        values.fill(1.0);
        return;
    }
    for v in values.iter_mut() {
        *v = (1.0 + cv * (*v - mean) / sd).max(0.0);
    }
    let clipped_mean = values.iter().sum::<f64>() / n;
    for v in values.iter_mut() {
        *v /= clipped_mean;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mean_non_negative() {
        let s = generate_composite(12, 2.0, 1.2, 9).unwrap();
        assert_eq!(s.tick_count(), 4096);
        assert!(s.values().iter().all(|v| *v >= 0.0));
        assert!((s.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standardized_load_has_target_spread_when_unclipped() {
        let mut v: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        standardize_load(&mut v, 0.3);
        let mean = v.iter().sum::<f64>() / 100.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 100.0).sqrt();
        assert!((mean - 1.0).abs() < 1e-12);
        assert!((sd - 0.3).abs() < 1e-12);
        let mut c = vec![2.0; 5];
        standardize_load(&mut c, 1.0);
        assert_eq!(c, vec![1.0; 5]);
    }

    #[test]
    fn deterministic() {
        let a = generate_composite(10, 1.0, 0.7, 3).unwrap();
        let b = generate_composite(10, 1.0, 0.7, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_too_shallow_depth() {
        assert!(generate_composite(4, 1.0, 0.7, 3).is_err());
        assert_eq!(generate_composite(5, 1.0, 0.7, 3).unwrap().tick_count(), 32);
    }

    #[test]
    fn rejects_bad_envelope() {
        assert!(generate_composite(10, 1.0, 0.0, 3).is_err());
        assert!(generate_composite(10, 1.0, 1.9, 3).is_err());
    }
}
