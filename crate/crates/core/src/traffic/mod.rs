//! Synthetic load-intensity series.
//!
//! Three generators are provided: a conservative binary multiplicative
//! cascade (multifractal, heterogeneity set by the multiplier spread),
//! fractional Gaussian noise (monofractal, exact Hurst exponent), and a
//! composite of the two in which the cascade modulates a long-memory signal
//! so that the Hurst exponent and the generalized-Hurst range can be tuned
//! independently. [`calibrate`] searches the composite's two knobs for a
//! requested `(H, Δh)` pair.

mod calibrate;
mod cascade;
mod composite;
mod fgn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use calibrate::{
    calibrate, measure, CalibrationFailure, MeasuredScaling, DELTA_H_TOLERANCE, HURST_TOLERANCE,
    PROBE_DEPTH,
};
pub use cascade::{generate_cascade, CASCADE_INITIAL_MASS, MAX_CASCADE_DEPTH};
pub use composite::{generate_composite, CASCADE_CELL_TICKS, LOAD_CV, MODULATION_EXPONENT};
pub use fgn::{fgn_increments, generate_fgn, long_memory_signal, MIN_FGN_LENGTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Cascade,
    #[serde(rename = "fgn")]
    FGn,
    Composite,
    /// Read from a file rather than generated.
    Imported,
}

/// Generation parameters recorded alongside a series.
///
/// `envelope_hurst` is the exponent of the long-memory signal (fGn below 1,
/// fBm at and above 1) that composites and fGn series are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub kind: GeneratorKind,
    pub seed: u64,
    pub depth: Option<u32>,
    pub target_hurst: Option<f64>,
    pub target_delta_h: Option<f64>,
    pub multiplier_spread: Option<f64>,
    pub envelope_hurst: Option<f64>,
}

impl GeneratorMeta {
    pub fn fgn(hurst: f64, seed: u64) -> Self {
        GeneratorMeta {
            kind: GeneratorKind::FGn,
            seed,
            depth: None,
            target_hurst: None,
            target_delta_h: None,
            multiplier_spread: None,
            envelope_hurst: Some(hurst),
        }
    }

    pub fn cascade(depth: u32, multiplier_spread: f64, seed: u64) -> Self {
        GeneratorMeta {
            kind: GeneratorKind::Cascade,
            seed,
            depth: Some(depth),
            target_hurst: None,
            target_delta_h: None,
            multiplier_spread: Some(multiplier_spread),
            envelope_hurst: None,
        }
    }

    pub fn composite(depth: u32, multiplier_spread: f64, envelope_hurst: f64, seed: u64) -> Self {
        GeneratorMeta {
            kind: GeneratorKind::Composite,
            seed,
            depth: Some(depth),
            target_hurst: None,
            target_delta_h: None,
            multiplier_spread: Some(multiplier_spread),
            envelope_hurst: Some(envelope_hurst),
        }
    }

    pub fn imported() -> Self {
        GeneratorMeta {
            kind: GeneratorKind::Imported,
            seed: 0,
            depth: None,
            target_hurst: None,
            target_delta_h: None,
            multiplier_spread: None,
            envelope_hurst: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_targets(mut self, hurst: f64, delta_h: f64) -> Self {
        self.target_hurst = Some(hurst);
        self.target_delta_h = Some(delta_h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.target_hurst {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::config(format!(
                    "target_hurst must lie in (0, 1), got {h}"
                )));
            }
        }
        if let Some(dh) = self.target_delta_h {
            if !(dh >= 0.0) {
                return Err(Error::config(format!(
                    "target_delta_h must be non-negative, got {dh}"
                )));
            }
        }
        match self.kind {
            GeneratorKind::Cascade | GeneratorKind::Composite => {
                let depth = self
                    .depth
                    .ok_or_else(|| Error::config("cascade generators need a depth"))?;
                if depth < 1 {
                    return Err(Error::config("depth must be at least 1"));
                }
                let spread = self
                    .multiplier_spread
                    .ok_or_else(|| Error::config("cascade generators need multiplier_spread"))?;
                if !(spread > 0.0) {
                    return Err(Error::config("multiplier_spread must be positive"));
                }
                if self.kind == GeneratorKind::Composite && self.envelope_hurst.is_none() {
                    return Err(Error::config("composite generator needs envelope_hurst"));
                }
            }
            GeneratorKind::FGn => {
                if self.envelope_hurst.is_none() {
                    return Err(Error::config("fgn generator needs envelope_hurst"));
                }
            }
            GeneratorKind::Imported => {}
        }
        Ok(())
    }

    /// Regenerates the series described by this metadata.
    ///
    /// `length` is only consulted for fGn; cascades and composites always have
    /// `2^depth` ticks.
    pub fn generate(&self, length: usize) -> Result<TrafficSeries> {
        self.validate()?;
        let mut series = match self.kind {
            GeneratorKind::FGn => generate_fgn(self.envelope_hurst.unwrap(), length, self.seed)?,
            GeneratorKind::Cascade => generate_cascade(
                self.depth.unwrap(),
                self.multiplier_spread.unwrap(),
                self.seed,
            )?,
            GeneratorKind::Composite => generate_composite(
                self.depth.unwrap(),
                self.multiplier_spread.unwrap(),
                self.envelope_hurst.unwrap(),
                self.seed,
            )?,
            GeneratorKind::Imported => {
                return Err(Error::config("imported series cannot be regenerated"))
            }
        };
        series.meta.target_hurst = self.target_hurst;
        series.meta.target_delta_h = self.target_delta_h;
        Ok(series)
    }
}

/// A finite, non-negative load-intensity series, one value per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSeries {
    values: Vec<f64>,
    pub meta: GeneratorMeta,
}

impl TrafficSeries {
    pub fn new(values: Vec<f64>, meta: GeneratorMeta) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("traffic series must not be empty"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::validation(format!(
                "traffic value at tick {i} is {v}; values must be finite and non-negative"
            )));
        }
        Ok(TrafficSeries { values, meta })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tick_count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for TrafficSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Shifts `values` so the minimum is zero and rescales to unit mean.
///
/// Both steps are affine, so detrended-fluctuation exponents are unchanged.
/// A constant input maps to all ones.
pub(crate) fn to_unit_mean_load(values: &mut [f64]) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    for v in values.iter_mut() {
        *v -= min;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean > 0.0 {
        for v in values.iter_mut() {
            *v /= mean;
        }
    } else {
        values.fill(1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_non_finite_values() {
        let meta = GeneratorMeta::imported();
        assert!(TrafficSeries::new(vec![1.0, -0.5], meta.clone()).is_err());
        assert!(TrafficSeries::new(vec![f64::NAN], meta.clone()).is_err());
        assert!(TrafficSeries::new(vec![], meta.clone()).is_err());
        assert_eq!(
            TrafficSeries::new(vec![0.0, 2.0], meta)
                .unwrap()
                .tick_count(),
            2
        );
    }

    #[test]
    fn meta_validation() {
        let mut meta = GeneratorMeta::fgn(0.7, 1);
        meta.target_hurst = Some(1.0);
        assert!(meta.validate().is_err());
        let mut meta = GeneratorMeta::cascade(10, 0.5, 1);
        meta.depth = Some(0);
        assert!(meta.validate().is_err());
    }

    #[test]
    fn unit_mean_load_is_non_negative() {
        let mut v = vec![-2.0, 0.0, 4.0];
        to_unit_mean_load(&mut v);
        assert_eq!(v[0], 0.0);
        assert!((v.iter().sum::<f64>() / 3.0 - 1.0).abs() < 1e-15);
        let mut c = vec![3.0; 4];
        to_unit_mean_load(&mut c);
        assert_eq!(c, vec![1.0; 4]);
    }
}
