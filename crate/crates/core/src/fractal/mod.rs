//! Scaling-exponent estimators: DFA and MF-DFA, rescaled range, and the
//! moment structure function.

mod dfa;
mod regression;
mod rs;
mod structure;

use serde::{Deserialize, Serialize};

pub use dfa::{
    default_q_grid, estimate_hurst_dfa, log_spaced_scales, mfdfa, q_grid_linspace,
    DEFAULT_MIN_SCALE, DEFAULT_SCALE_COUNT, MIN_DFA_LENGTH, MIN_MFDFA_LENGTH,
    SEGMENT_FLUCTUATION_FLOOR,
};
pub use regression::{ols, LinearFit};
pub use rs::estimate_hurst_rs;
pub use structure::{structure_function, Aggregation, StructureFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMethod {
    #[serde(rename = "dfa")]
    DFA,
    #[serde(rename = "rs")]
    RS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub hurst: f64,
    pub stderr: f64,
    pub method: EstimatorMethod,
    pub scale_range: (usize, usize),
}

/// Generalized Hurst exponents over a grid of moment orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultifractalSpectrum {
    pub q_grid: Vec<f64>,
    pub h_of_q: Vec<f64>,
    /// `h(q_min) - h(q_max)`.
    pub delta_h: f64,
    /// Log-scale intercepts of the fluctuation fits, one per `q`.
    pub intercepts: Vec<f64>,
    pub scale_range: (usize, usize),
}

impl MultifractalSpectrum {
    /// `h(q)` at the grid point equal to `q`, if present.
    pub fn h_at(&self, q: f64) -> Option<f64> {
        self.q_grid
            .iter()
            .position(|g| (*g - q).abs() < 1e-12)
            .map(|i| self.h_of_q[i])
    }
}
