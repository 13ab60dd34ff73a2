//! Conservative binary multiplicative cascade.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::{GeneratorMeta, TrafficSeries};
use crate::error::{Error, Result};
use crate::rng;

pub const MAX_CASCADE_DEPTH: u32 = 24;

/// Total mass carried by every cascade series.
pub const CASCADE_INITIAL_MASS: f64 = 1.0;

/// Below this spread the split fraction is exactly one half.
const DEGENERATE_SPREAD: f64 = 1e-9;

/// Splits unit mass over `2^depth` dyadic cells.
///
/// At every level each cell hands a fraction `W` of its mass to its left child
/// and the remainder to its right child. `W` is drawn from a symmetric
/// `Beta(α, α)` with `α = 1 / multiplier_spread`, so larger spreads give more
/// uneven splits and a wider range of generalized Hurst exponents.
pub fn generate_cascade(depth: u32, multiplier_spread: f64, seed: u64) -> Result<TrafficSeries> {
    if !(1..=MAX_CASCADE_DEPTH).contains(&depth) {
        return Err(Error::config(format!(
            "cascade depth must lie in [1, {MAX_CASCADE_DEPTH}], got {depth}"
        )));
    }
    if !(multiplier_spread > 0.0) || !multiplier_spread.is_finite() {
        return Err(Error::config(format!(
            "multiplier_spread must be positive, got {multiplier_spread}"
        )));
    }
    let mut stream = rng::substream(seed, "cascade");
    let values = cascade_masses(depth, multiplier_spread, &mut stream);
    TrafficSeries::new(
        values,
        GeneratorMeta::cascade(depth, multiplier_spread, seed),
    )
}

pub(super) fn cascade_masses<R: Rng + ?Sized>(depth: u32, spread: f64, rng: &mut R) -> Vec<f64> {
    let concentration = 1.0 / spread;
    let beta = if spread < DEGENERATE_SPREAD {
        None
    } else {
        Some(Beta::new(concentration, concentration).expect("positive concentration"))
    };

    let mut cells = vec![CASCADE_INITIAL_MASS];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for mass in cells {
            let w = match &beta {
                Some(b) => b.sample(rng),
                None => 0.5,
            };
            let left = mass * w;
            // the right child takes the exact remainder so mass is conserved
            next.push(left);
            next.push(mass - left);
        }
        cells = next;
    }
    cells
}
