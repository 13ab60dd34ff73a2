use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::task::{DemandParams, Task};
use crate::error::{Error, Result};
use crate::rng;
use crate::traffic::TrafficSeries;

/// Random streams feeding the arrival process, plus the task id counter.
///
/// Counts and demands use separate substreams so that changing the demand
/// parameters leaves the arrival counts untouched.
#[derive(Debug, Clone)]
pub struct ArrivalStreams {
    counts: ChaCha8Rng,
    demands: ChaCha8Rng,
    next_id: u64,
}

impl ArrivalStreams {
    pub fn new(seed: u64) -> Self {
        ArrivalStreams {
            counts: rng::substream(seed, rng::ARRIVALS),
            demands: rng::substream(seed, rng::DEMANDS),
            next_id: 0,
        }
    }

    /// Number of tasks handed out so far.
    pub fn issued(&self) -> u64 {
        self.next_id
    }
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    let draw: f64 = Poisson::new(lambda)
        .expect("positive finite rate")
        .sample(rng);
    draw as u64
}

/// Tasks arriving at `tick`: a Poisson count with mean
/// `arrival_scale * series[tick]`, each with demands drawn from
/// `demand_params`.
pub fn arrivals_from_traffic(
    series: &TrafficSeries,
    tick: usize,
    arrival_scale: f64,
    demand_params: &DemandParams,
    streams: &mut ArrivalStreams,
) -> Result<Vec<Task>> {
    let value = *series.values().get(tick).ok_or(Error::SimulationBounds {
        tick,
        len: series.tick_count(),
    })?;
    if !(arrival_scale > 0.0) || !arrival_scale.is_finite() {
        return Err(Error::validation(format!(
            "arrival_scale must be positive, got {arrival_scale}"
        )));
    }
    let count = poisson(arrival_scale * value, &mut streams.counts);
    let tasks = (0..count)
        .map(|_| {
            let id = streams.next_id;
            streams.next_id += 1;
            demand_params.sample_task(id, tick, &mut streams.demands)
        })
        .collect();
    Ok(tasks)
}
