use serde::{Deserialize, Serialize};

use super::arrivals::{arrivals_from_traffic, ArrivalStreams};
use super::cluster::{ClusterState, TaskCounters};
use super::policy::{Policy, PolicyKind};
use super::task::DemandParams;
use crate::error::{Error, Result};
use crate::fractal::MIN_MFDFA_LENGTH;
use crate::metrics::{
    average_utilization, full_report, validate_cluster, ImbalanceReport, ServerSpec, WeightTriple,
};
use crate::rng;
use crate::traffic::{
    calibrate, measure, GeneratorKind, GeneratorMeta, MeasuredScaling, TrafficSeries,
    MAX_CASCADE_DEPTH,
};

pub const DEFAULT_WINDOW: usize = 64;
pub const MIN_HORIZON: usize = 256;
pub const DEFAULT_CALIBRATION_BUDGET: usize = 64;
pub const DEFAULT_HORIZON: usize = 1 << 14;

/// With the default service class on [`reference_cluster`], this keeps the
/// mean cpu utilization near 0.4: `1.25 * 64 ticks * 0.2 cpu / 40 cpus`.
pub const DEFAULT_ARRIVAL_SCALE: f64 = 1.25;

/// Eight servers in four shapes: cpu-rich, memory-rich, network-rich and
/// plain, twice each.
pub fn reference_cluster() -> Vec<ServerSpec> {
    (0..8u32)
        .map(|id| {
            let (cpus, ram, net) = match id % 4 {
                0 => (8, 8.0, 4.0),
                1 => (4, 16.0, 4.0),
                2 => (4, 8.0, 8.0),
                _ => (4, 8.0, 4.0),
            };
            ServerSpec {
                id,
                cpu_count: cpus,
                ram_capacity: ram,
                net_capacity: net,
            }
        })
        .collect()
}

/// Where a scenario's traffic comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficSource {
    /// Fixed generator parameters. The seed is replaced by one derived from
    /// the scenario seed.
    Generator(GeneratorMeta),
    /// Calibrate a generator for `(hurst, delta_h)` on a probe with
    /// `probe_seed`, then generate from the scenario seed.
    Targets {
        hurst: f64,
        delta_h: f64,
        budget: usize,
        probe_seed: u64,
    },
    /// A precomputed series with at least `horizon` ticks.
    Series(Vec<f64>),
}

impl TrafficSource {
    pub fn targets(hurst: f64, delta_h: f64) -> Self {
        TrafficSource::Targets {
            hurst,
            delta_h,
            budget: DEFAULT_CALIBRATION_BUDGET,
            probe_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub traffic: TrafficSource,
    pub cluster: Vec<ServerSpec>,
    /// Weights used for the reported imbalance figures.
    pub weights: WeightTriple,
    pub policy: Policy,
    pub horizon: usize,
    pub window: usize,
    /// Mean arrivals per tick per unit of traffic intensity.
    pub arrival_scale: f64,
    pub demand_params: DemandParams,
    pub seed: u64,
}

/// Smallest cascade depth whose series covers `horizon` ticks (at least 5).
pub fn depth_for_horizon(horizon: usize) -> Result<u32> {
    let depth = horizon.next_power_of_two().trailing_zeros().max(5);
    if depth > MAX_CASCADE_DEPTH {
        return Err(Error::config(format!(
            "horizon {horizon} exceeds the largest generated series"
        )));
    }
    Ok(depth)
}

impl Default for ScenarioConfig {
    /// Calibrated `(0.6, 1.5)` traffic on the reference cluster under the
    /// least-SIL policy with equal weights.
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".to_string(),
            traffic: TrafficSource::targets(0.6, 1.5),
            cluster: reference_cluster(),
            weights: WeightTriple::equal(),
            policy: Policy::new(PolicyKind::LeastSil, WeightTriple::equal()),
            horizon: DEFAULT_HORIZON,
            window: DEFAULT_WINDOW,
            arrival_scale: DEFAULT_ARRIVAL_SCALE,
            demand_params: DemandParams::default(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        validate_cluster(&self.cluster)?;
        self.weights.validate()?;
        self.policy.validate()?;
        self.demand_params.validate(&self.cluster)?;
        if self.horizon < MIN_HORIZON {
            return Err(Error::validation(format!(
                "horizon must be at least {MIN_HORIZON}, got {}",
                self.horizon
            )));
        }
        if self.window == 0 || self.window > self.horizon {
            return Err(Error::validation(format!(
                "window must lie in [1, horizon], got {}",
                self.window
            )));
        }
        if !(self.arrival_scale > 0.0) || !self.arrival_scale.is_finite() {
            return Err(Error::validation(format!(
                "arrival_scale must be positive, got {}",
                self.arrival_scale
            )));
        }
        match &self.traffic {
            TrafficSource::Generator(meta) => {
                meta.validate()?;
                if meta.kind == GeneratorKind::Imported {
                    return Err(Error::config(
                        "an imported generator needs its series; use a series source",
                    ));
                }
                if let Some(depth) = meta.depth {
                    if depth < 32 && (1usize << depth) < self.horizon {
                        return Err(Error::config(format!(
                            "generator depth {depth} gives fewer than {} ticks",
                            self.horizon
                        )));
                    }
                }
            }
            TrafficSource::Targets { budget, .. } => {
                if *budget == 0 {
                    return Err(Error::config("calibration budget must be positive"));
                }
            }
            TrafficSource::Series(values) => {
                if values.len() < self.horizon {
                    return Err(Error::config(format!(
                        "traffic series has {} ticks, horizon is {}",
                        values.len(),
                        self.horizon
                    )));
                }
            }
        }
        Ok(())
    }

    /// The traffic series this scenario runs on.
    pub fn traffic_series(&self) -> Result<TrafficSeries> {
        let traffic_seed = rng::child_seed(self.seed, rng::TRAFFIC);
        match &self.traffic {
            TrafficSource::Generator(meta) => {
                meta.clone().with_seed(traffic_seed).generate(self.horizon)
            }
            TrafficSource::Targets {
                hurst,
                delta_h,
                budget,
                probe_seed,
            } => {
                let mut meta = calibrate(*hurst, *delta_h, *budget, *probe_seed)?;
                if meta.depth.is_some() {
                    meta.depth = Some(depth_for_horizon(self.horizon)?);
                }
                meta.with_seed(traffic_seed).generate(self.horizon)
            }
            TrafficSource::Series(values) => {
                TrafficSeries::new(values.clone(), GeneratorMeta::imported())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub index: usize,
    /// First tick after the window.
    pub end_tick: usize,
    pub report: ImbalanceReport,
    /// Tasks waiting for admission at the end of the window.
    pub queued: usize,
    pub migrations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub name: String,
    pub traffic: GeneratorMeta,
    /// `(H, Δh)` of the traffic over the horizon, when long enough to
    /// measure.
    pub measured: Option<MeasuredScaling>,
    pub reports: Vec<WindowReport>,
    pub counters: TaskCounters,
    pub queued: usize,
    pub running: usize,
}

impl ScenarioOutcome {
    pub fn mean_isl_tot_final_quarter(&self) -> f64 {
        mean_isl_tot_final_quarter(&self.reports)
    }

    pub fn cv_isl_tot_final_half(&self) -> f64 {
        cv_isl_tot_final_half(&self.reports)
    }
}

fn tail(reports: &[WindowReport], fraction: usize) -> impl Iterator<Item = f64> + '_ {
    let keep = (reports.len() / fraction).max(1).min(reports.len());
    reports[reports.len() - keep..]
        .iter()
        .map(|r| r.report.isl_tot)
}

/// Mean `ISL_tot` over the last quarter of the windows (at least one).
/// `NaN` when there are no windows.
pub fn mean_isl_tot_final_quarter(reports: &[WindowReport]) -> f64 {
    let values: Vec<f64> = tail(reports, 4).collect();
    values.iter().sum::<f64>() / values.len() as f64
}

/// Coefficient of variation (population standard deviation over mean) of
/// `ISL_tot` over the last half of the windows; 0 when the mean is 0.
pub fn cv_isl_tot_final_half(reports: &[WindowReport]) -> f64 {
    let values: Vec<f64> = tail(reports, 2).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Runs `config` on an explicit series, returning one report per complete
/// window and the final cluster state. Ticks after the last complete window
/// are simulated but not reported.
pub fn simulate(
    series: &TrafficSeries,
    config: &ScenarioConfig,
) -> Result<(Vec<WindowReport>, ClusterState)> {
    if series.tick_count() < config.horizon {
        return Err(Error::SimulationBounds {
            tick: config.horizon - 1,
            len: series.tick_count(),
        });
    }
    let mut state = ClusterState::new(config.cluster.clone(), config.window)?;
    let mut streams = ArrivalStreams::new(config.seed);
    let mut reports = Vec::with_capacity(config.horizon / config.window);
    let mut migrations = 0;
    for tick in 0..config.horizon {
        let arrivals = arrivals_from_traffic(
            series,
            tick,
            config.arrival_scale,
            &config.demand_params,
            &mut streams,
        )?;
        migrations += state.step(arrivals, &config.policy)?.len();
        if (tick + 1) % config.window == 0 {
            let utils = (0..state.specs().len())
                .map(|i| {
                    let (a, b) = state.history(i).as_slices();
                    average_utilization(&[a, b].concat())
                })
                .collect::<Result<Vec<_>>>()?;
            reports.push(WindowReport {
                index: reports.len(),
                end_tick: tick + 1,
                report: full_report(&utils, state.specs(), &config.weights)?,
                queued: state.queue_len(),
                migrations,
            });
            migrations = 0;
        }
    }
    Ok((reports, state))
}

/// Builds the traffic, simulates the horizon and reports every window.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    config.validate()?;
    let series = config.traffic_series()?;
    let horizon_values = &series.values()[..config.horizon];
    let measured = if config.horizon >= MIN_MFDFA_LENGTH {
        measure(horizon_values).ok()
    } else {
        None
    };
    let (reports, state) = simulate(&series, config)?;
    Ok(ScenarioOutcome {
        name: config.name.clone(),
        traffic: series.meta.clone(),
        measured,
        reports,
        counters: state.counters(),
        queued: state.queue_len(),
        running: state.running_count(),
    })
}
