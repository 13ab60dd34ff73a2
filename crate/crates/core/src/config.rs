//! Scenario configuration files.
//!
//! A configuration is a TOML document with the optional sections
//! `[traffic]`, `[cluster]`, `[weights]`, `[policy]`, `[sim]` and `[sweep]`.
//! Every key has a default, so an empty file is a valid configuration.
//! Unknown keys are rejected with their full key path. See
//! `examples/configs/reference.toml` for an annotated example.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fractal::default_q_grid;
use crate::io::read_series_csv;
use crate::metrics::{validate_cluster, ServerSpec, WeightTriple};
use crate::sim::{
    depth_for_horizon, reference_cluster, DemandDistribution, DemandParams, Policy, PolicyKind,
    ScenarioConfig, ServiceClass, TrafficSource, DEFAULT_ARRIVAL_SCALE, DEFAULT_CALIBRATION_BUDGET,
    DEFAULT_HORIZON, DEFAULT_WINDOW,
};
use crate::traffic::GeneratorMeta;

/// The three `(H, Δh)` cells swept by default.
pub const DEFAULT_SWEEP_GRID: [(f64, f64); 3] = [(0.6, 1.5), (0.6, 2.5), (0.9, 2.5)];

/// A parsed and fully validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub scenario: ScenarioConfig,
    /// Moment orders used to measure the traffic's `(H, Δh)`.
    pub q_grid: Vec<f64>,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    /// `(H, Δh)` calibration targets, one scenario each.
    pub grid: Vec<(f64, f64)>,
}

impl Config {
    /// Parses `text`. Relative series paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Config> {
        let deserializer = toml::Deserializer::parse(text)
            .map_err(|e| Error::config(format!("invalid TOML: {e}")))?;
        let raw: RawConfig = serde_path_to_error::deserialize(deserializer).map_err(|e| {
            let path = e.path().to_string();
            Error::config(format!("at `{path}`: {}", e.into_inner().message().trim()))
        })?;
        raw.resolve(base_dir)
    }

    /// Replaces the scenario seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scenario.seed = seed;
        self
    }

    /// SHA-256 over the canonical JSON form of the scenario and q grid.
    pub fn digest(&self) -> String {
        scenario_digest(&self.scenario, &self.q_grid)
    }

    /// One scenario per sweep cell, named `h<H>_dh<Δh>`, each calibrated to
    /// its cell's targets. Calibration budget and probe seed come from the
    /// traffic section when it has targets.
    pub fn sweep_scenarios(&self) -> Vec<ScenarioConfig> {
        let (budget, probe_seed) = match &self.scenario.traffic {
            TrafficSource::Targets {
                budget, probe_seed, ..
            } => (*budget, *probe_seed),
            _ => (DEFAULT_CALIBRATION_BUDGET, 0),
        };
        self.sweep
            .grid
            .iter()
            .map(|&(hurst, delta_h)| ScenarioConfig {
                name: format!("h{hurst}_dh{delta_h}"),
                traffic: TrafficSource::Targets {
                    hurst,
                    delta_h,
                    budget,
                    probe_seed,
                },
                ..self.scenario.clone()
            })
            .collect()
    }
}

/// SHA-256 hex digest of a scenario together with its measurement grid.
pub fn scenario_digest(scenario: &ScenarioConfig, q_grid: &[f64]) -> String {
    #[derive(Serialize)]
    struct Canonical<'a> {
        scenario: &'a ScenarioConfig,
        q_grid: &'a [f64],
    }
    let bytes = serde_json::to_vec(&Canonical { scenario, q_grid })
        .expect("configuration serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}

/// Reads and validates the configuration at `path`.
pub fn parse_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Config::from_toml_str(&text, base)
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    traffic: RawTraffic,
    cluster: RawCluster,
    weights: RawWeights,
    policy: RawPolicy,
    sim: RawSim,
    sweep: RawSweep,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TrafficKind {
    #[default]
    Targets,
    Composite,
    Cascade,
    Fgn,
    File,
}

impl TrafficKind {
    fn name(self) -> &'static str {
        match self {
            TrafficKind::Targets => "targets",
            TrafficKind::Composite => "composite",
            TrafficKind::Cascade => "cascade",
            TrafficKind::Fgn => "fgn",
            TrafficKind::File => "file",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawTraffic {
    kind: TrafficKind,
    hurst: Option<f64>,
    delta_h: Option<f64>,
    budget: Option<usize>,
    probe_seed: Option<u64>,
    multiplier_spread: Option<f64>,
    envelope_hurst: Option<f64>,
    depth: Option<u32>,
    path: Option<PathBuf>,
    q_grid: Option<Vec<f64>>,
}

impl RawTraffic {
    fn resolve(self, base_dir: &Path, horizon: usize) -> Result<TrafficSource> {
        let kind = self.kind;
        let present = [
            ("hurst", self.hurst.is_some()),
            ("delta_h", self.delta_h.is_some()),
            ("budget", self.budget.is_some()),
            ("probe_seed", self.probe_seed.is_some()),
            ("multiplier_spread", self.multiplier_spread.is_some()),
            ("envelope_hurst", self.envelope_hurst.is_some()),
            ("depth", self.depth.is_some()),
            ("path", self.path.is_some()),
        ];
        let allowed: &[&str] = match kind {
            TrafficKind::Targets => &["hurst", "delta_h", "budget", "probe_seed"],
            TrafficKind::Composite => &["multiplier_spread", "envelope_hurst", "depth"],
            TrafficKind::Cascade => &["multiplier_spread", "depth"],
            TrafficKind::Fgn => &["hurst"],
            TrafficKind::File => &["path"],
        };
        if let Some((key, _)) = present
            .iter()
            .find(|(key, set)| *set && !allowed.contains(key))
        {
            return Err(Error::config(format!(
                "traffic.{key} does not apply to kind = \"{}\"",
                kind.name()
            )));
        }
        let required = |value: Option<f64>, key: &str| {
            value.ok_or_else(|| {
                Error::config(format!(
                    "traffic.{key} is required for kind = \"{}\"",
                    kind.name()
                ))
            })
        };
        let depth = || match self.depth {
            Some(d) => Ok(d),
            None => depth_for_horizon(horizon),
        };
        let source = match kind {
            TrafficKind::Targets => TrafficSource::Targets {
                hurst: self.hurst.unwrap_or(DEFAULT_SWEEP_GRID[0].0),
                delta_h: self.delta_h.unwrap_or(DEFAULT_SWEEP_GRID[0].1),
                budget: self.budget.unwrap_or(DEFAULT_CALIBRATION_BUDGET),
                probe_seed: self.probe_seed.unwrap_or(0),
            },
            TrafficKind::Composite => TrafficSource::Generator(GeneratorMeta::composite(
                depth()?,
                required(self.multiplier_spread, "multiplier_spread")?,
                required(self.envelope_hurst, "envelope_hurst")?,
                0,
            )),
            TrafficKind::Cascade => TrafficSource::Generator(GeneratorMeta::cascade(
                depth()?,
                required(self.multiplier_spread, "multiplier_spread")?,
                0,
            )),
            TrafficKind::Fgn => {
                TrafficSource::Generator(GeneratorMeta::fgn(required(self.hurst, "hurst")?, 0))
            }
            TrafficKind::File => {
                let path = self
                    .path
                    .ok_or_else(|| Error::config("traffic.path is required for kind = \"file\""))?;
                let path = if path.is_relative() {
                    base_dir.join(path)
                } else {
                    path
                };
                TrafficSource::Series(read_series_csv(&path)?.into_values())
            }
        };
        Ok(source)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawCluster {
    servers: Option<u32>,
    cpu_counts: Option<u32>,
    ram_capacity: Option<f64>,
    net_capacity: Option<f64>,
    server: Option<Vec<ServerSpec>>,
}

impl RawCluster {
    fn resolve(self) -> Result<Vec<ServerSpec>> {
        let shorthand = self.servers.is_some()
            || self.cpu_counts.is_some()
            || self.ram_capacity.is_some()
            || self.net_capacity.is_some();
        let specs = match (self.server, shorthand) {
            (Some(_), true) => {
                return Err(Error::config(
                    "cluster: give either [[cluster.server]] entries or the servers = N shorthand, not both",
                ))
            }
            (Some(list), false) => list,
            (None, true) => {
                let n = self
                    .servers
                    .ok_or_else(|| Error::config("cluster.servers is required with the shorthand"))?;
                let cpus = self.cpu_counts.unwrap_or(4);
                (0..n)
                    .map(|id| ServerSpec {
                        id,
                        cpu_count: cpus,
                        ram_capacity: self.ram_capacity.unwrap_or(8.0),
                        net_capacity: self.net_capacity.unwrap_or(4.0),
                    })
                    .collect()
            }
            (None, false) => reference_cluster(),
        };
        validate_cluster(&specs)?;
        Ok(specs)
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawWeights {
    a: f64,
    b: f64,
    c: f64,
}

impl Default for RawWeights {
    fn default() -> Self {
        let w = WeightTriple::equal();
        RawWeights {
            a: w.a,
            b: w.b,
            c: w.c,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawPolicy {
    kind: PolicyKind,
    migration_threshold: f64,
}

impl Default for RawPolicy {
    fn default() -> Self {
        RawPolicy {
            kind: PolicyKind::LeastSil,
            migration_threshold: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSim {
    name: String,
    horizon: usize,
    window: usize,
    arrival_scale: f64,
    seed: u64,
    class: Option<Vec<RawClass>>,
}

impl Default for RawSim {
    fn default() -> Self {
        RawSim {
            name: "scenario".to_string(),
            horizon: DEFAULT_HORIZON,
            window: DEFAULT_WINDOW,
            arrival_scale: DEFAULT_ARRIVAL_SCALE,
            seed: 0,
            class: None,
        }
    }
}

/// One service class; unspecified keys take the default class's values.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawClass {
    weight: Option<f64>,
    cpu_mean: Option<f64>,
    cpu_sigma: Option<f64>,
    cpu_max: Option<f64>,
    ram_mean: Option<f64>,
    ram_sigma: Option<f64>,
    ram_max: Option<f64>,
    net_mean: Option<f64>,
    net_sigma: Option<f64>,
    net_max: Option<f64>,
    mean_duration: Option<f64>,
}

impl RawClass {
    fn resolve(self) -> ServiceClass {
        let d = ServiceClass::default();
        let dist =
            |mean: Option<f64>, sigma: Option<f64>, max: Option<f64>, base: DemandDistribution| {
                DemandDistribution::new(
                    mean.unwrap_or(base.mean),
                    sigma.unwrap_or(base.sigma),
                    max.unwrap_or(base.max),
                )
            };
        ServiceClass {
            weight: self.weight.unwrap_or(d.weight),
            cpu: dist(self.cpu_mean, self.cpu_sigma, self.cpu_max, d.cpu),
            ram: dist(self.ram_mean, self.ram_sigma, self.ram_max, d.ram),
            net: dist(self.net_mean, self.net_sigma, self.net_max, d.net),
            mean_duration: self.mean_duration.unwrap_or(d.mean_duration),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSweep {
    grid: Vec<(f64, f64)>,
}

impl Default for RawSweep {
    fn default() -> Self {
        RawSweep {
            grid: DEFAULT_SWEEP_GRID.to_vec(),
        }
    }
}

impl RawConfig {
    fn resolve(self, base_dir: &Path) -> Result<Config> {
        let q_grid = self.traffic.q_grid.clone().unwrap_or_else(default_q_grid);
        if q_grid.len() < 2 || q_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config(
                "traffic.q_grid must hold at least two strictly ascending orders",
            ));
        }
        if !q_grid.iter().any(|q| (q - 2.0).abs() < 1e-12) {
            return Err(Error::config("traffic.q_grid must contain 2"));
        }
        let traffic = self.traffic.resolve(base_dir, self.sim.horizon)?;
        let cluster = self.cluster.resolve()?;
        let weights = WeightTriple {
            a: self.weights.a,
            b: self.weights.b,
            c: self.weights.c,
        };
        weights.validate()?;
        let policy = Policy {
            kind: self.policy.kind,
            migration_threshold: self.policy.migration_threshold,
            weights,
        };
        let demand_params = DemandParams {
            classes: match self.sim.class {
                Some(classes) => classes.into_iter().map(RawClass::resolve).collect(),
                None => DemandParams::default().classes,
            },
        };
        let scenario = ScenarioConfig {
            name: self.sim.name,
            traffic,
            cluster,
            weights,
            policy,
            horizon: self.sim.horizon,
            window: self.sim.window,
            arrival_scale: self.sim.arrival_scale,
            demand_params,
            seed: self.sim.seed,
        };
        scenario.validate()?;
        if self.sweep.grid.is_empty() {
            return Err(Error::config("sweep.grid must not be empty"));
        }
        for &(h, dh) in &self.sweep.grid {
            if !(h > 0.5 && h < 1.0) || !(0.0..=4.0).contains(&dh) {
                return Err(Error::config(format!(
                    "sweep.grid entry ({h}, {dh}) is outside H in (0.5, 1), dH in [0, 4]"
                )));
            }
        }
        Ok(Config {
            scenario,
            q_grid,
            sweep: SweepConfig {
                grid: self.sweep.grid,
            },
        })
    }
}
