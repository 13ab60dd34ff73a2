use rand::Rng;
use rand_distr::{Distribution, Geometric, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{ServerSpec, WeightTriple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: u64,
    pub arrival_tick: usize,
    /// Fraction of one CPU core.
    pub cpu_demand: f64,
    pub ram_demand: f64,
    pub net_demand: f64,
    pub duration: u32,
    pub service_class: u8,
}

impl Task {
    /// Utilization this task adds on `spec`, per resource.
    pub fn utilization_on(&self, spec: &ServerSpec) -> (f64, f64, f64) {
        (
            self.cpu_demand / f64::from(spec.cpu_count),
            self.ram_demand / spec.ram_capacity,
            self.net_demand / spec.net_capacity,
        )
    }

    pub fn composite_on(&self, spec: &ServerSpec, w: &WeightTriple) -> f64 {
        let (c, r, n) = self.utilization_on(spec);
        w.composite(c, r, n)
    }
}

/// Log-normal with the given mean and log-space standard deviation,
/// truncated to `(0, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandDistribution {
    pub mean: f64,
    pub sigma: f64,
    pub max: f64,
}

impl DemandDistribution {
    pub fn new(mean: f64, sigma: f64, max: f64) -> Self {
        DemandDistribution { mean, sigma, max }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.mean > 0.0 && self.sigma >= 0.0 && self.max >= self.mean) {
            return Err(Error::validation(format!(
                "{what} demand needs mean > 0, sigma >= 0 and max >= mean"
            )));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return self.mean;
        }
        let mu = self.mean.ln() - 0.5 * self.sigma * self.sigma;
        let dist = LogNormal::new(mu, self.sigma).expect("validated parameters");
        for _ in 0..64 {
            let v = dist.sample(rng);
            if v <= self.max {
                return v;
            }
        }
        self.max
    }
}

/// Demand and duration parameters for one service class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceClass {
    /// Relative arrival share.
    pub weight: f64,
    pub cpu: DemandDistribution,
    pub ram: DemandDistribution,
    pub net: DemandDistribution,
    /// Mean of the geometric duration, in ticks (at least 1).
    pub mean_duration: f64,
}

impl Default for ServiceClass {
    fn default() -> Self {
        ServiceClass {
            weight: 1.0,
            cpu: DemandDistribution::new(0.2, 0.2, 2.0),
            ram: DemandDistribution::new(0.4, 0.2, 4.0),
            net: DemandDistribution::new(0.2, 0.2, 2.0),
            mean_duration: 64.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandParams {
    pub classes: Vec<ServiceClass>,
}

impl Default for DemandParams {
    fn default() -> Self {
        DemandParams {
            classes: vec![ServiceClass::default()],
        }
    }
}

impl DemandParams {
    /// Checks parameters and that the largest possible task fits on an empty
    /// server of the cluster.
    pub fn validate(&self, cluster: &[ServerSpec]) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::validation("at least one service class is required"));
        }
        if self.classes.len() > usize::from(u8::MAX) + 1 {
            return Err(Error::validation("at most 256 service classes"));
        }
        let smallest_cpu = cluster.iter().map(|s| s.cpu_count).min().unwrap_or(0);
        let smallest_ram = cluster
            .iter()
            .map(|s| s.ram_capacity)
            .fold(f64::INFINITY, f64::min);
        let smallest_net = cluster
            .iter()
            .map(|s| s.net_capacity)
            .fold(f64::INFINITY, f64::min);
        for (i, class) in self.classes.iter().enumerate() {
            if !(class.weight > 0.0) {
                return Err(Error::validation(format!(
                    "class {i}: weight must be positive"
                )));
            }
            if !(class.mean_duration >= 1.0) {
                return Err(Error::validation(format!(
                    "class {i}: mean_duration must be at least 1"
                )));
            }
            class.cpu.validate("cpu")?;
            class.ram.validate("ram")?;
            class.net.validate("net")?;
            if class.cpu.max > f64::from(smallest_cpu)
                || class.ram.max > smallest_ram
                || class.net.max > smallest_net
            {
                return Err(Error::validation(format!(
                    "class {i}: maximum demands must fit the smallest server"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn sample_task<R: Rng + ?Sized>(&self, id: u64, tick: usize, rng: &mut R) -> Task {
        let total: f64 = self.classes.iter().map(|c| c.weight).sum();
        let mut pick = rng.random::<f64>() * total;
        let mut class_index = self.classes.len() - 1;
        for (i, c) in self.classes.iter().enumerate() {
            if pick < c.weight {
                class_index = i;
                break;
            }
            pick -= c.weight;
        }
        let class = &self.classes[class_index];
        let duration = if class.mean_duration <= 1.0 {
            1
        } else {
            let geometric = Geometric::new(1.0 / class.mean_duration).expect("p in (0, 1]");
            let failures = geometric.sample(rng);
            (failures.saturating_add(1)).min(u64::from(u32::MAX)) as u32
        };
        Task {
            id,
            arrival_tick: tick,
            cpu_demand: class.cpu.sample(rng),
            ram_demand: class.ram.sample(rng),
            net_demand: class.net.sample(rng),
            duration,
            service_class: class_index as u8,
        }
    }
}
