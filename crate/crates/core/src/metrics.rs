//! Cluster load and imbalance metrics.
//!
//! For `N` servers with windowed utilizations `u_i` in `[0, 1]`:
//!
//! * system averages are capacity-weighted means: CPU by core count,
//!   memory and network by capacity;
//! * the per-resource imbalance is the unnormalized sum of squared deviations
//!   `Σ_i (u_i − u_all)²`;
//! * the total imbalance is the sum of the three per-resource imbalances;
//! * the per-server composite imbalance is
//!   `SIL_i = a·Δcpu_i² + b·Δram_i² + c·Δnet_i²` with `a + b + c = 1`;
//! * the system imbalance is the mean of `SIL_i`;
//! * efficiency is the mean composite load `a·cpu_i + b·ram_i + c·net_i`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerSpec {
    pub id: u32,
    pub cpu_count: u32,
    pub ram_capacity: f64,
    pub net_capacity: f64,
}

impl ServerSpec {
    pub fn new(id: u32, cpu_count: u32, ram_capacity: f64, net_capacity: f64) -> Result<Self> {
        let spec = ServerSpec {
            id,
            cpu_count,
            ram_capacity,
            net_capacity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cpu_count < 1 {
            return Err(Error::validation(format!(
                "server {}: cpu_count must be at least 1",
                self.id
            )));
        }
        if !(self.ram_capacity > 0.0 && self.ram_capacity.is_finite()) {
            return Err(Error::validation(format!(
                "server {}: ram_capacity must be positive",
                self.id
            )));
        }
        if !(self.net_capacity > 0.0 && self.net_capacity.is_finite()) {
            return Err(Error::validation(format!(
                "server {}: net_capacity must be positive",
                self.id
            )));
        }
        Ok(())
    }
}

/// Checks every spec and that ids are unique.
pub fn validate_cluster(specs: &[ServerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::validation(
            "cluster must contain at least one server",
        ));
    }
    let mut seen = HashSet::new();
    for spec in specs {
        spec.validate()?;
        if !seen.insert(spec.id) {
            return Err(Error::validation(format!(
                "duplicate server id {}",
                spec.id
            )));
        }
    }
    Ok(())
}

/// One instantaneous `(cpu, ram, net)` utilization reading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UtilizationSample {
    pub cpu: f64,
    pub ram: f64,
    pub net: f64,
}

impl UtilizationSample {
    pub fn new(cpu: f64, ram: f64, net: f64) -> Self {
        UtilizationSample { cpu, ram, net }
    }

    pub fn uniform(level: f64) -> Self {
        UtilizationSample::new(level, level, level)
    }
}

/// Utilization averaged over a window of `window` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceUtilization {
    pub cpu: f64,
    pub ram: f64,
    pub net: f64,
    pub window: usize,
}

impl ResourceUtilization {
    pub fn new(cpu: f64, ram: f64, net: f64, window: usize) -> Result<Self> {
        let u = ResourceUtilization {
            cpu,
            ram,
            net,
            window,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("cpu", self.cpu)?;
        check_unit("ram", self.ram)?;
        check_unit("net", self.net)?;
        if self.window == 0 {
            return Err(Error::validation("utilization window must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemAverages {
    pub cpu_all: f64,
    pub ram_all: f64,
    pub net_all: f64,
}

/// Resource weights `(a, b, c)`: non-negative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl WeightTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let w = WeightTriple { a, b, c };
        w.validate()?;
        Ok(w)
    }

    /// `a = b = c = 1/3`.
    pub fn equal() -> Self {
        WeightTriple {
            a: 1.0 / 3.0,
            b: 1.0 / 3.0,
            c: 1.0 / 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.b >= 0.0 && self.c >= 0.0) {
            return Err(Error::validation(format!(
                "weights must be non-negative, got a={}, b={}, c={}",
                self.a, self.b, self.c
            )));
        }
        let sum = self.a + self.b + self.c;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::validation(format!(
                "weights violate a + b + c = 1 (sum is {sum})"
            )));
        }
        Ok(())
    }

    /// Weighted composite of a utilization triple.
    pub fn composite(&self, cpu: f64, ram: f64, net: f64) -> f64 {
        self.a * cpu + self.b * ram + self.c * net
    }
}

impl Default for WeightTriple {
    fn default() -> Self {
        WeightTriple::equal()
    }
}

/// All imbalance figures for one observation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    pub isl_cpu: f64,
    pub isl_ram: f64,
    pub isl_net: f64,
    pub ibl_tot: f64,
    /// `SIL_i`, in the order the servers were given.
    pub sil: Vec<f64>,
    pub isl_tot: f64,
    pub efficiency: f64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::validation(format!(
            "{name} utilization {v} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Arithmetic mean of each component over the samples; the window is the
/// number of samples.
pub fn average_utilization(samples: &[UtilizationSample]) -> Result<ResourceUtilization> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let (mut cpu, mut ram, mut net) = (0.0, 0.0, 0.0);
    for s in samples {
        check_unit("cpu", s.cpu)?;
        check_unit("ram", s.ram)?;
        check_unit("net", s.net)?;
        cpu += s.cpu;
        ram += s.ram;
        net += s.net;
    }
    let n = samples.len() as f64;
    Ok(ResourceUtilization {
        cpu: (cpu / n).min(1.0),
        ram: (ram / n).min(1.0),
        net: (net / n).min(1.0),
        window: samples.len(),
    })
}

/// Weighted mean taken as an offset from the first value, so identical
/// inputs reproduce that value exactly.
fn weighted_mean(values: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let base = values.clone().next().map_or(0.0, |(v, _)| v);
    let (num, den) = values.fold((0.0, 0.0), |(n, d), (v, w)| (n + (v - base) * w, d + w));
    (base + num / den).clamp(0.0, 1.0)
}

/// Capacity-weighted system averages.
pub fn system_averages(
    utils: &[ResourceUtilization],
    specs: &[ServerSpec],
) -> Result<SystemAverages> {
    if utils.len() != specs.len() {
        return Err(Error::validation(format!(
            "{} utilizations for {} servers",
            utils.len(),
            specs.len()
        )));
    }
    if utils.is_empty() {
        return Err(Error::validation("no servers"));
    }
    for u in utils {
        u.validate()?;
    }
    for s in specs {
        s.validate()?;
    }
    let pairs = || utils.iter().zip(specs);
    Ok(SystemAverages {
        cpu_all: weighted_mean(pairs().map(|(u, s)| (u.cpu, f64::from(s.cpu_count)))),
        ram_all: weighted_mean(pairs().map(|(u, s)| (u.ram, s.ram_capacity))),
        net_all: weighted_mean(pairs().map(|(u, s)| (u.net, s.net_capacity))),
    })
}

/// `Σ (v − system_avg)²`, not divided by the number of servers.
pub fn resource_imbalance(values: &[f64], system_avg: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::validation("no utilization values"));
    }
    for v in values {
        check_unit("resource", *v)?;
    }
    Ok(values.iter().map(|v| (v - system_avg).powi(2)).sum())
}

/// Sum of the three per-resource imbalances.
pub fn total_imbalance(isl_cpu: f64, isl_ram: f64, isl_net: f64) -> Result<f64> {
    for (name, v) in [("cpu", isl_cpu), ("ram", isl_ram), ("net", isl_net)] {
        if !(v >= 0.0) {
            return Err(Error::validation(format!(
                "{name} imbalance must be non-negative, got {v}"
            )));
        }
    }
    Ok(isl_cpu + isl_ram + isl_net)
}

/// Weighted squared deviation of one server from the system averages.
pub fn server_sil(
    util: &ResourceUtilization,
    avgs: &SystemAverages,
    w: &WeightTriple,
) -> Result<f64> {
    w.validate()?;
    Ok(sil_unchecked(util.cpu, util.ram, util.net, avgs, w))
}

pub(crate) fn sil_unchecked(
    cpu: f64,
    ram: f64,
    net: f64,
    avgs: &SystemAverages,
    w: &WeightTriple,
) -> f64 {
    w.a * (cpu - avgs.cpu_all).powi(2)
        + w.b * (ram - avgs.ram_all).powi(2)
        + w.c * (net - avgs.net_all).powi(2)
}

/// Mean of the per-server composite imbalances.
pub fn system_sil(sils: &[f64]) -> Result<f64> {
    if sils.is_empty() {
        return Err(Error::validation("no per-server imbalance values"));
    }
    if let Some(bad) = sils.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::validation(format!(
            "per-server imbalance must be non-negative, got {bad}"
        )));
    }
    Ok(sils.iter().sum::<f64>() / sils.len() as f64)
}

/// Mean weighted composite load across servers.
pub fn efficiency(utils: &[ResourceUtilization], w: &WeightTriple) -> Result<f64> {
    w.validate()?;
    if utils.is_empty() {
        return Err(Error::validation("no servers"));
    }
    for u in utils {
        u.validate()?;
    }
    let total: f64 = utils.iter().map(|u| w.composite(u.cpu, u.ram, u.net)).sum();
    Ok((total / utils.len() as f64).clamp(0.0, 1.0))
}

/// Every imbalance figure for one window.
pub fn full_report(
    utils: &[ResourceUtilization],
    specs: &[ServerSpec],
    w: &WeightTriple,
) -> Result<ImbalanceReport> {
    w.validate()?;
    let avgs = system_averages(utils, specs)?;
    let cpu: Vec<f64> = utils.iter().map(|u| u.cpu).collect();
    let ram: Vec<f64> = utils.iter().map(|u| u.ram).collect();
    let net: Vec<f64> = utils.iter().map(|u| u.net).collect();
    let isl_cpu = resource_imbalance(&cpu, avgs.cpu_all)?;
    let isl_ram = resource_imbalance(&ram, avgs.ram_all)?;
    let isl_net = resource_imbalance(&net, avgs.net_all)?;
    let ibl_tot = total_imbalance(isl_cpu, isl_ram, isl_net)?;
    let sil: Vec<f64> = utils
        .iter()
        .map(|u| sil_unchecked(u.cpu, u.ram, u.net, &avgs, w))
        .collect();
    let isl_tot = system_sil(&sil)?;
    Ok(ImbalanceReport {
        isl_cpu,
        isl_ram,
        isl_net,
        ibl_tot,
        sil,
        isl_tot,
        efficiency: efficiency(utils, w)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn util(cpu: f64, ram: f64, net: f64) -> ResourceUtilization {
        ResourceUtilization::new(cpu, ram, net, 1).unwrap()
    }

    fn spec(id: u32, cpus: u32) -> ServerSpec {
        ServerSpec::new(id, cpus, 1.0, 1.0).unwrap()
    }

    #[test]
    fn average_utilization_examples() {
        let same = vec![UtilizationSample::uniform(0.5); 4];
        assert_eq!(
            average_utilization(&same).unwrap(),
            util(0.5, 0.5, 0.5).with_window(4)
        );

        let ramp = [0.2, 0.4, 0.6].map(|c| UtilizationSample::new(c, 0.0, 0.0));
        assert!((average_utilization(&ramp).unwrap().cpu - 0.4).abs() < 1e-15);

        let one = [UtilizationSample::new(0.1, 0.2, 0.3)];
        assert_eq!(average_utilization(&one).unwrap(), util(0.1, 0.2, 0.3));
    }

    #[test]
    fn average_utilization_errors() {
        assert!(matches!(
            average_utilization(&[]),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            average_utilization(&[UtilizationSample::new(1.2, 0.0, 0.0)]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn system_averages_examples() {
        let a = system_averages(&[util(0.5, 0.5, 0.5); 2], &[spec(1, 4), spec(2, 4)]).unwrap();
        assert_eq!(a.cpu_all, 0.5);

        let a = system_averages(
            &[util(0.2, 0.0, 0.0), util(0.8, 0.0, 0.0)],
            &[spec(1, 1), spec(2, 3)],
        )
        .unwrap();
        assert!((a.cpu_all - 0.65).abs() < 1e-15);

        let a = system_averages(&[util(0.1, 0.2, 0.3)], &[spec(1, 8)]).unwrap();
        assert_eq!((a.cpu_all, a.ram_all, a.net_all), (0.1, 0.2, 0.3));

        assert!(system_averages(&[util(0.1, 0.2, 0.3)], &[spec(1, 1), spec(2, 1)]).is_err());
    }

    #[test]
    fn memory_and_network_use_capacity_weights() {
        let specs = [
            ServerSpec::new(1, 1, 1.0, 3.0).unwrap(),
            ServerSpec::new(2, 1, 3.0, 1.0).unwrap(),
        ];
        let a = system_averages(&[util(0.0, 0.0, 1.0), util(0.0, 1.0, 0.0)], &specs).unwrap();
        assert!((a.ram_all - 0.75).abs() < 1e-15);
        assert!((a.net_all - 0.75).abs() < 1e-15);
    }

    #[test]
    fn resource_imbalance_examples() {
        assert_eq!(resource_imbalance(&[0.3, 0.3, 0.3], 0.3).unwrap(), 0.0);
        assert!((resource_imbalance(&[0.4, 0.6], 0.5).unwrap() - 0.02).abs() < 1e-15);
        assert!((resource_imbalance(&[0.0, 1.0], 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(resource_imbalance(&[], 0.5).is_err());
    }

    #[test]
    fn total_imbalance_examples() {
        assert_eq!(total_imbalance(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((total_imbalance(0.02, 0.01, 0.03).unwrap() - 0.06).abs() < 1e-15);
        assert_eq!(total_imbalance(0.7, 0.0, 0.0).unwrap(), 0.7);
        assert!(total_imbalance(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn server_sil_examples() {
        let avgs = SystemAverages {
            cpu_all: 0.5,
            ram_all: 0.4,
            net_all: 0.3,
        };
        let w = WeightTriple::equal();
        assert_eq!(server_sil(&util(0.5, 0.4, 0.3), &avgs, &w).unwrap(), 0.0);
        let s = server_sil(&util(0.8, 0.7, 0.6), &avgs, &w).unwrap();
        assert!((s - 0.09).abs() < 1e-15);
        let cpu_only = WeightTriple::new(1.0, 0.0, 0.0).unwrap();
        let s = server_sil(&util(0.7, 0.0, 1.0), &avgs, &cpu_only).unwrap();
        assert!((s - 0.04).abs() < 1e-15);
        let bad = WeightTriple {
            a: 0.5,
            b: 0.5,
            c: 0.5,
        };
        let err = server_sil(&util(0.5, 0.4, 0.3), &avgs, &bad).unwrap_err();
        assert!(err.to_string().contains("a + b + c = 1"));
    }

    #[test]
    fn system_sil_examples() {
        assert_eq!(system_sil(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((system_sil(&[0.09, 0.01]).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(system_sil(&[0.3]).unwrap(), 0.3);
        assert!(system_sil(&[]).is_err());
    }

    #[test]
    fn efficiency_examples() {
        let w = WeightTriple::equal();
        assert!((efficiency(&[util(1.0, 1.0, 1.0); 3], &w).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(efficiency(&[util(0.0, 0.0, 0.0); 3], &w).unwrap(), 0.0);
        let e = efficiency(&[util(0.2, 0.2, 0.2), util(0.6, 0.6, 0.6)], &w).unwrap();
        assert!((e - 0.4).abs() < 1e-15);
    }

    #[test]
    fn full_report_uniform_and_single_server() {
        let w = WeightTriple::equal();
        let r = full_report(
            &[util(0.4, 0.4, 0.4); 3],
            &[spec(1, 2), spec(2, 4), spec(3, 8)],
            &w,
        )
        .unwrap();
        assert_eq!(
            (r.isl_cpu, r.isl_ram, r.isl_net, r.ibl_tot, r.isl_tot),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert!((r.efficiency - 0.4).abs() < 1e-15);

        let r = full_report(&[util(0.9, 0.1, 0.5)], &[spec(7, 3)], &w).unwrap();
        assert_eq!((r.isl_cpu, r.isl_ram, r.isl_net), (0.0, 0.0, 0.0));
        assert_eq!(r.sil, vec![0.0]);
    }

    #[test]
    fn cluster_validation() {
        assert!(validate_cluster(&[]).is_err());
        assert!(validate_cluster(&[spec(1, 1), spec(1, 2)]).is_err());
        assert!(ServerSpec::new(1, 0, 1.0, 1.0).is_err());
        assert!(ServerSpec::new(1, 1, 0.0, 1.0).is_err());
        assert!(validate_cluster(&[spec(1, 1), spec(2, 2)]).is_ok());
    }

    impl ResourceUtilization {
        fn with_window(mut self, window: usize) -> Self {
            self.window = window;
            self
        }
    }
}
