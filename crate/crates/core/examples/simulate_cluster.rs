//! One traffic series, four dispatch policies.
//!
//!     cargo run --release --example simulate_cluster

use mfbalance::metrics::WeightTriple;
use mfbalance::sim::{run_scenario, Policy, PolicyKind, ScenarioConfig, TrafficSource};

fn main() -> mfbalance::Result<()> {
    let w = WeightTriple::equal();
    let policies = [
        Policy::new(PolicyKind::RoundRobin, w),
        Policy::new(PolicyKind::LeastComposite, w),
        Policy::new(PolicyKind::LeastSil, w),
        Policy::threshold_migration(0.002, w),
    ];
    println!(
        "{:<20} {:>12} {:>10} {:>10} {:>9} {:>7}",
        "policy", "mean ISL_tot", "cv ISL", "efficiency", "migrated", "queued"
    );
    for policy in policies {
        let config = ScenarioConfig {
            name: format!("{:?}", policy.kind),
            traffic: TrafficSource::targets(0.9, 2.5),
            policy,
            horizon: 1 << 13,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let outcome = run_scenario(&config)?;
        let efficiency = outcome
            .reports
            .iter()
            .map(|r| r.report.efficiency)
            .sum::<f64>()
            / outcome.reports.len() as f64;
        println!(
            "{:<20} {:>12.5} {:>10.3} {:>10.3} {:>9} {:>7}",
            outcome.name,
            outcome.mean_isl_tot_final_quarter(),
            outcome.cv_isl_tot_final_half(),
            efficiency,
            outcome.counters.migrations,
            outcome.queued
        );
    }
    Ok(())
}
