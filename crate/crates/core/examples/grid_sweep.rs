//! Runs the three (H, Δh) scenarios over several seeds and reports how
//! often the imbalance orders as H and Δh grow.
//!
//!     cargo run --release --example grid_sweep [seeds]

use rayon::prelude::*;

use mfbalance::config::DEFAULT_SWEEP_GRID;
use mfbalance::sim::{run_scenario, ScenarioConfig, TrafficSource};

fn main() -> mfbalance::Result<()> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let rows = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            DEFAULT_SWEEP_GRID
                .iter()
                .map(|&(h, dh)| {
                    let config = ScenarioConfig {
                        name: format!("h{h}_dh{dh}"),
                        traffic: TrafficSource::targets(h, dh),
                        seed,
                        ..ScenarioConfig::default()
                    };
                    let o = run_scenario(&config)?;
                    Ok((o.mean_isl_tot_final_quarter(), o.cv_isl_tot_final_half()))
                })
                .collect::<mfbalance::Result<Vec<_>>>()
        })
        .collect::<mfbalance::Result<Vec<_>>>()?;

    println!("mean ISL_tot over the final quarter / cv over the final half");
    print!("{:>5}", "seed");
    for (h, dh) in DEFAULT_SWEEP_GRID {
        print!(" {:>18}", format!("H={h} dh={dh}"));
    }
    println!();
    let (mut ordered, mut cv_higher) = (0, 0);
    for (seed, row) in rows.iter().enumerate() {
        print!("{seed:>5}");
        for (m, cv) in row {
            print!(" {:>11.5} / {:>4.2}", m, cv);
        }
        println!();
        ordered += (row[0].0 < row[1].0.min(row[2].0) && row[2].0 > row[1].0) as u32;
        cv_higher += (row[2].1 > row[0].1) as u32;
    }
    println!("\nlowest at (0.6, 1.5) and highest at (0.9, 2.5): {ordered}/{seeds}");
    println!("cv higher at (0.9, 2.5) than at (0.6, 1.5):    {cv_higher}/{seeds}");
    Ok(())
}
