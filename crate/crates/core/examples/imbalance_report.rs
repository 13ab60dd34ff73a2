//! Imbalance metrics for a small hand-written cluster.
//!
//!     cargo run --release --example imbalance_report

use mfbalance::metrics::{
    average_utilization, full_report, ServerSpec, UtilizationSample, WeightTriple,
};

fn main() -> mfbalance::Result<()> {
    let specs = vec![
        ServerSpec::new(1, 8, 32.0, 10.0)?,
        ServerSpec::new(2, 4, 16.0, 10.0)?,
        ServerSpec::new(3, 4, 16.0, 1.0)?,
    ];
    // Four monitoring samples per server, averaged over the window.
    let samples = [
        [
            (0.9, 0.7, 0.5),
            (0.8, 0.7, 0.6),
            (0.95, 0.75, 0.5),
            (0.85, 0.7, 0.4),
        ],
        [
            (0.2, 0.3, 0.1),
            (0.3, 0.3, 0.2),
            (0.25, 0.35, 0.1),
            (0.2, 0.3, 0.1),
        ],
        [
            (0.5, 0.5, 0.9),
            (0.5, 0.6, 0.95),
            (0.45, 0.5, 0.9),
            (0.5, 0.55, 1.0),
        ],
    ];
    let utils = samples
        .iter()
        .map(|s| {
            let s: Vec<_> = s
                .iter()
                .map(|&(c, r, n)| UtilizationSample::new(c, r, n))
                .collect();
            average_utilization(&s)
        })
        .collect::<mfbalance::Result<Vec<_>>>()?;

    for weights in [WeightTriple::equal(), WeightTriple::new(0.6, 0.2, 0.2)?] {
        let report = full_report(&utils, &specs, &weights)?;
        println!(
            "weights a={:.2} b={:.2} c={:.2}",
            weights.a, weights.b, weights.c
        );
        println!(
            "  ISL cpu={:.4} ram={:.4} net={:.4}  IBL_tot={:.4}",
            report.isl_cpu, report.isl_ram, report.isl_net, report.ibl_tot
        );
        for (spec, sil) in specs.iter().zip(&report.sil) {
            println!("  SIL server {} = {sil:.4}", spec.id);
        }
        println!(
            "  ISL_tot={:.4}  efficiency={:.3}\n",
            report.isl_tot, report.efficiency
        );
    }
    Ok(())
}
