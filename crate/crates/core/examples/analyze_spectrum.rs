//! Estimates Hurst exponents three ways and prints the MF-DFA spectrum of a
//! monofractal and a multifractal series side by side.
//!
//!     cargo run --release --example analyze_spectrum

use mfbalance::fractal::{
    default_q_grid, estimate_hurst_dfa, estimate_hurst_rs, log_spaced_scales, mfdfa,
    structure_function, Aggregation,
};
use mfbalance::traffic::{generate_composite, generate_fgn};

fn main() -> mfbalance::Result<()> {
    let n = 1 << 15;
    let fgn = generate_fgn(0.7, n, 11)?;
    let dfa = estimate_hurst_dfa(fgn.values(), None)?;
    let rs = estimate_hurst_rs(fgn.values(), None)?;
    // Centered block sums scale like m^H for long-memory noise.
    let scales = log_spaced_scales(16, n / 16, 12);
    let sf = structure_function(fgn.values(), 2.0, &scales, Aggregation::Centered)?;
    println!("fGn with H = 0.7");
    println!("  DFA  {:.3} ± {:.3}", dfa.hurst, dfa.stderr);
    println!("  R/S  {:.3}", rs.hurst);
    println!("  S(2) {:.3}", sf.slope / 2.0);

    let composite = generate_composite(15, 3.0, 0.6, 11)?;
    let grid = default_q_grid();
    let mono = mfdfa(fgn.values(), &grid, None)?;
    let multi = mfdfa(composite.values(), &grid, None)?;
    println!("\n{:>5} {:>8} {:>10}", "q", "fGn", "composite");
    for (i, q) in grid.iter().enumerate() {
        println!("{q:>5} {:>8.3} {:>10.3}", mono.h_of_q[i], multi.h_of_q[i]);
    }
    println!("{:>5} {:>8.3} {:>10.3}", "dh", mono.delta_h, multi.delta_h);
    Ok(())
}
