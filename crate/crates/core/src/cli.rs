//! The `mfbalance` command-line tool.
//!
//! Exit codes: 0 on success, 1 for configuration, validation and file
//! problems (including bad flags), 2 for numerical failures such as a
//! calibration that misses its tolerances or a degenerate series.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{parse_config, scenario_digest, Config};
use crate::error::{Error, Result};
use crate::fractal::{default_q_grid, mfdfa, q_grid_linspace, MIN_MFDFA_LENGTH};
use crate::io::{
    format_sig12, read_series_csv, run_summary_line, write_json, write_reports_csv,
    write_series_csv, write_sil_csv, write_spectrum_csv, write_summary_csv, RunManifest,
    SummaryRow,
};
use crate::sim::{
    cv_isl_tot_final_half, depth_for_horizon, mean_isl_tot_final_quarter, simulate, ScenarioConfig,
    TrafficSource, DEFAULT_CALIBRATION_BUDGET, DEFAULT_HORIZON,
};
use crate::traffic::{calibrate, GeneratorKind, MeasuredScaling};

pub const SERIES_FILE: &str = "series.csv";
pub const GENERATOR_FILE: &str = "generator.json";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const TRAFFIC_FILE: &str = "traffic.csv";
pub const REPORTS_FILE: &str = "reports.csv";
pub const SIL_FILE: &str = "sil.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Number of moment orders when only `--q-min`/`--q-max` are given.
const DEFAULT_Q_STEPS: usize = 11;

#[derive(Debug, Parser)]
#[command(
    name = "mfbalance",
    version,
    about = "Multifractal traffic, imbalance metrics and cluster load-balancing simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a traffic series calibrated to a Hurst exponent and Δh.
    Generate(GenerateArgs),
    /// Estimate the generalized Hurst exponents of a series file.
    Analyze(AnalyzeArgs),
    /// Simulate one scenario and write per-window imbalance reports.
    Simulate(SimulateArgs),
    /// Simulate every (H, Δh) cell of the configured sweep grid.
    Sweep(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub hurst: f64,
    /// Target h(q_min) - h(q_max); 0.2 or less gives fractional Gaussian noise.
    #[arg(long = "delta-h", default_value_t = 0.0)]
    pub delta_h: f64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum number of calibration probes.
    #[arg(long, default_value_t = DEFAULT_CALIBRATION_BUDGET)]
    pub budget: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// A `tick,value` CSV file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "q-min", allow_negative_numbers = true)]
    pub q_min: Option<f64>,
    #[arg(long = "q-max", allow_negative_numbers = true)]
    pub q_max: Option<f64>,
    #[arg(long = "q-steps")]
    pub q_steps: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Generate(args) => cmd_generate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

/// Writes `series.csv` and `generator.json` (the parameters that regenerate
/// it) into `--out`.
pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    if args.length < 2 {
        return Err(Error::config("--length must be at least 2"));
    }
    let mut meta = calibrate(args.hurst, args.delta_h, args.budget, 0)?;
    if meta.kind != GeneratorKind::FGn {
        meta.depth = Some(depth_for_horizon(args.length)?);
    }
    let meta = meta.with_seed(args.seed);
    let series = meta.generate(args.length)?;
    let values = &series.values()[..args.length];
    let path = args.out.join(SERIES_FILE);
    write_series_csv(&path, values)?;
    write_json(&args.out.join(GENERATOR_FILE), &series.meta)?;
    println!("wrote {} ({} ticks)", path.display(), values.len());
    Ok(())
}

fn analysis_grid(args: &AnalyzeArgs) -> Result<Vec<f64>> {
    if args.q_min.is_none() && args.q_max.is_none() && args.q_steps.is_none() {
        return Ok(default_q_grid());
    }
    q_grid_linspace(
        args.q_min.unwrap_or(-5.0),
        args.q_max.unwrap_or(5.0),
        args.q_steps.unwrap_or(DEFAULT_Q_STEPS),
    )
}

/// Writes `spectrum.csv` into `--out` and prints `H=.. dH=..`.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let series = read_series_csv(&args.input)?;
    let grid = analysis_grid(args)?;
    let spectrum = mfdfa(series.values(), &grid, None)?;
    let hurst = spectrum.h_at(2.0).expect("analysis grids contain q = 2");
    write_spectrum_csv(&args.out.join(SPECTRUM_FILE), &spectrum, hurst)?;
    println!(
        "H={} dH={}",
        format_sig12(hurst),
        format_sig12(spectrum.delta_h)
    );
    Ok(())
}

fn load_config(args: &SimulateArgs) -> Result<Config> {
    let config = parse_config(&args.config)?;
    Ok(match args.seed {
        Some(seed) => config.with_seed(seed),
        None => config,
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let config = load_config(args)?;
    let row = run_cell(&config.scenario, &config.q_grid, &args.out)?;
    println!(
        "{}",
        run_summary_line(&row.scenario, row.measured, row.mean_isl_tot_final_quarter)
    );
    Ok(())
}

/// Runs the sweep cells in parallel, each into its own subdirectory, then
/// writes `summary.csv` with rows sorted by scenario name.
pub fn cmd_sweep(args: &SimulateArgs) -> Result<()> {
    let config = load_config(args)?;
    let cells = config.sweep_scenarios();
    let mut rows = cells
        .par_iter()
        .map(|cell| run_cell(cell, &config.q_grid, &args.out.join(&cell.name)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    write_summary_csv(&args.out.join(SUMMARY_FILE), &rows)?;
    for row in &rows {
        println!(
            "{}",
            run_summary_line(&row.scenario, row.measured, row.mean_isl_tot_final_quarter)
        );
    }
    Ok(())
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

/// `(H, Δh)` of `values`, when long enough and not degenerate.
pub fn measure_with(values: &[f64], q_grid: &[f64]) -> Option<MeasuredScaling> {
    if values.len() < MIN_MFDFA_LENGTH {
        return None;
    }
    let spectrum = mfdfa(values, q_grid, None).ok()?;
    Some(MeasuredScaling {
        hurst: spectrum.h_at(2.0)?,
        delta_h: spectrum.delta_h,
    })
}

/// Simulates `scenario` and writes its traffic, reports, per-server SIL and
/// manifest into `dir`.
fn run_cell(scenario: &ScenarioConfig, q_grid: &[f64], dir: &Path) -> Result<SummaryRow> {
    let started = timestamp();
    scenario.validate()?;
    let series = scenario.traffic_series()?;
    let traffic = &series.values()[..scenario.horizon];
    let measured = measure_with(traffic, q_grid);
    let (reports, state) = simulate(&series, scenario)?;
    let mean_isl = mean_isl_tot_final_quarter(&reports);

    let outputs = [TRAFFIC_FILE, REPORTS_FILE, SIL_FILE].map(|f| dir.join(f));
    write_series_csv(&outputs[0], traffic)?;
    write_reports_csv(
        &outputs[1],
        &reports,
        &run_summary_line(&scenario.name, measured, mean_isl),
    )?;
    write_sil_csv(&outputs[2], &reports, state.specs())?;
    let manifest = RunManifest {
        scenario: scenario.name.clone(),
        config_digest: scenario_digest(scenario, q_grid),
        outputs: outputs.to_vec(),
        measured: measured.map(|m| (m.hurst, m.delta_h)),
        started,
        finished: timestamp(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;

    let (hurst_target, delta_h_target) = match &scenario.traffic {
        TrafficSource::Targets { hurst, delta_h, .. } => (*hurst, *delta_h),
        TrafficSource::Generator(meta) => (
            meta.target_hurst.unwrap_or(f64::NAN),
            meta.target_delta_h.unwrap_or(f64::NAN),
        ),
        TrafficSource::Series(_) => (f64::NAN, f64::NAN),
    };
    Ok(SummaryRow {
        scenario: scenario.name.clone(),
        hurst_target,
        delta_h_target,
        measured,
        mean_isl_tot_final_quarter: mean_isl,
        cv_isl_tot_final_half: cv_isl_tot_final_half(&reports),
    })
}
