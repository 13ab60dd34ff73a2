//! CSV and JSON files read and written by the command-line tool.
//!
//! Real numbers are printed with 12 significant digits. Every CSV file has
//! a header row and `\n` line endings. Summary lines start with `#` and are
//! skipped when reading.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractal::MultifractalSpectrum;
use crate::metrics::ServerSpec;
use crate::sim::WindowReport;
use crate::traffic::{GeneratorMeta, MeasuredScaling, TrafficSeries};

pub const SERIES_HEADER: [&str; 2] = ["tick", "value"];
pub const SPECTRUM_HEADER: [&str; 3] = ["q", "h_q", "intercept"];
pub const REPORT_HEADER: [&str; 7] = [
    "tick",
    "isl_cpu",
    "isl_ram",
    "isl_net",
    "ibl_tot",
    "isl_tot",
    "efficiency",
];
pub const SIL_HEADER: [&str; 3] = ["tick", "server_id", "sil"];
pub const SUMMARY_HEADER: [&str; 7] = [
    "scenario",
    "H_target",
    "dH_target",
    "H_measured",
    "dH_measured",
    "mean_isl_tot_final_quarter",
    "cv_isl_tot_final_half",
];

/// `x` with 12 significant digits, in plain notation for magnitudes in
/// `[1e-5, 1e12)` and scientific notation otherwise. Trailing zeros are
/// dropped.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), format_sig12)
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Flushes `writer` and appends the `#` summary line.
fn finish<W: Write>(writer: csv::Writer<W>, summary: Option<&str>) -> Result<W> {
    let mut inner = writer
        .into_inner()
        .map_err(|e| Error::Csv(e.error().to_string()))?;
    if let Some(line) = summary {
        writeln!(inner, "# {line}").map_err(|e| Error::Csv(e.to_string()))?;
    }
    inner.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(inner)
}

fn write_to_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut file = create(path)?;
    body(&mut file)?;
    file.flush().map_err(|e| Error::io(path, e))
}

/// Writes `values` as `tick,value` rows.
pub fn write_series<W: Write>(w: W, values: &[f64]) -> Result<()> {
    let mut writer = csv_writer(w);
    writer.write_record(SERIES_HEADER)?;
    for (tick, v) in values.iter().enumerate() {
        writer.write_record([tick.to_string(), format_sig12(*v)])?;
    }
    finish(writer, None)?;
    Ok(())
}

pub fn write_series_csv(path: &Path, values: &[f64]) -> Result<()> {
    write_to_file(path, |f| write_series(f, values))
}

/// Reads a `tick,value` series. Ticks must run 0, 1, 2, ... and values must
/// be finite and non-negative.
pub fn read_series<R: Read>(r: R) -> Result<TrafficSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != SERIES_HEADER {
        return Err(Error::Csv(format!(
            "expected header `tick,value`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let tick: usize = record[0]
            .parse()
            .map_err(|_| Error::Csv(format!("row {}: bad tick `{}`", row + 1, &record[0])))?;
        if tick != row {
            return Err(Error::Csv(format!(
                "row {}: expected tick {row}, found {tick}",
                row + 1
            )));
        }
        let value: f64 = record[1]
            .parse()
            .map_err(|_| Error::Csv(format!("row {}: bad value `{}`", row + 1, &record[1])))?;
        values.push(value);
    }
    TrafficSeries::new(values, GeneratorMeta::imported())
}

pub fn read_series_csv(path: &Path) -> Result<TrafficSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_series(file)
}

/// Writes one `q,h_q,intercept` row per order and a `# H=.. dH=..` line.
pub fn write_spectrum<W: Write>(w: W, spectrum: &MultifractalSpectrum, hurst: f64) -> Result<()> {
    let mut writer = csv_writer(w);
    writer.write_record(SPECTRUM_HEADER)?;
    for ((q, h), c) in spectrum
        .q_grid
        .iter()
        .zip(&spectrum.h_of_q)
        .zip(&spectrum.intercepts)
    {
        writer.write_record([format_sig12(*q), format_sig12(*h), format_sig12(*c)])?;
    }
    let summary = format!(
        "H={} dH={}",
        format_sig12(hurst),
        format_sig12(spectrum.delta_h)
    );
    finish(writer, Some(&summary))?;
    Ok(())
}

/// The trailing line of a report file.
pub fn run_summary_line(
    name: &str,
    measured: Option<MeasuredScaling>,
    mean_isl_tot: f64,
) -> String {
    format!(
        "scenario={name} H={} dH={} mean_isl_tot={}",
        format_opt(measured.map(|m| m.hurst)),
        format_opt(measured.map(|m| m.delta_h)),
        format_sig12(mean_isl_tot)
    )
}

/// One row per window, keyed by the window's end tick, followed by
/// `summary` as a `#` line.
pub fn write_reports<W: Write>(w: W, reports: &[WindowReport], summary: &str) -> Result<()> {
    let mut writer = csv_writer(w);
    writer.write_record(REPORT_HEADER)?;
    for r in reports {
        let m = &r.report;
        writer.write_record([
            r.end_tick.to_string(),
            format_sig12(m.isl_cpu),
            format_sig12(m.isl_ram),
            format_sig12(m.isl_net),
            format_sig12(m.ibl_tot),
            format_sig12(m.isl_tot),
            format_sig12(m.efficiency),
        ])?;
    }
    finish(writer, Some(summary))?;
    Ok(())
}

/// One `tick,server_id,sil` row per window and server.
pub fn write_sil<W: Write>(w: W, reports: &[WindowReport], specs: &[ServerSpec]) -> Result<()> {
    let mut writer = csv_writer(w);
    writer.write_record(SIL_HEADER)?;
    for r in reports {
        for (spec, sil) in specs.iter().zip(&r.report.sil) {
            writer.write_record([
                r.end_tick.to_string(),
                spec.id.to_string(),
                format_sig12(*sil),
            ])?;
        }
    }
    finish(writer, None)?;
    Ok(())
}

/// A row of the sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub hurst_target: f64,
    pub delta_h_target: f64,
    pub measured: Option<MeasuredScaling>,
    pub mean_isl_tot_final_quarter: f64,
    pub cv_isl_tot_final_half: f64,
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv_writer(w);
    writer.write_record(SUMMARY_HEADER)?;
    for r in rows {
        writer.write_record([
            r.scenario.clone(),
            format_sig12(r.hurst_target),
            format_sig12(r.delta_h_target),
            format_opt(r.measured.map(|m| m.hurst)),
            format_opt(r.measured.map(|m| m.delta_h)),
            format_sig12(r.mean_isl_tot_final_quarter),
            format_sig12(r.cv_isl_tot_final_half),
        ])?;
    }
    finish(writer, None)?;
    Ok(())
}

/// Provenance record written next to simulation outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    /// SHA-256 of the canonical configuration.
    pub config_digest: String,
    pub outputs: Vec<PathBuf>,
    pub measured: Option<(f64, f64)>,
    /// RFC 3339, UTC.
    pub started: String,
    pub finished: String,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_to_file(path, |f| {
        serde_json::to_writer_pretty(&mut *f, value)
            .map_err(|e| Error::Internal(format!("json encoding failed: {e}")))?;
        f.write_all(b"\n").map_err(|e| Error::io(path, e))
    })
}

/// Convenience wrappers that write straight to a path.
pub fn write_spectrum_csv(path: &Path, spectrum: &MultifractalSpectrum, hurst: f64) -> Result<()> {
    write_to_file(path, |f| write_spectrum(f, spectrum, hurst))
}

pub fn write_reports_csv(path: &Path, reports: &[WindowReport], summary: &str) -> Result<()> {
    write_to_file(path, |f| write_reports(f, reports, summary))
}

pub fn write_sil_csv(path: &Path, reports: &[WindowReport], specs: &[ServerSpec]) -> Result<()> {
    write_to_file(path, |f| write_sil(f, reports, specs))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_to_file(path, |f| write_summary(f, rows))
}
