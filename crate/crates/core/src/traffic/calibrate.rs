//! Search for generator parameters that realize a requested `(H, Δh)`.
//!
//! Measurements use MF-DFA with the default q grid on a probe series of
//! `2^PROBE_DEPTH` ticks generated with a fixed probe seed, so the search is
//! a deterministic function of its arguments.

use std::fmt;

use super::composite::ENVELOPE_RANGE;
use super::{generate_composite, generate_fgn, GeneratorKind, GeneratorMeta};
use crate::error::{Error, Result};
use crate::fractal::{default_q_grid, mfdfa};

pub const PROBE_DEPTH: u32 = 14;
pub const HURST_TOLERANCE: f64 = 0.1;
pub const DELTA_H_TOLERANCE: f64 = 0.3;

/// Targets at or below this range are served by plain fGn.
const MONOFRACTAL_DELTA_H: f64 = 0.2;

/// Stop searching once both residuals are within this fraction of their
/// tolerance.
const EARLY_EXIT_SCORE: f64 = 0.5;

const SPREAD_RANGE: (f64, f64) = (0.05, 8.0);
const GRID_SPREADS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.5];
const GRID_ENVELOPES: [f64; 6] = [0.4, 0.6, 0.8, 1.0, 1.2, 1.4];
const BISECTION_STEPS: usize = 7;
/// Initial `(ln spread, envelope)` steps of the final pattern search.
const COMPASS_START: (f64, f64) = (0.25, 0.1);
const COMPASS_MIN_ENV_STEP: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredScaling {
    pub hurst: f64,
    pub delta_h: f64,
}

/// Measured `h(2)` and `Δh` with the default MF-DFA settings.
pub fn measure(series: &[f64]) -> Result<MeasuredScaling> {
    let spectrum = mfdfa(series, &default_q_grid(), None)?;
    Ok(MeasuredScaling {
        hurst: spectrum.h_at(2.0).expect("default grid contains q = 2"),
        delta_h: spectrum.delta_h,
    })
}

/// Best parameters found when the search could not meet both tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFailure {
    pub best: GeneratorMeta,
    pub measured: Option<MeasuredScaling>,
    pub hurst_residual: f64,
    pub delta_h_residual: f64,
    pub evaluations: usize,
}

impl fmt::Display for CalibrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "calibration failed after {} evaluations: best residuals H {:+.3}, dH {:+.3} (tolerances ±{}, ±{})",
            self.evaluations,
            self.hurst_residual,
            self.delta_h_residual,
            HURST_TOLERANCE,
            DELTA_H_TOLERANCE
        )
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    meta: GeneratorMeta,
    measured: Option<MeasuredScaling>,
    score: f64,
}

struct Search {
    target_hurst: f64,
    target_delta_h: f64,
    budget: usize,
    probe_seed: u64,
    evaluations: usize,
    best: Option<Candidate>,
}

impl Search {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    fn done(&self) -> bool {
        self.exhausted()
            || self
                .best
                .as_ref()
                .is_some_and(|b| b.score <= EARLY_EXIT_SCORE)
    }

    fn residuals(&self, m: &MeasuredScaling) -> (f64, f64) {
        (m.hurst - self.target_hurst, m.delta_h - self.target_delta_h)
    }

    fn score(&self, m: &MeasuredScaling) -> f64 {
        let (rh, rd) = self.residuals(m);
        let mut score = (rh.abs() / HURST_TOLERANCE).max(rd.abs() / DELTA_H_TOLERANCE);
        if self.target_delta_h <= MONOFRACTAL_DELTA_H && m.delta_h > MONOFRACTAL_DELTA_H {
            score = score.max(1.0 + m.delta_h - MONOFRACTAL_DELTA_H);
        }
        score
    }

    /// Generates and measures one probe; `None` when the probe could not be
    /// measured.
    fn evaluate(&mut self, meta: GeneratorMeta) -> Option<MeasuredScaling> {
        self.evaluations += 1;
        let series = match meta.kind {
            GeneratorKind::FGn => generate_fgn(
                meta.envelope_hurst.unwrap(),
                1 << PROBE_DEPTH,
                self.probe_seed,
            ),
            _ => generate_composite(
                PROBE_DEPTH,
                meta.multiplier_spread.unwrap(),
                meta.envelope_hurst.unwrap(),
                self.probe_seed,
            ),
        };
        let measured = series.and_then(|s| measure(s.values())).ok();
        let score = measured.as_ref().map_or(f64::INFINITY, |m| self.score(m));
        if self.best.as_ref().is_none_or(|b| score < b.score) {
            self.best = Some(Candidate {
                meta,
                measured,
                score,
            });
        }
        measured
    }

    /// Bisects one knob over `[lo, hi]` so that `residual` changes sign,
    /// assuming the residual increases with the knob. `log_scale` bisects
    /// geometrically.
    fn bisect(
        &mut self,
        mut lo: f64,
        mut hi: f64,
        log_scale: bool,
        make: impl Fn(f64) -> GeneratorMeta,
        residual: impl Fn(&Self, &MeasuredScaling) -> f64,
    ) {
        for _ in 0..BISECTION_STEPS {
            if self.done() {
                return;
            }
            let mid = if log_scale {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            match self.evaluate(make(mid)) {
                Some(m) if residual(self, &m) < 0.0 => lo = mid,
                Some(_) => hi = mid,
                // unmeasurable probes sit at the rough, high-spread end
                None => hi = mid,
            }
        }
    }

    /// Pattern search around the best composite candidate: probe the four
    /// axis neighbours in `(ln spread, envelope)` and halve the step whenever
    /// none of them improves the score.
    fn compass(&mut self, probe_seed: u64) {
        let mut log_step = COMPASS_START.0;
        let mut env_step = COMPASS_START.1;
        while !self.done() && env_step >= COMPASS_MIN_ENV_STEP {
            let best = self.best.clone().expect("compass starts from a candidate");
            let spread = best.meta.multiplier_spread.unwrap();
            let env = best.meta.envelope_hurst.unwrap();
            let neighbours = [
                (spread, env + env_step),
                (spread, env - env_step),
                (spread * log_step.exp(), env),
                (spread / log_step.exp(), env),
            ];
            for (sp, e) in neighbours {
                if self.done() {
                    return;
                }
                if !(SPREAD_RANGE.0..=SPREAD_RANGE.1).contains(&sp)
                    || !(ENVELOPE_RANGE.0..=ENVELOPE_RANGE.1).contains(&e)
                {
                    continue;
                }
                self.evaluate(GeneratorMeta::composite(PROBE_DEPTH, sp, e, probe_seed));
            }
            if self.best.as_ref().unwrap().score >= best.score {
                log_step *= 0.5;
                env_step *= 0.5;
            }
        }
    }
}

/// Finds generator parameters whose probe realizes `(target_hurst,
/// target_delta_h)` within ±[`HURST_TOLERANCE`] and ±[`DELTA_H_TOLERANCE`].
///
/// Targets with `Δh <= 0.2` select fGn; everything else searches the
/// composite generator's spread and envelope exponent, first on a coarse
/// grid, then by one bisection pass on each knob, then by a local pattern
/// search. `budget` caps the number of probe evaluations.
pub fn calibrate(
    target_hurst: f64,
    target_delta_h: f64,
    budget: usize,
    probe_seed: u64,
) -> Result<GeneratorMeta> {
    if !(target_hurst > 0.5 && target_hurst < 1.0) {
        return Err(Error::config(format!(
            "calibration target H must lie in (0.5, 1), got {target_hurst}"
        )));
    }
    if !(0.0..=4.0).contains(&target_delta_h) {
        return Err(Error::config(format!(
            "calibration target dH must lie in [0, 4], got {target_delta_h}"
        )));
    }
    if budget == 0 {
        return Err(Error::config("calibration budget must be positive"));
    }

    let mut search = Search {
        target_hurst,
        target_delta_h,
        budget,
        probe_seed,
        evaluations: 0,
        best: None,
    };

    if target_delta_h <= MONOFRACTAL_DELTA_H {
        search.evaluate(GeneratorMeta::fgn(target_hurst, probe_seed));
        search.bisect(
            0.02,
            0.98,
            false,
            |h| GeneratorMeta::fgn(h, probe_seed),
            |s, m| s.residuals(m).0,
        );
    } else {
        'grid: for &spread in &GRID_SPREADS {
            for &env in &GRID_ENVELOPES {
                if search.done() {
                    break 'grid;
                }
                search.evaluate(GeneratorMeta::composite(
                    PROBE_DEPTH,
                    spread,
                    env,
                    probe_seed,
                ));
            }
        }
        let best = search.best.clone().expect("grid evaluated at least once");
        let spread = best.meta.multiplier_spread.unwrap();
        search.bisect(
            ENVELOPE_RANGE.0,
            ENVELOPE_RANGE.1,
            false,
            |env| GeneratorMeta::composite(PROBE_DEPTH, spread, env, probe_seed),
            |s, m| s.residuals(m).0,
        );
        let best = search.best.clone().unwrap();
        let env = best.meta.envelope_hurst.unwrap();
        search.bisect(
            SPREAD_RANGE.0,
            SPREAD_RANGE.1,
            true,
            |spread| GeneratorMeta::composite(PROBE_DEPTH, spread, env, probe_seed),
            |s, m| s.residuals(m).1,
        );
        search.compass(probe_seed);
    }

    let best = search.best.expect("at least one evaluation");
    let (hurst_residual, delta_h_residual) =
        best.measured.as_ref().map_or((f64::NAN, f64::NAN), |m| {
            search_residuals(target_hurst, target_delta_h, m)
        });
    if best.score <= 1.0 {
        Ok(best.meta.with_targets(target_hurst, target_delta_h))
    } else {
        Err(Error::Calibration(Box::new(CalibrationFailure {
            best: best.meta.with_targets(target_hurst, target_delta_h),
            measured: best.measured,
            hurst_residual,
            delta_h_residual,
            evaluations: search.evaluations,
        })))
    }
}

fn search_residuals(th: f64, tdh: f64, m: &MeasuredScaling) -> (f64, f64) {
    (m.hurst - th, m.delta_h - tdh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_targets() {
        assert!(matches!(calibrate(0.4, 1.0, 10, 0), Err(Error::Config(_))));
        assert!(matches!(calibrate(0.7, 4.5, 10, 0), Err(Error::Config(_))));
        assert!(matches!(calibrate(0.7, 1.0, 0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn exhausted_budget_reports_best_candidate() {
        match calibrate(0.9, 3.9, 1, 0) {
            Err(Error::Calibration(fail)) => {
                assert_eq!(fail.evaluations, 1);
                assert_eq!(fail.best.kind, GeneratorKind::Composite);
                assert!(fail.hurst_residual.is_finite());
            }
            other => panic!("expected calibration failure, got {other:?}"),
        }
    }
}
