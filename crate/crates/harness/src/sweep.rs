//! Scalar regularization study: known per-solution errors, one point.

use std::path::Path;

use errest_core::inverse::{alpha_sweep, log_alphas, normal_solution_oracle, SweepRecord};
use errest_core::{DifferenceSystem, IpConfig, SolverKind};
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const DEFAULT_TRUE_ERRORS: [f64; 3] = [1.0, -2.0, 3.0];

/// Plateau checked by the summary.
pub const PLATEAU: (f64, f64) = (1e-6, 1e-1);

/// `10^-10 .. 10^0`, four points per decade.
pub fn default_alphas() -> Vec<f64> {
    log_alphas(-10.0, 0.0, 41)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub true_errors: Vec<f64>,
    pub solver: SolverKind,
    pub normal_solution: Vec<f64>,
    /// Shift of the true errors from the normal solution, `-mean(e)`.
    pub expected_shift: f64,
    pub plateau: (f64, f64),
    pub plateau_points: usize,
    /// Largest pairwise 2-norm distance between plateau estimates over the
    /// smallest plateau estimate norm.
    pub plateau_variation: f64,
    pub plateau_shift_range: (f64, f64),
    pub largest_alpha: f64,
    /// `|estimate| / |normal solution|` at the largest alpha.
    pub largest_alpha_ratio: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn in_plateau(a: f64) -> bool {
    a >= PLATEAU.0 * (1.0 - 1e-9) && a <= PLATEAU.1 * (1.0 + 1e-9)
}

pub fn run_scalar_sweep(
    true_errors: &[f64],
    alphas: &[f64],
    cfg: &IpConfig,
    solver: SolverKind,
) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    if alphas.is_empty() {
        return Err(HarnessError::Config("empty alpha list".into()));
    }
    let sys = DifferenceSystem::new(true_errors.len())?;
    let f = sys.rhs_from_values(true_errors)?;
    let records = alpha_sweep(&sys, &f, alphas, cfg, solver, Some(true_errors))?;
    let (normal, _) = normal_solution_oracle(true_errors);
    let plateau: Vec<&SweepRecord> = records.iter().filter(|r| in_plateau(r.alpha)).collect();
    let mut variation: f64 = 0.0;
    for a in &plateau {
        for b in &plateau {
            let d: Vec<f64> = a.estimate.iter().zip(&b.estimate).map(|(x, y)| x - y).collect();
            variation = variation.max(norm(&d));
        }
    }
    let min_norm = plateau.iter().map(|r| norm(&r.estimate)).fold(f64::INFINITY, f64::min);
    let shifts = plateau.iter().filter_map(|r| r.shift);
    let shift_range = shifts.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    let last = records.last().expect("non-empty");
    let summary = SweepSummary {
        true_errors: true_errors.to_vec(),
        solver,
        expected_shift: -true_errors.iter().sum::<f64>() / true_errors.len() as f64,
        plateau: PLATEAU,
        plateau_points: plateau.len(),
        plateau_variation: if plateau.is_empty() { f64::NAN } else { variation / min_norm },
        plateau_shift_range: shift_range,
        largest_alpha: last.alpha,
        largest_alpha_ratio: norm(&last.estimate) / norm(&normal),
        normal_solution: normal,
    };
    Ok((records, summary))
}

/// Writes `sweep.csv` and `sweep_summary.json` into `dir`; returns both paths.
pub fn write_sweep(dir: &Path, records: &[SweepRecord], summary: &SweepSummary) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let csv = crate::plot::emit_plot_data(crate::plot::PlotData::Sweep(records), &dir.join("sweep.csv"))?;
    let json = dir.join("sweep_summary.json");
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(&json, text).map_err(|e| HarnessError::io(&json, e))?;
    Ok(vec![csv, json])
}
