//! Estimated versus true error fields.

use errest_core::metrics::{pearson, ErrorReport};
use errest_core::{ErrorEstimate, FieldSet, Grid2D, VarTag};
use errest_flow::analytic::{RayKind, RegionMap};
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeCorrelation {
    pub label: String,
    /// Pearson correlation of |estimated| and |true| errors; None when either is constant.
    pub abs_pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub report: ErrorReport,
    pub correlations: Vec<SchemeCorrelation>,
}

impl Comparison {
    pub fn correlation(&self, label: &str) -> Option<f64> {
        self.correlations.iter().find(|c| c.label == label).and_then(|c| c.abs_pearson)
    }
}

/// One variable of each estimate against the matching true-error set (same
/// order as `estimate.labels`, tagged `err:<var>` as `true_error` produces).
pub fn compare_estimate_to_truth(
    ensemble: &str,
    estimate: &ErrorEstimate,
    truth: &[FieldSet],
    var: VarTag,
) -> Result<Comparison> {
    if truth.len() != estimate.labels.len() {
        return Err(HarnessError::Config(format!(
            "{} true-error sets for {} estimates",
            truth.len(),
            estimate.labels.len()
        )));
    }
    let est_sets = estimate.to_field_sets()?;
    let evar = var.as_error();
    let pick = |s: &FieldSet| -> Result<Vec<f64>> {
        s.field(evar)
            .map(|f| f.vectorize())
            .ok_or_else(|| HarnessError::MissingInput(format!("{evar} in {}", s.label)))
    };
    let mut est = Vec::with_capacity(truth.len());
    let mut tru = Vec::with_capacity(truth.len());
    for (e, t) in est_sets.iter().zip(truth) {
        if !t.grid().same_layout(&estimate.grid) {
            return Err(HarnessError::Config(format!("true error of {} is on another grid", t.label)));
        }
        est.push(pick(e)?);
        tru.push(pick(t)?);
    }
    compare_vectors(ensemble, var, estimate.grid.cell_area(), &estimate.labels, &est, &tru)
}

/// Same comparison on already extracted single-variable vectors.
pub fn compare_vectors(
    ensemble: &str,
    var: VarTag,
    cell_area: f64,
    labels: &[String],
    est: &[Vec<f64>],
    tru: &[Vec<f64>],
) -> Result<Comparison> {
    let pairs: Vec<(&str, &[f64])> = labels.iter().zip(est).map(|(l, v)| (l.as_str(), v.as_slice())).collect();
    let truths: Vec<&[f64]> = tru.iter().map(Vec::as_slice).collect();
    let report = ErrorReport::build(ensemble, var.to_string(), cell_area, &pairs, &truths)?;
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let correlations = labels
        .iter()
        .zip(est.iter().zip(tru))
        .map(|(l, (e, t))| SchemeCorrelation { label: l.clone(), abs_pearson: pearson(&abs(e), &abs(t)) })
        .collect();
    Ok(Comparison { report, correlations })
}

/// How much of an error field sits next to the analytic discontinuities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Localization {
    /// Band half-width in cells.
    pub width_cells: f64,
    /// Share of the squared field within the band around shocks and slip lines.
    pub energy_fraction: f64,
    /// Column crossings of a shock or slip line that were examined.
    pub crossings: usize,
    /// Crossings whose band holds both signs above `rel` of the band maximum.
    pub alternating: usize,
}

impl Localization {
    pub fn alternating_fraction(&self) -> f64 {
        if self.crossings == 0 {
            0.0
        } else {
            self.alternating as f64 / self.crossings as f64
        }
    }
}

/// `field` is one variable in flat-index order. Bands are measured in
/// multiples of `dx` (distance to the nearest shock or slip line) and `dy`
/// (vertical offset from a line inside one grid column).
pub fn localization(map: &RegionMap, grid: &Grid2D, field: &[f64], width_cells: f64, rel: f64) -> Localization {
    assert_eq!(field.len(), grid.points());
    let at = |kx: usize, my: usize| field[grid.point_index(kx, my) - 1];
    let band = width_cells * grid.dx;
    let (mut near, mut total) = (0.0, 0.0);
    for kx in 1..=grid.nx {
        for my in 1..=grid.ny {
            let (x, y) = grid.center(kx, my);
            let e2 = at(kx, my).powi(2);
            total += e2;
            if map.discontinuity_distance(x, y) <= band {
                near += e2;
            }
        }
    }
    let (y_lo, y_hi) = (grid.y0, grid.y0 + grid.ny as f64 * grid.dy);
    let (mut crossings, mut alternating) = (0, 0);
    for ray in map.rays.iter().filter(|r| r.kind != RayKind::FanEdge) {
        let x_end = ray.length.map_or(f64::INFINITY, |l| ray.origin.0 + l * ray.angle.cos());
        for kx in 1..=grid.nx {
            let (x, _) = grid.center(kx, 1);
            if x < ray.origin.0 || x > x_end {
                continue;
            }
            let yr = ray.y_at(x);
            if !(y_lo..=y_hi).contains(&yr) {
                continue;
            }
            let vals: Vec<f64> = (1..=grid.ny)
                .filter(|&my| (grid.center(kx, my).1 - yr).abs() <= width_cells * grid.dy)
                .map(|my| at(kx, my))
                .collect();
            crossings += 1;
            let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > 0.0 && vals.iter().any(|&v| v >= rel * peak) && vals.iter().any(|&v| v <= -rel * peak) {
                alternating += 1;
            }
        }
    }
    Localization {
        width_cells,
        energy_fraction: if total > 0.0 { near / total } else { 0.0 },
        crossings,
        alternating,
    }
}
