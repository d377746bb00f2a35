//! Quality measures for error estimates.
//!
//! All norms are discrete L2 norms over every grid element, weighted by the
//! cell area so they approximate domain integrals. On a uniform grid the
//! weight cancels in every ratio computed here.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// `sqrt(sum v^2 * cell_area)`.
pub fn l2_norm(values: &[f64], cell_area: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Degenerate("norm of an empty field".into()));
    }
    Ok((values.iter().map(|v| v * v).sum::<f64>() * cell_area).sqrt())
}

fn check_pair(est: &[f64], truth: &[f64]) -> Result<()> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: est.len() });
    }
    Ok(())
}

fn nonzero_truth_norm(truth: &[f64]) -> Result<f64> {
    let t = l2_norm(truth, 1.0)?;
    if !(t > 0.0) {
        return Err(Error::Degenerate("true error has zero norm".into()));
    }
    Ok(t)
}

/// `|est| / |truth|`.
pub fn effectivity_index(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(est, truth)?;
    let t = nonzero_truth_norm(truth)?;
    Ok(l2_norm(est, 1.0)? / t)
}

/// `|est - truth| / |truth|`.
pub fn relative_accuracy(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(est, truth)?;
    let t = nonzero_truth_norm(truth)?;
    let diff: Vec<f64> = est.iter().zip(truth).map(|(a, b)| a - b).collect();
    Ok(l2_norm(&diff, 1.0)? / t)
}

/// Effectivity pooled over all solutions and elements.
pub fn averaged_effectivity(est: &[&[f64]], truth: &[&[f64]]) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: est.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, t) in est.iter().zip(truth) {
        check_pair(e, t)?;
        num += e.iter().map(|v| v * v).sum::<f64>();
        den += t.iter().map(|v| v * v).sum::<f64>();
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate("true errors are all zero".into()));
    }
    Ok((num / den).sqrt())
}

/// Range `[1 - r, 1 + r]` with `r = |mean error| / |true error|`, inside which
/// the effectivity index of a mean-shifted estimate must fall.
pub fn effectivity_bounds(true_norm: f64, mean_error_norm: f64) -> Result<(f64, f64)> {
    if !(true_norm > 0.0) || mean_error_norm < 0.0 {
        return Err(Error::Degenerate(format!(
            "bounds need a positive true norm and non-negative mean norm, got {true_norm}, {mean_error_norm}"
        )));
    }
    let r = mean_error_norm / true_norm;
    Ok((1.0 - r, 1.0 + r))
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeQuality {
    pub label: String,
    /// `None` when the true error of this scheme vanishes.
    pub i_eff: Option<f64>,
    pub i_rel: Option<f64>,
    pub est_norm: f64,
    pub true_norm: f64,
}

/// Per-scheme quality of one ensemble's estimate for one variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub ensemble: String,
    pub variable: String,
    pub records: Vec<SchemeQuality>,
}

impl ErrorReport {
    /// `estimates` and `truths` are `(label, field)` pairs in matching order.
    pub fn build(
        ensemble: impl Into<String>,
        variable: impl Into<String>,
        cell_area: f64,
        estimates: &[(&str, &[f64])],
        truths: &[&[f64]],
    ) -> Result<Self> {
        if estimates.len() != truths.len() {
            return Err(Error::DimensionMismatch { expected: truths.len(), actual: estimates.len() });
        }
        let records = estimates
            .iter()
            .zip(truths)
            .map(|(&(label, est), &truth)| {
                check_pair(est, truth)?;
                let degenerate = !(l2_norm(truth, 1.0)? > 0.0);
                Ok(SchemeQuality {
                    label: label.to_string(),
                    i_eff: if degenerate { None } else { Some(effectivity_index(est, truth)?) },
                    i_rel: if degenerate { None } else { Some(relative_accuracy(est, truth)?) },
                    est_norm: l2_norm(est, cell_area)?,
                    true_norm: l2_norm(truth, cell_area)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ensemble: ensemble.into(), variable: variable.into(), records })
    }

    pub fn record(&self, label: &str) -> Option<&SchemeQuality> {
        self.records.iter().find(|r| r.label == label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMetric {
    Effectivity,
    RelativeAccuracy,
}

/// Table with one row per ensemble and one column per scheme label; cells for
/// schemes outside an ensemble hold `-`, degenerate cells `N/A`.
pub fn write_table_csv<W: Write>(
    mut w: W,
    metric: TableMetric,
    columns: &[String],
    reports: &[ErrorReport],
) -> Result<()> {
    let prefix = match metric {
        TableMetric::Effectivity => "I_eff",
        TableMetric::RelativeAccuracy => "I_rel",
    };
    write!(w, "ensemble")?;
    for c in columns {
        write!(w, ",{prefix}[{c}]")?;
    }
    writeln!(w)?;
    for rep in reports {
        write!(w, "{} ({})", rep.ensemble, rep.records.len())?;
        for c in columns {
            let cell = match rep.record(c) {
                None => "-".to_string(),
                Some(r) => {
                    let v = match metric {
                        TableMetric::Effectivity => r.i_eff,
                        TableMetric::RelativeAccuracy => r.i_rel,
                    };
                    v.map_or_else(|| "N/A".to_string(), |v| format!("{v:.6}"))
                }
            };
            write!(w, ",{cell}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
