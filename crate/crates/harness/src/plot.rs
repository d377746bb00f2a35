//! Plotter-agnostic CSV for contour plots, error profiles and sweeps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use errest_core::inverse::{write_sweep_csv, SweepRecord};
use errest_core::{FlatIndex, Grid2D, GridField};

use crate::error::{HarnessError, Result};

pub enum PlotData<'a> {
    /// One field on its grid; written as a matrix with x across and y down.
    Isolines(&'a GridField),
    /// Estimated and true error of one variable, both in flat-index order.
    ErrorSlice { grid: &'a Grid2D, estimate: &'a [f64], truth: &'a [f64] },
    Sweep(&'a [SweepRecord]),
}

pub fn write_isolines<W: Write>(mut w: W, field: &GridField) -> std::io::Result<()> {
    let g = field.grid();
    write!(w, "y\\x")?;
    for kx in 1..=g.nx {
        write!(w, ",{:e}", g.center(kx, 1).0)?;
    }
    writeln!(w)?;
    for my in 1..=g.ny {
        write!(w, "{:e}", g.center(1, my).1)?;
        for kx in 1..=g.nx {
            write!(w, ",{:e}", field.get(kx, my))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// One row per grid point: `i,kx,my,x,y,estimate,true`.
pub fn write_error_slice<W: Write>(mut w: W, grid: &Grid2D, estimate: &[f64], truth: &[f64]) -> std::io::Result<()> {
    writeln!(w, "i,kx,my,x,y,estimate,true")?;
    for (m, (e, t)) in estimate.iter().zip(truth).enumerate() {
        let fi = FlatIndex::from_global(grid, m);
        let (x, y) = grid.center(fi.kx, fi.my);
        writeln!(w, "{},{},{},{:e},{:e},{:e},{:e}", fi.i, fi.kx, fi.my, x, y, e, t)?;
    }
    w.flush()
}

pub fn emit_plot_data(data: PlotData<'_>, path: &Path) -> Result<PathBuf> {
    if let PlotData::ErrorSlice { grid, estimate, truth } = &data {
        if estimate.len() != grid.points() || truth.len() != grid.points() {
            return Err(HarnessError::Config(format!(
                "error slice needs {} values, got {} and {}",
                grid.points(),
                estimate.len(),
                truth.len()
            )));
        }
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let w = BufWriter::new(file);
    match data {
        PlotData::Isolines(f) => write_isolines(w, f).map_err(|e| HarnessError::io(path, e))?,
        PlotData::ErrorSlice { grid, estimate, truth } => {
            write_error_slice(w, grid, estimate, truth).map_err(|e| HarnessError::io(path, e))?
        }
        PlotData::Sweep(rows) => write_sweep_csv(w, rows)?,
    }
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use errest_core::{Quantity, VarTag};

    #[test]
    fn slice_rows_follow_flat_index() {
        let g = Grid2D::unit_square(4, 3).unwrap();
        let f = GridField::from_fn(g, VarTag::value(Quantity::Density), |x, y| 10.0 * x + y).unwrap();
        let v = f.vectorize();
        let mut buf = Vec::new();
        write_error_slice(&mut buf, &g, &v, &v).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), g.points());
        for (m, row) in rows.iter().enumerate() {
            let c: Vec<&str> = row.split(',').collect();
            let (i, kx, my): (usize, usize, usize) = (c[0].parse().unwrap(), c[1].parse().unwrap(), c[2].parse().unwrap());
            assert_eq!(i, m + 1);
            assert_eq!(i, g.ny * (kx - 1) + my);
            assert_eq!(c[5].parse::<f64>().unwrap(), f.get(kx, my));
        }
    }

    #[test]
    fn isolines_are_a_matrix() {
        let g = Grid2D::unit_square(5, 2).unwrap();
        let f = GridField::from_fn(g, VarTag::value(Quantity::Density), |x, y| x * 100.0 + y).unwrap();
        let mut buf = Vec::new();
        write_isolines(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + g.ny);
        assert!(lines.iter().all(|l| l.split(',').count() == 1 + g.nx));
        let row2: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row2[0], g.center(1, 2).1);
        assert_eq!(row2[3], f.get(3, 2));
    }

    #[test]
    fn sweep_has_one_row_per_alpha() {
        let (rows, _) = crate::sweep::run_scalar_sweep(
            &[1.0, -2.0, 3.0],
            &errest_core::inverse::log_alphas(-4.0, 0.0, 9),
            &Default::default(),
            errest_core::SolverKind::ClosedForm,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = emit_plot_data(PlotData::Sweep(&rows), &dir.path().join("s.csv")).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap().lines().count(), 10);
    }

    #[test]
    fn mismatched_slice_is_rejected() {
        let g = Grid2D::unit_square(4, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = emit_plot_data(PlotData::ErrorSlice { grid: &g, estimate: &[0.0; 12], truth: &[0.0; 11] }, &dir.path().join("x.csv"));
        assert!(r.is_err());
    }
}
