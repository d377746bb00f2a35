//! Accuracy checks on a smooth periodic density wave.

use errest_core::Grid2D;

use crate::boundary::Boundary;
use crate::error::Result;
use crate::gas::Primitive;
use crate::march::Solver;
use crate::schemes::{Method, SchemeSpec};
use crate::state::State;

pub const WAVE_AMPLITUDE: f64 = 0.2;
pub const WAVE_VELOCITY: (f64, f64) = (1.0, 1.0);
pub const WAVE_TIME: f64 = 0.25;

/// Uniform-pressure density wave along the diagonal, advected exactly.
pub fn density_wave(x: f64, y: f64, t: f64) -> Primitive {
    let (u, v) = WAVE_VELOCITY;
    let phase = 2.0 * std::f64::consts::PI * ((x - u * t) + (y - v * t));
    Primitive::new(1.0 + WAVE_AMPLITUDE * phase.sin(), u, v, 1.0)
}

/// L1 density error (cell-area weighted) after `WAVE_TIME` on an n x n periodic grid.
///
/// The time step is `cfl * h / s_max`, scaled by `(h / h_ref)^(p/3 - 1)` for
/// spatial order p > 3 so the third-order time error does not mask it.
pub fn density_wave_error(scheme: SchemeSpec, n: usize, cfl: f64) -> Result<f64> {
    let grid = Grid2D::unit_square(n, n)?;
    let state = State::from_fn(grid, |x, y| density_wave(x, y, 0.0));
    let mut solver = Solver::new(scheme, state, Boundary::periodic());
    let mut dt = solver.stable_dt(cfl);
    if scheme.method == Method::Weno5 {
        let h_ref = 1.0 / 50.0;
        dt *= (grid.dx / h_ref).powf(2.0 / 3.0);
    }
    solver.advance_to(WAVE_TIME, dt)?;
    let mut err = 0.0;
    for my in 1..=n {
        for kx in 1..=n {
            let (x, y) = grid.center(kx, my);
            err += (solver.state.primitive(kx, my).rho - density_wave(x, y, WAVE_TIME).rho).abs();
        }
    }
    Ok(err * grid.cell_area())
}

/// Observed orders log2(e_k / e_{k+1}) over successive doublings in `sizes`.
pub fn observed_orders(scheme: SchemeSpec, sizes: &[usize], cfl: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let errs = sizes
        .iter()
        .map(|&n| density_wave_error(scheme, n, cfl))
        .collect::<Result<Vec<_>>>()?;
    let orders = errs
        .windows(2)
        .zip(sizes.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    Ok((errs, orders))
}
