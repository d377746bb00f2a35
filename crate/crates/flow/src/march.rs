//! Time marching to a steady state.

use std::io::Write;

use errest_core::FieldSet;
use serde::{Deserialize, Serialize};

use crate::analytic::build_region_map;
use crate::boundary::Boundary;
use crate::case::FlowCase;
use crate::error::{FlowError, Result};
use crate::gas::Primitive;
use crate::schemes::{self, Scratch, SchemeSpec};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarchConfig {
    /// Courant number for the global step. The default keeps the
    /// second-order artificial-viscosity schemes positive on the merged shock.
    pub cfl: f64,
    /// Stop when the step change falls below this fraction of the first one.
    pub steady_tol: f64,
    /// Defaults to 200 * max(nx, ny).
    pub max_steps: Option<usize>,
}

impl Default for MarchConfig {
    fn default() -> Self {
        Self { cfl: 0.1, steady_tol: 1e-8, max_steps: None }
    }
}

impl MarchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(FlowError::Config(format!("cfl {} outside (0, 1]", self.cfl)));
        }
        if !(self.steady_tol > 0.0) {
            return Err(FlowError::Config("steady_tol must be positive".into()));
        }
        if self.max_steps == Some(0) {
            return Err(FlowError::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

pub struct Solver {
    pub state: State,
    pub boundary: Boundary,
    pub scheme: SchemeSpec,
    pub steps: usize,
    scratch: Scratch,
    prev: Vec<crate::gas::Cons>,
}

impl Solver {
    pub fn new(scheme: SchemeSpec, mut state: State, boundary: Boundary) -> Self {
        boundary.apply(&mut state);
        Self { state, boundary, scheme, steps: 0, scratch: Scratch::default(), prev: Vec::new() }
    }

    /// Free stream everywhere, exact inflow ghosts from the analytic map.
    pub fn for_case(case: &FlowCase, scheme: SchemeSpec) -> Result<Self> {
        let map = build_region_map(case)?;
        let state = State::uniform(case.grid, Primitive::free_stream(case.mach).to_cons());
        let boundary = Boundary::from_map(&map, &state)?;
        Ok(Self::new(scheme, state, boundary))
    }

    pub fn stable_dt(&self, cfl: f64) -> f64 {
        schemes::stable_dt(&self.state, cfl)
    }

    /// One step; returns the L2 norm of the interior change.
    pub fn step(&mut self, dt: f64) -> Result<f64> {
        self.prev.clear();
        self.prev.extend_from_slice(&self.state.q);
        schemes::step(&self.scheme, &mut self.state, &self.boundary, dt, &mut self.scratch);
        self.steps += 1;
        self.state.check_positivity(self.steps)?;
        let s = &self.state;
        let mut sum = 0.0;
        for j in s.interior_y() {
            for i in s.interior_x() {
                let k = s.idx(i, j);
                for c in 0..4 {
                    let d = s.q[k][c] - self.prev[k][c];
                    sum += d * d;
                }
            }
        }
        Ok((sum * s.grid.cell_area()).sqrt())
    }

    /// March to time `t_end` with steps no larger than `dt_max`.
    pub fn advance_to(&mut self, t_end: f64, dt_max: f64) -> Result<()> {
        let n = (t_end / dt_max).ceil().max(1.0) as usize;
        let dt = t_end / n as f64;
        for _ in 0..n {
            self.step(dt)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub label: String,
    pub fields: FieldSet,
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

impl RunResult {
    pub fn write_residual_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,residual")?;
        for (k, r) in self.residuals.iter().enumerate() {
            writeln!(w, "{},{:e}", k + 1, r)?;
        }
        w.flush()
    }
}

pub fn march_to_steady(case: &FlowCase, scheme: SchemeSpec, cfg: &MarchConfig) -> Result<RunResult> {
    cfg.validate()?;
    let mut solver = Solver::for_case(case, scheme)?;
    let max_steps = cfg.max_steps.unwrap_or(200 * case.grid.nx.max(case.grid.ny));
    let mut residuals = Vec::new();
    let mut converged = false;
    while solver.steps < max_steps {
        let dt = solver.stable_dt(cfg.cfl);
        let r = solver.step(dt)?;
        if !r.is_finite() {
            return Err(FlowError::Positivity { step: solver.steps, kx: 0, my: 0, rho: f64::NAN, p: f64::NAN });
        }
        residuals.push(r);
        let r0 = residuals[0];
        if r <= cfg.steady_tol * r0 || r0 == 0.0 {
            converged = true;
            break;
        }
    }
    let label = scheme.label();
    Ok(RunResult {
        fields: solver.state.to_fields(&label)?,
        label,
        residuals,
        steps: solver.steps,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::FlowCase;
    use errest_core::Grid2D;

    #[test]
    fn free_stream_case_converges_in_one_step() {
        let g = Grid2D::unit_square(12, 10).unwrap();
        for scheme in SchemeSpec::all() {
            let r = march_to_steady(&FlowCase::free_stream(4.0, g), scheme, &MarchConfig::default()).unwrap();
            assert!(r.converged && r.steps == 1, "{}", r.label);
            assert!(r.fields.fields()[0].raw().iter().all(|v| *v == 1.0));
        }
    }

    #[test]
    fn config_validation() {
        assert!(MarchConfig { cfl: 0.0, ..Default::default() }.validate().is_err());
        assert!(MarchConfig { max_steps: Some(0), ..Default::default() }.validate().is_err());
        assert!(MarchConfig::default().validate().is_ok());
    }

    #[test]
    fn residual_csv_has_one_row_per_step() {
        let g = Grid2D::unit_square(10, 10).unwrap();
        let cfg = MarchConfig { max_steps: Some(5), ..Default::default() };
        let r = march_to_steady(&FlowCase::edney1(g), "CIR".parse().unwrap(), &cfg).unwrap();
        let mut buf = Vec::new();
        r.write_residual_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
        assert!(!r.converged);
    }
}
