//! Flow configurations.

use errest_core::Grid2D;
use serde::{Deserialize, Serialize};

use crate::analytic::oblique::max_deflection;
use crate::error::{FlowError, Result};
use crate::gas::GAMMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    /// Uniform inflow with no shocks.
    FreeStream,
    /// Crossing shocks of opposite families.
    EdneyI,
    /// Merging shocks of the same family.
    EdneyVI,
}

/// A steady supersonic problem on a rectangular grid.
///
/// For `EdneyI` the first shock starts at `(x0, first_origin_y)` and turns the
/// flow up by `alpha1_deg`; the second starts at `(x0, second_origin_y)` and
/// turns it down by `alpha2_deg`. For `EdneyVI` both shocks turn the flow up,
/// the first from `first_origin_y`, the second (in the already deflected
/// stream, starting lower) from `second_origin_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCase {
    pub kind: CaseKind,
    pub mach: f64,
    pub alpha1_deg: f64,
    pub alpha2_deg: f64,
    pub first_origin_y: f64,
    pub second_origin_y: f64,
    pub grid: Grid2D,
}

impl FlowCase {
    pub fn free_stream(mach: f64, grid: Grid2D) -> Self {
        Self {
            kind: CaseKind::FreeStream,
            mach,
            alpha1_deg: 0.0,
            alpha2_deg: 0.0,
            first_origin_y: 0.0,
            second_origin_y: 0.0,
            grid,
        }
    }

    pub fn edney1(grid: Grid2D) -> Self {
        Self {
            kind: CaseKind::EdneyI,
            mach: 4.0,
            alpha1_deg: 20.0,
            alpha2_deg: 15.0,
            first_origin_y: grid.y0 + 0.2 * grid.ny as f64 * grid.dy,
            second_origin_y: grid.y0 + 0.8 * grid.ny as f64 * grid.dy,
            grid,
        }
    }

    pub fn edney6(grid: Grid2D) -> Self {
        Self {
            kind: CaseKind::EdneyVI,
            mach: 4.0,
            alpha1_deg: 10.0,
            alpha2_deg: 15.0,
            first_origin_y: grid.y0 + 0.3 * grid.ny as f64 * grid.dy,
            second_origin_y: grid.y0 + 0.1 * grid.ny as f64 * grid.dy,
            grid,
        }
    }

    pub fn with_grid(&self, grid: Grid2D) -> Self {
        let sy = grid.ny as f64 * grid.dy / (self.grid.ny as f64 * self.grid.dy);
        let map = |y: f64| grid.y0 + (y - self.grid.y0) * sy;
        Self {
            first_origin_y: map(self.first_origin_y),
            second_origin_y: map(self.second_origin_y),
            grid,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mach > 1.0) || !self.mach.is_finite() {
            return Err(FlowError::Config(format!("free-stream Mach {} must exceed 1", self.mach)));
        }
        if self.kind == CaseKind::FreeStream {
            return Ok(());
        }
        if !(self.alpha1_deg > 0.0) || self.alpha2_deg < 0.0 {
            return Err(FlowError::Config("deflections must be positive".into()));
        }
        let tmax = max_deflection(self.mach, GAMMA).to_degrees();
        if self.alpha1_deg >= tmax || (self.kind == CaseKind::EdneyI && self.alpha2_deg >= tmax) {
            return Err(FlowError::Detached {
                mach: self.mach,
                theta_deg: self.alpha1_deg.max(self.alpha2_deg),
                theta_max_deg: tmax,
            });
        }
        let (lo, hi) = (self.grid.y0, self.grid.y0 + self.grid.ny as f64 * self.grid.dy);
        for y in [self.first_origin_y, self.second_origin_y] {
            if !(lo..=hi).contains(&y) {
                return Err(FlowError::Geometry(format!("shock origin y={y} outside [{lo}, {hi}]")));
            }
        }
        let ordered = match self.kind {
            CaseKind::EdneyI => self.first_origin_y < self.second_origin_y,
            _ => self.second_origin_y < self.first_origin_y,
        };
        if !ordered {
            return Err(FlowError::Geometry("shock origins are in the wrong order to intersect".into()));
        }
        Ok(())
    }
}
