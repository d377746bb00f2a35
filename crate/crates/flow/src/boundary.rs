//! Ghost-cell filling.

use crate::analytic::RegionMap;
use crate::error::Result;
use crate::gas::Cons;
use crate::state::{State, GHOSTS};

#[derive(Debug, Clone, PartialEq)]
pub enum Side {
    Periodic,
    /// Zero-order extrapolation of the adjacent interior cell.
    Extrapolate,
    /// Fixed ghost values, layer-major: entry `l * len + k` is layer `l`
    /// (0 = adjacent to the interior) at padded position `k` along the side.
    Dirichlet(Vec<Cons>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub left: Side,
    pub right: Side,
    pub bottom: Side,
    pub top: Side,
}

impl Boundary {
    pub fn periodic() -> Self {
        Self { left: Side::Periodic, right: Side::Periodic, bottom: Side::Periodic, top: Side::Periodic }
    }

    /// Exact map states on the left, bottom and top ghosts; outflow on the right.
    pub fn from_map(map: &RegionMap, shape: &State) -> Result<Self> {
        let sample = |i: usize, j: usize| -> Result<Cons> {
            let (x, y) = shape.center(i, j);
            Ok(map.sample_extended(x, y)?.to_cons())
        };
        let (ny, sx, sy) = (shape.grid.ny, shape.sx, shape.sy);
        let mut left = Vec::with_capacity(GHOSTS * sy);
        for l in 0..GHOSTS {
            for j in 0..sy {
                left.push(sample(GHOSTS - 1 - l, j)?);
            }
        }
        let mut bottom = Vec::with_capacity(GHOSTS * sx);
        let mut top = Vec::with_capacity(GHOSTS * sx);
        for l in 0..GHOSTS {
            for i in 0..sx {
                bottom.push(sample(i, GHOSTS - 1 - l)?);
            }
        }
        for l in 0..GHOSTS {
            for i in 0..sx {
                top.push(sample(i, GHOSTS + ny + l)?);
            }
        }
        Ok(Self {
            left: Side::Dirichlet(left),
            right: Side::Extrapolate,
            bottom: Side::Dirichlet(bottom),
            top: Side::Dirichlet(top),
        })
    }

    pub fn apply(&self, s: &mut State) {
        let (nx, ny, sx, sy) = (s.grid.nx, s.grid.ny, s.sx, s.sy);
        let g = GHOSTS;
        for l in 0..g {
            let (jb, jt) = (g - 1 - l, g + ny + l);
            for i in 0..sx {
                let b = match &self.bottom {
                    Side::Periodic => s.q[(g + ny - 1 - l) * sx + i],
                    Side::Extrapolate => s.q[g * sx + i],
                    Side::Dirichlet(d) => d[l * sx + i],
                };
                s.q[jb * sx + i] = b;
                let t = match &self.top {
                    Side::Periodic => s.q[(g + l) * sx + i],
                    Side::Extrapolate => s.q[(g + ny - 1) * sx + i],
                    Side::Dirichlet(d) => d[l * sx + i],
                };
                s.q[jt * sx + i] = t;
            }
        }
        for l in 0..g {
            let (il, ir) = (g - 1 - l, g + nx + l);
            for j in 0..sy {
                let row = j * sx;
                let a = match &self.left {
                    Side::Periodic => s.q[row + g + nx - 1 - l],
                    Side::Extrapolate => s.q[row + g],
                    Side::Dirichlet(d) => d[l * sy + j],
                };
                s.q[row + il] = a;
                let b = match &self.right {
                    Side::Periodic => s.q[row + g + l],
                    Side::Extrapolate => s.q[row + g + nx - 1],
                    Side::Dirichlet(d) => d[l * sy + j],
                };
                s.q[row + ir] = b;
            }
        }
    }
}
