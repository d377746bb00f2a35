//! Conservative state on a grid padded with ghost layers.

use errest_core::{FieldSet, Grid2D};

use crate::analytic::primitive_fields;
use crate::error::{FlowError, Result};
use crate::gas::{Cons, Primitive};

/// Ghost layers kept around every state; enough for the widest stencil.
pub const GHOSTS: usize = 3;

/// Row-major storage, x fastest, `GHOSTS` layers on each side.
/// Interior cell (kx, my) (1-based) lives at padded index (kx-1+GHOSTS, my-1+GHOSTS).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub grid: Grid2D,
    pub sx: usize,
    pub sy: usize,
    pub q: Vec<Cons>,
}

impl State {
    pub fn uniform(grid: Grid2D, fill: Cons) -> Self {
        let sx = grid.nx + 2 * GHOSTS;
        let sy = grid.ny + 2 * GHOSTS;
        Self { grid, sx, sy, q: vec![fill; sx * sy] }
    }

    /// Interior from a point function at cell centers; ghosts copy the same function.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> Primitive) -> Self {
        let mut s = Self::uniform(grid, [0.0; 4]);
        for j in 0..s.sy {
            for i in 0..s.sx {
                let (x, y) = s.center(i, j);
                s.q[j * s.sx + i] = f(x, y).to_cons();
            }
        }
        s
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.sx + i
    }

    /// Center of padded cell (i, j), valid for ghosts too.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let g = &self.grid;
        (
            g.x0 + (i as f64 - GHOSTS as f64 + 0.5) * g.dx,
            g.y0 + (j as f64 - GHOSTS as f64 + 0.5) * g.dy,
        )
    }

    pub fn interior_x(&self) -> std::ops::Range<usize> {
        GHOSTS..GHOSTS + self.grid.nx
    }

    pub fn interior_y(&self) -> std::ops::Range<usize> {
        GHOSTS..GHOSTS + self.grid.ny
    }

    /// Sum of component `c` times cell area over the interior.
    pub fn total(&self, c: usize) -> f64 {
        let mut s = 0.0;
        for j in self.interior_y() {
            for i in self.interior_x() {
                s += self.q[self.idx(i, j)][c];
            }
        }
        s * self.grid.cell_area()
    }

    /// First interior cell with non-positive density or pressure, as 1-based (kx, my).
    pub fn check_positivity(&self, step: usize) -> Result<()> {
        for j in self.interior_y() {
            for i in self.interior_x() {
                let p = Primitive::from_cons(&self.q[self.idx(i, j)]);
                if !p.is_physical() {
                    return Err(FlowError::Positivity {
                        step,
                        kx: i - GHOSTS + 1,
                        my: j - GHOSTS + 1,
                        rho: p.rho,
                        p: p.p,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn primitive(&self, kx: usize, my: usize) -> Primitive {
        Primitive::from_cons(&self.q[self.idx(kx - 1 + GHOSTS, my - 1 + GHOSTS)])
    }

    /// Primitive fields (rho, U, V, P) of the interior.
    pub fn to_fields(&self, label: &str) -> Result<FieldSet> {
        let g = self.grid;
        let (x0, y0) = (g.x0, g.y0);
        primitive_fields(g, label, |x, y| {
            let kx = ((x - x0) / g.dx).floor() as usize + 1;
            let my = ((y - y0) / g.dy).floor() as usize + 1;
            Ok(self.primitive(kx, my))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_cover_ghosts() {
        let g = Grid2D::unit_square(4, 2).unwrap();
        let s = State::uniform(g, [1.0, 0.0, 0.0, 2.5]);
        assert_eq!(s.center(GHOSTS, GHOSTS), (0.125, 0.25));
        let (x, _) = s.center(0, 0);
        assert!((x + 0.625).abs() < 1e-15);
        assert_eq!(s.q.len(), 10 * 8);
    }

    #[test]
    fn fields_round_trip_through_state() {
        let g = Grid2D::unit_square(5, 3).unwrap();
        let s = State::from_fn(g, |x, y| Primitive::new(1.0 + x, y, -x, 0.5 + x * y));
        let f = s.to_fields("t").unwrap();
        let rho = &f.fields()[0];
        for my in 1..=3 {
            for kx in 1..=5 {
                let (x, _) = g.center(kx, my);
                assert!((rho.get(kx, my) - (1.0 + x)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn positivity_reports_cell() {
        let g = Grid2D::unit_square(3, 3).unwrap();
        let mut s = State::uniform(g, Primitive::free_stream(2.0).to_cons());
        let k = s.idx(GHOSTS + 2, GHOSTS);
        s.q[k][3] = 0.0;
        match s.check_positivity(7) {
            Err(FlowError::Positivity { step, kx, my, .. }) => assert_eq!((step, kx, my), (7, 3, 1)),
            other => panic!("{other:?}"),
        }
    }
}
