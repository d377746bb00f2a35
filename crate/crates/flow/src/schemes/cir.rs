use super::Scratch;
use crate::gas::{roe_flux, Axis};
use crate::state::{State, GHOSTS};

/// Forward Euler with Roe upwind fluxes in both directions.
pub fn step(s: &mut State, dt: f64, scratch: &mut Scratch) {
    let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
    let (rx, ry) = (dt / s.grid.dx, dt / s.grid.dy);
    let g = GHOSTS;
    let du = Scratch::sized(&mut scratch.a, s.q.len());
    du.iter_mut().for_each(|d| *d = [0.0; 4]);
    for j in g..g + ny {
        for i in g..=g + nx {
            let f = roe_flux(&s.q[j * sx + i - 1], &s.q[j * sx + i], Axis::X);
            for c in 0..4 {
                du[j * sx + i - 1][c] -= rx * f[c];
                du[j * sx + i][c] += rx * f[c];
            }
        }
    }
    for j in g..=g + ny {
        for i in g..g + nx {
            let f = roe_flux(&s.q[(j - 1) * sx + i], &s.q[j * sx + i], Axis::Y);
            for c in 0..4 {
                du[(j - 1) * sx + i][c] -= ry * f[c];
                du[j * sx + i][c] += ry * f[c];
            }
        }
    }
    for j in g..g + ny {
        for i in g..g + nx {
            let k = j * sx + i;
            for c in 0..4 {
                s.q[k][c] += du[k][c];
            }
        }
    }
}
