use super::Scratch;
use crate::boundary::Boundary;
use crate::gas::{flux, Axis};
use crate::state::{State, GHOSTS};

/// Unsplit predictor-corrector: forward differences in the predictor,
/// backward in the corrector. The direction is fixed so that a steady
/// state is a fixed point of the step.
pub fn step(s: &mut State, bc: &Boundary, dt: f64, scratch: &mut Scratch) {
    let n = s.q.len();
    let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
    let (rx, ry) = (dt / s.grid.dx, dt / s.grid.dy);
    let g = GHOSTS;

    let f = Scratch::sized(&mut scratch.a, n);
    let gy = Scratch::sized(&mut scratch.b, n);
    for k in 0..n {
        f[k] = flux(&s.q[k], Axis::X);
        gy[k] = flux(&s.q[k], Axis::Y);
    }
    let mut pred = s.clone();
    for j in g..g + ny {
        for i in g..g + nx {
            let k = j * sx + i;
            for c in 0..4 {
                pred.q[k][c] = s.q[k][c] - rx * (f[k + 1][c] - f[k][c]) - ry * (gy[k + sx][c] - gy[k][c]);
            }
        }
    }
    bc.apply(&mut pred);
    for k in 0..n {
        f[k] = flux(&pred.q[k], Axis::X);
        gy[k] = flux(&pred.q[k], Axis::Y);
    }
    for j in g..g + ny {
        for i in g..g + nx {
            let k = j * sx + i;
            for c in 0..4 {
                let corr = pred.q[k][c] - rx * (f[k][c] - f[k - 1][c]) - ry * (gy[k][c] - gy[k - sx][c]);
                s.q[k][c] = 0.5 * (s.q[k][c] + corr);
            }
        }
    }
}
