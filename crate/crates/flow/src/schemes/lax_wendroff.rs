use super::Scratch;
use crate::boundary::Boundary;
use crate::gas::{flux, Axis, Cons};
use crate::state::{State, GHOSTS};

/// Strang-split Richtmyer: X(dt/2) Y(dt) X(dt/2).
pub fn step(s: &mut State, bc: &Boundary, dt: f64, scratch: &mut Scratch) {
    sweep(s, Axis::X, 0.5 * dt, scratch);
    bc.apply(s);
    sweep(s, Axis::Y, dt, scratch);
    bc.apply(s);
    sweep(s, Axis::X, 0.5 * dt, scratch);
}

fn sweep(s: &mut State, axis: Axis, dt: f64, scratch: &mut Scratch) {
    let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
    let g = GHOSTS;
    let (lines, len, stride, line_stride, r) = match axis {
        Axis::X => (ny, nx, 1, sx, dt / s.grid.dx),
        Axis::Y => (nx, ny, sx, 1, dt / s.grid.dy),
    };
    let half = Scratch::sized(&mut scratch.line, len + 1);
    for l in 0..lines {
        let base = match axis {
            Axis::X => (g + l) * line_stride,
            Axis::Y => (g + l) * line_stride,
        };
        let at = |m: usize| base + m * stride;
        // interface h sits between padded cells g-1+h and g+h
        for h in 0..=len {
            let a = s.q[at(g - 1 + h)];
            let b = s.q[at(g + h)];
            let (fa, fb) = (flux(&a, axis), flux(&b, axis));
            let mut mid: Cons = [0.0; 4];
            for c in 0..4 {
                mid[c] = 0.5 * (a[c] + b[c]) - 0.5 * r * (fb[c] - fa[c]);
            }
            half[h] = flux(&mid, axis);
        }
        for m in 0..len {
            let k = at(g + m);
            for c in 0..4 {
                s.q[k][c] -= r * (half[m + 1][c] - half[m][c]);
            }
        }
    }
}
