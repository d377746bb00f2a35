use super::Scratch;
use crate::state::{State, GHOSTS};

/// `U += mu (d2x + d2y) U` on the interior.
pub fn second(s: &mut State, mu: f64, scratch: &mut Scratch) {
    let old = Scratch::sized(&mut scratch.b, s.q.len());
    old.copy_from_slice(&s.q);
    let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
    for j in GHOSTS..GHOSTS + ny {
        for i in GHOSTS..GHOSTS + nx {
            let k = j * sx + i;
            for c in 0..4 {
                let d2 = old[k - 1][c] + old[k + 1][c] + old[k - sx][c] + old[k + sx][c] - 4.0 * old[k][c];
                s.q[k][c] += mu * d2;
            }
        }
    }
}

/// `U -= mu (d4x + d4y) U` on the interior.
pub fn fourth(s: &mut State, mu: f64, scratch: &mut Scratch) {
    let old = Scratch::sized(&mut scratch.b, s.q.len());
    old.copy_from_slice(&s.q);
    let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
    let d4 = |a: f64, b: f64, c: f64, d: f64, e: f64| a - 4.0 * b + 6.0 * c - 4.0 * d + e;
    for j in GHOSTS..GHOSTS + ny {
        for i in GHOSTS..GHOSTS + nx {
            let k = j * sx + i;
            for c in 0..4 {
                let x = d4(old[k - 2][c], old[k - 1][c], old[k][c], old[k + 1][c], old[k + 2][c]);
                let y = d4(old[k - 2 * sx][c], old[k - sx][c], old[k][c], old[k + sx][c], old[k + 2 * sx][c]);
                s.q[k][c] -= mu * (x + y);
            }
        }
    }
}
