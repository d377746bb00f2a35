use super::Scratch;
use crate::boundary::Boundary;
use crate::gas::{flux, max_wave_speed, Axis, Cons};
use crate::state::{State, GHOSTS};

/// Smoothness-indicator regularization.
pub const EPS: f64 = 1e-6;

/// Third-order reconstruction at the right face of `b` from (a, b, c).
#[inline]
pub fn weno3(a: f64, b: f64, c: f64) -> f64 {
    let q0 = -0.5 * a + 1.5 * b;
    let q1 = 0.5 * b + 0.5 * c;
    let b0 = (b - a) * (b - a);
    let b1 = (c - b) * (c - b);
    let w0 = (1.0 / 3.0) / ((EPS + b0) * (EPS + b0));
    let w1 = (2.0 / 3.0) / ((EPS + b1) * (EPS + b1));
    (w0 * q0 + w1 * q1) / (w0 + w1)
}

/// Fifth-order reconstruction at the right face of `c` from (a, b, c, d, e).
#[inline]
pub fn weno5(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    let s0 = 13.0 / 12.0 * (a - 2.0 * b + c).powi(2) + 0.25 * (a - 4.0 * b + 3.0 * c).powi(2);
    let s1 = 13.0 / 12.0 * (b - 2.0 * c + d).powi(2) + 0.25 * (b - d).powi(2);
    let s2 = 13.0 / 12.0 * (c - 2.0 * d + e).powi(2) + 0.25 * (3.0 * c - 4.0 * d + e).powi(2);
    let w0 = 0.1 / ((EPS + s0) * (EPS + s0));
    let w1 = 0.6 / ((EPS + s1) * (EPS + s1));
    let w2 = 0.3 / ((EPS + s2) * (EPS + s2));
    (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2)
}

/// Third-order SSP Runge-Kutta.
pub fn step(s: &mut State, bc: &Boundary, dt: f64, order: usize, scratch: &mut Scratch) {
    let mut u0 = std::mem::take(&mut scratch.c);
    u0.clear();
    u0.extend_from_slice(&s.q);
    let mut l = std::mem::take(&mut scratch.a);
    // u0 + b (u - u0 + dt L) with b = 1, 1/4, 2/3
    for (stage, b) in [1.0, 0.25, 2.0 / 3.0].into_iter().enumerate() {
        rhs(s, order, &mut l, scratch);
        let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
        for j in GHOSTS..GHOSTS + ny {
            for i in GHOSTS..GHOSTS + nx {
                let k = j * sx + i;
                for c in 0..4 {
                    s.q[k][c] = u0[k][c] + b * (s.q[k][c] - u0[k][c] + dt * l[k][c]);
                }
            }
        }
        if stage < 2 {
            bc.apply(s);
        }
    }
    scratch.a = l;
    scratch.c = u0;
}

/// Spatial operator -dF/dx - dG/dy with global Lax-Friedrichs splitting.
fn rhs(s: &State, order: usize, out: &mut Vec<Cons>, scratch: &mut Scratch) {
    out.clear();
    out.resize(s.q.len(), [0.0; 4]);
    let (nx, ny, sx) = (s.grid.nx, s.grid.ny, s.sx);
    let g = GHOSTS;
    for axis in [Axis::X, Axis::Y] {
        let alpha = s.q.iter().map(|q| max_wave_speed(q, axis)).fold(0.0, f64::max);
        let (lines, len, stride, line_stride, inv_h) = match axis {
            Axis::X => (ny, nx, 1, sx, 1.0 / s.grid.dx),
            Axis::Y => (nx, ny, sx, 1, 1.0 / s.grid.dy),
        };
        let full = len + 2 * g;
        let fp = Scratch::sized(&mut scratch.line2, full);
        let fm = Scratch::sized(&mut scratch.line3, full);
        let hat = Scratch::sized(&mut scratch.line, len + 1);
        for l in 0..lines {
            let base = (g + l) * line_stride;
            for m in 0..full {
                let q = &s.q[base + m * stride];
                let f = flux(q, axis);
                for c in 0..4 {
                    fp[m][c] = 0.5 * (f[c] + alpha * q[c]);
                    fm[m][c] = 0.5 * (f[c] - alpha * q[c]);
                }
            }
            for h in 0..=len {
                let i = g - 1 + h;
                for c in 0..4 {
                    let plus = if order == 3 {
                        weno3(fp[i - 1][c], fp[i][c], fp[i + 1][c])
                    } else {
                        weno5(fp[i - 2][c], fp[i - 1][c], fp[i][c], fp[i + 1][c], fp[i + 2][c])
                    };
                    let minus = if order == 3 {
                        weno3(fm[i + 2][c], fm[i + 1][c], fm[i][c])
                    } else {
                        weno5(fm[i + 3][c], fm[i + 2][c], fm[i + 1][c], fm[i][c], fm[i - 1][c])
                    };
                    hat[h][c] = plus + minus;
                }
            }
            for m in 0..len {
                let k = base + (g + m) * stride;
                for c in 0..4 {
                    out[k][c] -= inv_h * (hat[m + 1][c] - hat[m][c]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_is_reproduced() {
        assert_eq!(weno3(2.5, 2.5, 2.5), 2.5);
        assert_eq!(weno5(-1.25, -1.25, -1.25, -1.25, -1.25), -1.25);
    }

    #[test]
    fn linear_data_is_exact() {
        // every candidate stencil reproduces linear data at the face
        let v: Vec<f64> = (0..5).map(|k| 1000.0 + 0.01 * k as f64).collect();
        let r5 = weno5(v[0], v[1], v[2], v[3], v[4]);
        assert!((r5 - 1000.025).abs() < 1e-9);
        let r3 = weno3(v[1], v[2], v[3]);
        assert!((r3 - 1000.025).abs() < 1e-9);
    }

    #[test]
    fn step_is_non_oscillatory() {
        for (a, b, c, d, e) in [(0.0, 0.0, 0.0, 1.0, 1.0), (0.0, 0.0, 1.0, 1.0, 1.0)] {
            let r = weno5(a, b, c, d, e);
            assert!(r >= -1e-6 && r <= 1.0 + 1e-6, "{r}");
        }
        let r = weno3(0.0, 0.0, 1.0);
        assert!(r.abs() < 1e-6);
    }
}
