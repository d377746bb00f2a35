//! Ideal-gas state conversions, fluxes and the Roe linearization.

use serde::{Deserialize, Serialize};

pub const GAMMA: f64 = 1.4;

/// Conservative vector (rho, rho*u, rho*v, rho*E).
pub type Cons = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

impl Primitive {
    pub const fn new(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Self { rho, u, v, p }
    }

    /// Unit-speed free stream along +x with a_inf = 1/M.
    pub fn free_stream(mach: f64) -> Self {
        Self::new(1.0, 1.0, 0.0, 1.0 / (GAMMA * mach * mach))
    }

    pub fn sound_speed(&self) -> f64 {
        (GAMMA * self.p / self.rho).sqrt()
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn mach(&self) -> f64 {
        self.speed() / self.sound_speed()
    }

    /// Flow direction, radians from +x.
    pub fn direction(&self) -> f64 {
        self.v.atan2(self.u)
    }

    /// Total enthalpy h0 = (u^2+v^2)/2 + gamma/(gamma-1) p/rho.
    pub fn total_enthalpy(&self) -> f64 {
        0.5 * (self.u * self.u + self.v * self.v) + GAMMA / (GAMMA - 1.0) * self.p / self.rho
    }

    pub fn is_physical(&self) -> bool {
        self.rho > 0.0 && self.p > 0.0 && self.rho.is_finite() && self.p.is_finite()
    }

    pub fn to_cons(&self) -> Cons {
        let e = self.p / (GAMMA - 1.0) + 0.5 * self.rho * (self.u * self.u + self.v * self.v);
        [self.rho, self.rho * self.u, self.rho * self.v, e]
    }

    pub fn from_cons(q: &Cons) -> Self {
        let rho = q[0];
        let u = q[1] / rho;
        let v = q[2] / rho;
        let p = (GAMMA - 1.0) * (q[3] - 0.5 * rho * (u * u + v * v));
        Self { rho, u, v, p }
    }
}

pub fn pressure(q: &Cons) -> f64 {
    (GAMMA - 1.0) * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0])
}

pub fn flux(q: &Cons, axis: Axis) -> Cons {
    let p = pressure(q);
    let un = match axis {
        Axis::X => q[1] / q[0],
        Axis::Y => q[2] / q[0],
    };
    match axis {
        Axis::X => [q[1], q[1] * un + p, q[2] * un, (q[3] + p) * un],
        Axis::Y => [q[2], q[1] * un, q[2] * un + p, (q[3] + p) * un],
    }
}

/// |normal velocity| + sound speed.
pub fn max_wave_speed(q: &Cons, axis: Axis) -> f64 {
    let p = pressure(q);
    let a = (GAMMA * p / q[0]).abs().sqrt();
    let un = match axis {
        Axis::X => q[1] / q[0],
        Axis::Y => q[2] / q[0],
    };
    un.abs() + a
}

/// Analytic flux Jacobian dF/dU along `axis`.
pub fn flux_jacobian(q: &Cons, axis: Axis) -> [[f64; 4]; 4] {
    let g = GAMMA;
    let (rho, u, v) = (q[0], q[1] / q[0], q[2] / q[0]);
    let h = (q[3] + pressure(q)) / rho;
    let phi = 0.5 * (g - 1.0) * (u * u + v * v);
    match axis {
        Axis::X => [
            [0.0, 1.0, 0.0, 0.0],
            [phi - u * u, (3.0 - g) * u, -(g - 1.0) * v, g - 1.0],
            [-u * v, v, u, 0.0],
            [u * (phi - h), h - (g - 1.0) * u * u, -(g - 1.0) * u * v, g * u],
        ],
        Axis::Y => [
            [0.0, 0.0, 1.0, 0.0],
            [-u * v, v, u, 0.0],
            [phi - v * v, -(g - 1.0) * u, (3.0 - g) * v, g - 1.0],
            [v * (phi - h), -(g - 1.0) * u * v, h - (g - 1.0) * v * v, g * v],
        ],
    }
}

/// Eigenvalues and right eigenvectors (columns) of the x-direction Jacobian
/// for a state given by velocity, total enthalpy and sound speed.
pub fn eigensystem_x(u: f64, v: f64, h: f64, a: f64) -> ([f64; 4], [[f64; 4]; 4]) {
    let lam = [u - a, u, u, u + a];
    let r = [
        [1.0, u - a, v, h - u * a],
        [1.0, u, v, 0.5 * (u * u + v * v)],
        [0.0, 0.0, 1.0, v],
        [1.0, u + a, v, h + u * a],
    ];
    (lam, r)
}

fn harten(lam: f64, delta: f64) -> f64 {
    let l = lam.abs();
    if l < delta {
        0.5 * (lam * lam + delta * delta) / delta
    } else {
        l
    }
}

/// Fraction of the Roe sound speed used as the Harten entropy-fix width.
pub const ENTROPY_FIX: f64 = 0.1;

fn roe_x(l: &Cons, r: &Cons) -> Cons {
    let pl = Primitive::from_cons(l);
    let pr = Primitive::from_cons(r);
    let sl = pl.rho.sqrt();
    let sr = pr.rho.sqrt();
    let w = 1.0 / (sl + sr);
    let u = (sl * pl.u + sr * pr.u) * w;
    let v = (sl * pl.v + sr * pr.v) * w;
    let h = (sl * pl.total_enthalpy() + sr * pr.total_enthalpy()) * w;
    let a2 = (GAMMA - 1.0) * (h - 0.5 * (u * u + v * v));
    let a = a2.max(1e-300).sqrt();
    let rho = sl * sr;
    let (dr, du, dv, dp) = (pr.rho - pl.rho, pr.u - pl.u, pr.v - pl.v, pr.p - pl.p);
    let alpha = [
        (dp - rho * a * du) / (2.0 * a2),
        dr - dp / a2,
        rho * dv,
        (dp + rho * a * du) / (2.0 * a2),
    ];
    let (lam, vecs) = eigensystem_x(u, v, h, a);
    let delta = ENTROPY_FIX * a;
    let fl = flux(l, Axis::X);
    let fr = flux(r, Axis::X);
    let mut out = [0.0; 4];
    for c in 0..4 {
        out[c] = 0.5 * (fl[c] + fr[c]);
    }
    for k in 0..4 {
        let s = if k == 0 || k == 3 { harten(lam[k], delta) } else { lam[k].abs() };
        for c in 0..4 {
            out[c] -= 0.5 * s * alpha[k] * vecs[k][c];
        }
    }
    out
}

#[inline]
fn swap_xy(q: &Cons) -> Cons {
    [q[0], q[2], q[1], q[3]]
}

/// Roe upwind interface flux between left and right states along `axis`.
pub fn roe_flux(l: &Cons, r: &Cons, axis: Axis) -> Cons {
    match axis {
        Axis::X => roe_x(l, r),
        Axis::Y => swap_xy(&roe_x(&swap_xy(l), &swap_xy(r))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn state() -> impl Strategy<Value = Primitive> {
        (0.1f64..5.0, -3.0f64..3.0, -3.0f64..3.0, 0.05f64..5.0)
            .prop_map(|(r, u, v, p)| Primitive::new(r, u, v, p))
    }

    #[test]
    fn quiescent_gas_flux_is_pressure_only() {
        let q = Primitive::new(1.0, 0.0, 0.0, 1.0 / GAMMA).to_cons();
        let f = flux(&q, Axis::X);
        assert_eq!(f[0], 0.0);
        assert_relative_eq!(f[1], 1.0 / GAMMA, epsilon = 1e-15);
        assert_eq!(f[2], 0.0);
        assert_eq!(f[3], 0.0);
        let g = flux(&q, Axis::Y);
        assert_relative_eq!(g[2], 1.0 / GAMMA, epsilon = 1e-15);
    }

    #[test]
    fn free_stream_mass_flux_is_one() {
        let q = Primitive::free_stream(4.0).to_cons();
        assert_eq!(flux(&q, Axis::X)[0], 1.0);
        assert_relative_eq!(Primitive::free_stream(4.0).mach(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn energy_flux_uses_total_enthalpy() {
        let s = Primitive::new(1.3, 0.7, -0.2, 0.9);
        let f = flux(&s.to_cons(), Axis::X);
        assert_relative_eq!(f[3], s.rho * s.u * s.total_enthalpy(), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn cons_round_trip(s in state()) {
            let b = Primitive::from_cons(&s.to_cons());
            prop_assert!((b.rho - s.rho).abs() < 1e-13);
            prop_assert!((b.u - s.u).abs() < 1e-12);
            prop_assert!((b.v - s.v).abs() < 1e-12);
            prop_assert!((b.p - s.p).abs() < 1e-11 * (1.0 + s.rho * (s.u * s.u + s.v * s.v)));
        }

        #[test]
        fn jacobian_matches_finite_differences(s in state(), y in any::<bool>()) {
            let axis = if y { Axis::Y } else { Axis::X };
            let q = s.to_cons();
            let jac = flux_jacobian(&q, axis);
            for c in 0..4 {
                let h = 1e-6 * (1.0 + q[c].abs());
                let mut qp = q;
                let mut qm = q;
                qp[c] += h;
                qm[c] -= h;
                let fp = flux(&qp, axis);
                let fm = flux(&qm, axis);
                for r in 0..4 {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    prop_assert!((fd - jac[r][c]).abs() <= 1e-6 * (1.0 + jac[r][c].abs()),
                        "entry ({r},{c}): fd {fd} analytic {}", jac[r][c]);
                }
            }
        }

        #[test]
        fn eigenvectors_satisfy_jacobian(s in state()) {
            let q = s.to_cons();
            let jac = flux_jacobian(&q, Axis::X);
            let (lam, r) = eigensystem_x(s.u, s.v, s.total_enthalpy(), s.sound_speed());
            for k in 0..4 {
                for row in 0..4 {
                    let av: f64 = (0..4).map(|c| jac[row][c] * r[k][c]).sum();
                    prop_assert!((av - lam[k] * r[k][row]).abs() < 1e-9 * (1.0 + av.abs()));
                }
            }
        }

        #[test]
        fn roe_flux_is_consistent(s in state(), y in any::<bool>()) {
            let axis = if y { Axis::Y } else { Axis::X };
            let q = s.to_cons();
            let f = flux(&q, axis);
            let r = roe_flux(&q, &q, axis);
            for c in 0..4 {
                prop_assert!((f[c] - r[c]).abs() < 1e-12 * (1.0 + f[c].abs()));
            }
        }

        #[test]
        fn roe_flux_captures_supersonic_upwinding(a in state(), b in state()) {
            // both states supersonic to the right: flux must equal F(left)
            let mut l = a; l.u = 3.0 * l.sound_speed() + 0.1;
            let mut r = b; r.u = 3.0 * r.sound_speed() + 0.1;
            let ql = l.to_cons();
            let qr = r.to_cons();
            let fl = flux(&ql, Axis::X);
            let roe = roe_flux(&ql, &qr, Axis::X);
            let pl = Primitive::from_cons(&ql);
            let pr = Primitive::from_cons(&qr);
            let sl = pl.rho.sqrt(); let sr = pr.rho.sqrt();
            let ut = (sl * pl.u + sr * pr.u) / (sl + sr);
            let ht = (sl * pl.total_enthalpy() + sr * pr.total_enthalpy()) / (sl + sr);
            let vt = (sl * pl.v + sr * pr.v) / (sl + sr);
            let at = ((GAMMA - 1.0) * (ht - 0.5 * (ut * ut + vt * vt))).sqrt();
            prop_assume!(ut - at > ENTROPY_FIX * at);
            for c in 0..4 {
                prop_assert!((fl[c] - roe[c]).abs() < 1e-9 * (1.0 + fl[c].abs()));
            }
        }
    }
}
