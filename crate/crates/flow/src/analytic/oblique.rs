//! Oblique-shock and Prandtl-Meyer relations for a calorically perfect gas.

use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::gas::{Primitive, GAMMA};

const BRACKET_EPS: f64 = 1e-9;

pub fn mach_angle(mach: f64) -> f64 {
    (1.0 / mach).asin()
}

/// Deflection produced by a shock at angle `beta` in a stream of Mach `mach`.
pub fn theta_of_beta(mach: f64, beta: f64, gamma: f64) -> f64 {
    let m2 = mach * mach;
    let s = beta.sin();
    let num = 2.0 / beta.tan() * (m2 * s * s - 1.0);
    let den = m2 * (gamma + (2.0 * beta).cos()) + 2.0;
    (num / den).atan()
}

/// Residual of tan(theta) = 2 cot(beta) (M^2 sin^2 beta - 1) / (M^2 (gamma + cos 2beta) + 2).
pub fn theta_beta_residual(mach: f64, theta: f64, beta: f64, gamma: f64) -> f64 {
    let m2 = mach * mach;
    let s = beta.sin();
    theta.tan() - 2.0 / beta.tan() * (m2 * s * s - 1.0) / (m2 * (gamma + (2.0 * beta).cos()) + 2.0)
}

/// Shock angle at which the deflection is largest.
pub fn beta_at_max_deflection(mach: f64, gamma: f64) -> f64 {
    let m2 = mach * mach;
    let root = ((gamma + 1.0) * (16.0 + 8.0 * (gamma - 1.0) * m2 + (gamma + 1.0) * m2 * m2)).sqrt();
    let s2 = ((gamma + 1.0) * m2 - 4.0 + root) / (4.0 * gamma * m2);
    s2.sqrt().asin()
}

/// Detachment angle theta_max(M).
pub fn max_deflection(mach: f64, gamma: f64) -> f64 {
    theta_of_beta(mach, beta_at_max_deflection(mach, gamma), gamma)
}

/// Weak-branch shock angle for deflection `theta`.
pub fn oblique_beta(mach: f64, theta: f64, gamma: f64) -> Result<f64> {
    if !(mach > 1.0) {
        return Err(FlowError::InvalidShock(mach));
    }
    if theta < 0.0 {
        return Err(FlowError::Config(format!("negative deflection {theta}")));
    }
    if theta == 0.0 {
        return Ok(mach_angle(mach));
    }
    let theta_max = max_deflection(mach, gamma);
    if theta >= theta_max {
        return Err(FlowError::Detached {
            mach,
            theta_deg: theta.to_degrees(),
            theta_max_deg: theta_max.to_degrees(),
        });
    }
    let mut lo = mach_angle(mach) + BRACKET_EPS;
    let mut hi = beta_at_max_deflection(mach, gamma);
    // theta(beta) increases on the weak branch; bisect to adjacent floats
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if theta_of_beta(mach, mid, gamma) < theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Apply the normal-shock relations across a straight shock line whose
/// direction makes angle `line_angle` with +x.
pub fn shock_jump(up: &Primitive, line_angle: f64) -> Result<Primitive> {
    let (t_x, t_y) = (line_angle.cos(), line_angle.sin());
    let (mut n_x, mut n_y) = (t_y, -t_x);
    let mut un = up.u * n_x + up.v * n_y;
    if un < 0.0 {
        n_x = -n_x;
        n_y = -n_y;
        un = -un;
    }
    let ut = up.u * t_x + up.v * t_y;
    let mn = un / up.sound_speed();
    if mn < 1.0 - 1e-12 {
        return Err(FlowError::InvalidShock(mn));
    }
    if mn <= 1.0 {
        return Ok(*up);
    }
    let g = GAMMA;
    let m2 = mn * mn;
    let rho_ratio = (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
    let p_ratio = 1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0);
    let un2 = un / rho_ratio;
    Ok(Primitive {
        rho: up.rho * rho_ratio,
        u: un2 * n_x + ut * t_x,
        v: un2 * n_y + ut * t_y,
        p: up.p * p_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Turn {
    /// Flow turned toward increasing angle.
    Ccw,
    Cw,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShockState {
    pub upstream: Primitive,
    pub downstream: Primitive,
    /// Shock angle measured from the upstream flow direction.
    pub beta: f64,
    pub theta: f64,
    pub mach_up: f64,
    /// Direction of the shock line, radians from +x.
    pub line_angle: f64,
    pub turn: Turn,
}

impl ShockState {
    /// Shock that turns `upstream` by `theta` in the given sense.
    pub fn deflect(upstream: Primitive, theta: f64, turn: Turn) -> Result<Self> {
        let mach_up = upstream.mach();
        let beta = oblique_beta(mach_up, theta, GAMMA)?;
        let psi = upstream.direction();
        let line_angle = match turn {
            Turn::Ccw => psi + beta,
            Turn::Cw => psi - beta,
        };
        let downstream = if theta == 0.0 { upstream } else { shock_jump(&upstream, line_angle)? };
        Ok(Self { upstream, downstream, beta, theta, mach_up, line_angle, turn })
    }

    /// Relative jumps in normal mass flux, normal momentum flux,
    /// tangential velocity and total enthalpy.
    pub fn rh_residuals(&self) -> [f64; 4] {
        rh_residuals(&self.upstream, &self.downstream, self.line_angle)
    }
}

pub fn rh_residuals(a: &Primitive, b: &Primitive, line_angle: f64) -> [f64; 4] {
    let (tx, ty) = (line_angle.cos(), line_angle.sin());
    let (nx, ny) = (ty, -tx);
    let una = a.u * nx + a.v * ny;
    let unb = b.u * nx + b.v * ny;
    let uta = a.u * tx + a.v * ty;
    let utb = b.u * tx + b.v * ty;
    let rel = |x: f64, y: f64, scale: f64| (x - y).abs() / scale.max(f64::MIN_POSITIVE);
    let mass_a = a.rho * una;
    let mom_a = a.rho * una * una + a.p;
    [
        rel(mass_a, b.rho * unb, mass_a.abs()),
        rel(mom_a, b.rho * unb * unb + b.p, mom_a.abs()),
        rel(uta, utb, a.speed()),
        rel(a.total_enthalpy(), b.total_enthalpy(), a.total_enthalpy()),
    ]
}

/// Prandtl-Meyer function nu(M), radians.
pub fn prandtl_meyer(mach: f64) -> f64 {
    let g = GAMMA;
    let k = ((g + 1.0) / (g - 1.0)).sqrt();
    let m = (mach * mach - 1.0).max(0.0).sqrt();
    k * (m / k).atan() - m.atan()
}

/// Inverse of `prandtl_meyer` by bisection on M in [1, 1e3].
pub fn prandtl_meyer_inverse(nu: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0f64, 1e3f64);
    if !(0.0..prandtl_meyer(hi)).contains(&nu) {
        return Err(FlowError::InteractionSolve(format!("Prandtl-Meyer angle {nu} out of range")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if prandtl_meyer(mid) < nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Isentropic change of `from` to Mach `mach` with flow direction `dir`.
pub fn isentropic_to(from: &Primitive, mach: f64, dir: f64) -> Primitive {
    let g = GAMMA;
    let m0 = from.mach();
    let tr = (1.0 + 0.5 * (g - 1.0) * m0 * m0) / (1.0 + 0.5 * (g - 1.0) * mach * mach);
    let rho = from.rho * tr.powf(1.0 / (g - 1.0));
    let p = from.p * tr.powf(g / (g - 1.0));
    let q = mach * (g * p / rho).sqrt();
    Primitive { rho, u: q * dir.cos(), v: q * dir.sin(), p }
}
