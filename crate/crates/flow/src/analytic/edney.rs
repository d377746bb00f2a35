//! Piecewise-constant shock-interference flowfields.

use serde::Serialize;

use super::oblique::{
    isentropic_to, max_deflection, prandtl_meyer, prandtl_meyer_inverse, ShockState, Turn,
};
use crate::case::{CaseKind, FlowCase};
use crate::error::{FlowError, Result};
use crate::gas::{Primitive, GAMMA};

/// Keeps interaction brackets strictly inside the attached-shock range.
const DETACH_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RayKind {
    Shock,
    Slip,
    FanEdge,
}

/// A straight discontinuity: a segment of `length`, or a ray when `length` is None.
#[derive(Debug, Clone, Serialize)]
pub struct Ray {
    pub name: String,
    pub kind: RayKind,
    pub origin: (f64, f64),
    pub angle: f64,
    pub length: Option<f64>,
}

impl Ray {
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (self.angle.cos(), self.angle.sin());
        let (px, py) = (x - self.origin.0, y - self.origin.1);
        let mut s = (px * dx + py * dy).max(0.0);
        if let Some(l) = self.length {
            s = s.min(l);
        }
        (px - s * dx).hypot(py - s * dy)
    }

    pub fn y_at(&self, x: f64) -> f64 {
        self.origin.1 + (x - self.origin.0) * self.angle.tan()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Region {
    pub name: String,
    /// None for the expansion fan, whose state varies with angle.
    pub state: Option<Primitive>,
}

/// Centered Prandtl-Meyer expansion.
#[derive(Debug, Clone, Serialize)]
pub struct Fan {
    pub center: (f64, f64),
    pub upstream: Primitive,
    pub lead_angle: f64,
    pub trail_angle: f64,
    pub final_direction: f64,
}

impl Fan {
    /// State on the characteristic leaving the center at angle `eta`.
    pub fn state_at(&self, eta: f64) -> Result<Primitive> {
        let d0 = self.upstream.direction();
        let nu0 = prandtl_meyer(self.upstream.mach());
        let char_angle = |d: f64| -> Result<(f64, f64)> {
            let m = prandtl_meyer_inverse(nu0 + d - d0)?;
            Ok((d - (1.0 / m).asin(), m))
        };
        let (mut lo, mut hi) = (d0, self.final_direction);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if char_angle(mid)?.0 < eta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d = 0.5 * (lo + hi);
        let (_, m) = char_angle(d)?;
        Ok(isentropic_to(&self.upstream, m, d))
    }
}

#[derive(Debug, Clone, Serialize)]
enum Layout {
    Uniform,
    Crossing { xc: f64, yc: f64, slip: f64 },
    Merging { xc: f64, yc: f64, slip: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionMap {
    pub kind: CaseKind,
    pub regions: Vec<Region>,
    pub shocks: Vec<ShockState>,
    pub rays: Vec<Ray>,
    pub fan: Option<Fan>,
    /// (x_min, x_max, y_min, y_max) of the covered domain.
    pub bounds: (f64, f64, f64, f64),
    layout: Layout,
}

fn bounds_of(case: &FlowCase) -> (f64, f64, f64, f64) {
    let g = &case.grid;
    (g.x0, g.x0 + g.nx as f64 * g.dx, g.y0, g.y0 + g.ny as f64 * g.dy)
}

fn region(name: &str, s: Primitive) -> Region {
    Region { name: name.into(), state: Some(s) }
}

/// Bisection on a sign change; `f(lo)` and `f(hi)` must differ in sign.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(FlowError::InteractionSolve(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let lo_sign = flo.signum();
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

pub fn build_uniform(case: &FlowCase) -> RegionMap {
    RegionMap {
        kind: case.kind,
        regions: vec![region("R1", Primitive::free_stream(case.mach))],
        shocks: vec![],
        rays: vec![],
        fan: None,
        bounds: bounds_of(case),
        layout: Layout::Uniform,
    }
}

pub fn build_edney1(case: &FlowCase) -> Result<RegionMap> {
    if case.kind != CaseKind::EdneyI {
        return Err(FlowError::Config(format!("build_edney1 called for {:?}", case.kind)));
    }
    case.validate()?;
    let a1 = case.alpha1_deg.to_radians();
    let a2 = case.alpha2_deg.to_radians();
    let free = Primitive::free_stream(case.mach);
    let s1 = ShockState::deflect(free, a1, Turn::Ccw)?;
    let s2 = ShockState::deflect(free, a2, Turn::Cw)?;
    let (r2, r3) = (s1.downstream, s2.downstream);

    let x0 = case.grid.x0;
    let (ya, yb) = (case.first_origin_y, case.second_origin_y);
    let xc = x0 + (yb - ya) / (s1.line_angle.tan() - s2.line_angle.tan());
    let yc = ya + (xc - x0) * s1.line_angle.tan();

    // slip direction phi: R2 turned down by a1 - phi, R3 turned up by a2 + phi
    let lo = (-a2).max(a1 - max_deflection(r2.mach(), GAMMA) + DETACH_MARGIN);
    let hi = a1.min(max_deflection(r3.mach(), GAMMA) - a2 - DETACH_MARGIN);
    let pressures = |phi: f64| -> Result<(ShockState, ShockState)> {
        Ok((
            ShockState::deflect(r2, a1 - phi, Turn::Cw)?,
            ShockState::deflect(r3, a2 + phi, Turn::Ccw)?,
        ))
    };
    let phi = bisect(lo, hi, |phi| {
        let (t4, t5) = pressures(phi)?;
        Ok(t4.downstream.p - t5.downstream.p)
    })?;
    let (t4, t5) = pressures(phi)?;

    let seg = |name: &str, origin: (f64, f64), angle: f64| Ray {
        name: name.into(),
        kind: RayKind::Shock,
        origin,
        angle,
        length: Some((xc - origin.0).hypot(yc - origin.1)),
    };
    let ray = |name: &str, kind: RayKind, angle: f64| Ray {
        name: name.into(),
        kind,
        origin: (xc, yc),
        angle,
        length: None,
    };
    Ok(RegionMap {
        kind: case.kind,
        regions: vec![
            region("R1", free),
            region("R2", r2),
            region("R3", r3),
            region("R4", t4.downstream),
            region("R5", t5.downstream),
        ],
        rays: vec![
            seg("S1", (x0, ya), s1.line_angle),
            seg("S2", (x0, yb), s2.line_angle),
            ray("S1t", RayKind::Shock, t5.line_angle),
            ray("S2t", RayKind::Shock, t4.line_angle),
            ray("slip", RayKind::Slip, phi),
        ],
        shocks: vec![s1, s2, t4, t5],
        fan: None,
        bounds: bounds_of(case),
        layout: Layout::Crossing { xc, yc, slip: phi },
    })
}

pub fn build_edney6(case: &FlowCase) -> Result<RegionMap> {
    if case.kind != CaseKind::EdneyVI {
        return Err(FlowError::Config(format!("build_edney6 called for {:?}", case.kind)));
    }
    case.validate()?;
    let a1 = case.alpha1_deg.to_radians();
    let a2 = case.alpha2_deg.to_radians();
    let free = Primitive::free_stream(case.mach);
    let s1 = ShockState::deflect(free, a1, Turn::Ccw)?;
    let r2 = s1.downstream;
    let s2 = ShockState::deflect(r2, a2, Turn::Ccw)?;
    let r3 = s2.downstream;
    let d3 = a1 + a2;

    let x0 = case.grid.x0;
    let (ya, yb) = (case.first_origin_y, case.second_origin_y);
    let xc = x0 + (ya - yb) / (s2.line_angle.tan() - s1.line_angle.tan());
    let yc = ya + (xc - x0) * s1.line_angle.tan();

    // merged shock turns the free stream by phi; R3 expands from d3 to phi
    let nu3 = prandtl_meyer(r3.mach());
    let expanded = |phi: f64| -> Result<Primitive> {
        if phi == d3 {
            return Ok(r3);
        }
        let m = prandtl_meyer_inverse(nu3 + phi - d3)?;
        Ok(isentropic_to(&r3, m, phi))
    };
    let merged = |phi: f64| ShockState::deflect(free, phi, Turn::Ccw);
    let hi = max_deflection(case.mach, GAMMA) - DETACH_MARGIN;
    let phi = bisect(d3, hi, |phi| Ok(merged(phi)?.downstream.p - expanded(phi)?.p)).map_err(|e| {
        FlowError::InteractionSolve(format!("merged-shock closure needs an expansion from R3: {e}"))
    })?;
    let s3 = merged(phi)?;
    let r4 = s3.downstream;
    let r5 = expanded(phi)?;
    let lead = d3 - (1.0 / r3.mach()).asin();
    let trail = phi - (1.0 / r5.mach()).asin();

    let seg = |name: &str, origin: (f64, f64), angle: f64| Ray {
        name: name.into(),
        kind: RayKind::Shock,
        origin,
        angle,
        length: Some((xc - origin.0).hypot(yc - origin.1)),
    };
    let ray = |name: &str, kind: RayKind, angle: f64| Ray {
        name: name.into(),
        kind,
        origin: (xc, yc),
        angle,
        length: None,
    };
    let mut rays = vec![
        seg("S1", (x0, ya), s1.line_angle),
        seg("S2", (x0, yb), s2.line_angle),
        ray("S3", RayKind::Shock, s3.line_angle),
        ray("slip", RayKind::Slip, phi),
    ];
    if trail > lead {
        rays.push(ray("fan_lead", RayKind::FanEdge, lead));
        rays.push(ray("fan_trail", RayKind::FanEdge, trail));
    }
    Ok(RegionMap {
        kind: case.kind,
        regions: vec![
            region("R1", free),
            region("R2", r2),
            region("R3", r3),
            region("R4", r4),
            region("R5", r5),
            Region { name: "fan".into(), state: None },
        ],
        shocks: vec![s1, s2, s3],
        rays,
        fan: Some(Fan {
            center: (xc, yc),
            upstream: r3,
            lead_angle: lead,
            trail_angle: trail,
            final_direction: phi,
        }),
        bounds: bounds_of(case),
        layout: Layout::Merging { xc, yc, slip: phi },
    })
}

pub fn build_region_map(case: &FlowCase) -> Result<RegionMap> {
    match case.kind {
        CaseKind::FreeStream => {
            case.validate()?;
            Ok(build_uniform(case))
        }
        CaseKind::EdneyI => build_edney1(case),
        CaseKind::EdneyVI => build_edney6(case),
    }
}

impl RegionMap {
    fn ray(&self, name: &str) -> &Ray {
        self.rays.iter().find(|r| r.name == name).expect("ray present by construction")
    }

    /// Index into `regions` of the region containing (x, y).
    /// Points on a shock belong to its downstream side.
    pub fn locate(&self, x: f64, y: f64) -> usize {
        match self.layout {
            Layout::Uniform => 0,
            Layout::Crossing { xc, yc, slip } => {
                let (upper, lower) = if x <= xc {
                    (self.ray("S2").y_at(x), self.ray("S1").y_at(x))
                } else {
                    (self.ray("S1t").y_at(x), self.ray("S2t").y_at(x))
                };
                let pre = x <= xc;
                if (pre && y >= upper) || (!pre && y > upper) {
                    2
                } else if (pre && y <= lower) || (!pre && y < lower) {
                    1
                } else if pre {
                    0
                } else if y >= yc + (x - xc) * slip.tan() {
                    4
                } else {
                    3
                }
            }
            Layout::Merging { xc, yc, slip } => {
                if x <= xc {
                    if y > self.ray("S1").y_at(x) {
                        0
                    } else if y > self.ray("S2").y_at(x) {
                        1
                    } else {
                        2
                    }
                } else {
                    let eta = (y - yc).atan2(x - xc);
                    let fan = self.fan.as_ref().expect("merging layout has a fan");
                    if eta > self.ray("S3").angle {
                        0
                    } else if eta >= slip {
                        3
                    } else if eta >= fan.trail_angle {
                        4
                    } else if eta > fan.lead_angle {
                        5
                    } else {
                        2
                    }
                }
            }
        }
    }

    pub fn sample(&self, x: f64, y: f64) -> Result<Primitive> {
        let (x0, x1, y0, y1) = self.bounds;
        let tol = 1e-12 * (1.0 + (x1 - x0).abs() + (y1 - y0).abs());
        if !(x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol) {
            return Err(FlowError::Geometry(format!("point ({x}, {y}) outside the mapped domain")));
        }
        self.sample_extended(x, y)
    }

    /// Like `sample` but also valid outside the domain bounds (ghost cells).
    pub fn sample_extended(&self, x: f64, y: f64) -> Result<Primitive> {
        let k = self.locate(x, y);
        match self.regions[k].state {
            Some(s) => Ok(s),
            None => {
                let fan = self.fan.as_ref().expect("fan region implies fan data");
                fan.state_at((y - fan.center.1).atan2(x - fan.center.0))
            }
        }
    }

    /// Distance to the nearest shock or slip line.
    pub fn discontinuity_distance(&self, x: f64, y: f64) -> f64 {
        self.rays
            .iter()
            .filter(|r| r.kind != RayKind::FanEdge)
            .map(|r| r.distance(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn slip_angle(&self) -> Option<f64> {
        match self.layout {
            Layout::Uniform => None,
            Layout::Crossing { slip, .. } | Layout::Merging { slip, .. } => Some(slip),
        }
    }

    pub fn crossing_point(&self) -> Option<(f64, f64)> {
        match self.layout {
            Layout::Uniform => None,
            Layout::Crossing { xc, yc, .. } | Layout::Merging { xc, yc, .. } => Some((xc, yc)),
        }
    }

    pub fn region_state(&self, name: &str) -> Option<Primitive> {
        self.regions.iter().find(|r| r.name == name).and_then(|r| r.state)
    }
}
