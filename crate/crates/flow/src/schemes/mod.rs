//! Scheme catalogue and single-step kernels.

mod cir;
mod dissipation;
mod lax_wendroff;
mod maccormack;
mod weno;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::error::{FlowError, Result};
use crate::gas::{max_wave_speed, Axis, Cons};
use crate::state::State;

pub use weno::{weno3, weno5};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// First-order upwind with Roe linearization.
    Cir,
    MacCormack,
    /// Richtmyer two-step, Strang split.
    LaxWendroff,
    Weno3,
    Weno5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dissipation {
    None,
    /// `+ mu (d2x + d2y) U`, undivided differences.
    Second(f64),
    /// `- mu (d4x + d4y) U`, undivided differences.
    Fourth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub method: Method,
    pub dissipation: Dissipation,
}

pub const CATALOG: [&str; 8] =
    ["CIR", "MC", "MC-AV2-001", "MC-AV2-0002", "MC-AV4-001", "LW-AV2-001", "W3", "W5"];

impl SchemeSpec {
    pub const fn new(method: Method, dissipation: Dissipation) -> Self {
        Self { method, dissipation }
    }

    pub fn order(&self) -> u32 {
        match self.method {
            Method::Cir => 1,
            Method::MacCormack | Method::LaxWendroff => 2,
            Method::Weno3 => 3,
            Method::Weno5 => 5,
        }
    }

    pub fn mu(&self) -> f64 {
        match self.dissipation {
            Dissipation::None => 0.0,
            Dissipation::Second(m) | Dissipation::Fourth(m) => m,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn all() -> Vec<SchemeSpec> {
        CATALOG.iter().map(|l| l.parse().expect("catalog labels parse")).collect()
    }
}

fn mu_digits(mu: f64) -> String {
    format!("{mu}").replace('.', "")
}

fn digits_mu(d: &str) -> Option<f64> {
    if d.len() < 2 || !d.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    format!("{}.{}", &d[..1], &d[1..]).parse().ok()
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.method {
            Method::Cir => "CIR",
            Method::MacCormack => "MC",
            Method::LaxWendroff => "LW",
            Method::Weno3 => "W3",
            Method::Weno5 => "W5",
        };
        match self.dissipation {
            Dissipation::None => write!(f, "{base}"),
            Dissipation::Second(m) => write!(f, "{base}-AV2-{}", mu_digits(m)),
            Dissipation::Fourth(m) => write!(f, "{base}-AV4-{}", mu_digits(m)),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || FlowError::Config(format!("unknown scheme label {s:?}"));
        let mut parts = s.split('-');
        let method = match parts.next().ok_or_else(bad)? {
            "CIR" => Method::Cir,
            "MC" => Method::MacCormack,
            "LW" => Method::LaxWendroff,
            "W3" => Method::Weno3,
            "W5" => Method::Weno5,
            _ => return Err(bad()),
        };
        let dissipation = match (parts.next(), parts.next(), parts.next()) {
            (None, _, _) => Dissipation::None,
            (Some("AV2"), Some(d), None) => Dissipation::Second(digits_mu(d).ok_or_else(bad)?),
            (Some("AV4"), Some(d), None) => Dissipation::Fourth(digits_mu(d).ok_or_else(bad)?),
            _ => return Err(bad()),
        };
        if matches!(method, Method::Weno3 | Method::Weno5 | Method::Cir) && dissipation != Dissipation::None {
            return Err(bad());
        }
        Ok(Self { method, dissipation })
    }
}

/// Work buffers reused across steps.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    pub a: Vec<Cons>,
    pub b: Vec<Cons>,
    pub c: Vec<Cons>,
    pub line: Vec<Cons>,
    pub line2: Vec<Cons>,
    pub line3: Vec<Cons>,
}

impl Scratch {
    fn sized(buf: &mut Vec<Cons>, n: usize) -> &mut Vec<Cons> {
        buf.resize(n, [0.0; 4]);
        buf
    }
}

/// Global time step from the CFL bound over interior and ghost cells.
pub fn stable_dt(s: &State, cfl: f64) -> f64 {
    let mut w: f64 = 0.0;
    for q in &s.q {
        w = w.max(max_wave_speed(q, Axis::X)).max(max_wave_speed(q, Axis::Y));
    }
    cfl * s.grid.dx.min(s.grid.dy) / w
}

/// Advance `s` by `dt`; ghosts are valid on entry and on exit.
pub fn step(spec: &SchemeSpec, s: &mut State, bc: &Boundary, dt: f64, scratch: &mut Scratch) {
    match spec.method {
        Method::Cir => cir::step(s, dt, scratch),
        Method::MacCormack => maccormack::step(s, bc, dt, scratch),
        Method::LaxWendroff => lax_wendroff::step(s, bc, dt, scratch),
        Method::Weno3 => weno::step(s, bc, dt, 3, scratch),
        Method::Weno5 => weno::step(s, bc, dt, 5, scratch),
    }
    bc.apply(s);
    match spec.dissipation {
        Dissipation::None => {}
        Dissipation::Second(mu) => {
            dissipation::second(s, mu, scratch);
            bc.apply(s);
        }
        Dissipation::Fourth(mu) => {
            dissipation::fourth(s, mu, scratch);
            bc.apply(s);
        }
    }
}
