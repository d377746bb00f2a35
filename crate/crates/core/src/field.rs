//! Grid and field containers.
//!
//! Every field lives on a uniform, cell-centered [`Grid2D`]. Multi-variable
//! data is flattened into a single vector of length `M = nx * ny * nvars`:
//! variable blocks are contiguous, and inside one block the 1-based point
//! index is `i = ny * (kx - 1) + my`, so `my` runs fastest. On the square
//! grids used throughout this crate that is the familiar `i = Nx (kx - 1) + my`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, dx: f64, dy: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {nx}x{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidGrid(format!("cell sizes must be positive, got dx={dx}, dy={dy}")));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidGrid("non-finite origin".into()));
        }
        Ok(Self { nx, ny, x0, y0, dx, dy })
    }

    /// Grid covering `[0,1] x [0,1]` with `nx * ny` cells.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {nx}x{ny}")));
        }
        Self::new(nx, ny, 0.0, 0.0, 1.0 / nx as f64, 1.0 / ny as f64)
    }

    /// Solvers need at least three cells per direction.
    pub fn require_stencil(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "solver grids need nx, ny >= 3, got {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Cell-center coordinates for 1-based `(kx, my)`.
    pub fn center(&self, kx: usize, my: usize) -> (f64, f64) {
        (
            self.x0 + (kx as f64 - 0.5) * self.dx,
            self.y0 + (my as f64 - 0.5) * self.dy,
        )
    }

    /// 1-based point index inside a variable block.
    pub fn point_index(&self, kx: usize, my: usize) -> usize {
        self.ny * (kx - 1) + my
    }

    pub fn same_layout(&self, other: &Grid2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.x0 == other.x0
            && self.y0 == other.y0
    }
}

/// Position of one entry of a vectorized field.
///
/// `kx`, `my` and `i` are 1-based; `v` is the 0-based variable ordinal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatIndex {
    pub i: usize,
    pub kx: usize,
    pub my: usize,
    pub v: usize,
}

impl FlatIndex {
    pub fn new(grid: &Grid2D, kx: usize, my: usize, v: usize) -> Result<Self> {
        if kx == 0 || kx > grid.nx {
            return Err(Error::IndexOutOfRange { index: kx, len: grid.nx });
        }
        if my == 0 || my > grid.ny {
            return Err(Error::IndexOutOfRange { index: my, len: grid.ny });
        }
        Ok(Self { i: grid.point_index(kx, my), kx, my, v })
    }

    /// Inverse of [`FlatIndex::global`].
    pub fn from_global(grid: &Grid2D, m: usize) -> Self {
        let np = grid.points();
        let v = m / np;
        let i0 = m % np;
        Self { i: i0 + 1, kx: i0 / grid.ny + 1, my: i0 % grid.ny + 1, v }
    }

    /// 0-based position in the full vector: `v * nx * ny + (i - 1)`.
    pub fn global(&self, grid: &Grid2D) -> usize {
        self.v * grid.points() + (self.i - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantity {
    Density,
    VelocityX,
    VelocityY,
    Pressure,
    MomentumX,
    MomentumY,
    TotalEnergy,
}

impl Quantity {
    pub const PRIMITIVE: [Quantity; 4] =
        [Quantity::Density, Quantity::VelocityX, Quantity::VelocityY, Quantity::Pressure];

    pub fn tag(self) -> &'static str {
        match self {
            Quantity::Density => "rho",
            Quantity::VelocityX => "U",
            Quantity::VelocityY => "V",
            Quantity::Pressure => "P",
            Quantity::MomentumX => "rhoU",
            Quantity::MomentumY => "rhoV",
            Quantity::TotalEnergy => "rhoE",
        }
    }
}

/// Variable tag of a field: a physical quantity, or the error in one (`err:<var>`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarTag {
    pub quantity: Quantity,
    pub error: bool,
}

impl VarTag {
    pub const fn value(quantity: Quantity) -> Self {
        Self { quantity, error: false }
    }

    pub const fn error_of(quantity: Quantity) -> Self {
        Self { quantity, error: true }
    }

    pub fn as_error(self) -> Self {
        Self { error: true, ..self }
    }

    /// Density and pressure fields must stay positive.
    pub fn requires_positive(&self) -> bool {
        !self.error && matches!(self.quantity, Quantity::Density | Quantity::Pressure)
    }
}

impl fmt::Display for VarTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.error {
            write!(f, "err:{}", self.quantity.tag())
        } else {
            f.write_str(self.quantity.tag())
        }
    }
}

impl FromStr for VarTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (error, base) = match s.strip_prefix("err:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let quantity = [
            Quantity::Density,
            Quantity::VelocityX,
            Quantity::VelocityY,
            Quantity::Pressure,
            Quantity::MomentumX,
            Quantity::MomentumY,
            Quantity::TotalEnergy,
        ]
        .into_iter()
        .find(|q| q.tag() == base)
        .ok_or_else(|| Error::Format(format!("unknown variable tag {s:?}")))?;
        Ok(Self { quantity, error })
    }
}

/// One scalar variable on a grid. Stored x-fastest (`(my-1)*nx + (kx-1)`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: Grid2D,
    var: VarTag,
    data: Vec<f64>,
}

impl GridField {
    /// `data` is x-fastest (row by row in `my`).
    pub fn new(grid: Grid2D, var: VarTag, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.points() {
            return Err(Error::DimensionMismatch { expected: grid.points(), actual: data.len() });
        }
        if var.requires_positive() {
            if let Some((idx, &value)) = data.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                let (kx, my) = (idx % grid.nx + 1, idx / grid.nx + 1);
                return Err(Error::Positivity {
                    var: var.to_string(),
                    index: grid.point_index(kx, my),
                    value,
                });
            }
        }
        Ok(Self { grid, var, data })
    }

    pub fn from_fn(grid: Grid2D, var: VarTag, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(grid.points());
        for my in 1..=grid.ny {
            for kx in 1..=grid.nx {
                let (x, y) = grid.center(kx, my);
                data.push(f(x, y));
            }
        }
        Self::new(grid, var, data)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn var(&self) -> VarTag {
        self.var
    }

    /// Value at 1-based `(kx, my)`.
    pub fn get(&self, kx: usize, my: usize) -> f64 {
        self.data[(my - 1) * self.grid.nx + (kx - 1)]
    }

    /// Raw x-fastest storage.
    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn vectorize(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(g.points());
        for kx in 1..=g.nx {
            for my in 1..=g.ny {
                out.push(self.get(kx, my));
            }
        }
        out
    }

    pub fn devectorize(vec: &[f64], grid: Grid2D, var: VarTag) -> Result<Self> {
        if vec.len() != grid.points() {
            return Err(Error::DimensionMismatch { expected: grid.points(), actual: vec.len() });
        }
        let mut data = vec![0.0; grid.points()];
        for (i0, &v) in vec.iter().enumerate() {
            let (kx0, my0) = (i0 / grid.ny, i0 % grid.ny);
            data[my0 * grid.nx + kx0] = v;
        }
        Self::new(grid, var, data)
    }
}

/// A labeled multi-variable state on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet {
    pub label: String,
    fields: Vec<GridField>,
}

impl FieldSet {
    pub fn new(label: impl Into<String>, fields: Vec<GridField>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidGrid("field set without variables".into()))?;
        let grid = first.grid;
        if let Some(bad) = fields.iter().find(|f| !f.grid.same_layout(&grid)) {
            return Err(Error::IncompatibleEnsemble(format!(
                "variable {} lives on a different grid",
                bad.var
            )));
        }
        Ok(Self { label: label.into(), fields })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.fields[0].grid
    }

    pub fn vars(&self) -> Vec<VarTag> {
        self.fields.iter().map(|f| f.var).collect()
    }

    pub fn fields(&self) -> &[GridField] {
        &self.fields
    }

    pub fn field(&self, var: VarTag) -> Option<&GridField> {
        self.fields.iter().find(|f| f.var == var)
    }

    /// Total vectorized length `M`.
    pub fn len(&self) -> usize {
        self.grid().points() * self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vectorize(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for f in &self.fields {
            out.extend(f.vectorize());
        }
        out
    }

    pub fn devectorize(
        vec: &[f64],
        grid: Grid2D,
        vars: &[VarTag],
        label: impl Into<String>,
    ) -> Result<Self> {
        let np = grid.points();
        let expected = np * vars.len();
        if vec.len() != expected || vars.is_empty() {
            return Err(Error::DimensionMismatch { expected, actual: vec.len() });
        }
        let fields = vars
            .iter()
            .zip(vec.chunks_exact(np))
            .map(|(&var, block)| GridField::devectorize(block, grid, var))
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, fields)
    }
}

/// `n` vectorized solutions sharing one grid and variable ordering.
#[derive(Clone, Debug)]
pub struct SolutionEnsemble {
    grid: Grid2D,
    vars: Vec<VarTag>,
    labels: Vec<String>,
    solutions: Vec<Vec<f64>>,
}

impl SolutionEnsemble {
    pub fn from_fields(sets: &[FieldSet]) -> Result<Self> {
        let first = sets.first().ok_or(Error::Underdetermined(0))?;
        let grid = *first.grid();
        let vars = first.vars();
        for s in sets {
            if !s.grid().same_layout(&grid) || s.vars() != vars {
                return Err(Error::IncompatibleEnsemble(format!(
                    "solution {:?} differs from {:?}",
                    s.label, first.label
                )));
            }
        }
        Self::from_vectors(
            grid,
            vars,
            sets.iter().map(|s| s.label.clone()).collect(),
            sets.iter().map(FieldSet::vectorize).collect(),
        )
    }

    pub fn from_vectors(
        grid: Grid2D,
        vars: Vec<VarTag>,
        labels: Vec<String>,
        solutions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if solutions.len() < 3 {
            return Err(Error::Underdetermined(solutions.len()));
        }
        if labels.len() != solutions.len() {
            return Err(Error::DimensionMismatch { expected: solutions.len(), actual: labels.len() });
        }
        let m = grid.points() * vars.len();
        if let Some(bad) = solutions.iter().find(|s| s.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, actual: bad.len() });
        }
        Ok(Self { grid, vars, labels, solutions })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn vars(&self) -> &[VarTag] {
        &self.vars
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.solutions.len()
    }

    /// Vector length `M`.
    pub fn m(&self) -> usize {
        self.grid.points() * self.vars.len()
    }

    pub fn solution(&self, j: usize) -> &[f64] {
        &self.solutions[j]
    }

    /// Values of every solution at flat index `m`.
    pub fn column(&self, m: usize) -> Vec<f64> {
        self.solutions.iter().map(|s| s[m]).collect()
    }

    /// `u^(i) - u^(j)` element-wise, 0-based solution indices.
    pub fn difference(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        let n = self.n();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        if i == j {
            return Err(Error::Config(format!("difference of solution {i} with itself")));
        }
        Ok(self.solutions[i]
            .iter()
            .zip(&self.solutions[j])
            .map(|(a, b)| a - b)
            .collect())
    }
}
