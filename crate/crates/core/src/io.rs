//! Field container files.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic    8 bytes  "ERRFLD01"
//! nx, ny   u64, u64
//! x0, y0   f64, f64
//! dx, dy   f64, f64
//! label    u32 byte length + UTF-8
//! nvars    u32, then per variable: u32 byte length + UTF-8 tag
//! data     nx*ny*nvars f64 in vectorized order
//! ```
//!
//! The CSV layout carries the same header as `# key=value` comment lines,
//! followed by `kx,my,var,value` rows in vectorized order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{FieldSet, FlatIndex, Grid2D, VarTag};

const MAGIC: &[u8; 8] = b"ERRFLD01";

pub fn write_binary<W: Write>(mut w: W, set: &FieldSet) -> Result<()> {
    let g = set.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.nx as u64).to_le_bytes())?;
    w.write_all(&(g.ny as u64).to_le_bytes())?;
    for v in [g.x0, g.y0, g.dx, g.dy] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_str(&mut w, &set.label)?;
    let vars = set.vars();
    w.write_all(&(vars.len() as u32).to_le_bytes())?;
    for v in &vars {
        write_str(&mut w, &v.to_string())?;
    }
    for v in set.vectorize() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<FieldSet> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let nx = read_u64(&mut r)? as usize;
    let ny = read_u64(&mut r)? as usize;
    let x0 = read_f64(&mut r)?;
    let y0 = read_f64(&mut r)?;
    let dx = read_f64(&mut r)?;
    let dy = read_f64(&mut r)?;
    let grid = Grid2D::new(nx, ny, x0, y0, dx, dy)?;
    let label = read_str(&mut r)?;
    let nvars = read_u32(&mut r)? as usize;
    let vars = (0..nvars)
        .map(|_| read_str(&mut r)?.parse::<VarTag>())
        .collect::<Result<Vec<_>>>()?;
    let m = grid
        .points()
        .checked_mul(nvars)
        .ok_or_else(|| Error::Format("size overflow".into()))?;
    let mut data = Vec::with_capacity(m);
    for _ in 0..m {
        data.push(read_f64(&mut r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after data".into()));
    }
    FieldSet::devectorize(&data, grid, &vars, label)
}

pub fn write_csv<W: Write>(mut w: W, set: &FieldSet) -> Result<()> {
    let g = set.grid();
    let vars = set.vars();
    writeln!(w, "# nx={}", g.nx)?;
    writeln!(w, "# ny={}", g.ny)?;
    writeln!(w, "# x0={:e}", g.x0)?;
    writeln!(w, "# y0={:e}", g.y0)?;
    writeln!(w, "# dx={:e}", g.dx)?;
    writeln!(w, "# dy={:e}", g.dy)?;
    writeln!(w, "# label={}", set.label)?;
    let tags: Vec<String> = vars.iter().map(ToString::to_string).collect();
    writeln!(w, "# vars={}", tags.join(";"))?;
    writeln!(w, "kx,my,var,value")?;
    for (m, value) in set.vectorize().into_iter().enumerate() {
        let fi = FlatIndex::from_global(g, m);
        writeln!(w, "{},{},{},{:e}", fi.kx, fi.my, tags[fi.v], value)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<FieldSet> {
    let mut header = std::collections::BTreeMap::new();
    let mut lines = BufReader::new(r).lines();
    let mut saw_columns = false;
    for line in lines.by_ref() {
        let line = line?;
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header line {line:?}")))?;
            header.insert(k.to_string(), v.to_string());
        } else if line.trim() == "kx,my,var,value" {
            saw_columns = true;
            break;
        } else {
            return Err(Error::Format(format!("unexpected line before data: {line:?}")));
        }
    }
    if !saw_columns {
        return Err(Error::Format("missing column header".into()));
    }
    let get = |k: &str| {
        header
            .get(k)
            .cloned()
            .ok_or_else(|| Error::Format(format!("missing header key {k}")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|_| Error::Format(format!("bad number for {k}")))
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?.parse().map_err(|_| Error::Format(format!("bad integer for {k}")))
    };
    let grid = Grid2D::new(int("nx")?, int("ny")?, num("x0")?, num("y0")?, num("dx")?, num("dy")?)?;
    let vars = get("vars")?
        .split(';')
        .map(str::parse::<VarTag>)
        .collect::<Result<Vec<_>>>()?;
    let label = get("label")?;
    let m = grid.points() * vars.len();
    let mut data = vec![f64::NAN; m];
    let mut filled = vec![false; m];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = || cols.next().ok_or_else(|| Error::Format(format!("short row {line:?}")));
        let kx: usize = next()?.parse().map_err(|_| Error::Format(format!("bad kx in {line:?}")))?;
        let my: usize = next()?.parse().map_err(|_| Error::Format(format!("bad my in {line:?}")))?;
        let var: VarTag = next()?.parse()?;
        let value: f64 = next()?.parse().map_err(|_| Error::Format(format!("bad value in {line:?}")))?;
        let v = vars
            .iter()
            .position(|t| *t == var)
            .ok_or_else(|| Error::Format(format!("variable {var} not declared in header")))?;
        let idx = FlatIndex::new(&grid, kx, my, v)?.global(&grid);
        if filled[idx] {
            return Err(Error::Format(format!("duplicate row for ({kx},{my},{var})")));
        }
        filled[idx] = true;
        data[idx] = value;
    }
    if let Some(missing) = filled.iter().position(|f| !f) {
        let fi = FlatIndex::from_global(&grid, missing);
        return Err(Error::Format(format!("missing row for kx={} my={}", fi.kx, fi.my)));
    }
    FieldSet::devectorize(&data, grid, &vars, label)
}

pub fn save_binary(path: impl AsRef<Path>, set: &FieldSet) -> Result<()> {
    write_binary(BufWriter::new(File::create(path)?), set)
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<FieldSet> {
    read_binary(BufReader::new(File::open(path)?))
}

pub fn save_csv(path: impl AsRef<Path>, set: &FieldSet) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), set)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<FieldSet> {
    read_csv(File::open(path)?)
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > 1 << 16 {
        return Err(Error::Format(format!("string length {len} too large")));
    }
    let mut b = vec![0u8; len];
    r.read_exact(&mut b)?;
    String::from_utf8(b).map_err(|_| Error::Format("invalid UTF-8".into()))
}
