//! Content-addressed store of finished solver runs.
//!
//! Each entry is a directory named by the SHA-256 of the run inputs, holding
//! `meta.json`, `residuals.csv` and (for successful runs) `fields.fld`.
//! Failed runs are cached too, so a rerun reproduces the same exclusions.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use errest_core::{io as fio, FieldSet};
use errest_flow::{march_to_steady, FlowCase, MarchConfig, RunResult, SchemeSpec};
use serde::{Deserialize, Serialize};

use crate::config::hex_digest;
use crate::error::{HarnessError, Result};

/// Bump when solver numerics change so stale entries stop matching.
pub const CACHE_REVISION: u32 = 1;

/// Overrides the cache location.
pub const CACHE_ENV: &str = "ERREST_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub key: String,
    pub label: String,
    pub steps: usize,
    pub converged: bool,
    /// Seconds spent marching when the entry was created.
    pub wall_time_s: f64,
    /// Last residual over the first one.
    pub residual_drop: Option<f64>,
    /// Why the run was aborted, if it was.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CachedRun {
    pub meta: RunMeta,
    pub residuals: Vec<f64>,
    pub fields: Option<FieldSet>,
    /// True when the entry was read rather than computed in this process.
    pub from_cache: bool,
}

#[derive(Serialize)]
struct KeyInput<'a> {
    revision: u32,
    case: &'a FlowCase,
    scheme: String,
    cfl: f64,
    steady_tol: f64,
    max_steps: Option<usize>,
}

pub fn run_key(case: &FlowCase, scheme: &SchemeSpec, march: &MarchConfig) -> String {
    let input = KeyInput {
        revision: CACHE_REVISION,
        case,
        scheme: scheme.label(),
        cfl: march.cfl,
        steady_tol: march.steady_tol,
        max_steps: march.max_steps,
    };
    hex_digest(&serde_json::to_vec(&input).expect("key input serializes"))
}

#[derive(Debug, Clone)]
pub struct RunCache {
    root: PathBuf,
}

impl RunCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `$ERREST_CACHE_DIR` when set and non-empty, otherwise `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(dir),
            _ => Self::new(fallback),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }

    pub fn load(&self, key: &str) -> Result<Option<CachedRun>> {
        let dir = self.entry(key);
        let meta_path = dir.join("meta.json");
        if !meta_path.is_file() {
            return Ok(None);
        }
        let bad = |reason: String| HarnessError::Cache { key: key.to_string(), reason };
        let meta: RunMeta = serde_json::from_slice(&fs::read(&meta_path).map_err(|e| HarnessError::io(&meta_path, e))?)
            .map_err(|e| bad(e.to_string()))?;
        if meta.key != key {
            return Err(bad(format!("meta.json records key {}", meta.key)));
        }
        let residuals = read_residuals(&dir.join("residuals.csv")).map_err(|e| bad(e.to_string()))?;
        let fields = if meta.failure.is_none() {
            Some(fio::load_binary(dir.join("fields.fld")).map_err(|e| bad(e.to_string()))?)
        } else {
            None
        };
        Ok(Some(CachedRun { meta, residuals, fields, from_cache: true }))
    }

    /// Writes into a scratch directory first, then renames, so readers never
    /// see half an entry.
    pub fn store(&self, run: &CachedRun) -> Result<()> {
        let key = &run.meta.key;
        let dir = self.entry(key);
        let tmp = self.root.join(format!(".tmp-{key}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&tmp);
        fs::create_dir_all(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
        if let Some(f) = &run.fields {
            fio::save_binary(tmp.join("fields.fld"), f)?;
        }
        write_residuals(&tmp.join("residuals.csv"), &run.residuals)?;
        let meta_path = tmp.join("meta.json");
        fs::write(&meta_path, serde_json::to_vec_pretty(&run.meta)?).map_err(|e| HarnessError::io(&meta_path, e))?;
        let _ = fs::remove_dir_all(&dir);
        fs::rename(&tmp, &dir).map_err(|e| HarnessError::io(&dir, e))?;
        Ok(())
    }

    /// Cached entry if present, else march and store. Solver failures become
    /// entries with `failure` set rather than errors.
    pub fn get_or_run(&self, case: &FlowCase, scheme: SchemeSpec, march: &MarchConfig) -> Result<CachedRun> {
        let key = run_key(case, &scheme, march);
        if let Some(hit) = self.load(&key)? {
            return Ok(hit);
        }
        let t0 = Instant::now();
        let outcome = march_to_steady(case, scheme, march);
        let wall_time_s = t0.elapsed().as_secs_f64();
        let run = match outcome {
            Ok(r) => finished(key, r, wall_time_s),
            Err(e) => CachedRun {
                meta: RunMeta {
                    key,
                    label: scheme.label(),
                    steps: 0,
                    converged: false,
                    wall_time_s,
                    residual_drop: None,
                    failure: Some(e.to_string()),
                },
                residuals: Vec::new(),
                fields: None,
                from_cache: false,
            },
        };
        self.store(&run)?;
        Ok(run)
    }

    /// Cached entry or `MissingRun`; never marches.
    pub fn get(&self, case: &FlowCase, scheme: SchemeSpec, march: &MarchConfig) -> Result<CachedRun> {
        let key = run_key(case, &scheme, march);
        self.load(&key)?.ok_or(HarnessError::MissingRun { label: scheme.label(), key })
    }
}

fn finished(key: String, r: RunResult, wall_time_s: f64) -> CachedRun {
    let residual_drop = match (r.residuals.first(), r.residuals.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    CachedRun {
        meta: RunMeta {
            key,
            label: r.label,
            steps: r.steps,
            converged: r.converged,
            wall_time_s,
            residual_drop,
            failure: None,
        },
        residuals: r.residuals,
        fields: Some(r.fields),
        from_cache: false,
    }
}

pub fn write_residuals(path: &Path, residuals: &[f64]) -> Result<()> {
    use std::io::Write;
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut go = || -> std::io::Result<()> {
        writeln!(w, "step,residual")?;
        for (k, r) in residuals.iter().enumerate() {
            writeln!(w, "{},{:e}", k + 1, r)?;
        }
        w.flush()
    };
    go().map_err(|e| HarnessError::io(path, e))
}

fn read_residuals(path: &Path) -> std::result::Result<Vec<f64>, String> {
    let file = fs::File::open(path).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if n == 0 {
            if line != "step,residual" {
                return Err(format!("bad residual header {line:?}"));
            }
            continue;
        }
        let v = line
            .split_once(',')
            .and_then(|(_, v)| v.parse::<f64>().ok())
            .ok_or_else(|| format!("bad residual line {line:?}"))?;
        out.push(v);
    }
    Ok(out)
}
