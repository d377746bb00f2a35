//! Runs, estimates, comparisons and the files they leave behind.

use std::collections::BTreeSet;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use errest_core::io as fio;
use errest_core::metrics::{l2_norm, write_table_csv, TableMetric};
use errest_core::inverse::solve_field;
use errest_core::{FieldSet, Grid2D, SolutionEnsemble, SolverKind, VarTag};
use errest_flow::analytic::{build_region_map, project_analytic, true_error, RegionMap};
use errest_flow::FlowCase;
use serde::{Deserialize, Serialize};

use crate::cache::{write_residuals, CachedRun, RunCache, CACHE_REVISION};
use crate::compare::{compare_vectors, localization, Comparison, Localization};
use crate::config::{ExperimentConfig, FieldFormat};
use crate::error::{HarnessError, Result};
use crate::plot::{emit_plot_data, PlotData};

/// Band half-width (cells) and relative threshold used for the localization summary.
pub const BAND_CELLS: f64 = 6.0;
pub const BAND_REL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// March whatever the cache lacks.
    Compute,
    /// Fail with `MissingRun` instead of marching.
    CacheOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub cache_key: String,
    pub steps: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub residual_drop: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub name: String,
    /// Members that entered the estimate.
    pub members: Vec<String>,
    /// Configured members left out because their run failed.
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config_hash: String,
    pub cache_revision: u32,
    pub case: FlowCase,
    pub estimator: SolverKind,
    pub alpha: f64,
    pub schemes: Vec<String>,
    pub variables: Vec<String>,
    pub runs: Vec<RunRecord>,
    pub excluded: Vec<Exclusion>,
    pub ensembles: Vec<EnsembleRecord>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let p = dir.join(MANIFEST_FILE);
        Ok(serde_json::from_slice(&fs::read(&p).map_err(|e| HarnessError::io(&p, e))?)?)
    }

    pub fn artifact(&self, path: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.path == path)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeLocalization {
    pub label: String,
    pub localization: Localization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub ensemble: String,
    pub variable: String,
    pub comparison: Comparison,
    pub localization: Vec<SchemeLocalization>,
    /// Points where the gradient solver stopped early (always 0 for the closed form).
    pub nonconverged_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDifference {
    pub a: String,
    pub b: String,
    /// L2 norm (cell-area weighted) of the difference over all primitive variables.
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub ensembles: Vec<EnsembleSummary>,
    pub pairwise_differences: Vec<PairDifference>,
}

impl ExperimentSummary {
    pub fn find(&self, ensemble: &str, variable: &str) -> Option<&EnsembleSummary> {
        self.ensembles.iter().find(|e| e.ensemble == ensemble && e.variable == variable)
    }
}

/// Everything an experiment produced, in memory.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub manifest: RunManifest,
    pub summary: ExperimentSummary,
    pub map: RegionMap,
    pub out_dir: PathBuf,
    /// Runs that came out of the cache rather than being marched now.
    pub cache_hits: usize,
}

/// Registers every file it hands out, so the manifest is complete by construction.
struct Emitter {
    root: PathBuf,
    artifacts: Vec<Artifact>,
    seen: BTreeSet<String>,
}

impl Emitter {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| HarnessError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new(), seen: BTreeSet::new() })
    }

    fn path(&mut self, rel: &str, kind: &str) -> Result<PathBuf> {
        assert!(self.seen.insert(rel.to_string()), "artifact {rel} emitted twice");
        self.artifacts.push(Artifact { path: rel.to_string(), kind: kind.to_string() });
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        Ok(p)
    }

    fn json<T: Serialize>(&mut self, rel: &str, kind: &str, value: &T) -> Result<()> {
        let p = self.path(rel, kind)?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&p, text).map_err(|e| HarnessError::io(&p, e))
    }

    fn field(&mut self, rel_stem: &str, kind: &str, set: &FieldSet, formats: &[FieldFormat]) -> Result<()> {
        let p = self.path(&format!("{rel_stem}.csv"), kind)?;
        fio::save_csv(&p, set)?;
        if formats.contains(&FieldFormat::Binary) {
            let p = self.path(&format!("{rel_stem}.fld"), kind)?;
            fio::save_binary(&p, set)?;
        }
        Ok(())
    }
}

/// Default cache: `$ERREST_CACHE_DIR`, else `.errest-cache` in the working directory.
pub fn default_cache() -> RunCache {
    RunCache::from_env_or(".errest-cache")
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    Ok(execute(cfg, &default_cache(), RunMode::Compute)?.manifest)
}

pub fn execute(cfg: &ExperimentConfig, cache: &RunCache, mode: RunMode) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let case = cfg.flow_case()?;
    let grid = case.grid;
    let specs = cfg.scheme_specs()?;
    let vars = cfg.report_vars()?;
    let map = build_region_map(&case)?;
    let analytic = project_analytic(&map, &grid)?;

    let mut runs = Vec::with_capacity(specs.len());
    let mut cache_hits = 0;
    for spec in &specs {
        let run = match mode {
            RunMode::Compute => cache.get_or_run(&case, *spec, &cfg.march)?,
            RunMode::CacheOnly => cache.get(&case, *spec, &cfg.march)?,
        };
        cache_hits += usize::from(run.from_cache);
        runs.push(run);
    }
    let ok: Vec<&CachedRun> = runs.iter().filter(|r| r.fields.is_some()).collect();
    let excluded: Vec<Exclusion> = runs
        .iter()
        .filter_map(|r| {
            r.meta.failure.as_ref().map(|f| Exclusion { label: r.meta.label.clone(), reason: f.clone() })
        })
        .collect();
    let excluded_labels: Vec<String> = excluded.iter().map(|e| e.label.clone()).collect();

    let mut ensembles = Vec::new();
    for e in cfg.resolved_ensembles() {
        let canon: Vec<String> = e
            .members
            .iter()
            .map(|m| m.parse::<errest_flow::SchemeSpec>().map(|s| s.label()))
            .collect::<std::result::Result<_, _>>()?;
        let (members, dropped): (Vec<String>, Vec<String>) =
            canon.into_iter().partition(|l| !excluded_labels.contains(l));
        if members.len() < 3 {
            return Err(HarnessError::EnsembleTooSmall {
                name: e.name.clone(),
                size: members.len(),
                excluded: dropped,
            });
        }
        ensembles.push(EnsembleRecord { name: e.name.clone(), members, dropped });
    }

    let mut out = Emitter::new(&cfg.output.dir)?;
    let formats = &cfg.output.formats;
    out.json("region_map.json", "region_map", &map)?;
    out.field("fields/analytic", "analytic_field", &analytic, formats)?;
    let rho = VarTag::value(errest_core::Quantity::Density);
    let p = out.path("plot/isolines_analytic_rho.csv", "plot_isolines")?;
    emit_plot_data(PlotData::Isolines(analytic.field(rho).expect("rho")), &p)?;

    let mut truths = Vec::with_capacity(ok.len());
    for r in &runs {
        let label = &r.meta.label;
        let p = out.path(&format!("residuals/{label}.csv"), "residual_history")?;
        write_residuals(&p, &r.residuals)?;
        let Some(fields) = &r.fields else { continue };
        out.field(&format!("fields/solution/{label}"), "solution_field", fields, formats)?;
        let p = out.path(&format!("plot/isolines_{label}_rho.csv"), "plot_isolines")?;
        emit_plot_data(PlotData::Isolines(fields.field(rho).expect("rho")), &p)?;
        let t = true_error(fields, &analytic)?;
        out.field(&format!("fields/true_error/{label}"), "true_error_field", &t, formats)?;
        truths.push(t);
    }
    let truth_of = |label: &str| truths.iter().find(|t| t.label == label).expect("truth for every ok run");
    let fields_of = |label: &str| {
        ok.iter().find(|r| r.meta.label == label).and_then(|r| r.fields.clone()).expect("fields for ok run")
    };

    let mut pairwise = Vec::new();
    for (i, a) in ok.iter().enumerate() {
        for b in &ok[i + 1..] {
            let (va, vb) = (a.fields.as_ref().unwrap().vectorize(), b.fields.as_ref().unwrap().vectorize());
            let d: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x - y).collect();
            pairwise.push(PairDifference {
                a: a.meta.label.clone(),
                b: b.meta.label.clone(),
                l2: l2_norm(&d, grid.cell_area())?,
            });
        }
    }

    let mut summaries = Vec::new();
    for e in &ensembles {
        let sets: Vec<FieldSet> = e.members.iter().map(|l| fields_of(l)).collect();
        let ens = SolutionEnsemble::from_fields(&sets)?;
        let est = solve_field(&ens, &cfg.ip, cfg.estimator)?;
        let est_sets = est.to_field_sets()?;
        for s in &est_sets {
            out.field(&format!("fields/estimate/{}/{}", e.name, s.label), "estimated_error_field", s, formats)?;
        }
        let member_truths: Vec<FieldSet> = e.members.iter().map(|l| truth_of(l).clone()).collect();
        for &var in &vars {
            let pick = |s: &FieldSet| s.field(var.as_error()).expect("all primitives present").vectorize();
            let est_v: Vec<Vec<f64>> = est_sets.iter().map(pick).collect();
            let tru_v: Vec<Vec<f64>> = member_truths.iter().map(pick).collect();
            let comparison = compare_vectors(&e.name, var, grid.cell_area(), &e.members, &est_v, &tru_v)?;
            let localization = e
                .members
                .iter()
                .zip(&est_v)
                .map(|(l, v)| SchemeLocalization {
                    label: l.clone(),
                    localization: localization(&map, &grid, v, BAND_CELLS, BAND_REL),
                })
                .collect();
            for ((l, ev), tv) in e.members.iter().zip(&est_v).zip(&tru_v) {
                let p = out.path(&format!("plot/slice_{}_{l}_{var}.csv", e.name), "plot_error_slice")?;
                emit_plot_data(PlotData::ErrorSlice { grid: &grid, estimate: ev, truth: tv }, &p)?;
            }
            summaries.push(EnsembleSummary {
                ensemble: e.name.clone(),
                variable: var.to_string(),
                comparison,
                localization,
                nonconverged_points: est.nonconverged_points(),
            });
        }
    }

    let columns: Vec<String> = specs.iter().map(|s| s.label()).collect();
    for &var in &vars {
        let comps: Vec<&Comparison> =
            summaries.iter().filter(|s| s.variable == var.to_string()).map(|s| &s.comparison).collect();
        for (name, bytes) in table_files(var, &columns, &comps)? {
            let p = out.path(&format!("tables/{name}"), "table")?;
            fs::write(&p, bytes).map_err(|e| HarnessError::io(&p, e))?;
        }
    }

    let summary = ExperimentSummary { name: cfg.name.clone(), ensembles: summaries, pairwise_differences: pairwise };
    out.json("summary.json", "summary", &summary)?;

    let manifest = RunManifest {
        name: cfg.name.clone(),
        config_hash: cfg.hash()?,
        cache_revision: CACHE_REVISION,
        case,
        estimator: cfg.estimator,
        alpha: cfg.ip.alpha,
        schemes: columns,
        variables: vars.iter().map(ToString::to_string).collect(),
        runs: runs.iter().map(record_of).collect(),
        excluded,
        ensembles,
        artifacts: out.artifacts,
    };
    let p = cfg.output.dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&p, text).map_err(|e| HarnessError::io(&p, e))?;
    Ok(ExperimentOutcome { manifest, summary, map, out_dir: cfg.output.dir.clone(), cache_hits })
}

fn record_of(r: &CachedRun) -> RunRecord {
    RunRecord {
        label: r.meta.label.clone(),
        cache_key: r.meta.key.clone(),
        steps: r.meta.steps,
        converged: r.meta.converged,
        wall_time_s: r.meta.wall_time_s,
        residual_drop: r.meta.residual_drop,
        failure: r.meta.failure.clone(),
    }
}

/// `I_eff_<var>.csv`, `I_rel_<var>.csv` and `correlation_<var>.csv`, as bytes.
pub fn table_files(var: VarTag, columns: &[String], comps: &[&Comparison]) -> Result<Vec<(String, Vec<u8>)>> {
    let reports: Vec<_> = comps.iter().map(|c| c.report.clone()).collect();
    let mut out = Vec::new();
    for (metric, prefix) in [(TableMetric::Effectivity, "I_eff"), (TableMetric::RelativeAccuracy, "I_rel")] {
        let mut buf = Vec::new();
        write_table_csv(BufWriter::new(&mut buf), metric, columns, &reports)?;
        out.push((format!("{prefix}_{var}.csv"), buf));
    }
    let mut text = String::from("ensemble,scheme,abs_pearson\n");
    for c in comps {
        for s in &c.correlations {
            let v = s.abs_pearson.map_or_else(|| "N/A".to_string(), |v| format!("{v:.6}"));
            text.push_str(&format!("{},{},{v}\n", c.report.ensemble, s.label));
        }
    }
    out.push((format!("correlation_{var}.csv"), text.into_bytes()));
    Ok(out)
}

/// Rebuilds every table from the field dumps listed in a manifest, without
/// touching the cache or re-solving anything.
pub fn recompute_tables(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let manifest = RunManifest::load(dir)?;
    let load = |rel: String| -> Result<FieldSet> {
        if manifest.artifact(&rel).is_none() {
            return Err(HarnessError::MissingInput(format!("{rel} is not in the manifest")));
        }
        Ok(fio::load_csv(dir.join(rel))?)
    };
    let mut out = Vec::new();
    for v in &manifest.variables {
        let var: VarTag = v.parse()?;
        let mut comps = Vec::new();
        for e in &manifest.ensembles {
            let mut est = Vec::new();
            let mut tru = Vec::new();
            let mut grid: Option<Grid2D> = None;
            for l in &e.members {
                let es = load(format!("fields/estimate/{}/{l}.csv", e.name))?;
                let ts = load(format!("fields/true_error/{l}.csv"))?;
                grid = Some(*es.grid());
                let pick = |s: &FieldSet| {
                    s.field(var.as_error())
                        .map(|f| f.vectorize())
                        .ok_or_else(|| HarnessError::MissingInput(format!("{var} in {}", s.label)))
                };
                est.push(pick(&es)?);
                tru.push(pick(&ts)?);
            }
            let area = grid.expect("ensembles have members").cell_area();
            comps.push(compare_vectors(&e.name, var, area, &e.members, &est, &tru)?);
        }
        let refs: Vec<&Comparison> = comps.iter().collect();
        out.extend(table_files(var, &manifest.schemes, &refs)?);
    }
    Ok(out)
}
