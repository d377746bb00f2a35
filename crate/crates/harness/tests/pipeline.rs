use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use errest_flow::{FlowCase, MarchConfig, SchemeSpec};
use errest_harness::cache::{CachedRun, RunMeta};
use errest_harness::{execute, recompute_tables, run_key, ExperimentConfig, HarnessError, RunCache, RunMode};

fn config(dir: &Path, schemes: &[&str], ensembles: &[(&str, &[&str])]) -> ExperimentConfig {
    let list = |v: &[&str]| v.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ");
    let mut text = format!(
        "name = \"small\"\nschemes = [{}]\n\n[case]\nkind = \"EdneyI\"\n\n[grid]\nnx = 24\nny = 24\n\n",
        list(schemes)
    );
    for (name, members) in ensembles {
        text.push_str(&format!("[[ensembles]]\nname = {name:?}\nmembers = [{}]\n\n", list(members)));
    }
    text.push_str(&format!(
        "[ip]\nalpha = 1e-3\n\n[output]\ndir = {:?}\nvariables = [\"rho\", \"P\"]\n",
        dir.display().to_string()
    ));
    ExperimentConfig::from_toml_str(&text).unwrap()
}

const THREE: [&str; 3] = ["CIR", "MC-AV2-001", "LW-AV2-001"];

fn files_under(root: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel);
            }
        }
    }
    out
}

#[test]
fn pipeline_outputs_are_complete_deterministic_and_recomputable() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = RunCache::new(tmp.path().join("cache"));
    let cfg = config(&tmp.path().join("a"), &THREE, &[("three", &THREE)]);
    let first = execute(&cfg, &cache, RunMode::Compute).unwrap();
    assert_eq!(first.cache_hits, 0);

    // Every file except the manifest itself is listed exactly once.
    let listed: Vec<&str> = first.manifest.artifacts.iter().map(|a| a.path.as_str()).collect();
    let unique: BTreeSet<String> = listed.iter().map(|s| s.to_string()).collect();
    assert_eq!(unique.len(), listed.len());
    let mut on_disk = files_under(&first.out_dir);
    assert!(on_disk.remove("manifest.json"));
    assert_eq!(on_disk, unique);

    let rep = first.summary.find("three", "rho").unwrap();
    for r in &rep.comparison.report.records {
        let (ie, ir) = (r.i_eff.unwrap(), r.i_rel.unwrap());
        assert!(ie.is_finite() && ie > 0.0 && ir.is_finite() && ir > 0.0, "{r:?}");
    }
    assert!(first.summary.find("three", "P").is_some());

    // Same config from cache into another directory: byte-identical outputs.
    let cfg_b = config(&tmp.path().join("b"), &THREE, &[("three", &THREE)]);
    let second = execute(&cfg_b, &cache, RunMode::CacheOnly).unwrap();
    assert_eq!(second.cache_hits, 3);
    for a in &first.manifest.artifacts {
        let x = fs::read(first.out_dir.join(&a.path)).unwrap();
        let y = fs::read(second.out_dir.join(&a.path)).unwrap();
        assert!(x == y, "{} differs", a.path);
    }
    assert_eq!(first.manifest.runs, second.manifest.runs);

    // Tables follow from the field dumps alone.
    let tables = recompute_tables(&first.out_dir).unwrap();
    assert_eq!(tables.len(), 6);
    for (name, bytes) in tables {
        assert_eq!(fs::read(first.out_dir.join("tables").join(&name)).unwrap(), bytes, "{name}");
    }

    // Error slices hold one row per grid point.
    let slice = fs::read_to_string(first.out_dir.join("plot/slice_three_CIR_rho.csv")).unwrap();
    assert_eq!(slice.lines().count(), 1 + 24 * 24);
}

fn plant_failure(cache: &RunCache, case: &FlowCase, label: &str) {
    let spec: SchemeSpec = label.parse().unwrap();
    let key = run_key(case, &spec, &MarchConfig::default());
    cache
        .store(&CachedRun {
            meta: RunMeta {
                key,
                label: label.into(),
                steps: 0,
                converged: false,
                wall_time_s: 0.0,
                residual_drop: None,
                failure: Some("planted failure".into()),
            },
            residuals: Vec::new(),
            fields: None,
            from_cache: false,
        })
        .unwrap();
}

#[test]
fn failed_runs_are_excluded_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = RunCache::new(tmp.path().join("cache"));
    let four = ["CIR", "MC-AV2-001", "LW-AV2-001", "MC-AV4-001"];
    let cfg = config(&tmp.path().join("out"), &four, &[("three", &THREE), ("four", &four)]);
    plant_failure(&cache, &cfg.flow_case().unwrap(), "MC-AV4-001");

    let o = execute(&cfg, &cache, RunMode::Compute).unwrap();
    assert_eq!(o.manifest.excluded.len(), 1);
    assert_eq!(o.manifest.excluded[0].label, "MC-AV4-001");
    let four_rec = o.manifest.ensembles.iter().find(|e| e.name == "four").unwrap();
    assert_eq!(four_rec.members, THREE.map(String::from).to_vec());
    assert_eq!(four_rec.dropped, vec!["MC-AV4-001".to_string()]);
    assert!(o.manifest.artifact("residuals/MC-AV4-001.csv").is_some());
    assert!(o.manifest.artifact("fields/solution/MC-AV4-001.csv").is_none());
    let table = fs::read_to_string(o.out_dir.join("tables/I_eff_rho.csv")).unwrap();
    assert!(table.lines().nth(2).unwrap().starts_with("four (3),"), "{table}");

    // Dropping below three members is a hard error.
    let cfg = config(&tmp.path().join("out2"), &four, &[("bad", &["CIR", "MC-AV2-001", "MC-AV4-001"])]);
    match execute(&cfg, &cache, RunMode::Compute) {
        Err(HarnessError::EnsembleTooSmall { name, size: 2, excluded }) => {
            assert_eq!(name, "bad");
            assert_eq!(excluded, vec!["MC-AV4-001".to_string()]);
        }
        other => panic!("expected EnsembleTooSmall, got {other:?}"),
    }
}

#[test]
fn cache_only_mode_never_marches() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = RunCache::new(tmp.path().join("empty"));
    let cfg = config(&tmp.path().join("out"), &THREE, &[("three", &THREE)]);
    let err = execute(&cfg, &cache, RunMode::CacheOnly).unwrap_err();
    assert_eq!(err.kind(), "missing_run");
}
