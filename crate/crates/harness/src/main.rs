use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use errest_core::inverse::log_alphas;
use errest_core::{io as fio, IpConfig, SolverKind, VarTag};
use errest_harness::experiment::{default_cache, execute, recompute_tables, RunManifest, RunMode};
use errest_harness::plot::{emit_plot_data, PlotData};
use errest_harness::sweep::{run_scalar_sweep, write_sweep, DEFAULT_TRUE_ERRORS};
use errest_harness::{ExperimentConfig, HarnessError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "errest", version, about = "Ensemble error estimation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    ClosedForm,
    Gradient,
}

impl From<Estimator> for SolverKind {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::ClosedForm => SolverKind::ClosedForm,
            Estimator::Gradient => SolverKind::Gradient,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpKind {
    Isolines,
    ErrorSlice,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment, marching only what the cache lacks.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rebuild an experiment's outputs from cached runs only.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Also check that the tables on disk match the field dumps.
        #[arg(long)]
        verify: bool,
    },
    /// Scalar regularization study.
    Sweep {
        /// Comma-separated true errors.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        errors: Option<Vec<f64>>,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 41)]
        count: usize,
        #[arg(long, value_enum, default_value = "closed-form")]
        estimator: Estimator,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot data from an experiment's output directory.
    Dump {
        #[arg(long)]
        from: PathBuf,
        #[arg(long, value_enum)]
        kind: DumpKind,
        /// Scheme label, or `analytic` for isolines.
        #[arg(long)]
        label: String,
        #[arg(long, default_value = "rho")]
        var: String,
        /// Needed for error slices.
        #[arg(long)]
        ensemble: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_field(dir: &std::path::Path, manifest: &RunManifest, rel: &str) -> Result<errest_core::FieldSet> {
    if manifest.artifact(rel).is_none() {
        return Err(HarnessError::MissingInput(format!("{rel} is not listed in the manifest")));
    }
    Ok(fio::load_csv(dir.join(rel))?)
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.cmd {
        Cmd::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let o = execute(&cfg, &default_cache(), RunMode::Compute)?;
            Ok(json!({
                "output": o.out_dir,
                "artifacts": o.manifest.artifacts.len(),
                "excluded": o.manifest.excluded,
                "cache_hits": o.cache_hits,
            }))
        }
        Cmd::Report { config, verify } => {
            let cfg = ExperimentConfig::load(&config)?;
            let o = execute(&cfg, &default_cache(), RunMode::CacheOnly)?;
            if verify {
                for (name, bytes) in recompute_tables(&o.out_dir)? {
                    let p = o.out_dir.join("tables").join(&name);
                    let disk = std::fs::read(&p).map_err(|e| HarnessError::io(&p, e))?;
                    if disk != bytes {
                        return Err(HarnessError::Config(format!("table {name} differs from its field dumps")));
                    }
                }
            }
            Ok(json!({ "output": o.out_dir, "artifacts": o.manifest.artifacts.len(), "verified": verify }))
        }
        Cmd::Sweep { errors, lo, hi, count, estimator, out } => {
            let e = errors.unwrap_or_else(|| DEFAULT_TRUE_ERRORS.to_vec());
            let (rows, summary) = run_scalar_sweep(&e, &log_alphas(lo, hi, count), &IpConfig::default(), estimator.into())?;
            let files = write_sweep(&out, &rows, &summary)?;
            Ok(json!({ "files": files, "summary": summary }))
        }
        Cmd::Dump { from, kind, label, var, ensemble, out } => {
            let manifest = RunManifest::load(&from)?;
            let var: VarTag = var.parse()?;
            match kind {
                DumpKind::Isolines => {
                    let rel = if label == "analytic" {
                        "fields/analytic.csv".to_string()
                    } else {
                        format!("fields/solution/{label}.csv")
                    };
                    let set = load_field(&from, &manifest, &rel)?;
                    let f = set.field(var).ok_or_else(|| HarnessError::MissingInput(format!("{var} in {rel}")))?;
                    emit_plot_data(PlotData::Isolines(f), &out)?;
                }
                DumpKind::ErrorSlice => {
                    let ens = ensemble.ok_or_else(|| HarnessError::Config("--ensemble is required for error-slice".into()))?;
                    let est = load_field(&from, &manifest, &format!("fields/estimate/{ens}/{label}.csv"))?;
                    let tru = load_field(&from, &manifest, &format!("fields/true_error/{label}.csv"))?;
                    let pick = |s: &errest_core::FieldSet| {
                        s.field(var.as_error())
                            .map(|f| f.vectorize())
                            .ok_or_else(|| HarnessError::MissingInput(format!("{var} for {label}")))
                    };
                    let (e, t) = (pick(&est)?, pick(&tru)?);
                    emit_plot_data(PlotData::ErrorSlice { grid: est.grid(), estimate: &e, truth: &t }, &out)?;
                }
            }
            Ok(json!({ "file": out }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
