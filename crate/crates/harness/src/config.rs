//! Declarative experiment description, read from TOML.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use errest_core::{Grid2D, IpConfig, Quantity, SolverKind, VarTag};
use errest_flow::{CaseKind, FlowCase, MarchConfig, SchemeSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// Case parameters; anything left out takes the default for `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub kind: CaseKind,
    pub mach: Option<f64>,
    pub alpha1_deg: Option<f64>,
    pub alpha2_deg: Option<f64>,
    pub first_origin_y: Option<f64>,
    pub second_origin_y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Variables that get tables, correlations and plot slices.
    #[serde(default = "default_variables")]
    pub variables: Vec<String>,
    /// Field dumps are always written as CSV; `binary` adds `.fld` copies.
    #[serde(default = "default_formats")]
    pub formats: Vec<FieldFormat>,
}

fn default_variables() -> Vec<String> {
    vec!["rho".into()]
}

fn default_formats() -> Vec<FieldFormat> {
    vec![FieldFormat::Csv]
}

fn default_name() -> String {
    "experiment".into()
}

fn default_estimator() -> SolverKind {
    SolverKind::ClosedForm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub schemes: Vec<String>,
    #[serde(default = "default_estimator")]
    pub estimator: SolverKind,
    pub case: CaseConfig,
    pub grid: GridConfig,
    /// When empty, a single ensemble "all" holds every scheme.
    #[serde(default)]
    pub ensembles: Vec<EnsembleSpec>,
    #[serde(default)]
    pub ip: IpConfig,
    #[serde(default)]
    pub march: MarchConfig,
    pub output: OutputConfig,
}

/// The four ensembles used throughout: two disjoint-ish triples, five, and everything.
pub fn standard_ensembles() -> Vec<EnsembleSpec> {
    let e = |name: &str, m: &[&str]| EnsembleSpec {
        name: name.into(),
        members: m.iter().map(|s| s.to_string()).collect(),
    };
    vec![
        e("three", &["CIR", "MC-AV2-001", "W3"]),
        e("other-three", &["CIR", "LW-AV2-001", "W5"]),
        e("five", &["CIR", "MC-AV2-001", "LW-AV2-001", "W3", "W5"]),
        e("all", &errest_flow::schemes::CATALOG),
    ]
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let g = Grid2D::unit_square(self.grid.nx, self.grid.ny)?;
        g.require_stencil()?;
        Ok(g)
    }

    pub fn flow_case(&self) -> Result<FlowCase> {
        let grid = self.grid()?;
        let base = match self.case.kind {
            CaseKind::FreeStream => FlowCase::free_stream(4.0, grid),
            CaseKind::EdneyI => FlowCase::edney1(grid),
            CaseKind::EdneyVI => FlowCase::edney6(grid),
        };
        let c = &self.case;
        let case = FlowCase {
            mach: c.mach.unwrap_or(base.mach),
            alpha1_deg: c.alpha1_deg.unwrap_or(base.alpha1_deg),
            alpha2_deg: c.alpha2_deg.unwrap_or(base.alpha2_deg),
            first_origin_y: c.first_origin_y.unwrap_or(base.first_origin_y),
            second_origin_y: c.second_origin_y.unwrap_or(base.second_origin_y),
            ..base
        };
        case.validate()?;
        Ok(case)
    }

    pub fn scheme_specs(&self) -> Result<Vec<SchemeSpec>> {
        self.schemes
            .iter()
            .map(|l| l.parse::<SchemeSpec>().map_err(|e| HarnessError::Config(format!("scheme {l:?}: {e}"))))
            .collect()
    }

    pub fn resolved_ensembles(&self) -> Vec<EnsembleSpec> {
        if self.ensembles.is_empty() {
            vec![EnsembleSpec { name: "all".into(), members: self.schemes.clone() }]
        } else {
            self.ensembles.clone()
        }
    }

    pub fn report_vars(&self) -> Result<Vec<VarTag>> {
        let prim = Quantity::PRIMITIVE.map(VarTag::value);
        self.output
            .variables
            .iter()
            .map(|s| {
                let v: VarTag = s.parse()?;
                if prim.contains(&v) {
                    Ok(v)
                } else {
                    Err(HarnessError::Config(format!("variable {s:?} is not one of rho, U, V, P")))
                }
            })
            .collect()
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(HarnessError::Config(format!("bad experiment name {:?}", self.name)));
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::Config("no schemes listed".into()));
        }
        let specs = self.scheme_specs()?;
        let mut seen = BTreeSet::new();
        for s in &specs {
            if !seen.insert(s.label()) {
                return Err(HarnessError::Config(format!("scheme {} listed twice", s.label())));
            }
        }
        let labels: Vec<String> = specs.iter().map(SchemeSpec::label).collect();
        let mut names = BTreeSet::new();
        for e in self.resolved_ensembles() {
            if e.name.is_empty() || e.name.contains(['/', '\\']) || !names.insert(e.name.clone()) {
                return Err(HarnessError::Config(format!("bad or duplicate ensemble name {:?}", e.name)));
            }
            let mut members = BTreeSet::new();
            for m in &e.members {
                let label = m
                    .parse::<SchemeSpec>()
                    .map_err(|err| HarnessError::Config(format!("ensemble {}: {err}", e.name)))?
                    .label();
                if !labels.contains(&label) {
                    return Err(HarnessError::Config(format!(
                        "ensemble {} uses {label}, which is not in schemes",
                        e.name
                    )));
                }
                if !members.insert(label) {
                    return Err(HarnessError::Config(format!("ensemble {} repeats {m}", e.name)));
                }
            }
            if members.len() < 3 {
                return Err(HarnessError::EnsembleTooSmall {
                    name: e.name.clone(),
                    size: members.len(),
                    excluded: Vec::new(),
                });
            }
        }
        if self.report_vars()?.is_empty() {
            return Err(HarnessError::Config("output.variables is empty".into()));
        }
        self.ip.validate()?;
        self.march.validate()?;
        self.flow_case()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex_digest(&serde_json::to_vec(self)?))
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
