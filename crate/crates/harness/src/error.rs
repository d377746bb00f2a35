use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ensemble {name:?} keeps {size} members after excluding failed runs (need at least 3)")]
    EnsembleTooSmall { name: String, size: usize, excluded: Vec<String> },
    #[error("no cached run for {label} (key {key}); run the experiment first")]
    MissingRun { label: String, key: String },
    #[error("cache entry {key} is unreadable: {reason}")]
    Cache { key: String, reason: String },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error(transparent)]
    Flow(#[from] errest_flow::FlowError),
    #[error(transparent)]
    Core(#[from] errest_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::EnsembleTooSmall { .. } => "ensemble_too_small",
            Self::MissingRun { .. } => "missing_run",
            Self::Cache { .. } => "cache",
            Self::MissingInput(_) => "missing_input",
            Self::Flow(_) => "flow",
            Self::Core(_) => "core",
            Self::Io { .. } => "io",
            Self::Toml(_) => "config_parse",
            Self::Json(_) => "json",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let Self::EnsembleTooSmall { name, size, excluded } = self {
            v["ensemble"] = json!(name);
            v["size"] = json!(size);
            v["excluded"] = json!(excluded);
        }
        v
    }
}
