//! The versioned document every command produces.

use geoinar::diagnostics::DiagnosticsReport;
use geoinar::forecasting::{Backtest, ForecastResult};
use geoinar::mcstudy::SummaryRow;
use geoinar::FitResult;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Settings echoed back so that a run can be repeated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub models: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub methods: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub n: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lags: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reps: Option<usize>,
}

/// One diagnostics report per fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDiagnostics {
    pub fit: FitResult,
    pub report: DiagnosticsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub series: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub fit: Vec<FitResult>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<ModelDiagnostics>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub forecasts: Vec<ForecastResult>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub backtests: Vec<Backtest>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub mcstudy: Vec<SummaryRow>,
}

impl AnalysisReport {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            series: Vec::new(),
            fit: Vec::new(),
            diagnostics: Vec::new(),
            forecasts: Vec::new(),
            backtests: Vec::new(),
            mcstudy: Vec::new(),
        }
    }

    /// Rejects reports carrying non-finite numbers, which JSON cannot hold.
    pub fn validate(&self) -> Result<()> {
        let value = serde_json::to_value(self)?;
        match find_null(&value, String::new()) {
            Some(path) => Err(CliError::usage(format!(
                "report value at {path} is not a finite number"
            ))),
            None => Ok(()),
        }
    }
}

// Options and empty sections are skipped, so a null can only come from NaN or
// an infinity.
fn find_null(v: &serde_json::Value, path: String) -> Option<String> {
    use serde_json::Value;
    match v {
        Value::Null => Some(if path.is_empty() { "/".into() } else { path }),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, x)| find_null(x, format!("{path}/{i}"))),
        Value::Object(map) => map
            .iter()
            .find_map(|(k, x)| find_null(x, format!("{path}/{k}"))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sections_are_omitted() {
        let r = AnalysisReport::new("fit", RunConfig::default());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"schema_version":1,"command":"fit","config":{}}"#);
        assert!(r.validate().is_ok());
    }

    #[test]
    fn non_finite_values_are_caught() {
        let mut r = AnalysisReport::new("fit", RunConfig::default());
        r.config.mu = Some(f64::NAN);
        assert!(r.validate().unwrap_err().to_string().contains("/config/mu"));
    }
}
