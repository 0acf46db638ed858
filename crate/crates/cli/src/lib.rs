//! Library half of the scenario CLI: configuration schema, scenario runner
//! and deterministic output emission. The binary in `main.rs` is a thin
//! wrapper so that integration and acceptance tests can drive the exact
//! same code paths in-process.

pub mod config;
pub mod output;
pub mod presets;
pub mod scenario;

use std::path::Path;

use config::{ConfigError, ScenarioConfig};
use scenario::{run_scenario, ScenarioError, ScenarioOutput};

/// Resolve `<config>` as a file path first, then as an embedded preset name.
pub fn load_config_text(spec: &str) -> Result<String, ConfigError> {
    let path = Path::new(spec);
    if path.exists() {
        return std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{spec}: {e}")));
    }
    if let Some(p) = presets::find(spec) {
        return Ok(p.text.to_string());
    }
    Err(ConfigError::Io(format!("`{spec}` is neither a file nor a known preset")))
}

/// Parse, apply overrides and run; the convenience entry used by the binary
/// and by the acceptance suite.
pub fn load_and_run(
    spec: &str,
    overrides: &[String],
) -> Result<(ScenarioConfig, String, ScenarioOutput), ScenarioError> {
    let text = load_config_text(spec)?;
    let (cfg, resolved) = ScenarioConfig::parse_with_overrides(&text, overrides)?;
    let out = run_scenario(&cfg)?;
    Ok((cfg, resolved, out))
}
