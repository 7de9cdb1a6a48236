//! Loading structured-text configuration documents (JSON or TOML).

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::explain::ExplanationTemplateSet;
use crate::intent::RuleSet;
use crate::loe::{TableDocument, TransitionRecord};
use crate::sim::{BuiltinScenario, ScenarioConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Parses `text` as JSON when it looks like JSON, otherwise as TOML.
pub fn parse_document<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, ConfigError> {
    let is_json = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => true,
        Some("toml") => false,
        _ => text.trim_start().starts_with(['{', '[']),
    };
    let parsed = if is_json {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| ConfigError::Parse {
        path: path.to_owned(),
        message,
    })
}

pub fn load_document<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_document(&text, path)
}

pub fn load_table(path: &Path) -> Result<Vec<TransitionRecord>, ConfigError> {
    load_document::<TableDocument>(path).map(|d| d.transitions)
}

pub fn load_templates(path: &Path) -> Result<ExplanationTemplateSet, ConfigError> {
    load_document(path)
}

pub fn load_rules(path: &Path) -> Result<RuleSet, ConfigError> {
    load_document(path)
}

/// A built-in scenario name, or a path to a scenario document.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioConfig, ConfigError> {
    match BuiltinScenario::from_name(name_or_path) {
        Some(b) => Ok(ScenarioConfig::builtin(b)),
        None => load_document(Path::new(name_or_path)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_by_extension_or_sniffing() {
        let toml_rules = "what = [\"what\"]\nwhy = [\"why\"]\n";
        let r: RuleSet = parse_document(toml_rules, Path::new("rules.toml")).unwrap();
        assert_eq!(r.what.len(), 1);
        let r: RuleSet = parse_document(r#"{"what":["what"],"why":["why"]}"#, Path::new("rules")).unwrap();
        assert!(r.continue_.is_empty());
        let err = parse_document::<RuleSet>("what = 3", Path::new("x.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn table_document_in_toml() {
        let doc = r#"
[[transitions]]
variant = "AD1"
from = "Low"
intent = "What"
to = "Medium1"
"#;
        let d: TableDocument = parse_document(doc, Path::new("t.toml")).unwrap();
        assert_eq!(d.transitions.len(), 1);
    }

    #[test]
    fn scenario_names() {
        assert_eq!(
            resolve_scenario("clean").unwrap(),
            ScenarioConfig::builtin(BuiltinScenario::Clean)
        );
        assert!(matches!(
            resolve_scenario("/no/such/file.json"),
            Err(ConfigError::Io { .. })
        ));
    }
}
