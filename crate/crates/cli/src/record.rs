//! The JSON run record written next to every command's CSV output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// `<crate version>+<git revision>`; the revision is `unknown` outside a
/// checkout.
pub fn tool_version() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), env!("DEEPPOLY_GIT_REVISION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    /// RFC 3339, UTC, whole seconds.
    pub timestamp: String,
    pub subcommand: String,
    /// Everything needed to rerun, seeds included.
    pub config: Value,
    pub result: Value,
    pub tool_version: String,
}

impl RunRecord {
    pub fn new<C: Serialize, R: Serialize>(subcommand: &str, config: &C, result: &R) -> CliResult<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
            tool_version: tool_version(),
        })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let record: RunRecord = serde_json::from_str(&text)?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "record has schema version {}, this build reads {SCHEMA_VERSION}",
                record.schema_version
            )));
        }
        Ok(record)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    /// The result payload as compact JSON, for byte comparison.
    pub fn result_bytes(&self) -> String {
        self.result.to_string()
    }
}
