use std::fmt;
use std::path::PathBuf;

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an unusable run record: exit 2.
    Config(String),
    /// The computation ran but produced nothing usable: exit 3.
    Numerical(String),
    Io { path: PathBuf, source: std::io::Error },
    /// A rerun finished but its result differs from the record.
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Mismatch(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Mismatch(m) => write!(f, "rerun mismatch: {m}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<deeppoly::Error> for CliError {
    fn from(e: deeppoly::Error) -> Self {
        use deeppoly::Error as E;
        match e {
            E::NonFiniteIntegrand { .. } | E::RankDeficient { .. } | E::AtKnownRoot { .. } | E::InverseMapFailure(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("JSON: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
