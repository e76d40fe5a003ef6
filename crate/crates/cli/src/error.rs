use std::path::{Path, PathBuf};

use leggett_core::settings::Violation;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameters.
    Invalid(String),
    /// A measurement configuration that failed validation.
    Config(Vec<Violation>),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// The verification suite ran and a check failed.
    VerificationFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::VerificationFailed(_) => 1,
            Self::Invalid(_) | Self::Config(_) => 2,
            Self::Io { .. } => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn report(&self) -> String {
        match self {
            Self::Invalid(m) => format!("error: {m}"),
            Self::Config(v) => {
                let mut s = String::from("error: invalid measurement configuration");
                for x in v {
                    s.push_str(&format!("\n  - {x}"));
                }
                s
            }
            Self::Io { path, source } => format!("error: {}: {source}", path.display()),
            Self::VerificationFailed(names) => format!("verification failed: {}", names.join(", ")),
        }
    }
}

impl From<leggett_core::Error> for CliError {
    fn from(e: leggett_core::Error) -> Self {
        match e {
            leggett_core::Error::InvalidConfig(v) => Self::Config(v),
            other => Self::Invalid(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
