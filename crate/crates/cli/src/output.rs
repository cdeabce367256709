use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crnrob_core::parser::ParseDiagnostic;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{origin}: {} parse error(s)", diagnostics.len())]
    Parse { origin: String, diagnostics: Vec<ParseDiagnostic> },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Analysis(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::Analysis(_) => "analysis",
        }
    }

    pub fn report(&self, json: bool) {
        if json {
            let mut obj = json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.code() });
            if let CliError::Parse { diagnostics, .. } = self {
                obj["diagnostics"] = json!(diagnostics);
            }
            eprintln!("{obj}");
            return;
        }
        eprintln!("error: {self}");
        if let CliError::Parse { origin, diagnostics } = self {
            for d in diagnostics {
                eprintln!("  {origin}:{d}");
            }
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let err = |source| CliError::Write { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// Sends the main output to `--out` or standard output.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let mut text = contents.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
