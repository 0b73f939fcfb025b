//! Output plumbing. Every file is staged next to its destination and renamed
//! into place only after all outputs of a command have been computed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{EXIT_INVALID, EXIT_IO, EXIT_NOT_CONVERGED};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub fn not_converged(message: impl Into<String>) -> Self {
        Self { code: EXIT_NOT_CONVERGED, message: message.into() }
    }
}

impl From<spincat::Error> for CliError {
    fn from(e: spincat::Error) -> Self {
        use spincat::Error as E;
        match e {
            E::Io(_) | E::Json(_) | E::Csv(_) => Self::io(e.to_string()),
            _ => Self::invalid(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Destination for one rendered output; `None` means stdout.
pub struct Output {
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Rejects output paths whose parent directory does not exist, before any
/// computation starts.
pub fn check_writable(path: &Option<PathBuf>) -> CliResult<()> {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(CliError::invalid(format!("output directory {} does not exist", parent.display())));
        }
        if p.is_dir() {
            return Err(CliError::invalid(format!("output path {} is a directory", p.display())));
        }
    }
    Ok(())
}

fn staging_path(p: &Path) -> PathBuf {
    let mut name = p.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".{}.partial", std::process::id()));
    p.with_file_name(name)
}

/// Writes all outputs or none. Files are staged first so a failure leaves
/// no destination touched.
pub fn commit(outputs: Vec<Output>) -> CliResult<()> {
    let mut staged = Vec::new();
    for out in &outputs {
        if let Some(p) = &out.path {
            let tmp = staging_path(p);
            if let Err(e) = fs::write(&tmp, &out.contents) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(CliError::io(format!("writing {}: {e}", p.display())));
            }
            staged.push((tmp, p.clone()));
        }
    }
    for (tmp, p) in &staged {
        fs::rename(tmp, p).map_err(|e| CliError::io(format!("renaming into {}: {e}", p.display())))?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for out in outputs.iter().filter(|o| o.path.is_none()) {
        lock.write_all(out.contents.as_bytes()).map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(())
}
