//! Report envelopes and artifact writing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Bumped whenever a report field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    schema_version: u32,
    #[serde(flatten)]
    report: &'a T,
}

/// A file produced by a subcommand. It goes to `path` when one was given,
/// otherwise to `name` inside the output directory, otherwise nowhere.
pub struct Artifact {
    pub name: String,
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

pub struct Output {
    pub command: &'static str,
    pub json: String,
    pub text: String,
    pub artifacts: Vec<Artifact>,
}

impl Output {
    pub fn new<T: Serialize>(command: &'static str, report: &T, text: String) -> Result<Output, CliError> {
        let envelope = Envelope {
            command,
            schema_version: SCHEMA_VERSION,
            report,
        };
        let json = serde_json::to_string_pretty(&envelope)
            .map_err(|e| CliError::Input(format!("cannot serialize report: {e}")))?;
        Ok(Output {
            command,
            json,
            text,
            artifacts: Vec::new(),
        })
    }

    pub fn artifact(mut self, name: &str, path: Option<PathBuf>, bytes: Vec<u8>) -> Self {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            path,
            bytes,
        });
        self
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes artifacts and the report files, then prints the report.
pub fn emit(out: Output, out_dir: Option<&Path>, json: bool) -> Result<(), CliError> {
    let mut text = out.text;
    for a in &out.artifacts {
        let target = match (&a.path, out_dir) {
            (Some(p), _) => p.clone(),
            (None, Some(dir)) => dir.join(&a.name),
            (None, None) => continue,
        };
        write_file(&target, &a.bytes)?;
        let _ = writeln!(text, "wrote {}", target.display());
    }
    if let Some(dir) = out_dir {
        write_file(
            &dir.join(format!("{}.json", out.command)),
            format!("{}\n", out.json).as_bytes(),
        )?;
        write_file(&dir.join(format!("{}.txt", out.command)), text.as_bytes())?;
    }
    if json {
        println!("{}", out.json);
    } else {
        print!("{text}");
    }
    Ok(())
}

/// Bytes produced by a writer-based exporter.
pub fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> mvlang::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}
