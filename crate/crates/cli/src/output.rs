use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::manifest::ExperimentManifest;
use crate::{CliError, VERSION};

/// What a run produces: a JSON report, optionally a CSV table, and an error that should set
/// the exit code after the report has been written (as `validate` does for invalid spaces).
#[derive(Debug)]
pub struct Artifact {
    pub json: String,
    pub csv: Option<String>,
    pub failure: Option<CliError>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: crate::CommandKind,
    version: &'static str,
    seed: u64,
    manifest: &'a ExperimentManifest,
    result: T,
}

impl Artifact {
    pub(crate) fn report<T: Serialize>(manifest: &ExperimentManifest, result: T) -> Result<Self, CliError> {
        let envelope = Envelope { command: manifest.command, version: VERSION, seed: manifest.seed, manifest, result };
        let mut json = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Internal(e.to_string()))?;
        json.push('\n');
        Ok(Artifact { json, csv: None, failure: None })
    }

    pub(crate) fn with_table(mut self, header: &[&str], rows: Vec<Vec<String>>, seed: u64) -> Self {
        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push_str(",seed,version\n");
        for row in rows {
            out.push_str(&row.join(","));
            out.push_str(&format!(",{seed},{VERSION}\n"));
        }
        self.csv = Some(out);
        self
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// JSON to the manifest's `output.json` or stdout; CSV to `output.csv` when both exist.
pub fn write_artifact(artifact: &Artifact, manifest: &ExperimentManifest) -> Result<(), CliError> {
    let paths = manifest.output.clone().unwrap_or_default();
    match &paths.json {
        Some(p) => write_file(p, &artifact.json)?,
        None => std::io::stdout().lock().write_all(artifact.json.as_bytes())?,
    }
    if let (Some(p), Some(csv)) = (&paths.csv, &artifact.csv) {
        write_file(p, csv)?;
    }
    Ok(())
}
