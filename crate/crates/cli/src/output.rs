//! Deterministic artifact emission: CSVs with a fixed numeric format and a
//! JSON run manifest. All contents are rendered in memory first and written
//! through a rename, so a failing run never leaves partial files behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::AppError;

/// 12 significant digits, scientific notation; the common serialization for
/// every numeric CSV field.
pub fn sig(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        // distribution endpoints can be unbounded
        format!("{v}")
    }
}

/// A CSV table accumulated in memory.
pub struct Csv {
    name: String,
    buf: String,
}

impl Csv {
    pub fn new(name: &str, header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Self {
            name: name.to_string(),
            buf,
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_path: String,
    seed: u64,
    output_dir: String,
    timestamp: String,
}

/// Collects all artifacts of one command and flushes them together.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add_csv(&mut self, csv: Csv) {
        self.files.push((csv.name, csv.buf));
    }

    pub fn add_text(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    /// Writes the manifest and every artifact; nothing touches the
    /// filesystem before this point.
    pub fn flush(mut self, command: &str, config_path: &Path, seed: u64) -> Result<(), AppError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            seed,
            output_dir: self.dir.display().to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| AppError::Io(e.to_string()))?;
        self.files.push(("manifest.json".to_string(), json));
        fs::create_dir_all(&self.dir)?;
        for (name, contents) in &self.files {
            let tmp = self.dir.join(format!(".{name}.tmp"));
            fs::write(&tmp, contents)?;
            fs::rename(&tmp, self.dir.join(name))?;
        }
        Ok(())
    }
}
