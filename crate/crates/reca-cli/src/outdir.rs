//! Output directory handling. Every artifact a command produces goes
//! through [`OutDir`], which only accepts bare file names, so nothing can
//! escape the directory the user pointed at.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use reca_core::{Error, Result};
use serde::Serialize;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    fn file(&self, name: &str) -> Result<PathBuf> {
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(Error::Config(format!("bad output file name {name:?}")));
        }
        Ok(self.root.join(name))
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.file(name)?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut body = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Data(format!("cannot encode {name}: {e}")))?;
        body.push('\n');
        self.write_text(name, &body)
    }
}

/// Run provenance. The creation timestamp lives here and only here;
/// result files stay byte-identical across reruns of the same config.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub created: String,
    pub build: BuildInfo,
    pub details: serde_json::Value,
}

#[derive(Serialize)]
pub struct BuildInfo {
    pub package: &'static str,
    pub version: &'static str,
}

/// Writes `manifest.json`. Commands call this before computing results so
/// an aborted run still records what was attempted.
pub fn write_manifest(out: &OutDir, command: &str, details: serde_json::Value) -> Result<()> {
    let manifest = Manifest {
        command: command.to_string(),
        created: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
        build: BuildInfo {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        details,
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(())
}

/// Minimal CSV assembly: a pinned header plus rows of already-formatted
/// cells. Numbers go through `Display`, which round-trips floats exactly.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let columns = header.split(',').count();
        Csv { text: format!("{header}\n"), columns }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_text(self) -> String {
        self.text
    }
}

/// Shortest exact decimal form of a float, empty for None.
pub fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
