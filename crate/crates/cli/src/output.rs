use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use causal_diffusion::field::write_field_csv;
use causal_diffusion::GridField;
use serde::{Deserialize, Serialize};

use crate::Command;

/// Raised after outputs are written when a checked quantity is out of
/// tolerance.
#[derive(Debug)]
pub struct ToleranceFailure(pub String);

impl std::fmt::Display for ToleranceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tolerance violated: {}", self.0)
    }
}

impl std::error::Error for ToleranceFailure {}

pub enum Artifact {
    Text(String),
    Field(GridField),
}

pub struct Output {
    pub summary: serde_json::Value,
    pub files: Vec<(String, Artifact)>,
    pub failure: Option<String>,
}

impl Output {
    pub fn new(summary: impl Serialize) -> Result<Self> {
        Ok(Output {
            summary: serde_json::to_value(summary)?,
            files: Vec::new(),
            failure: None,
        })
    }

    pub fn text(mut self, name: &str, body: String) -> Self {
        self.files.push((name.to_string(), Artifact::Text(body)));
        self
    }

    pub fn field(mut self, name: &str, f: GridField) -> Self {
        self.files.push((name.to_string(), Artifact::Field(f)));
        self
    }

    pub fn verdict(&self) -> Result<()> {
        match &self.failure {
            Some(msg) => Err(ToleranceFailure(msg.clone()).into()),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: Command,
}

impl Manifest {
    pub fn new(config: Command) -> Self {
        Manifest {
            tool: "causal-diff".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| causal_diffusion::Error::InvalidConfig(format!("{}: {e}", path.display())).into())
    }
}

pub fn write_all(dir: &Path, manifest: &Manifest, out: &Output) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)? + "\n")?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&out.summary)? + "\n")?;
    for (name, artifact) in &out.files {
        let path = dir.join(name);
        match artifact {
            Artifact::Text(body) => fs::write(&path, body)?,
            Artifact::Field(f) => write_field_csv(f, &path)?,
        }
    }
    Ok(())
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv<const K: usize>(header: [&str; K], rows: impl IntoIterator<Item = [f64; K]>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}
