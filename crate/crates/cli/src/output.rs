use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "equitoll";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Accumulates everything that determines a run: the command, resolved
/// options, and the digest of every input file. The output directory is
/// deliberately left out so reruns into different directories agree.
#[derive(Debug, Default)]
pub struct RunConfig {
    command: String,
    options: serde_json::Map<String, Value>,
    inputs: serde_json::Map<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn option(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("options serialize");
        self.options.insert(key.to_string(), v);
    }

    /// Reads an input file, recording its digest.
    pub fn read(&mut self, flag: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading --{flag} {}", path.display()))?;
        self.inputs.insert(flag.to_string(), Value::String(sha256_hex(&bytes)));
        Ok(bytes)
    }

    pub fn read_string(&mut self, flag: &str, path: &Path) -> Result<String> {
        let bytes = self.read(flag, path)?;
        String::from_utf8(bytes).with_context(|| format!("--{flag} {} is not UTF-8", path.display()))
    }

    pub fn canonical(&self) -> String {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "options": self.options,
            "inputs": self.inputs,
        })
        .to_string()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            tool: TOOL,
            version: VERSION,
            command: self.command.clone(),
            config_hash: sha256_hex(self.canonical().as_bytes()),
        }
    }
}

/// Output directory; every file written through it carries the run's
/// provenance.
pub struct OutDir {
    dir: PathBuf,
    prov: Provenance,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path, prov: Provenance) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            prov,
            written: Vec::new(),
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.prov
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    /// Writes a CSV body produced by `fill`, preceded by a `#` stamp line.
    pub fn csv(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = format!(
            "# {} {} command={} config={}\n",
            self.prov.tool, self.prov.version, self.prov.command, self.prov.config_hash
        )
        .into_bytes();
        fill(&mut buf)?;
        let p = self.path(name);
        fs::write(&p, buf).with_context(|| format!("writing {}", p.display()))
    }

    /// Writes `body` as pretty JSON with a `provenance` field added at the
    /// top level.
    pub fn json(&mut self, name: &str, body: &impl Serialize) -> Result<()> {
        let mut v = serde_json::to_value(body)?;
        let prov = serde_json::to_value(&self.prov)?;
        match &mut v {
            Value::Object(map) => {
                map.insert("provenance".into(), prov);
            }
            other => {
                v = json!({ "provenance": prov, "result": other.take() });
            }
        }
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut f = Vec::new();
        writeln!(
            f,
            "{} {} ({}), config {}",
            self.prov.tool, self.prov.version, self.prov.command, self.prov.config_hash
        )?;
        f.extend_from_slice(body.as_bytes());
        let p = self.path(name);
        fs::write(&p, f).with_context(|| format!("writing {}", p.display()))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
