//! Run bookkeeping: input hashing, output collection, manifests and
//! parameter overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "pcfpairs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: pcfpairs::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Lib(#[from] pcfpairs::Error),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn input(path: &Path, source: impl Into<pcfpairs::Error>) -> Self {
        CliError::Input { path: path.to_path_buf(), source: source.into() }
    }

    pub fn exit_code(&self) -> u8 {
        use pcfpairs::Error as E;
        let lib = match self {
            CliError::Usage(_) | CliError::Read { .. } => return 2,
            CliError::Write { .. } | CliError::Mismatch(_) => return 1,
            CliError::Input { source, .. } | CliError::Lib(source) => source,
        };
        match lib {
            E::Domain { .. } | E::Validation(_) | E::Parse { .. } | E::Io(_) | E::Json(_) | E::Csv(_) => 2,
            E::Numeric { .. } | E::Fit(_) | E::Design { .. } | E::EmptySpectrum(_) | E::NoCounts => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Reads input files and remembers their hashes.
#[derive(Default)]
pub struct Inputs {
    pub records: Vec<FileRecord>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        let rec = FileRecord { path: path.display().to_string(), sha256: sha256_hex(&bytes) };
        if !self.records.contains(&rec) {
            self.records.push(rec);
        }
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> CliResult<String> {
        String::from_utf8(self.read(path)?).map_err(|_| CliError::input(path, pcfpairs::Error::Validation("file is not UTF-8 text".into())))
    }
}

/// Output files of a run, written into one directory.
pub struct Outputs {
    pub dir: PathBuf,
    pub records: Vec<FileRecord>,
}

impl Outputs {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        Ok(Outputs { dir: dir.to_path_buf(), records: Vec::new() })
    }

    pub fn put(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Write { path, source })?;
        self.records.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Renders with `f` into memory, then writes.
    pub fn put_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> pcfpairs::Result<()>) -> CliResult<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.put(name, &buf)
    }

    pub fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(pcfpairs::Error::from)?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

/// Everything needed to repeat a run. Contains no timestamps, so repeated
/// runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub params: Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

/// Applies `key.sub=value` overrides. The key must already exist in the
/// resolved parameters; the value is parsed as JSON, falling back to a plain
/// string.
pub fn apply_overrides(params: &mut Value, overrides: &[String]) -> CliResult<()> {
    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{item}'")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = &mut *params;
        for part in key.split('.') {
            node = match node {
                Value::Object(map) => map.get_mut(part),
                Value::Array(items) => part.parse::<usize>().ok().and_then(|k| items.get_mut(k)),
                _ => None,
            }
            .ok_or_else(|| CliError::Usage(format!("unknown parameter '{key}'")))?;
        }
        *node = value;
    }
    Ok(())
}
