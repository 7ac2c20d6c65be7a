//! Checkpoint directories.
//!
//! A checkpoint is a directory holding `manifest.json`, one binary matrix
//! file per named array and, optionally, `vocab.tsv`. The manifest records
//! the format version, the SHA-256 digest of the corpus the arrays were
//! trained on, an echo of the configuration, free-form string metadata and,
//! for every file, its SHA-256 digest (plus the shape, for arrays).
//!
//! Loading verifies the version first, then every file's length and digest,
//! so a truncated or edited file is reported as [`CheckpointError::Corrupt`]
//! rather than surfacing as a silently different model. The manifest carries
//! no timestamps or absolute paths: saving the same arrays twice yields
//! byte-identical directories.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gramweave_core::numcore::Matrix;
use gramweave_core::Vocabulary;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::{matrix_from_bytes, matrix_to_bytes, read_vocab, write_vocab};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VOCAB_FILE: &str = "vocab.tsv";

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("corpus digest mismatch: checkpoint was built from {expected}, got {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("unsupported version {found} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion { found: u64 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CheckpointError + '_ {
    move |source| CheckpointError::Io { path: path.to_path_buf(), source }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayEntry {
    pub name: String,
    pub file: String,
    pub rows: u64,
    pub cols: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: String,
    pub corpus_digest: String,
    pub config: serde_json::Value,
    pub meta: BTreeMap<String, String>,
    pub vocab: Option<FileEntry>,
    pub arrays: Vec<ArrayEntry>,
}

/// In-memory checkpoint contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub corpus_digest: String,
    pub config: serde_json::Value,
    pub meta: BTreeMap<String, String>,
    pub vocab: Option<Vocabulary>,
    /// Named arrays, saved and loaded in this order.
    pub arrays: Vec<(String, Matrix)>,
}

impl Checkpoint {
    pub fn new(kind: &str, corpus_digest: &str, config: serde_json::Value) -> Self {
        Self {
            kind: kind.into(),
            corpus_digest: corpus_digest.into(),
            config,
            meta: BTreeMap::new(),
            vocab: None,
            arrays: Vec::new(),
        }
    }

    pub fn array(&self, name: &str) -> Result<&Matrix, CheckpointError> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| CheckpointError::Corrupt(format!("missing array {name:?}")))
    }

    pub fn meta(&self, key: &str) -> Result<&str, CheckpointError> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CheckpointError::Corrupt(format!("missing metadata {key:?}")))
    }

    /// Fail unless the checkpoint was built from exactly these corpus bytes.
    pub fn verify_corpus(&self, corpus: &[u8]) -> Result<(), CheckpointError> {
        let found = sha256_hex(corpus);
        if found == self.corpus_digest {
            Ok(())
        } else {
            Err(CheckpointError::DigestMismatch { expected: self.corpus_digest.clone(), found })
        }
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

/// Write `ckpt` into `dir`, creating it if needed. Existing files with the
/// same names are replaced; the manifest is written last.
pub fn save_checkpoint(dir: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut arrays = Vec::with_capacity(ckpt.arrays.len());
    for (name, m) in &ckpt.arrays {
        if !valid_name(name) || arrays.iter().any(|a: &ArrayEntry| &a.name == name) {
            return Err(CheckpointError::Corrupt(format!("invalid or duplicate array name {name:?}")));
        }
        let bytes = matrix_to_bytes(m);
        let file = format!("{name}.bin");
        let path = dir.join(&file);
        fs::write(&path, &bytes).map_err(io_err(&path))?;
        arrays.push(ArrayEntry {
            name: name.clone(),
            file,
            rows: m.rows() as u64,
            cols: m.cols() as u64,
            sha256: sha256_hex(&bytes),
        });
    }
    let vocab = match &ckpt.vocab {
        Some(v) => {
            let mut bytes = Vec::new();
            write_vocab(&mut bytes, v).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
            let path = dir.join(VOCAB_FILE);
            fs::write(&path, &bytes).map_err(io_err(&path))?;
            Some(FileEntry { file: VOCAB_FILE.into(), sha256: sha256_hex(&bytes) })
        }
        None => None,
    };
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind: ckpt.kind.clone(),
        corpus_digest: ckpt.corpus_digest.clone(),
        config: ckpt.config.clone(),
        meta: ckpt.meta.clone(),
        vocab,
        arrays,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, json).map_err(io_err(&path))
}

fn read_checked(dir: &Path, file: &str, sha256: &str) -> Result<Vec<u8>, CheckpointError> {
    if file.contains(['/', '\\']) || file.starts_with('.') {
        return Err(CheckpointError::Corrupt(format!("file name {file:?} escapes the checkpoint")));
    }
    let path = dir.join(file);
    let bytes = fs::read(&path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CheckpointError::Corrupt(format!("{file} is missing")),
        _ => CheckpointError::Io { path: path.clone(), source: e },
    })?;
    if sha256_hex(&bytes) != sha256 {
        return Err(CheckpointError::Corrupt(format!("{file} does not match its recorded digest")));
    }
    Ok(bytes)
}

/// Read only the manifest, checking the format version.
pub fn read_manifest(dir: &Path) -> Result<Manifest, CheckpointError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CheckpointError::Corrupt(format!("manifest: {e}")))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(found) => return Err(CheckpointError::UnsupportedVersion { found }),
        None => return Err(CheckpointError::Corrupt("manifest has no format_version".into())),
    }
    serde_json::from_value(value).map_err(|e| CheckpointError::Corrupt(format!("manifest: {e}")))
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint, CheckpointError> {
    let manifest = read_manifest(dir)?;
    let mut arrays = Vec::with_capacity(manifest.arrays.len());
    for entry in &manifest.arrays {
        let bytes = read_checked(dir, &entry.file, &entry.sha256)?;
        let m = matrix_from_bytes(&bytes).map_err(|msg| CheckpointError::Corrupt(format!("{}: {msg}", entry.file)))?;
        if (m.rows() as u64, m.cols() as u64) != (entry.rows, entry.cols) {
            return Err(CheckpointError::Corrupt(format!("{}: shape disagrees with the manifest", entry.file)));
        }
        arrays.push((entry.name.clone(), m));
    }
    let vocab = match &manifest.vocab {
        Some(entry) => {
            let bytes = read_checked(dir, &entry.file, &entry.sha256)?;
            Some(read_vocab(bytes.as_slice()).map_err(|e| CheckpointError::Corrupt(e.to_string()))?)
        }
        None => None,
    };
    Ok(Checkpoint {
        kind: manifest.kind,
        corpus_digest: manifest.corpus_digest,
        config: manifest.config,
        meta: manifest.meta,
        vocab,
        arrays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn array_names_are_restricted() {
        assert!(valid_name("w_f"));
        assert!(valid_name("ce-n3"));
        assert!(!valid_name("../x"));
        assert!(!valid_name("W"));
        assert!(!valid_name(""));
    }
}
