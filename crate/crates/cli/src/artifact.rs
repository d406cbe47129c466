//! Output files: provenance header and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = concat!("ils ", env!("CARGO_PKG_VERSION"));

/// Running hash over everything an invocation reads.
#[derive(Default)]
pub struct InputHash(Sha256);

impl InputHash {
    /// Adds a labelled, length-prefixed chunk.
    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        for chunk in [label.as_bytes(), bytes] {
            self.0.update((chunk.len() as u64).to_le_bytes());
            self.0.update(chunk);
        }
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

/// The line every artifact starts with (as a comment in its own syntax).
pub fn header(input_sha256: &str) -> String {
    format!("{TOOL} input-sha256={input_sha256}")
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|source| ils_core::Error::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes `name` through a temporary file in the same directory and a
    /// rename, so readers never observe a partial file.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        let io = |source| ils_core::Error::Io { path: path.clone(), source };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(io)?;
        tmp.write_all(contents).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Prefixes `body` with the header as a `#` comment line.
pub fn with_hash_comment(header: &str, body: &str) -> String {
    format!("# {header}\n{body}")
}
