//! Output directory with atomic writes and a digest manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    params: &'a serde_json::Value,
    command_line: Vec<String>,
    inputs: &'a [FileDigest],
    outputs: &'a [FileDigest],
    version: &'static str,
    rng: &'static str,
    wall_time_s: f64,
}

pub struct OutDir {
    dir: PathBuf,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    started: Instant,
}

fn digest(path: String, bytes: &[u8]) -> FileDigest {
    FileDigest { path, bytes: bytes.len(), sha256: hex::encode(Sha256::digest(bytes)) }
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
        Ok(OutDir { dir: dir.to_path_buf(), inputs: Vec::new(), outputs: Vec::new(), started: Instant::now() })
    }

    /// Reads an input file, recording its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(digest(path.display().to_string(), &bytes));
        Ok(bytes)
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| CliError::output(&target, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::output(&target, e))?;
        tmp.persist(&target).map_err(|e| CliError::output(&target, e.error))?;
        Ok(())
    }

    /// Renders `name` through `render` and writes it in one rename.
    pub fn write<F>(&mut self, name: &str, render: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::output(&self.dir.join(name), e))?;
        self.write_bytes(name, &buf)?;
        self.outputs.push(digest(name.to_string(), &buf));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value).map_err(std::io::Error::other)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    pub fn finish(self, subcommand: &str, params: &serde_json::Value) -> Result<(), CliError> {
        let manifest = Manifest {
            subcommand,
            params,
            command_line: std::env::args().collect(),
            inputs: &self.inputs,
            outputs: &self.outputs,
            version: env!("CARGO_PKG_VERSION"),
            rng: paradox_core::sampler::RNG_ID,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let mut buf = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        buf.push(b'\n');
        self.write_bytes("manifest.json", &buf)
    }
}
