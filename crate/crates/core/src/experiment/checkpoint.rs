//! Resumable run state: a JSON manifest plus binary sample dumps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{write_binary, BooleanSample};

pub const MANIFEST_VERSION: u32 = 1;

/// Running sums for one anchor of one (λ, law) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorTally {
    /// Per r: reports with `M > r` or censored.
    pub upper: Vec<u64>,
    /// Per r: uncensored reports with `M > r`.
    pub lower: Vec<u64>,
    pub censored: u64,
    /// Sums of `min(M, window)^β` and its square.
    pub beta_sum: f64,
    pub beta_sq: f64,
}

impl AnchorTally {
    pub fn new(grid_len: usize) -> Self {
        AnchorTally {
            upper: vec![0; grid_len],
            lower: vec![0; grid_len],
            censored: 0,
            beta_sum: 0.0,
            beta_sq: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTally {
    /// Replications folded in so far, always a prefix `0..done`.
    pub done: u64,
    pub anchors: Vec<AnchorTally>,
    /// Replications where one ball covers the cover-test ball.
    pub cover_hits: u64,
}

impl CellTally {
    pub fn new(anchors: usize, grid_len: usize) -> Self {
        CellTally {
            done: 0,
            anchors: vec![AnchorTally::new(grid_len); anchors],
            cover_hits: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    /// Canonical JSON of the result-relevant configuration.
    pub fingerprint: String,
    pub cells: Vec<CellTally>,
    /// Sample dumps written so far, relative to the checkpoint directory.
    pub dumps: Vec<String>,
}

impl Manifest {
    pub fn dir(out: &Path) -> PathBuf {
        out.join("checkpoint")
    }

    fn path(out: &Path) -> PathBuf {
        Self::dir(out).join("manifest.json")
    }

    /// The stored manifest, if any. A manifest written for another
    /// configuration is a configuration error.
    pub fn load(out: &Path, fingerprint: &str) -> Result<Option<Manifest>> {
        let path = Self::path(out);
        if !path.exists() {
            return Ok(None);
        }
        let m: Manifest = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "unsupported manifest version {}",
                m.version
            )));
        }
        if m.fingerprint != fingerprint {
            return Err(Error::Config(format!(
                "{} was written for a different configuration; remove it or choose another --out",
                path.display()
            )));
        }
        Ok(Some(m))
    }

    /// Writes via a temporary file so an interrupted save leaves the previous
    /// manifest intact.
    pub fn save(&self, out: &Path) -> Result<()> {
        let dir = Self::dir(out);
        fs::create_dir_all(&dir)?;
        let tmp = dir.join("manifest.json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(tmp, Self::path(out))?;
        Ok(())
    }

    pub fn dump(&mut self, out: &Path, cell: usize, sample: &BooleanSample) -> Result<()> {
        let dir = Self::dir(out);
        fs::create_dir_all(&dir)?;
        let name = format!("cell{cell}_rep{}.pbm", sample.stream);
        let mut w = std::io::BufWriter::new(fs::File::create(dir.join(&name))?);
        write_binary(sample, &mut w)?;
        w.flush()?;
        if !self.dumps.contains(&name) {
            self.dumps.push(name);
        }
        Ok(())
    }
}
