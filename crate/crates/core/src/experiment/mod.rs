//! Config-driven experiment runners behind the command-line tool.

pub mod bounds;
pub mod checkpoint;
pub mod config;
pub mod estimate;
pub mod svg;
pub mod sweep;
pub mod verify;

pub use config::ExperimentConfig;
pub use estimate::{run_estimate, EstimateOutcome, EstimateRow, EstimateTable};
pub use sweep::{run_sweep, SweepOutcome, SweepRow};
pub use verify::{run_verify, VerifyReport};

use std::path::PathBuf;

use crate::error::{Error, Result};

/// Execution settings that do not change results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Directory for checkpoints and output files.
    pub out: Option<PathBuf>,
}

impl RunOptions {
    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(Error::Config("--threads must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
    }
}

/// Binomial standard error of a frequency `p` over `n` trials.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).max(0.0).sqrt()
    }
}

/// Serializes rows with a header line; column order follows field order.
pub(crate) fn rows_to_csv<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
