//! End-to-end Monte Carlo experiments.
//!
//! Each experiment is a deterministic function of its parameters and an
//! [`RngStream`]: replication `i` draws from `rng.substream(purpose, i)`, so
//! reports do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rand::Rng;

use crate::construct::{conditioned_down, conditioned_up};
use crate::error::Result;
use crate::path::{Direction, GridPath};
use crate::rng::RngStream;
use crate::sim::{grid_steps, PathSampler};
use crate::stats::{DensityGrid, TestResult};
use crate::Path;

mod enumeration;
mod initial_jump;
mod max_norm;
mod sparre;
mod zoom;

pub use enumeration::{check_representation_enumeration, default_increments_1d, default_increments_2d, EnumerationInput};
pub use initial_jump::{experiment_initial_jump_law, renewal_exponent, InitialJumpConfig};
pub use max_norm::{experiment_max_norm, MaxNormConfig};
pub use sparre::{check_sparre_andersen, discrete_arcsine};
pub use zoom::{experiment_zoom_infimum, Reference, ZoomConfig};

/// How per-replication streams are derived from the master stream.
pub const SEED_SCHEME: &str = "chacha8; replication i of purpose p uses substream(p, i) of (seed, stream_id)";

/// Result of one experiment run.
///
/// Sample clouds and density grids are kept out of the JSON form and written
/// as CSV files by [`ExperimentReport::write_files`]. The wall time is not
/// serialized either, so rerunning with the same seed yields identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Value,
    pub master_seed: u64,
    pub stream_id: u64,
    pub seed_scheme: String,
    pub total: usize,
    pub retained: usize,
    pub summaries: BTreeMap<String, Value>,
    pub tests: BTreeMap<String, TestResult>,
    /// Outcome of a hard check, when the experiment has one.
    pub verdict: Option<bool>,
    #[serde(skip)]
    pub clouds: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(skip)]
    pub grids: BTreeMap<String, DensityGrid>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn new(name: &str, parameters: impl Serialize, rng: &RngStream) -> Self {
        Self {
            name: name.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            master_seed: rng.seed,
            stream_id: rng.stream_id,
            seed_scheme: SEED_SCHEME.to_string(),
            total: 0,
            retained: 0,
            summaries: BTreeMap::new(),
            tests: BTreeMap::new(),
            verdict: None,
            clouds: BTreeMap::new(),
            grids: BTreeMap::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) {
        self.summaries
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    /// A numeric summary, if present.
    pub fn number(&self, key: &str) -> Option<f64> {
        self.summaries.get(key).and_then(Value::as_f64)
    }

    /// A vector-valued numeric summary, if present.
    pub fn numbers(&self, key: &str) -> Option<Vec<f64>> {
        self.summaries
            .get(key)?
            .as_array()?
            .iter()
            .map(Value::as_f64)
            .collect()
    }

    pub fn retained_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.retained as f64 / self.total as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    fn file_stem(&self, label: &str) -> String {
        format!("{}_{}_{}", self.name, self.master_seed, label)
    }

    /// Write the JSON report and every cloud and grid as CSV into `dir`.
    ///
    /// Files are named `<experiment>_<seed>_<label>.csv`; the report itself
    /// uses the label `report`. Returns the written paths.
    pub fn write_files(&self, dir: &FsPath) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let report = dir.join(format!("{}.json", self.file_stem("report")));
        std::fs::write(&report, self.to_json() + "\n")?;
        written.push(report);
        for (label, cloud) in &self.clouds {
            let p = dir.join(format!("{}.csv", self.file_stem(label)));
            let mut w = BufWriter::new(File::create(&p)?);
            write_cloud_csv(cloud, &mut w)?;
            w.flush()?;
            written.push(p);
        }
        for (label, grid) in &self.grids {
            let p = dir.join(format!("{}.csv", self.file_stem(label)));
            let mut w = BufWriter::new(File::create(&p)?);
            grid.write_csv(&mut w)?;
            w.flush()?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Rows `x1,...,xd`, one sample per line.
pub fn write_cloud_csv<W: Write>(cloud: &[Vec<f64>], mut w: W) -> std::io::Result<()> {
    let d = cloud.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in cloud {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Coordinatewise mean of a cloud.
pub fn cloud_mean(cloud: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = cloud.first() else {
        return Vec::new();
    };
    let mut m = vec![0.0; first.len()];
    for p in cloud {
        for (a, b) in m.iter_mut().zip(p) {
            *a += b;
        }
    }
    m.iter().map(|s| s / cloud.len() as f64).collect()
}

/// One side of the discrete conditioned pair, at least `min_steps` long.
///
/// Simulates `[0, horizon]` and builds `X↑` (`positive_side`) or `X↓`. While
/// that side is shorter than `min_steps`, the path is continued from its end
/// in chunks of doubling length and the new increments are routed onto the
/// side. By horizon-growth consistency the result is a prefix of the
/// infinite-horizon construction. Continuation stops once the path has
/// `max_steps` steps in total, so the returned side can still be short.
/// Returns the side and the number of chunks added.
#[allow(clippy::too_many_arguments)]
pub fn construct_side<R: Rng + ?Sized>(
    sampler: &PathSampler<f64>,
    eta: &Direction<f64>,
    positive_side: bool,
    horizon: f64,
    step: f64,
    min_steps: usize,
    max_steps: usize,
    rng: &mut R,
) -> Result<(Path, usize)> {
    let build = |p: &Path| if positive_side { conditioned_up(p, eta) } else { conditioned_down(p, eta) };
    let mut path = sampler.sample_with(horizon, step, rng)?;
    let mut side = build(&path)?;
    if path.kill_index().is_some() {
        return Ok((side, 0));
    }
    let d = path.dim();
    let mut data = side.live_data().to_vec();
    let mut chunk = grid_steps(horizon, step).max(1);
    let mut chunks = 0;
    let mut total = path.last_index();
    while data.len() / d - 1 < min_steps && total < max_steps {
        chunk = chunk.min(max_steps - total);
        let start = path.end().to_vec();
        path = sampler.sample_from(&start, chunk as f64 * step, step, rng)?;
        let more = build(&path)?;
        let offset = data[data.len() - d..].to_vec();
        for p in more.live_points().skip(1) {
            data.extend(p.iter().zip(&offset).map(|(x, o)| x + o));
        }
        chunks += 1;
        total += chunk;
        chunk = (chunk * 2).min(1 << 20);
    }
    if chunks > 0 {
        side = GridPath::new(step, d, data, None)?;
    }
    Ok((side, chunks))
}

/// Run `f(i)` for `i in 0..n` in parallel, collecting in index order.
pub(crate) fn replicate<U: Send, F: Fn(usize) -> U + Sync + Send>(n: usize, f: F) -> Vec<U> {
    (0..n).into_par_iter().map(f).collect()
}

pub(crate) mod purpose {
    pub const PATHS: u64 = 1;
    pub const REFERENCE_UP: u64 = 2;
    pub const REFERENCE_DOWN: u64 = 3;
    pub const PERMUTATION_UP: u64 = 4;
    pub const PERMUTATION_DOWN: u64 = 5;
    pub const STEPS: u64 = 6;
    pub const REFERENCE: u64 = 7;
    pub const PERMUTATION: u64 = 8;
}
