//! Where results go: files under `--out`, or stdout.

use std::io::Write;
use std::path::PathBuf;

use halfspace::Path;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::CliError;

pub struct Block {
    pub label: String,
    pub ext: &'static str,
    pub body: Vec<u8>,
}

impl Block {
    pub fn new(label: impl Into<String>, ext: &'static str, body: Vec<u8>) -> Self {
        Self {
            label: label.into(),
            ext,
            body,
        }
    }

    pub fn json(label: impl Into<String>, value: &Value) -> Self {
        let mut body = serde_json::to_vec_pretty(value).expect("json value");
        body.push(b'\n');
        Self::new(label, "json", body)
    }

    pub fn csv_path(label: impl Into<String>, path: &Path) -> Self {
        let mut body = Vec::new();
        path.write_csv(&mut body).expect("write to memory");
        Self::new(label, "csv", body)
    }
}

/// Write `blocks` as `<out>/<name>_<seed>_<label>.<ext>`, or to stdout with
/// a `# label` line before each block when there are several.
pub fn emit(settings: &Settings, name: &str, blocks: &[Block]) -> Result<Vec<PathBuf>, CliError> {
    match &settings.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let mut written = Vec::new();
            for b in blocks {
                let file = dir.join(format!("{name}_{}_{}.{}", settings.seed, b.label, b.ext));
                std::fs::write(&file, &b.body).map_err(|e| CliError::io(&file, e))?;
                written.push(file);
            }
            Ok(written)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            for b in blocks {
                if blocks.len() > 1 {
                    writeln!(w, "# {}", b.label).map_err(|e| CliError::io("stdout", e))?;
                }
                w.write_all(&b.body).map_err(|e| CliError::io("stdout", e))?;
            }
            Ok(Vec::new())
        }
    }
}

pub fn path_json(path: &Path) -> Value {
    json!({
        "step": path.step(),
        "dim": path.dim(),
        "kill_index": path.kill_index(),
        "points": path.live_points().map(<[f64]>::to_vec).collect::<Vec<_>>(),
    })
}

/// Inverse of [`path_json`]; also accepts the `{"config", "path"}` wrapper
/// written by `simulate`.
pub fn path_from_json(v: &Value) -> Result<Path, CliError> {
    let v = if v["path"].is_object() { &v["path"] } else { v };
    let step = v["step"].as_f64().ok_or_else(|| CliError::invalid("path.step", "expected a number"))?;
    let points: Vec<Vec<f64>> =
        serde_json::from_value(v["points"].clone()).map_err(|e| CliError::invalid("path.points", e))?;
    let kill_index = v["kill_index"].as_u64().map(|k| k as usize);
    Ok(Path::from_points(step, &points, kill_index)?)
}
