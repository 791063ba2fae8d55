use serde::{Deserialize, Serialize};

use super::{cloud_mean, purpose, replicate, ExperimentReport};
use crate::conditioned::ConditionedBm;
use crate::construct::split_at_directional_infimum;
use crate::error::{Error, Result};
use crate::path::Direction;
use crate::rng::RngStream;
use crate::sim::{grid_steps, Kill, LevySpec, PathSampler};
use crate::stats::energy_permutation_test;

/// Where the comparison samples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Exact draws of the conditioned Brownian motion at time 1.
    #[default]
    Exact,
    /// Independent replications of the same pre-limit construction; the
    /// resulting p-values are null-calibrated by design.
    SelfTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoomConfig {
    pub n: usize,
    pub step: f64,
    pub n_rep: usize,
    #[serde(default = "default_perm")]
    pub n_perm: usize,
    #[serde(default)]
    pub reference: Reference,
}

fn default_perm() -> usize {
    199
}

impl ZoomConfig {
    pub fn new(n: usize, step: f64, n_rep: usize) -> Self {
        Self {
            n,
            step,
            n_rep,
            n_perm: default_perm(),
            reference: Reference::Exact,
        }
    }
}

#[derive(Serialize)]
struct Params<'a> {
    spec: &'a LevySpec,
    eta: &'a Direction<f64>,
    config: &'a ZoomConfig,
}

type Side = Option<Vec<f64>>;

/// `√n →X_{1/n}` and `√n ←X_{1/n}` of one path on `[0, 1]`, or `None` for a
/// side whose lifetime is shorter than `1/n`.
fn zoomed_sides(sampler: &PathSampler<f64>, eta: &Direction<f64>, cfg: &ZoomConfig, k: usize, rng: &RngStream) -> Result<(Side, Side)> {
    let path = sampler.sample_with(1.0, cfg.step, &mut rng.rng())?;
    let pair = split_at_directional_infimum(&path, eta)?;
    let scale = (cfg.n as f64).sqrt();
    let read = |p: &crate::path::GridPath<f64>| -> Side {
        (p.live_steps() >= k).then(|| p.value(k).expect("live index").iter().map(|x| x * scale).collect())
    };
    Ok((read(&pair.post), read(&pair.pre)))
}

/// Zooming in at the directional infimum: compare the rescaled post- and
/// reversed pre-infimum increments over `1/n` with the conditioned Brownian
/// limit at time 1, by energy permutation tests.
pub fn experiment_zoom_infimum(spec: &LevySpec, eta: &Direction<f64>, cfg: &ZoomConfig, rng: &RngStream) -> Result<ExperimentReport> {
    if cfg.n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(cfg.step > 0.0) || cfg.step > 1.0 / (10.0 * cfg.n as f64) * (1.0 + 1e-9) {
        return Err(Error::param("step", format!("need 0 < step <= 1/(10n) = {}", 1.0 / (10.0 * cfg.n as f64))));
    }
    let spec = spec.clone().validated()?.with_kill(Kill::FixedHorizon(1.0));
    if spec.dim() != eta.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: eta.dim() });
    }
    let bm = ConditionedBm::new(&spec.sigma, eta)?;
    let sampler = PathSampler::new(&spec)?;
    let mut report = ExperimentReport::new("zoom", Params { spec: &spec, eta, config: cfg }, rng);
    let k = grid_steps(1.0 / cfg.n as f64, cfg.step);

    let rows = replicate(cfg.n_rep, |i| -> Result<(Side, Side, Side, Side)> {
        let i = i as u64;
        let (post, pre) = zoomed_sides(&sampler, eta, cfg, k, &rng.substream(purpose::PATHS, i))?;
        let (ref_up, ref_down) = match cfg.reference {
            Reference::Exact => {
                let draw = |p: u64| -> Result<Side> {
                    let path = bm.sample(1.0, 1.0, &mut rng.substream(p, i).rng())?;
                    Ok(Some(path.end().to_vec()))
                };
                (draw(purpose::REFERENCE_UP)?, draw(purpose::REFERENCE_DOWN)?)
            }
            Reference::SelfTest => {
                let (up, _) = zoomed_sides(&sampler, eta, cfg, k, &rng.substream(purpose::REFERENCE_UP, i))?;
                let (_, down) = zoomed_sides(&sampler, eta, cfg, k, &rng.substream(purpose::REFERENCE_DOWN, i))?;
                (up, down)
            }
        };
        Ok((post, pre, ref_up, ref_down))
    });

    let (mut post, mut pre, mut ref_up, mut ref_down) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut both = 0;
    for row in rows {
        let (a, b, c, d) = row?;
        both += usize::from(a.is_some() && b.is_some());
        post.extend(a);
        pre.extend(b);
        ref_up.extend(c);
        ref_down.extend(d);
    }
    report.total = cfg.n_rep;
    report.retained = both;
    report.summary("read_index", k);
    report.summary("skipped_post", cfg.n_rep - post.len());
    report.summary("skipped_pre", cfg.n_rep - pre.len());
    report.summary("post_mean", cloud_mean(&post));
    report.summary("pre_mean", cloud_mean(&pre));
    report.summary("reference_up_mean", cloud_mean(&ref_up));
    report.summary("reference_down_mean", cloud_mean(&ref_down));
    if !post.is_empty() && !ref_up.is_empty() {
        let t = energy_permutation_test(&post, &ref_up, cfg.n_perm, &rng.substream(purpose::PERMUTATION_UP, 0))?;
        report.tests.insert("post_vs_up".into(), t);
    }
    if !pre.is_empty() && !ref_down.is_empty() {
        let t = energy_permutation_test(&pre, &ref_down, cfg.n_perm, &rng.substream(purpose::PERMUTATION_DOWN, 0))?;
        report.tests.insert("pre_vs_down".into(), t);
    }
    report.clouds.insert("post".into(), post);
    report.clouds.insert("pre".into(), pre);
    report.clouds.insert("reference_up".into(), ref_up);
    report.clouds.insert("reference_down".into(), ref_down);
    Ok(report)
}
