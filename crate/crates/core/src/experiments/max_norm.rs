use serde::{Deserialize, Serialize};

use super::{cloud_mean, purpose, replicate, ExperimentReport};
use crate::conditioned::ConditionedBm;
use crate::construct::split_at_max_norm;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::RngStream;
use crate::sim::{grid_steps, Kill, LevySpec, PathSampler};
use crate::stats::{energy_permutation_test, energy_statistic, kde2d, linspace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxNormConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub n: usize,
    pub step: f64,
    pub n_rep: usize,
    /// Permutations for the energy test; 0 skips the test.
    #[serde(default = "default_perm")]
    pub n_perm: usize,
    /// KDE grid points per axis on `[-kde_range, kde_range]`; 0 skips the KDE.
    #[serde(default = "default_kde_points")]
    pub kde_points: usize,
    #[serde(default = "default_kde_range")]
    pub kde_range: f64,
    #[serde(default)]
    pub bandwidth: Option<(f64, f64)>,
}

fn default_perm() -> usize {
    199
}
fn default_kde_points() -> usize {
    81
}
fn default_kde_range() -> f64 {
    4.0
}

impl MaxNormConfig {
    pub fn new(sigma1: f64, sigma2: f64, rho: f64, n: usize, step: f64, n_rep: usize) -> Self {
        Self {
            sigma1,
            sigma2,
            rho,
            n,
            step,
            n_rep,
            n_perm: default_perm(),
            kde_points: default_kde_points(),
            kde_range: default_kde_range(),
            bandwidth: None,
        }
    }

    pub fn sigma(&self) -> Matrix<f64> {
        let c = self.rho * self.sigma1 * self.sigma2;
        Matrix::from_rows(&[vec![self.sigma1 * self.sigma1, c], vec![c, self.sigma2 * self.sigma2]]).expect("2x2")
    }
}

type Row = Option<(Vec<f64>, Vec<f64>)>;

/// Split correlated planar Brownian paths at their last time of maximal
/// norm and compare `√n →X_{1/n}` with the conditioned Brownian motion in
/// the direction `-M` of the same path.
///
/// Replications whose post-maximum lifetime is below `1/n` are excluded and
/// counted. The energy statistic between the clouds is reported without a
/// pass/fail verdict.
pub fn experiment_max_norm(cfg: &MaxNormConfig, rng: &RngStream) -> Result<ExperimentReport> {
    if cfg.n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(cfg.step > 0.0 && cfg.step <= 1.0) {
        return Err(Error::param("step", "need 0 < step <= 1"));
    }
    if !(cfg.sigma1 > 0.0 && cfg.sigma2 > 0.0) {
        return Err(Error::param("sigma1", "standard deviations must be positive"));
    }
    if !(cfg.rho > -1.0 && cfg.rho < 1.0) {
        return Err(Error::param("rho", "must lie in (-1, 1)"));
    }
    let sigma = cfg.sigma();
    let spec = LevySpec::brownian(sigma.clone())?.with_kill(Kill::FixedHorizon(1.0));
    let sampler = PathSampler::new(&spec)?;
    let k = grid_steps(1.0 / cfg.n as f64, cfg.step);
    let scale = (cfg.n as f64).sqrt();
    let mut report = ExperimentReport::new("maxnorm", cfg, rng);

    let rows = replicate(cfg.n_rep, |i| -> Result<Row> {
        let i = i as u64;
        let path = sampler.sample_with(1.0, cfg.step, &mut rng.substream(purpose::PATHS, i).rng())?;
        let (eta, pair) = split_at_max_norm(&path)?;
        if pair.post.live_steps() < k {
            return Ok(None);
        }
        let post: Vec<f64> = pair.post.value(k).expect("live").iter().map(|x| x * scale).collect();
        let bm = ConditionedBm::new(&sigma, &eta)?;
        let reference = bm.sample(1.0, 1.0, &mut rng.substream(purpose::REFERENCE, i).rng())?;
        Ok(Some((post, reference.end().to_vec())))
    });
    let (mut prelimit, mut mixture) = (Vec::new(), Vec::new());
    for r in rows {
        if let Some((a, b)) = r? {
            prelimit.push(a);
            mixture.push(b);
        }
    }
    report.total = cfg.n_rep;
    report.retained = prelimit.len();
    report.summary("read_index", k);
    report.summary("retained_fraction", report.retained_fraction());
    let two_cluster = |c: &[Vec<f64>]| c.iter().filter(|p| p[0] * p[1] < 0.0).count() as f64 / c.len().max(1) as f64;
    report.summary("two_cluster_fraction", two_cluster(&prelimit));
    report.summary("mixture_two_cluster_fraction", two_cluster(&mixture));
    report.summary("prelimit_mean", cloud_mean(&prelimit));
    report.summary("mixture_mean", cloud_mean(&mixture));

    if !prelimit.is_empty() {
        if cfg.n_perm > 0 {
            let t = energy_permutation_test(&prelimit, &mixture, cfg.n_perm, &rng.substream(purpose::PERMUTATION, 0))?;
            report.summary("energy_statistic", t.statistic);
            report.tests.insert("prelimit_vs_mixture".into(), t);
        } else {
            report.summary("energy_statistic", energy_statistic(&prelimit, &mixture)?);
        }
    }
    if cfg.kde_points > 0 && prelimit.len() >= 2 {
        let g = linspace(-cfg.kde_range, cfg.kde_range, cfg.kde_points);
        for (label, cloud) in [("kde_prelimit", &prelimit), ("kde_mixture", &mixture)] {
            match kde2d(cloud, &g, &g, cfg.bandwidth) {
                Ok(grid) => {
                    report.summary(&format!("{label}_bandwidth"), grid.bandwidth);
                    report.grids.insert(label.into(), grid);
                }
                Err(Error::InvalidParameter { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    report.clouds.insert("prelimit".into(), prelimit);
    report.clouds.insert("mixture".into(), mixture);
    Ok(report)
}
