use serde::{Deserialize, Serialize};

use super::{purpose, replicate, ExperimentReport};
use crate::construct::conditioned_up;
use crate::error::{Error, Result};
use crate::path::Direction;
use crate::rng::RngStream;
use crate::sim::{classify_case, Case, JumpLaw, LevySpec, PathSampler};
use crate::stats::{chi2_test, ks_test};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialJumpConfig {
    pub horizon: f64,
    pub step: f64,
    pub n_rep: usize,
}

/// Projected jump law `Y = <J, η>` in the forms this experiment supports.
enum Projected {
    Atoms { z: Vec<f64>, p: Vec<f64> },
    Exponential { rate: f64 },
}

impl Projected {
    fn of(law: &JumpLaw<f64>, eta: &Direction<f64>) -> Result<Self> {
        match law {
            JumpLaw::FiniteSupport { atoms, probs } => Ok(Projected::Atoms {
                z: atoms.iter().map(|a| eta.inner(a)).collect(),
                p: probs.clone(),
            }),
            JumpLaw::Gaussian { mean, .. } => Ok(Projected::Atoms {
                z: vec![eta.inner(mean)],
                p: vec![1.0],
            }),
            JumpLaw::Exponential { direction, rate } => Ok(Projected::Exponential {
                rate: rate / eta.inner(direction),
            }),
        }
    }

    fn mean(&self) -> f64 {
        match self {
            Projected::Atoms { z, p } => z.iter().zip(p).map(|(z, p)| z * p).sum(),
            Projected::Exponential { rate } => 1.0 / rate,
        }
    }

    /// `E exp(-θ Y)`.
    fn laplace(&self, theta: f64) -> f64 {
        match self {
            Projected::Atoms { z, p } => z.iter().zip(p).map(|(z, p)| p * (-theta * z).exp()).sum(),
            Projected::Exponential { rate } => rate / (rate + theta),
        }
    }
}

/// Killing rate `κ` of the descending ladder height process of a spectrally
/// positive `Z_t = b t + compound Poisson(λ, Y)`, for which
/// `h(x) = (1 - e^{-κx}) / κ` (and `h(x) = x` when `κ = 0`).
///
/// `κ` is the largest root of `ψ(θ) = -bθ + λ(E e^{-θY} - 1)`; it is positive
/// exactly when `Z` drifts to `+∞`.
pub fn renewal_exponent(b: f64, lambda: f64, laplace: impl Fn(f64) -> f64, mean_jump: f64) -> f64 {
    if b + lambda * mean_jump <= 0.0 {
        return 0.0;
    }
    let psi = |t: f64| -b * t + lambda * (laplace(t) - 1.0);
    let mut hi = 1.0;
    while psi(hi) <= 0.0 {
        hi *= 2.0;
    }
    // psi < 0 just right of 0 because psi'(0) = -E Z_1 < 0.
    let mut lo = hi / 2.0;
    while psi(lo) > 0.0 {
        lo /= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn h(kappa: f64, x: f64) -> f64 {
    if kappa == 0.0 {
        x
    } else {
        -(-kappa * x).exp_m1() / kappa
    }
}

#[derive(Serialize)]
struct Params<'a> {
    spec: &'a LevySpec,
    eta: &'a Direction<f64>,
    config: &'a InitialJumpConfig,
}

/// Law of the first step of `X↑` for a process that can only enter the
/// half-space by jumping.
///
/// The projection of the recorded first step is compared with the jump law
/// reweighted by `h(<y, η>)`, both with the linear `h(x) = x` and with the
/// renewal function of the actual process (see [`renewal_exponent`]). A KS
/// test is used for exponential jumps and a χ² test for atoms.
pub fn experiment_initial_jump_law(spec: &LevySpec, eta: &Direction<f64>, cfg: &InitialJumpConfig, rng: &RngStream) -> Result<ExperimentReport> {
    let spec = spec.clone().validated()?;
    if spec.dim() != eta.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: eta.dim() });
    }
    let case = classify_case(&spec, eta);
    if case != Case::Down {
        return Err(Error::Unsupported(format!("initial jump law needs case Down, got {case:?}")));
    }
    let cp = spec.jumps.as_ref().ok_or_else(|| Error::Unsupported("no jumps".into()))?;
    let projected = Projected::of(&cp.law, eta)?;
    if projected.mean() <= 0.0 {
        return Err(Error::Unsupported("jumps have no mass in the open half-space".into()));
    }
    let b = eta.inner(&spec.drift);
    let kappa = renewal_exponent(b, cp.rate, |t| projected.laplace(t), projected.mean());

    let sampler = PathSampler::new(&spec)?;
    let mut report = ExperimentReport::new("initial_jump", Params { spec: &spec, eta, config: cfg }, rng);
    let rows = replicate(cfg.n_rep, |i| -> Result<Option<Vec<f64>>> {
        let path = sampler.sample_with(cfg.horizon, cfg.step, &mut rng.substream(purpose::PATHS, i as u64).rng())?;
        let up = conditioned_up(&path, eta)?;
        Ok(up.value(1).map(<[f64]>::to_vec))
    });
    let mut first = Vec::new();
    for r in rows {
        first.extend(r?);
    }
    let z: Vec<f64> = first.iter().map(|x| eta.inner(x)).collect();
    report.total = cfg.n_rep;
    report.retained = first.len();
    report.summary("kappa", kappa);
    report.summary("drift_projection", b);
    report.summary("mean_projection", z.iter().sum::<f64>() / z.len().max(1) as f64);

    match &projected {
        Projected::Exponential { rate } => {
            let mu = *rate;
            let linear = move |y: f64| if y <= 0.0 { 0.0 } else { 1.0 - (-mu * y).exp() * (1.0 + mu * y) };
            let corrected = move |y: f64| {
                if y <= 0.0 {
                    0.0
                } else if kappa == 0.0 {
                    linear(y)
                } else {
                    let s = mu + kappa;
                    (-(-mu * y).exp_m1() - mu / s * -(-s * y).exp_m1()) * s / kappa
                }
            };
            report.summary("linear_oracle_mean", 2.0 / mu);
            report.summary("corrected_oracle_mean", 1.0 / mu + 1.0 / (mu + kappa));
            if !z.is_empty() {
                report.tests.insert("ks_linear".into(), ks_test(&z, linear)?);
                report.tests.insert("ks_corrected".into(), ks_test(&z, corrected)?);
            }
        }
        Projected::Atoms { z: atoms, p } => {
            let weigh = |hf: &dyn Fn(f64) -> f64| -> Vec<f64> {
                let w: Vec<f64> = atoms.iter().zip(p).map(|(&a, &p)| if a > 0.0 { p * hf(a) } else { 0.0 }).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|x| x / s).collect()
            };
            let linear = weigh(&|x| x);
            let corrected = weigh(&|x| h(kappa, x));
            let mut counts = vec![0u64; atoms.len()];
            for &v in &z {
                let nearest = atoms
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
                    .map(|(k, _)| k)
                    .expect("at least one atom");
                counts[nearest] += 1;
            }
            let n = z.len().max(1) as f64;
            let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
            let se: Vec<f64> = linear.iter().map(|q| (q * (1.0 - q) / n).sqrt()).collect();
            let se_corrected: Vec<f64> = corrected.iter().map(|q| (q * (1.0 - q) / n).sqrt()).collect();
            report.summary("atoms_projected", atoms);
            report.summary("counts", &counts);
            report.summary("empirical_probs", &empirical);
            report.summary("linear_probs", &linear);
            report.summary("linear_standard_errors", &se);
            report.summary("corrected_probs", &corrected);
            report.summary("corrected_standard_errors", &se_corrected);
            report.summary(
                "max_atom_deviation",
                z.iter()
                    .map(|v| atoms.iter().map(|a| (a - v).abs()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max),
            );
            if !z.is_empty() {
                report.tests.insert("chi2_linear".into(), chi2_test(&counts, &linear)?);
                report.tests.insert("chi2_corrected".into(), chi2_test(&counts, &corrected)?);
            }
        }
    }
    report.clouds.insert("initial_values".into(), first);
    Ok(report)
}
