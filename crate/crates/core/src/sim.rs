//! Lévy process specifications and grid samplers.
//!
//! A [`LevySpec`] is a drift, a Brownian covariance and an optional compound
//! Poisson component, plus a killing rule. Samples are exact in law at the
//! grid points: the Gaussian part is an exact Gaussian increment per cell and
//! jumps are binned into the cell in which they occur.

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::conditioned::cholesky;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::path::{Direction, GridPath};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Jump size distribution of the compound Poisson component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub enum JumpLaw<T> {
    /// Atoms `atoms[k]` with probabilities `probs[k]`.
    #[serde(rename = "finite")]
    FiniteSupport { atoms: Vec<Vec<T>>, probs: Vec<T> },
    Gaussian { mean: Vec<T>, cov: Matrix<T> },
    /// `E * direction` with `E ~ Exp(rate)`.
    Exponential { direction: Vec<T>, rate: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct CompoundPoisson<T> {
    pub rate: T,
    pub law: JumpLaw<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Kill<T> {
    #[default]
    None,
    FixedHorizon(T),
    ExponentialRate(T),
}

/// Parametric `d`-dimensional Lévy process with killing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct LevySpec<T = f64> {
    pub drift: Vec<T>,
    pub sigma: Matrix<T>,
    #[serde(default)]
    pub jumps: Option<CompoundPoisson<T>>,
    #[serde(default)]
    pub kill: Kill<T>,
}

const PSD_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-12;

impl<T: Real> LevySpec<T> {
    /// Validated spec; `sigma` is symmetrized.
    pub fn new(drift: Vec<T>, sigma: Matrix<T>, jumps: Option<CompoundPoisson<T>>, kill: Kill<T>) -> Result<Self> {
        Self { drift, sigma, jumps, kill }.validated()
    }

    pub fn brownian(sigma: Matrix<T>) -> Result<Self> {
        let d = sigma.rows();
        Self::new(vec![T::zero(); d], sigma, None, Kill::None)
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn with_kill(mut self, kill: Kill<T>) -> Self {
        self.kill = kill;
        self
    }

    /// Check every invariant and symmetrize `sigma`.
    pub fn validated(mut self) -> Result<Self> {
        let d = self.drift.len();
        if d == 0 {
            return Err(Error::param("drift", "dimension must be at least 1"));
        }
        if !self.sigma.is_square() || self.sigma.rows() != d {
            return Err(Error::param(
                "sigma",
                format!("expected {d}x{d}, got {}x{}", self.sigma.rows(), self.sigma.cols()),
            ));
        }
        self.sigma = self.sigma.symmetrized();
        check_psd(&self.sigma, "sigma")?;
        if let Some(cp) = &mut self.jumps {
            if !(cp.rate > T::zero()) {
                return Err(Error::param("jumps.rate", "must be positive"));
            }
            match &mut cp.law {
                JumpLaw::FiniteSupport { atoms, probs } => {
                    if atoms.is_empty() || atoms.len() != probs.len() {
                        return Err(Error::param("jumps.law.probs", "need one probability per atom"));
                    }
                    if atoms.iter().any(|a| a.len() != d) {
                        return Err(Error::param("jumps.law.atoms", format!("atoms must have dimension {d}")));
                    }
                    if probs.iter().any(|&p| p < T::zero()) {
                        return Err(Error::param("jumps.law.probs", "negative probability"));
                    }
                    let total = probs.iter().fold(T::zero(), |a, &p| a + p);
                    if (total - T::one()).abs().to_f64_lossy() > PROB_TOL {
                        return Err(Error::param("jumps.law.probs", format!("sum to {total}, not 1")));
                    }
                }
                JumpLaw::Gaussian { mean, cov } => {
                    if mean.len() != d || cov.rows() != d || cov.cols() != d {
                        return Err(Error::param("jumps.law.cov", format!("expected dimension {d}")));
                    }
                    *cov = cov.symmetrized();
                    check_psd(cov, "jumps.law.cov")?;
                }
                JumpLaw::Exponential { direction, rate } => {
                    if direction.len() != d {
                        return Err(Error::param("jumps.law.direction", format!("expected dimension {d}")));
                    }
                    if !(*rate > T::zero()) {
                        return Err(Error::param("jumps.law.rate", "must be positive"));
                    }
                }
            }
        }
        match self.kill {
            Kill::FixedHorizon(t) if !(t > T::zero()) => {
                return Err(Error::param("kill.value", "horizon must be positive"))
            }
            Kill::ExponentialRate(q) if !(q > T::zero()) => {
                return Err(Error::param("kill.value", "rate must be positive"))
            }
            _ => {}
        }
        Ok(self)
    }
}

fn check_psd<T: Real>(m: &Matrix<T>, field: &'static str) -> Result<()> {
    let min = m.min_symmetric_eigenvalue().to_f64_lossy();
    if min < -PSD_TOL {
        return Err(Error::param(field, format!("not positive semidefinite (eigenvalue {min:e})")));
    }
    Ok(())
}

/// Number of grid steps covering `[0, horizon]` with mesh `step`.
///
/// Ratios within a relative `1e-9` of an integer are rounded rather than
/// ceiled, so `1.0 / 1e-5` gives exactly `100000` steps.
pub fn grid_steps<T: Real>(horizon: T, step: T) -> usize {
    let r = (horizon / step).to_f64_lossy();
    let near = r.round();
    if (r - near).abs() <= 1e-9 * near.max(1.0) {
        near as usize
    } else {
        r.ceil() as usize
    }
}

enum JumpSampler<T> {
    Atoms { atoms: Vec<Vec<T>>, cdf: Vec<f64> },
    Gaussian { mean: Vec<T>, factor: Matrix<T> },
    Exponential { direction: Vec<T>, mean: T },
}

impl<T: Real> JumpSampler<T> {
    fn new(law: &JumpLaw<T>) -> Result<Self> {
        Ok(match law {
            JumpLaw::FiniteSupport { atoms, probs } => {
                let mut acc = 0.0;
                let cdf = probs
                    .iter()
                    .map(|p| {
                        acc += p.to_f64_lossy();
                        acc
                    })
                    .collect();
                JumpSampler::Atoms { atoms: atoms.clone(), cdf }
            }
            JumpLaw::Gaussian { mean, cov } => JumpSampler::Gaussian {
                mean: mean.clone(),
                factor: cholesky(cov)?,
            },
            JumpLaw::Exponential { direction, rate } => JumpSampler::Exponential {
                direction: direction.clone(),
                mean: T::one() / *rate,
            },
        })
    }

    fn add_jump<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [T], scratch: &mut [T]) {
        match self {
            JumpSampler::Atoms { atoms, cdf } => {
                let u: f64 = rng.random();
                let k = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
                for (xi, &a) in x.iter_mut().zip(&atoms[k]) {
                    *xi = *xi + a;
                }
            }
            JumpSampler::Gaussian { mean, factor } => {
                for s in scratch.iter_mut() {
                    *s = T::lit(StandardNormal.sample(rng));
                }
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = *xi + mean[i] + crate::scalar::dot(factor.row(i), scratch);
                }
            }
            JumpSampler::Exponential { direction, mean } => {
                let e: f64 = Exp1.sample(rng);
                let size = T::lit(e) * *mean;
                for (xi, &v) in x.iter_mut().zip(direction) {
                    *xi = *xi + size * v;
                }
            }
        }
    }
}

/// A prepared sampler: Cholesky factors are computed once per spec.
pub struct PathSampler<T> {
    drift: Vec<T>,
    factor: Matrix<T>,
    gaussian: bool,
    jumps: Option<(f64, JumpSampler<T>)>,
    kill: Kill<T>,
}

impl<T: Real> PathSampler<T> {
    pub fn new(spec: &LevySpec<T>) -> Result<Self> {
        let spec = spec.clone().validated()?;
        let factor = cholesky(&spec.sigma)?;
        let gaussian = spec.sigma.max_abs_diff(&Matrix::zeros(spec.dim(), spec.dim())) > T::zero();
        let jumps = match &spec.jumps {
            Some(cp) => Some((cp.rate.to_f64_lossy(), JumpSampler::new(&cp.law)?)),
            None => None,
        };
        Ok(Self {
            drift: spec.drift,
            factor,
            gaussian,
            jumps,
            kill: spec.kill,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    /// Append `steps` grid increments to `data`, whose last point is the current position.
    fn append_steps<R: Rng + ?Sized>(&self, steps: usize, step: T, rng: &mut R, data: &mut Vec<T>) {
        let d = self.dim();
        let sqrt_h = step.sqrt();
        let h = step.to_f64_lossy();
        let drift_step: Vec<T> = self.drift.iter().map(|&b| b * step).collect();
        let mut xi = vec![T::zero(); d];
        let mut scratch = vec![T::zero(); d];
        let mut x = data[data.len() - d..].to_vec();
        data.reserve(steps * d);
        // Jump epochs of a Poisson process on the cells; binning them gives
        // independent Poisson(rate * h) counts per cell.
        let mut next_jump = self.jumps.as_ref().map(|(rate, _)| {
            let e: f64 = Exp1.sample(rng);
            e / rate
        });
        for i in 1..=steps {
            for (xk, &b) in x.iter_mut().zip(&drift_step) {
                *xk = *xk + b;
            }
            if self.gaussian {
                for s in xi.iter_mut() {
                    *s = T::lit(StandardNormal.sample(rng)) * sqrt_h;
                }
                for (k, xk) in x.iter_mut().enumerate() {
                    *xk = *xk + crate::scalar::dot(self.factor.row(k), &xi);
                }
            }
            if let (Some((rate, jumps)), Some(t)) = (&self.jumps, next_jump.as_mut()) {
                let cell_end = i as f64 * h;
                while *t <= cell_end {
                    jumps.add_jump(rng, &mut x, &mut scratch);
                    let e: f64 = Exp1.sample(rng);
                    *t += e / rate;
                }
            }
            data.extend_from_slice(&x);
        }
    }

    /// Sample on `{0, h, ..., ceil(horizon/h) h}` starting at the origin.
    pub fn sample_with<R: Rng + ?Sized>(&self, horizon: T, step: T, rng: &mut R) -> Result<GridPath<T>> {
        self.sample_from(&vec![T::zero(); self.dim()], horizon, step, rng)
    }

    pub fn sample_from<R: Rng + ?Sized>(&self, start: &[T], horizon: T, step: T, rng: &mut R) -> Result<GridPath<T>> {
        if !(step > T::zero()) {
            return Err(Error::param("step", "must be positive"));
        }
        if horizon < step {
            return Err(Error::param("horizon", format!("{horizon} is smaller than the step {step}")));
        }
        if start.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: start.len() });
        }
        let steps = grid_steps(horizon, step);
        let kill_index = match self.kill {
            Kill::None => None,
            Kill::FixedHorizon(t) => Some(grid_steps(t, step).min(steps)),
            Kill::ExponentialRate(q) => {
                let e: f64 = Exp::new(q.to_f64_lossy())
                    .map_err(|_| Error::param("kill.value", "invalid rate"))?
                    .sample(rng);
                Some(grid_steps(T::lit(e), step).min(steps))
            }
        };
        let mut data = start.to_vec();
        self.append_steps(steps, step, rng, &mut data);
        Ok(GridPath::from_parts_unchecked(step, self.dim(), data, kill_index))
    }

    /// Continue `path` by `extra_steps` further grid steps.
    ///
    /// The path must be alive through its last stored index. Killing at the
    /// old end moves to the new end, so a fixed-horizon path grows into a
    /// longer fixed-horizon path.
    pub fn extend<R: Rng + ?Sized>(&self, path: &GridPath<T>, extra_steps: usize, rng: &mut R) -> Result<GridPath<T>> {
        if path.live_steps() != path.last_index() {
            return Err(Error::InvalidPath("cannot extend a path killed before its last index".into()));
        }
        if path.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: path.dim() });
        }
        let mut data = path.live_data().to_vec();
        self.append_steps(extra_steps, path.step(), rng, &mut data);
        let new_last = path.last_index() + extra_steps;
        Ok(GridPath::from_parts_unchecked(
            path.step(),
            path.dim(),
            data,
            path.kill_index().map(|_| new_last),
        ))
    }
}

/// One sample path of `spec` on `[0, horizon]`.
pub fn sample_path<T: Real>(spec: &LevySpec<T>, horizon: T, step: T, rng: &RngStream) -> Result<GridPath<T>> {
    PathSampler::new(spec)?.sample_with(horizon, step, &mut rng.rng())
}

/// Regularity class of 0 for the projected process `<X, eta>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Regular for both half-lines: both split parts start at the origin.
    UpDown,
    /// Irregular for `(-inf, 0)`: the reversed pre-infimum part may start with a jump.
    Up,
    /// Irregular for `(0, inf)`: the post-infimum part may start with a jump.
    Down,
    Unsupported,
}

/// Sign pattern of the projected jump sizes: (some negative, some positive).
fn projected_jump_signs<T: Real>(law: &JumpLaw<T>, eta: &Direction<T>) -> (bool, bool) {
    let tol = T::lit(1e-12);
    match law {
        JumpLaw::FiniteSupport { atoms, probs } => atoms.iter().zip(probs).filter(|(_, &p)| p > T::zero()).fold(
            (false, false),
            |(neg, pos), (a, _)| {
                let z = eta.inner(a);
                (neg || z < -tol, pos || z > tol)
            },
        ),
        JumpLaw::Gaussian { mean, cov } => {
            if cov.quadratic_form(eta.as_slice()) > tol {
                (true, true)
            } else {
                let z = eta.inner(mean);
                (z < -tol, z > tol)
            }
        }
        JumpLaw::Exponential { direction, .. } => {
            let z = eta.inner(direction);
            (z < -tol, z > tol)
        }
    }
}

/// Case classification for the processes this crate simulates.
///
/// A nonzero projected Brownian part gives [`Case::UpDown`]. Without it the
/// projection has bounded variation, and 0 is irregular for `(0, inf)` when
/// the drift points down and no jump points down.
pub fn classify_case<T: Real>(spec: &LevySpec<T>, eta: &Direction<T>) -> Case {
    let tol = T::lit(1e-12);
    if spec.sigma.quadratic_form(eta.as_slice()) > tol {
        return Case::UpDown;
    }
    let b = eta.inner(&spec.drift);
    let (neg, pos) = spec
        .jumps
        .as_ref()
        .map_or((false, false), |cp| projected_jump_signs(&cp.law, eta));
    if b < -tol && !neg {
        Case::Down
    } else if b > tol && !pos {
        Case::Up
    } else {
        Case::Unsupported
    }
}
