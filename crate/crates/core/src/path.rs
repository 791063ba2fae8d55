//! Grid paths, directions and half-spaces.
//!
//! A [`GridPath`] stores absolute positions on a uniform time grid. The
//! cemetery state is encoded by `kill_index`: indices past it are dead and
//! never read by any routine in this crate.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, Real, Scalar};

/// A nonzero vector `eta` defining the half-space `S = {x : <x, eta> > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Direction<T> {
    eta: Vec<T>,
}

impl<T: Scalar> Direction<T> {
    pub fn new(eta: Vec<T>) -> Result<Self> {
        if eta.is_empty() || eta.iter().all(|&x| x == T::zero()) {
            return Err(Error::ZeroDirection);
        }
        Ok(Self { eta })
    }

    /// Unit vector along axis `axis` in dimension `dim`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut eta = vec![T::zero(); dim];
        eta[axis] = T::one();
        Self { eta }
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.eta
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    #[inline]
    pub fn inner(&self, x: &[T]) -> T {
        dot(x, &self.eta)
    }

    pub fn neg(&self) -> Self {
        Self {
            eta: self.eta.iter().map(|&x| -x).collect(),
        }
    }
}

impl<T: Real> Direction<T> {
    pub fn norm(&self) -> T {
        crate::scalar::norm_sq(&self.eta).sqrt()
    }

    pub fn unit(&self) -> Vec<T> {
        let n = self.norm();
        self.eta.iter().map(|&x| x / n).collect()
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Direction<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Direction::new(v)
    }
}

impl<T: Scalar> From<Direction<T>> for Vec<T> {
    fn from(d: Direction<T>) -> Self {
        d.eta
    }
}

/// `<x, eta> > 0`: membership in the open half-space.
#[inline]
pub fn in_open_halfspace<T: Scalar>(x: &[T], eta: &Direction<T>) -> bool {
    eta.inner(x) > T::zero()
}

/// `<x, eta> >= 0`: membership in the closed half-space.
#[inline]
pub fn in_closed_halfspace<T: Scalar>(x: &[T], eta: &Direction<T>) -> bool {
    eta.inner(x) >= T::zero()
}

/// The projected sequence `Z_i = <X_i, eta>` over the live indices.
pub fn project<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>) -> Vec<T> {
    assert_eq!(path.dim(), eta.dim(), "path and direction dimensions differ");
    path.live_points().map(|x| eta.inner(x)).collect()
}

/// A `d`-dimensional path on the grid `{0, h, 2h, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath<T> {
    step: T,
    dim: usize,
    data: Vec<T>,
    kill_index: Option<usize>,
}

impl<T: Scalar> GridPath<T> {
    /// Build from row-major positions (`dim` entries per grid index).
    pub fn new(step: T, dim: usize, data: Vec<T>, kill_index: Option<usize>) -> Result<Self> {
        if step <= T::zero() {
            return Err(Error::InvalidPath("step must be positive".into()));
        }
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidPath(format!(
                "{} coordinates do not form whole points of dimension {dim}",
                data.len()
            )));
        }
        let last = data.len() / dim - 1;
        if let Some(k) = kill_index {
            if k > last {
                return Err(Error::InvalidPath(format!(
                    "kill index {k} beyond last grid index {last}"
                )));
            }
        }
        Ok(Self {
            step,
            dim,
            data,
            kill_index,
        })
    }

    pub fn from_points(step: T, points: &[Vec<T>], kill_index: Option<usize>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::new(step, dim, data, kill_index)
    }

    /// A path consisting of its start point only.
    pub fn constant(step: T, start: Vec<T>, kill_index: Option<usize>) -> Self {
        let dim = start.len();
        Self {
            step,
            dim,
            data: start,
            kill_index,
        }
    }

    pub(crate) fn from_parts_unchecked(step: T, dim: usize, data: Vec<T>, kill_index: Option<usize>) -> Self {
        debug_assert!(dim > 0 && !data.is_empty() && data.len().is_multiple_of(dim));
        Self {
            step,
            dim,
            data,
            kill_index,
        }
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the last stored grid point (`L`).
    #[inline]
    pub fn last_index(&self) -> usize {
        self.data.len() / self.dim - 1
    }

    #[inline]
    pub fn kill_index(&self) -> Option<usize> {
        self.kill_index
    }

    /// Number of live grid steps: the kill index, or `L` when alive throughout.
    #[inline]
    pub fn live_steps(&self) -> usize {
        self.kill_index.unwrap_or_else(|| self.last_index())
    }

    #[inline]
    pub fn start(&self) -> &[T] {
        &self.data[..self.dim]
    }

    /// Position at grid index `i`; `None` once the path is dead.
    #[inline]
    pub fn value(&self, i: usize) -> Option<&[T]> {
        (i <= self.live_steps()).then(|| self.point(i))
    }

    #[inline]
    pub(crate) fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Last live position.
    #[inline]
    pub fn end(&self) -> &[T] {
        self.point(self.live_steps())
    }

    pub fn live_points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data[..(self.live_steps() + 1) * self.dim].chunks_exact(self.dim)
    }

    /// Row-major coordinates of the live part.
    #[inline]
    pub fn live_data(&self) -> &[T] {
        &self.data[..(self.live_steps() + 1) * self.dim]
    }

    /// Increment `X_j - X_{j-1}` for `1 <= j <= live_steps()`.
    pub fn increment(&self, j: usize) -> Vec<T> {
        let (a, b) = (self.point(j - 1), self.point(j));
        b.iter().zip(a).map(|(&y, &x)| y - x).collect()
    }

    /// The first `steps` steps, killed at their end.
    pub fn prefix(&self, steps: usize) -> Self {
        let steps = steps.min(self.live_steps());
        Self {
            step: self.step,
            dim: self.dim,
            data: self.data[..(steps + 1) * self.dim].to_vec(),
            kill_index: Some(steps),
        }
    }

    /// Pointwise `M x` applied to every live position.
    pub fn map_linear(&self, m: &Matrix<T>) -> Result<Self> {
        if m.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.cols(),
            });
        }
        let rows = m.rows();
        let mut data = vec![T::zero(); (self.live_steps() + 1) * rows];
        for (x, out) in self.live_points().zip(data.chunks_exact_mut(rows)) {
            m.mul_vec_into(x, out);
        }
        Ok(Self {
            step: self.step,
            dim: rows,
            data,
            kill_index: self.kill_index.map(|_| self.live_steps()),
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            step: self.step,
            dim: self.dim,
            data: self.data.iter().map(|&x| -x).collect(),
            kill_index: self.kill_index,
        }
    }

    /// `a P + b Q` for two paths on the same grid.
    pub fn linear_combination(a: T, p: &Self, b: T, q: &Self) -> Result<Self> {
        if p.dim != q.dim || p.data.len() != q.data.len() || p.step != q.step {
            return Err(Error::InvalidPath("paths live on different grids".into()));
        }
        let data = p.data.iter().zip(&q.data).map(|(&x, &y)| a * x + b * y).collect();
        let kill_index = match (p.kill_index, q.kill_index) {
            (Some(i), Some(j)) => Some(i.min(j)),
            (k, None) | (None, k) => k,
        };
        Ok(Self {
            step: p.step,
            dim: p.dim,
            data,
            kill_index,
        })
    }

    /// Live positions as owned vectors, convenient for tests and enumeration keys.
    pub fn live_vectors(&self) -> Vec<Vec<T>> {
        self.live_points().map(<[T]>::to_vec).collect()
    }
}

impl<T: Real> GridPath<T> {
    /// Lifetime `zeta = live_steps * step`.
    pub fn lifetime(&self) -> T {
        T::lit(self.live_steps() as f64) * self.step
    }

    /// CSV with header `t,x1,...,xd,alive`, one row per stored grid index.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        writeln!(w, "t,{},alive", header.join(","))?;
        let live = self.live_steps();
        for i in 0..=self.last_index() {
            let t = T::lit(i as f64) * self.step;
            write!(w, "{t}")?;
            for x in self.point(i) {
                write!(w, ",{x}")?;
            }
            writeln!(w, ",{}", u8::from(i <= live))?;
        }
        Ok(())
    }

    /// Parse the CSV emitted by [`GridPath::write_csv`].
    ///
    /// The step is read from the first two time stamps; a single-row file
    /// needs `default_step`. A file whose rows are all alive yields a path
    /// without kill index.
    pub fn read_csv<R: BufRead>(r: R, default_step: T) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, Ok(h))) => h,
            _ => return Err(Error::Csv { line: 1, reason: "missing header".into() }),
        };
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 1] != "alive" {
            return Err(Error::Csv {
                line: 1,
                reason: "expected header t,x1,...,xd,alive".into(),
            });
        }
        let dim = cols.len() - 2;
        let mut times = Vec::new();
        let mut data = Vec::new();
        let mut kill_index = None;
        for (ln, line) in lines {
            let line = line.map_err(|e| Error::Csv { line: ln + 1, reason: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 2 {
                return Err(Error::Csv {
                    line: ln + 1,
                    reason: format!("expected {} fields, got {}", dim + 2, fields.len()),
                });
            }
            let parse = |s: &str| -> Result<T> {
                s.parse::<f64>().map(T::lit).map_err(|e| Error::Csv {
                    line: ln + 1,
                    reason: format!("`{s}`: {e}"),
                })
            };
            times.push(parse(fields[0])?);
            for f in &fields[1..=dim] {
                data.push(parse(f)?);
            }
            match fields[dim + 1] {
                "1" => {
                    if kill_index.is_some() {
                        return Err(Error::Csv {
                            line: ln + 1,
                            reason: "alive row after the path was killed".into(),
                        });
                    }
                }
                "0" => {
                    if kill_index.is_none() {
                        if times.len() < 2 {
                            return Err(Error::Csv {
                                line: ln + 1,
                                reason: "path must be alive at index 0".into(),
                            });
                        }
                        kill_index = Some(times.len() - 2);
                    }
                }
                other => {
                    return Err(Error::Csv {
                        line: ln + 1,
                        reason: format!("alive must be 0 or 1, got `{other}`"),
                    })
                }
            }
        }
        if times.is_empty() {
            return Err(Error::Empty);
        }
        let step = if times.len() >= 2 { times[1] - times[0] } else { default_step };
        Self::new(step, dim, data, kill_index)
    }
}
