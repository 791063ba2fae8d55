//! Pathwise constructions on grid paths.
//!
//! * [`split_at_directional_infimum`] cuts a path at the last minimum of its
//!   projection and returns the reversed pre-infimum and post-infimum parts.
//! * [`discrete_conditioned_pair`] builds `(X↓, X↑)` by routing every
//!   increment to one side according to the sign of the projection at the
//!   right endpoint of its step, then closing the gaps in time.
//! * [`split_at_max_norm`] is the same cut at the last time of maximal
//!   Euclidean norm, with the path-dependent direction `-M`.
//!
//! For exchangeable increments the pairs `(X↓, X↑)` and `(-←X, →X)` have
//! the same law; `experiments::check_representation_enumeration` checks
//! this exactly by enumeration.

use crate::error::{Error, Result};
use crate::path::{project, Direction, GridPath};
use crate::scalar::{norm_sq, Scalar};

/// A path seen from an extremum: reversed past and future, both started at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair<T> {
    /// `X_{tau-i} - extremum_point`, killed after `tau_index` steps.
    pub pre: GridPath<T>,
    /// `X_{tau+i} - extremum_point`.
    pub post: GridPath<T>,
    pub tau_index: usize,
    pub extremum_point: Vec<T>,
}

/// Everything computed by [`discrete_conditioned_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionTrace<T> {
    /// `a_plus[i]` = number of `1 <= j <= i` with `Z_j > 0`.
    pub a_plus: Vec<usize>,
    /// `a_minus[i]` = number of `1 <= j <= i` with `Z_j <= 0`.
    pub a_minus: Vec<usize>,
    /// `alpha_plus[i]` = first `j` with `a_plus[j] = i`.
    pub alpha_plus: Vec<usize>,
    pub alpha_minus: Vec<usize>,
    /// Running sum of the increments with `Z_j > 0`, on the input grid.
    pub y_plus: GridPath<T>,
    pub y_minus: GridPath<T>,
    /// `X↑_i = y_plus[alpha_plus[i]]`.
    pub up: GridPath<T>,
    /// `X↓_i = y_minus[alpha_minus[i]]`.
    pub down: GridPath<T>,
}

/// Largest index attaining the minimum of `z`.
///
/// # Panics
/// If `z` is empty.
pub fn argmin_last<T: Scalar>(z: &[T]) -> usize {
    assert!(!z.is_empty(), "argmin of an empty sequence");
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v <= z[best] {
            best = i;
        }
    }
    best
}

/// Largest index attaining the maximum of `z`.
pub fn argmax_last<T: Scalar>(z: &[T]) -> usize {
    assert!(!z.is_empty(), "argmax of an empty sequence");
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v >= z[best] {
            best = i;
        }
    }
    best
}

fn check_dim<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>) -> Result<()> {
    if path.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            got: eta.dim(),
        });
    }
    Ok(())
}

/// Cut `path` at grid index `tau`, centring both parts at `X_tau`.
fn split_at<T: Scalar>(path: &GridPath<T>, tau: usize) -> SplitPair<T> {
    let d = path.dim();
    let live = path.live_steps();
    let center = path.point(tau).to_vec();
    let mut post = Vec::with_capacity((live - tau + 1) * d);
    for i in tau..=live {
        post.extend(path.point(i).iter().zip(&center).map(|(&x, &c)| x - c));
    }
    let mut pre = Vec::with_capacity((tau + 1) * d);
    for i in (0..=tau).rev() {
        pre.extend(path.point(i).iter().zip(&center).map(|(&x, &c)| x - c));
    }
    let step = path.step();
    SplitPair {
        pre: GridPath::from_parts_unchecked(step, d, pre, Some(tau)),
        post: GridPath::from_parts_unchecked(step, d, post, path.kill_index().map(|_| live - tau)),
        tau_index: tau,
        extremum_point: center,
    }
}

/// Split at the last minimum of `<X_i, eta>` over the live indices.
pub fn split_at_directional_infimum<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>) -> Result<SplitPair<T>> {
    check_dim(path, eta)?;
    let tau = argmin_last(&project(path, eta));
    Ok(split_at(path, tau))
}

/// Split at the last time of maximal norm; the returned direction is `-M`.
pub fn split_at_max_norm<T: Scalar>(path: &GridPath<T>) -> Result<(Direction<T>, SplitPair<T>)> {
    let norms: Vec<T> = path.live_points().map(norm_sq).collect();
    let tau = argmax_last(&norms);
    if norms[tau] == T::zero() {
        return Err(Error::InvalidPath(
            "path never leaves the origin, so the max-norm direction is undefined".into(),
        ));
    }
    let pair = split_at(path, tau);
    let eta = Direction::new(pair.extremum_point.iter().map(|&x| -x).collect())?;
    Ok((eta, pair))
}

/// The discrete conditioned pair `(X↓, X↑)` with all intermediate sequences.
pub fn discrete_conditioned_pair<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>) -> Result<ConstructionTrace<T>> {
    check_dim(path, eta)?;
    let d = path.dim();
    let z = project(path, eta);
    let len = z.len();
    let killed = path.kill_index().is_some();

    let mut a_plus = Vec::with_capacity(len);
    let mut a_minus = Vec::with_capacity(len);
    let mut alpha_plus = vec![0];
    let mut alpha_minus = vec![0];
    let mut y_plus = vec![T::zero(); len * d];
    let mut y_minus = vec![T::zero(); len * d];
    let mut up = vec![T::zero(); d];
    let mut down = vec![T::zero(); d];
    a_plus.push(0);
    a_minus.push(0);

    for j in 1..len {
        let positive = z[j] > T::zero();
        let (prev, cur) = (path.point(j - 1), path.point(j));
        for k in 0..d {
            let (yp, ym) = (y_plus[(j - 1) * d + k], y_minus[(j - 1) * d + k]);
            if positive {
                y_plus[j * d + k] = yp + (cur[k] - prev[k]);
                y_minus[j * d + k] = ym;
            } else {
                y_plus[j * d + k] = yp;
                y_minus[j * d + k] = ym + (cur[k] - prev[k]);
            }
        }
        if positive {
            alpha_plus.push(j);
            up.extend_from_slice(&y_plus[j * d..(j + 1) * d]);
        } else {
            alpha_minus.push(j);
            down.extend_from_slice(&y_minus[j * d..(j + 1) * d]);
        }
        a_plus.push(a_plus[j - 1] + usize::from(positive));
        a_minus.push(a_minus[j - 1] + usize::from(!positive));
    }

    let step = path.step();
    let n_up = a_plus[len - 1];
    let n_down = a_minus[len - 1];
    let input_kill = path.kill_index().map(|_| len - 1);
    Ok(ConstructionTrace {
        y_plus: GridPath::from_parts_unchecked(step, d, y_plus, input_kill),
        y_minus: GridPath::from_parts_unchecked(step, d, y_minus, input_kill),
        up: GridPath::from_parts_unchecked(step, d, up, killed.then_some(n_up)),
        down: GridPath::from_parts_unchecked(step, d, down, killed.then_some(n_down)),
        a_plus,
        a_minus,
        alpha_plus,
        alpha_minus,
    })
}

/// `X↑` alone, without the bookkeeping sequences.
pub fn conditioned_up<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>) -> Result<GridPath<T>> {
    routed_chain(path, eta, true)
}

/// `X↓` alone, without the bookkeeping sequences.
pub fn conditioned_down<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>) -> Result<GridPath<T>> {
    routed_chain(path, eta, false)
}

fn routed_chain<T: Scalar>(path: &GridPath<T>, eta: &Direction<T>, positive_side: bool) -> Result<GridPath<T>> {
    check_dim(path, eta)?;
    let d = path.dim();
    let mut out = vec![T::zero(); d];
    let mut cur = vec![T::zero(); d];
    let live = path.live_steps();
    for j in 1..=live {
        let x = path.point(j);
        if (eta.inner(x) > T::zero()) == positive_side {
            let prev = path.point(j - 1);
            for k in 0..d {
                cur[k] = cur[k] + (x[k] - prev[k]);
            }
            out.extend_from_slice(&cur);
        }
    }
    let n = out.len() / d - 1;
    Ok(GridPath::from_parts_unchecked(
        path.step(),
        d,
        out,
        path.kill_index().map(|_| n),
    ))
}
