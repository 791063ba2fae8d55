//! Exact samplers for Brownian motion conditioned to stay in a half-space.
//!
//! With `M Mᵀ = Σ`, `R Rᵀ = I` and `Rᵀ Mᵀ η = sqrt(ηᵀΣη) e₁`, the conditioned
//! process has the law of `M R (β, B⁽²⁾, …, B⁽ᵈ⁾)ᵀ` where `β` is a Bessel-3
//! process started at 0 and the `B⁽ʲ⁾` are independent standard Brownian
//! motions. `β` is sampled as the norm of a 3-dimensional Brownian path,
//! which is exact in law at the grid points.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::path::{Direction, GridPath};
use crate::scalar::{dot, norm_sq, Real};
use crate::sim::grid_steps;

/// Lower-triangular `L` with `L Lᵀ = sigma`.
///
/// Pivots below `1e-12` (relative to the largest diagonal entry) are set to
/// zero together with the rest of their column, so rank-deficient covariances
/// are accepted.
pub fn cholesky<T: Real>(sigma: &Matrix<T>) -> Result<Matrix<T>> {
    if !sigma.is_square() {
        return Err(Error::DimensionMismatch {
            expected: sigma.rows(),
            got: sigma.cols(),
        });
    }
    let n = sigma.rows();
    let scale = (0..n).map(|i| sigma[(i, i)].abs()).fold(T::one(), T::max);
    let zero_tol = T::lit(1e-12) * scale;
    let neg_tol = T::lit(1e-10) * scale;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let s = (0..j).fold(sigma[(j, j)], |acc, k| acc - l[(j, k)] * l[(j, k)]);
        if s < -neg_tol {
            return Err(Error::NotPsd {
                pivot: j,
                value: s.to_f64_lossy(),
            });
        }
        if s <= zero_tol {
            for i in (j + 1)..n {
                let r = (0..j).fold(sigma[(i, j)], |acc, k| acc - l[(i, k)] * l[(j, k)]);
                if r.abs() > T::lit(1e-8) * scale {
                    return Err(Error::NotPsd {
                        pivot: j,
                        value: s.to_f64_lossy(),
                    });
                }
            }
            continue;
        }
        let d = s.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let r = (0..j).fold(sigma[(i, j)], |acc, k| acc - l[(i, k)] * l[(j, k)]);
            l[(i, j)] = r / d;
        }
    }
    Ok(l)
}

/// Householder reflector `H` with `H u = e₁` for a unit vector `u`.
///
/// `H` is symmetric and orthogonal; the identity is returned when `u` is
/// already within `1e-12` of `e₁`.
pub fn rotation_to_e1<T: Real>(u: &[T]) -> Result<Matrix<T>> {
    let n = u.len();
    let norm = norm_sq(u).sqrt();
    if n == 0 || (norm - T::one()).abs() > T::lit(1e-10) {
        return Err(Error::NotUnit(norm.to_f64_lossy()));
    }
    let mut v = u.to_vec();
    v[0] = v[0] - T::one();
    let vv = norm_sq(&v);
    if vv.sqrt() < T::lit(1e-12) {
        return Ok(Matrix::identity(n));
    }
    let mut h = Matrix::identity(n);
    let two = T::lit(2.0);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = h[(i, j)] - two * v[i] * v[j] / vv;
        }
    }
    Ok(h)
}

/// The matrices `(M, R)` and the scale `sqrt(ηᵀΣη)` for a given `(Σ, η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningTransform<T> {
    pub m: Matrix<T>,
    pub r: Matrix<T>,
    pub scale: T,
}

impl<T: Real> ConditioningTransform<T> {
    /// The product `M R`.
    pub fn mr(&self) -> Matrix<T> {
        self.m.matmul(&self.r).expect("square factors")
    }

    /// `(M R)⁻¹ x`; requires a nonsingular `Σ`.
    pub fn whiten(&self, x: &[T]) -> Result<Vec<T>> {
        let y = self.m.solve_lower(x)?;
        Ok(self.r.transpose().mul_vec(&y))
    }
}

/// Build the conditioning transform for `(Σ, η)`.
///
/// `R` is the Householder reflector taking `Mᵀη/‖Mᵀη‖` to `e₁`, transposed,
/// with its last column negated in dimension two and up so that `det R = 1`.
/// The sign of that column is irrelevant in law and this choice reproduces
/// the usual closed form for `d = 2`.
pub fn conditioning_transform<T: Real>(sigma: &Matrix<T>, eta: &Direction<T>) -> Result<ConditioningTransform<T>> {
    let d = eta.dim();
    if sigma.rows() != d || sigma.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sigma.rows(),
        });
    }
    let sigma = sigma.symmetrized();
    let qf = sigma.quadratic_form(eta.as_slice());
    let tol = T::lit(1e-12) * norm_sq(eta.as_slice());
    if !(qf > tol) {
        return Err(Error::DegenerateDirection(qf.to_f64_lossy()));
    }
    let m = cholesky(&sigma)?;
    let w = m.transpose().mul_vec(eta.as_slice());
    let scale = norm_sq(&w).sqrt();
    let u: Vec<T> = w.iter().map(|&x| x / scale).collect();
    let h = rotation_to_e1(&u)?;
    let mut r = h.transpose();
    if d >= 2 && h != Matrix::identity(d) {
        for i in 0..d {
            r[(i, d - 1)] = -r[(i, d - 1)];
        }
    }
    Ok(ConditioningTransform { m, r, scale })
}

/// Bessel-3 path `‖(x0, 0, 0) + W_{i h}‖` for `i = 0..=n_steps`.
pub fn bessel3_path<T: Real, R: Rng + ?Sized>(x0: T, n_steps: usize, step: T, rng: &mut R) -> Vec<T> {
    let sqrt_h = step.sqrt();
    let mut w = [x0, T::zero(), T::zero()];
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(x0.abs());
    for _ in 0..n_steps {
        for c in &mut w {
            *c = *c + T::lit(StandardNormal.sample(rng)) * sqrt_h;
        }
        out.push(norm_sq(&w).sqrt());
    }
    out
}

/// Sampler for the conditioned Brownian motion of a fixed `(Σ, η)`.
#[derive(Debug, Clone)]
pub struct ConditionedBm<T> {
    transform: ConditioningTransform<T>,
    mr: Matrix<T>,
    eta: Direction<T>,
}

impl<T: Real> ConditionedBm<T> {
    pub fn new(sigma: &Matrix<T>, eta: &Direction<T>) -> Result<Self> {
        let transform = conditioning_transform(sigma, eta)?;
        let mr = transform.mr();
        Ok(Self {
            transform,
            mr,
            eta: eta.clone(),
        })
    }

    pub fn transform(&self) -> &ConditioningTransform<T> {
        &self.transform
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    /// `x + M R (β - β₀, B⁽²⁾, …)` on the grid, with `β₀ = <x, η> / scale`.
    pub fn sample_from<R: Rng + ?Sized>(&self, x: &[T], horizon: T, step: T, rng: &mut R) -> Result<GridPath<T>> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        let level = self.eta.inner(x);
        if level < T::zero() {
            return Err(Error::OutsideHalfSpace(level.to_f64_lossy()));
        }
        if !(step > T::zero()) || horizon < step {
            return Err(Error::param("step", "need 0 < step <= horizon"));
        }
        let n = grid_steps(horizon, step);
        let beta0 = level / self.transform.scale;
        let beta = bessel3_path(beta0, n, step, rng);
        let sqrt_h = step.sqrt();
        let mut y = vec![T::zero(); d];
        let mut out = vec![T::zero(); d];
        let mut data = Vec::with_capacity((n + 1) * d);
        data.extend_from_slice(x);
        for &b in &beta[1..] {
            y[0] = b - beta0;
            for c in &mut y[1..] {
                *c = *c + T::lit(StandardNormal.sample(rng)) * sqrt_h;
            }
            self.mr.mul_vec_into(&y, &mut out);
            data.extend(out.iter().zip(x).map(|(&o, &s)| o + s));
        }
        Ok(GridPath::from_parts_unchecked(step, d, data, None))
    }

    pub fn sample<R: Rng + ?Sized>(&self, horizon: T, step: T, rng: &mut R) -> Result<GridPath<T>> {
        self.sample_from(&vec![T::zero(); self.dim()], horizon, step, rng)
    }

    /// Exact draw of the marginal at time `t`, started from the origin.
    pub fn sample_at<R: Rng + ?Sized>(&self, t: T, rng: &mut R) -> Vec<T> {
        let sqrt_t = t.sqrt();
        let mut y = vec![T::zero(); self.dim()];
        let g: [T; 3] = std::array::from_fn(|_| T::lit(StandardNormal.sample(rng)));
        y[0] = norm_sq(&g).sqrt() * sqrt_t;
        for c in &mut y[1..] {
            *c = T::lit(StandardNormal.sample(rng)) * sqrt_t;
        }
        self.mr.mul_vec(&y)
    }

    /// `<x, η> / scale` maps a conditioned path onto its Bessel-3 coordinate.
    pub fn bessel_coordinate(&self, x: &[T]) -> T {
        dot(x, self.eta.as_slice()) / self.transform.scale
    }
}

/// Conditioned Brownian path from the origin.
pub fn conditioned_bm_path<T: Real, R: Rng + ?Sized>(
    sigma: &Matrix<T>,
    eta: &Direction<T>,
    horizon: T,
    step: T,
    rng: &mut R,
) -> Result<GridPath<T>> {
    ConditionedBm::new(sigma, eta)?.sample(horizon, step, rng)
}

/// Conditioned Brownian path from a point of the closed half-space.
pub fn conditioned_bm_from_x<T: Real, R: Rng + ?Sized>(
    sigma: &Matrix<T>,
    eta: &Direction<T>,
    x: &[T],
    horizon: T,
    step: T,
    rng: &mut R,
) -> Result<GridPath<T>> {
    ConditionedBm::new(sigma, eta)?.sample_from(x, horizon, step, rng)
}

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

#[inline]
fn normal_pdf(z: f64, var: f64) -> f64 {
    (-z * z / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

#[inline]
fn normal_cdf(z: f64, var: f64) -> f64 {
    0.5 * erfc(-z / (2.0 * var).sqrt())
}

/// Transition density `q_t(x, y)` of the Bessel-3 process on `(0, inf)`.
pub fn bessel3_transition_density(x: f64, y: f64, t: f64) -> f64 {
    if y <= 0.0 || t <= 0.0 {
        return 0.0;
    }
    if x <= 1e-8 {
        return SQRT_2_OVER_PI * y * y * t.powf(-1.5) * (-y * y / (2.0 * t)).exp();
    }
    (y / x) * (normal_pdf(y - x, t) - normal_pdf(y + x, t))
}

/// `P_x(β_t <= y)` for the Bessel-3 process, in closed form.
pub fn bessel3_cdf(x: f64, y: f64, t: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if x <= 1e-8 {
        let s = y / t.sqrt();
        return (erf(s / std::f64::consts::SQRT_2) - SQRT_2_OVER_PI * s * (-s * s / 2.0).exp()).clamp(0.0, 1.0);
    }
    let v = normal_cdf(y - x, t) + normal_cdf(y + x, t) - 1.0 + (t / x) * (normal_pdf(y + x, t) - normal_pdf(y - x, t));
    v.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) {
        assert!(a.max_abs_diff(b) <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn cholesky_examples() {
        close(&cholesky(&Matrix::identity(2)).unwrap(), &Matrix::identity(2), 0.0);
        let s = Matrix::from_rows(&[vec![1.0, -0.8], vec![-0.8, 1.0]]).unwrap();
        let l = cholesky(&s).unwrap();
        close(&l, &Matrix::from_rows(&[vec![1.0, 0.0], vec![-0.8, 0.6]]).unwrap(), 1e-15);
        close(&l.matmul(&l.transpose()).unwrap(), &s, 1e-15);

        let (s1, s2, rho) = (1.7_f64, 0.4_f64, 0.35_f64);
        let s = Matrix::from_rows(&[vec![s1 * s1, rho * s1 * s2], vec![rho * s1 * s2, s2 * s2]]).unwrap();
        let expect = Matrix::from_rows(&[vec![s1, 0.0], vec![rho * s2, s2 * (1.0 - rho * rho).sqrt()]]).unwrap();
        close(&cholesky(&s).unwrap(), &expect, 1e-14);
    }

    #[test]
    fn cholesky_rank_deficient_and_indefinite() {
        let s = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let l = cholesky(&s).unwrap();
        close(&l.matmul(&l.transpose()).unwrap(), &s, 1e-12);
        assert_eq!(l[(1, 1)], 0.0);
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&bad), Err(Error::NotPsd { pivot: 1, .. })));
        let neg = Matrix::from_rows(&[vec![-1.0]]).unwrap();
        assert!(cholesky(&neg).is_err());
    }

    #[test]
    fn householder_examples() {
        close(&rotation_to_e1(&[1.0, 0.0, 0.0]).unwrap(), &Matrix::identity(3), 0.0);
        let h = rotation_to_e1(&[0.0, 1.0]).unwrap();
        close(&h, &Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(), 0.0);
        assert!(rotation_to_e1(&[1.0, 1.0]).is_err());
        let u: [f64; 3] = [0.48, -0.6, 0.64];
        let h = rotation_to_e1(&u).unwrap();
        let e = h.mul_vec(&u);
        assert!((e[0] - 1.0).abs() < 1e-12 && e[1].abs() < 1e-12 && e[2].abs() < 1e-12);
        close(&h.matmul(&h.transpose()).unwrap(), &Matrix::identity(3), 1e-12);
    }

    #[test]
    fn transform_identity_case() {
        let t = conditioning_transform(&Matrix::identity(2), &Direction::axis(2, 0)).unwrap();
        assert_eq!(t.scale, 1.0);
        close(&t.m, &Matrix::identity(2), 0.0);
        close(&t.r, &Matrix::identity(2), 0.0);
    }

    #[test]
    fn transform_reduces_to_cholesky_along_first_axis() {
        let rho = -0.3_f64;
        let s = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let t = conditioning_transform(&s, &Direction::new(vec![1.0, 0.0]).unwrap()).unwrap();
        let expect = Matrix::from_rows(&[vec![1.0, 0.0], vec![rho, (1.0 - rho * rho).sqrt()]]).unwrap();
        close(&t.mr(), &expect, 1e-15);
    }

    #[test]
    fn degenerate_direction_rejected() {
        let s = Matrix::diagonal(&[0.0, 1.0]);
        assert!(matches!(
            conditioning_transform(&s, &Direction::axis(2, 0)),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn one_dimensional_negative_direction() {
        let t = conditioning_transform(&Matrix::diagonal(&[4.0]), &Direction::new(vec![-1.0]).unwrap()).unwrap();
        assert_eq!(t.scale, 2.0);
        assert_eq!(t.mr()[(0, 0)], -2.0);
    }

    #[test]
    fn conditioned_path_stays_in_halfspace() {
        let s = Matrix::from_rows(&[vec![1.0, -0.8], vec![-0.8, 1.0]]).unwrap();
        let eta = Direction::new(vec![1.0, 2.0]).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let p = conditioned_bm_path(&s, &eta, 1.0, 1e-3, &mut rng).unwrap();
        assert_eq!(p.live_steps(), 1000);
        assert!(p.live_points().skip(1).all(|x| eta.inner(x) > 0.0));
    }

    #[test]
    fn one_dimensional_reduction_is_bessel() {
        let s = Matrix::identity(1);
        let eta = Direction::new(vec![1.0]).unwrap();
        let p = conditioned_bm_path(&s, &eta, 1.0, 0.1, &mut RngStream::new(4, 2).rng()).unwrap();
        let b = bessel3_path(0.0, 10, 0.1, &mut RngStream::new(4, 2).rng());
        assert_eq!(p.live_data(), &b[..]);
    }

    #[test]
    fn from_x_rejects_outside_and_starts_at_x() {
        let s = Matrix::identity(2);
        let eta = Direction::new(vec![1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        assert!(matches!(
            conditioned_bm_from_x(&s, &eta, &[-1.0, 0.5], 1.0, 0.1, &mut rng),
            Err(Error::OutsideHalfSpace(_))
        ));
        let p = conditioned_bm_from_x(&s, &eta, &[1.0, -0.5], 1.0, 0.1, &mut rng).unwrap();
        assert_eq!(p.start(), &[1.0, -0.5]);
        assert!(p.live_points().all(|x| eta.inner(x) >= 0.0));
        let z = conditioned_bm_from_x(&s, &eta, &[0.0, 0.0], 1.0, 0.1, &mut RngStream::new(8, 0).rng()).unwrap();
        let c = conditioned_bm_path(&s, &eta, 1.0, 0.1, &mut RngStream::new(8, 0).rng()).unwrap();
        assert_eq!(z, c);
    }

    #[test]
    fn bessel_paths_nonnegative() {
        let b = bessel3_path(0.0, 1000, 0.01, &mut RngStream::new(3, 3).rng());
        assert_eq!(b[0], 0.0);
        assert!(b.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn density_mode_from_zero() {
        let q = |y: f64| bessel3_transition_density(0.0, y, 1.0);
        let m = 2f64.sqrt();
        assert!(q(m) > q(m - 1e-3) && q(m) > q(m + 1e-3));
    }

    #[test]
    fn cdf_matches_density_derivative() {
        for &x in &[0.0, 0.3, 1.0, 5.0] {
            for &y in &[0.2, 1.0, 2.5, 6.0] {
                let h = 1e-5;
                let num = (bessel3_cdf(x, y + h, 0.7) - bessel3_cdf(x, y - h, 0.7)) / (2.0 * h);
                let q = bessel3_transition_density(x, y, 0.7);
                assert!((num - q).abs() < 1e-6, "x={x} y={y}: {num} vs {q}");
            }
        }
    }
}
