//! Two-sample and goodness-of-fit tests, plus 2-d kernel density grids.

use std::cmp::Ordering;
use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    /// Second sample size; for one-sample tests the number of cells or 0.
    pub n_b: usize,
    pub method: String,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64, n_a: usize, n_b: usize, method: &str) -> Self {
        Self {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            n_a,
            n_b,
            method: method.to_string(),
        }
    }
}

#[inline]
fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_points<P: AsRef<[f64]>>(a: &[P], b: &[P]) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    let d = a[0].as_ref().len();
    for p in a.iter().chain(b) {
        if p.as_ref().len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.as_ref().len(),
            });
        }
    }
    Ok(d)
}

/// Energy distance V-statistic
/// `2/(nm) ΣΣ‖aᵢ−bⱼ‖ − 1/n² ΣΣ‖aᵢ−aᵢ'‖ − 1/m² ΣΣ‖bⱼ−bⱼ'‖`.
pub fn energy_statistic<P: AsRef<[f64]>>(a: &[P], b: &[P]) -> Result<f64> {
    check_points(a, b)?;
    // Fixed evaluation order makes the result bitwise symmetric in (a, b).
    let (a, b) = if sample_cmp(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let within = |s: &[P]| -> f64 {
        let mut acc = 0.0;
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                acc += dist(s[i].as_ref(), s[j].as_ref());
            }
        }
        2.0 * acc
    };
    let mut between = 0.0;
    for x in a {
        for y in b {
            between += dist(x.as_ref(), y.as_ref());
        }
    }
    let (n, m) = (a.len() as f64, b.len() as f64);
    let e = 2.0 * between / (n * m) - within(a) / (n * n) - within(b) / (m * m);
    Ok(e.max(0.0))
}

/// Pairwise distances of a pooled sample, upper triangle by rows.
struct Condensed {
    n: usize,
    offsets: Vec<usize>,
    d: Vec<f64>,
    row_sums: Vec<f64>,
    total: f64,
}

impl Condensed {
    fn new(points: &[&[f64]]) -> Self {
        let n = points.len();
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for i in 0..n {
            offsets.push(acc);
            acc += n - i - 1;
        }
        let mut d = vec![0.0; acc];
        for i in 0..n {
            let row = &mut d[offsets[i]..offsets[i] + (n - i - 1)];
            for (k, v) in row.iter_mut().enumerate() {
                *v = dist(points[i], points[i + 1 + k]);
            }
        }
        let row_sums: Vec<f64> = (0..n).map(|i| d[offsets[i]..offsets[i] + (n - i - 1)].iter().sum()).collect();
        let total = row_sums.iter().sum();
        Self {
            n,
            offsets,
            d,
            row_sums,
            total,
        }
    }

    /// Energy statistic for the split `mask[i] = 1` (group 1) vs `0`.
    fn statistic(&self, mask: &[f64], n1: usize) -> f64 {
        let n = self.n;
        let n2 = n - n1;
        let (mut s11, mut s22) = (0.0, 0.0);
        for i in 0..n {
            let row = &self.d[self.offsets[i]..self.offsets[i] + (n - i - 1)];
            let dm: f64 = row.iter().zip(&mask[i + 1..]).map(|(x, m)| x * m).sum();
            if mask[i] > 0.5 {
                s11 += dm;
            } else {
                s22 += self.row_sums[i] - dm;
            }
        }
        let s12 = self.total - s11 - s22;
        let (n1, n2) = (n1 as f64, n2 as f64);
        (2.0 * s12 / (n1 * n2) - 2.0 * s11 / (n1 * n1) - 2.0 * s22 / (n2 * n2)).max(0.0)
    }
}

const PERMUTATION_PURPOSE: u64 = 0x5045_524d;

/// Energy two-sample test calibrated by `n_perm` random relabelings.
///
/// `p = (1 + #{permuted >= observed}) / (n_perm + 1)`. The pooled sample is
/// put in a canonical (lexicographic) order and each permutation draws the
/// smaller group first, with permutation `k` driven by substream `k` of
/// `rng`. Consequently swapping `a` and `b` returns the identical p-value.
pub fn energy_permutation_test<P: AsRef<[f64]> + Sync>(a: &[P], b: &[P], n_perm: usize, rng: &RngStream) -> Result<TestResult> {
    check_points(a, b)?;
    if n_perm < 99 {
        return Err(Error::param("n_perm", format!("{n_perm} < 99 permutations")));
    }
    let mut pooled: Vec<(&[f64], bool)> = a.iter().map(|p| (p.as_ref(), true)).chain(b.iter().map(|p| (p.as_ref(), false))).collect();
    pooled.sort_by(|x, y| lex_cmp(x.0, y.0).then(x.1.cmp(&y.1)));
    let points: Vec<&[f64]> = pooled.iter().map(|p| p.0).collect();
    let small_is_a = a.len() <= b.len();
    let n_small = a.len().min(b.len());
    let n = points.len();
    let dm = Condensed::new(&points);
    let observed_mask: Vec<f64> = pooled
        .iter()
        .map(|&(_, from_a)| if from_a == small_is_a { 1.0 } else { 0.0 })
        .collect();
    // With equal sizes both groups are "smallest"; the statistic is symmetric.
    let observed = dm.statistic(&observed_mask, n_small);
    let tol = 1e-12 * (1.0 + observed.abs());
    let exceed: usize = (0..n_perm)
        .into_par_iter()
        .map(|k| {
            let mut r = rng.substream(PERMUTATION_PURPOSE, k as u64).rng();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut r);
            let mut mask = vec![0.0; n];
            for &i in &idx[..n_small] {
                mask[i] = 1.0;
            }
            usize::from(dm.statistic(&mask, n_small) >= observed - tol)
        })
        .sum();
    let p = (1 + exceed) as f64 / (n_perm + 1) as f64;
    Ok(TestResult::new(observed, p, a.len(), b.len(), "energy-permutation"))
}

fn sample_cmp<P: AsRef<[f64]>>(a: &[P], b: &[P]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| lex_cmp(x.as_ref(), y.as_ref()))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Small-x form converges quickly here.
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * pi2 / (8.0 * x * x)).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if (k as u64) % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * x * x).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// One-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (Stephens' finite-sample scaling `sqrt(n) + 0.12 + 0.11/sqrt(n)`).
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestResult> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    let p = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    Ok(TestResult::new(d, p, xs.len(), 0, "ks"))
}

fn chi2_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|c| c.sf(stat)).unwrap_or(f64::NAN)
}

/// Merge adjacent cells (left to right) until each has `weight >= min`; a
/// short tail is folded into the last merged cell.
fn pool_cells(weight: &[f64], min: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut cur = Vec::new();
    let mut acc = 0.0;
    for (i, &w) in weight.iter().enumerate() {
        cur.push(i);
        acc += w;
        if acc >= min {
            groups.push(std::mem::take(&mut cur));
            acc = 0.0;
        }
    }
    if !cur.is_empty() {
        match groups.last_mut() {
            Some(last) => last.extend(cur),
            None => groups.push(cur),
        }
    }
    groups
}

/// Pearson goodness-of-fit against `expected_probs`, pooling adjacent cells
/// until every expected count is at least 5.
pub fn chi2_test(observed: &[u64], expected_probs: &[f64]) -> Result<TestResult> {
    if observed.len() != expected_probs.len() {
        return Err(Error::DimensionMismatch {
            expected: expected_probs.len(),
            got: observed.len(),
        });
    }
    if observed.is_empty() {
        return Err(Error::Empty);
    }
    let total_p: f64 = expected_probs.iter().sum();
    if (total_p - 1.0).abs() > 1e-9 || expected_probs.iter().any(|&p| p < 0.0) {
        return Err(Error::param("expected_probs", format!("must be a probability vector (sum {total_p})")));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::Empty);
    }
    let expected: Vec<f64> = expected_probs.iter().map(|p| p * n as f64).collect();
    let groups = pool_cells(&expected, 5.0);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = g.iter().map(|&i| observed[i] as f64).sum();
        let e: f64 = g.iter().map(|&i| expected[i]).sum();
        if e > 0.0 {
            stat += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            stat = f64::INFINITY;
        }
    }
    let df = groups.len().saturating_sub(1);
    let p = if stat.is_infinite() { 0.0 } else { chi2_sf(stat, df) };
    Ok(TestResult::new(stat, p, n as usize, groups.len(), "chi2"))
}

/// Pearson homogeneity test between two count vectors over the same cells.
pub fn chi2_two_sample(a: &[u64], b: &[u64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::Empty);
    }
    let n = (na + nb) as f64;
    let small = na.min(nb) as f64;
    let weight: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| (x + y) as f64 * small / n).collect();
    let groups = pool_cells(&weight, 5.0);
    let mut stat = 0.0;
    for g in &groups {
        let oa: f64 = g.iter().map(|&i| a[i] as f64).sum();
        let ob: f64 = g.iter().map(|&i| b[i] as f64).sum();
        let col = oa + ob;
        if col == 0.0 {
            continue;
        }
        let ea = col * na as f64 / n;
        let eb = col * nb as f64 / n;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = groups.len().saturating_sub(1);
    Ok(TestResult::new(stat, chi2_sf(stat, df), na as usize, nb as usize, "chi2-two-sample"))
}

/// Density values on a rectangular grid; `values[i][j]` is the density at
/// `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub bandwidth: (f64, f64),
    pub values: Vec<Vec<f64>>,
}

impl DensityGrid {
    /// Trapezoid-rule integral over the grid.
    pub fn mass(&self) -> f64 {
        let w = |g: &[f64], i: usize| -> f64 {
            let left = if i > 0 { g[i] - g[i - 1] } else { 0.0 };
            let right = if i + 1 < g.len() { g[i + 1] - g[i] } else { 0.0 };
            0.5 * (left + right)
        };
        let mut m = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m += w(&self.xs, i) * w(&self.ys, j) * v;
            }
        }
        m
    }

    /// Grid index of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > self.values[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Rows `x,y,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,density")?;
        for (i, &x) in self.xs.iter().enumerate() {
            for (j, &y) in self.ys.iter().enumerate() {
                writeln!(w, "{x},{y},{}", self.values[i][j])?;
            }
        }
        Ok(())
    }
}

fn mean_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Silverman's rule for a bivariate Gaussian kernel: `h_k = σ_k n^{-1/6}`.
pub fn silverman_bandwidth<P: AsRef<[f64]>>(samples: &[P]) -> (f64, f64) {
    let n = samples.len() as f64;
    let (_, sx) = mean_std(samples.iter().map(|p| p.as_ref()[0]));
    let (_, sy) = mean_std(samples.iter().map(|p| p.as_ref()[1]));
    let f = n.powf(-1.0 / 6.0);
    (sx * f, sy * f)
}

/// Gaussian product-kernel density estimate evaluated on `grid_x × grid_y`.
pub fn kde2d<P: AsRef<[f64]>>(samples: &[P], grid_x: &[f64], grid_y: &[f64], bandwidth: Option<(f64, f64)>) -> Result<DensityGrid> {
    if samples.len() < 2 {
        return Err(Error::param("samples", "need at least 2 samples"));
    }
    if samples.iter().any(|p| p.as_ref().len() != 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: samples[0].as_ref().len() });
    }
    let (hx, hy) = match bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(samples),
    };
    if !(hx > 0.0 && hy > 0.0) || !hx.is_finite() || !hy.is_finite() {
        return Err(Error::param("samples", "degenerate sample (zero variance in a coordinate)"));
    }
    let kernel = |g: &[f64], coord: usize, h: f64| -> Vec<Vec<f64>> {
        g.iter()
            .map(|&gv| {
                samples
                    .iter()
                    .map(|p| {
                        let u = (gv - p.as_ref()[coord]) / h;
                        (-0.5 * u * u).exp()
                    })
                    .collect()
            })
            .collect()
    };
    let kx = kernel(grid_x, 0, hx);
    let ky = kernel(grid_y, 1, hy);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * hx * hy * samples.len() as f64);
    let values = kx
        .par_iter()
        .map(|row_x| ky.iter().map(|row_y| norm * row_x.iter().zip(row_y).map(|(a, b)| a * b).sum::<f64>()).collect())
        .collect();
    Ok(DensityGrid {
        xs: grid_x.to_vec(),
        ys: grid_y.to_vec(),
        bandwidth: (hx, hy),
        values,
    })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normal_cloud(n: usize, shift: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut r = RngStream::new(seed, 0).rng();
        (0..n)
            .map(|_| vec![r.sample::<f64, _>(StandardNormal) + shift, r.sample::<f64, _>(StandardNormal) + shift])
            .collect()
    }

    #[test]
    fn energy_hand_values() {
        let a = vec![vec![0.0, 0.0]];
        let b = vec![vec![1.0, 0.0]];
        assert_eq!(energy_statistic(&a, &b).unwrap(), 2.0);
        let c = normal_cloud(30, 0.0, 1);
        let mut d = c.clone();
        d.reverse();
        assert!(energy_statistic(&c, &d).unwrap() < 1e-12);
        assert!(energy_statistic::<Vec<f64>>(&[], &b).is_err());
    }

    #[test]
    fn energy_symmetric() {
        let a = normal_cloud(40, 0.0, 2);
        let b = normal_cloud(25, 0.5, 3);
        assert_eq!(energy_statistic(&a, &b).unwrap(), energy_statistic(&b, &a).unwrap());
    }

    #[test]
    fn condensed_matches_direct() {
        let a = normal_cloud(20, 0.0, 4);
        let b = normal_cloud(13, 1.0, 5);
        let t = energy_permutation_test(&a, &b, 99, &RngStream::new(1, 1)).unwrap();
        let direct = energy_statistic(&a, &b).unwrap();
        assert!((t.statistic - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn permutation_power_and_identity() {
        let a = normal_cloud(500, 0.0, 6);
        let b = normal_cloud(500, 2.0, 7);
        let t = energy_permutation_test(&a, &b, 500, &RngStream::new(2, 0)).unwrap();
        assert!(t.p_value <= 0.002, "{t:?}");
        let same = energy_permutation_test(&a, &a, 99, &RngStream::new(2, 0)).unwrap();
        assert_eq!(same.p_value, 1.0);
        assert!(energy_permutation_test(&a, &b, 50, &RngStream::new(2, 0)).is_err());
    }

    #[test]
    fn permutation_relabeling_invariant() {
        let a = normal_cloud(30, 0.0, 8);
        let b = normal_cloud(45, 0.3, 9);
        let s = RngStream::new(11, 0);
        let ab = energy_permutation_test(&a, &b, 99, &s).unwrap();
        let ba = energy_permutation_test(&b, &a, 99, &s).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.statistic, ba.statistic);
    }

    #[test]
    fn ks_constant_sample() {
        let f = |x: f64| x.clamp(0.0, 1.0);
        let t = ks_test(&[0.3; 50], f).unwrap();
        assert!((t.statistic - 0.7).abs() < 1e-12);
        assert!(ks_test(&[], f).is_err());
    }

    #[test]
    fn kolmogorov_sf_known_values() {
        // Classical critical values of the Kolmogorov distribution.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(1.2238) - 0.10).abs() < 1e-4);
        // Both series agree where they switch.
        let a = kolmogorov_sf(1.18 - 1e-9);
        let b = kolmogorov_sf(1.18 + 1e-9);
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn chi2_exact_fit_and_mismatch() {
        let t = chi2_test(&[10, 20, 30, 40], &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        let bad = chi2_test(&[1000, 0, 0, 0], &[0.25; 4]).unwrap();
        assert!(bad.p_value <= 1e-6);
        assert!(chi2_test(&[1, 2], &[0.5, 0.25, 0.25]).is_err());
        assert!(chi2_test(&[1, 2], &[0.5, 0.6]).is_err());
    }

    #[test]
    fn chi2_pooling_of_sparse_cells() {
        let t = chi2_test(&[50, 40, 3, 2, 1, 4], &[0.5, 0.4, 0.03, 0.02, 0.01, 0.04]).unwrap();
        assert_eq!(t.n_b, 4);
        assert!(t.p_value > 0.9);
    }

    #[test]
    fn chi2_two_sample_identical() {
        let t = chi2_two_sample(&[30, 40, 30], &[30, 40, 30]).unwrap();
        assert_eq!(t.statistic, 0.0);
        let u = chi2_two_sample(&[500, 10, 490], &[10, 980, 10]).unwrap();
        assert!(u.p_value < 1e-6);
    }

    #[test]
    fn kde_single_and_two_clusters() {
        let g = linspace(-4.0, 4.0, 81);
        let one = normal_cloud(400, 0.0, 12).iter().map(|p| vec![0.3 * p[0], 0.3 * p[1]]).collect::<Vec<_>>();
        let k = kde2d(&one, &g, &g, None).unwrap();
        let (i, j) = k.argmax();
        assert!(g[i].abs() <= 0.3 && g[j].abs() <= 0.3);
        assert!(k.mass() <= 1.0 + 1e-2);

        let mut two: Vec<Vec<f64>> = one.iter().map(|p| vec![p[0] - 2.0, p[1] - 2.0]).collect();
        two.extend(one.iter().map(|p| vec![p[0] + 2.0, p[1] + 2.0]));
        let k = kde2d(&two, &g, &g, None).unwrap();
        let at = |x: f64| {
            let i = g.iter().position(|&v| (v - x).abs() < 1e-9).unwrap();
            k.values[i][i]
        };
        assert!(at(-2.0) > at(0.0) && at(2.0) > at(0.0));
    }

    #[test]
    fn kde_degenerate_rejected() {
        let pts = vec![vec![1.0, 1.0]; 10];
        assert!(kde2d(&pts, &[0.0], &[0.0], None).is_err());
        assert!(kde2d(&pts[..1], &[0.0], &[0.0], Some((1.0, 1.0))).is_err());
    }

    #[test]
    fn kde_translation_equivariant() {
        let pts = normal_cloud(200, 0.0, 13);
        let g = linspace(-3.0, 3.0, 31);
        let v = (0.75, -1.25);
        let shifted: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + v.0, p[1] + v.1]).collect();
        let gx: Vec<f64> = g.iter().map(|x| x + v.0).collect();
        let gy: Vec<f64> = g.iter().map(|y| y + v.1).collect();
        let a = kde2d(&pts, &g, &g, Some((0.4, 0.5))).unwrap();
        let b = kde2d(&shifted, &gx, &gy, Some((0.4, 0.5))).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
