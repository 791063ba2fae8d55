use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{purpose, replicate, ExperimentReport};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{chi2_test, chi2_two_sample};

/// Discrete arcsine law `P(k) = C(2k,k) C(2n-2k,n-k) / 4ⁿ`, `k = 0..=n`.
pub fn discrete_arcsine(n: usize) -> Vec<f64> {
    // u[m] = C(2m, m) / 4^m
    let mut u = vec![1.0f64; n + 1];
    for m in 1..=n {
        u[m] = u[m - 1] * (2 * m - 1) as f64 / (2 * m) as f64;
    }
    (0..=n).map(|k| u[k] * u[n - k]).collect()
}

#[derive(Serialize)]
struct Params {
    n_steps: usize,
    n_mc: usize,
}

/// Compare the law of the occupation count `A⁺_n` with the law of the index
/// of the maximum of a Gaussian random walk, and both with the arcsine law.
pub fn check_sparre_andersen(n_steps: usize, n_mc: usize, rng: &RngStream) -> Result<ExperimentReport> {
    if n_steps == 0 {
        return Err(Error::param("n_steps", "must be at least 1"));
    }
    let mut report = ExperimentReport::new("sparre", Params { n_steps, n_mc }, rng);
    let draws = replicate(n_mc, |i| {
        let mut r = rng.substream(purpose::STEPS, i as u64).rng();
        let (mut s, mut best, mut argmax, mut positive) = (0.0f64, 0.0f64, 0usize, 0usize);
        for j in 1..=n_steps {
            s += r.sample::<f64, _>(StandardNormal);
            if s > 0.0 {
                positive += 1;
            }
            if s > best {
                best = s;
                argmax = j;
            }
        }
        (positive, argmax)
    });
    let mut a_plus = vec![0u64; n_steps + 1];
    let mut argmax = vec![0u64; n_steps + 1];
    for &(p, m) in &draws {
        a_plus[p] += 1;
        argmax[m] += 1;
    }
    let law = |c: &[u64]| c.iter().map(|&x| x as f64 / n_mc.max(1) as f64).collect::<Vec<_>>();
    let arcsine = discrete_arcsine(n_steps);
    report.total = n_mc;
    report.retained = n_mc;
    report.summary("a_plus_counts", &a_plus);
    report.summary("argmax_counts", &argmax);
    report.summary("a_plus_law", law(&a_plus));
    report.summary("argmax_law", law(&argmax));
    report.summary("arcsine_law", &arcsine);
    if n_mc > 0 {
        report.tests.insert("a_plus_vs_argmax".into(), chi2_two_sample(&a_plus, &argmax)?);
        report.tests.insert("a_plus_vs_arcsine".into(), chi2_test(&a_plus, &arcsine)?);
        report.tests.insert("argmax_vs_arcsine".into(), chi2_test(&argmax, &arcsine)?);
    }
    Ok(report)
}
