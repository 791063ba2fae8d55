use std::collections::HashMap;
use std::fmt::Display;
use std::hash::Hash;

use num_traits::{CheckedMul, One, Zero};
use serde::Serialize;

use super::ExperimentReport;
use crate::construct::{discrete_conditioned_pair, split_at_directional_infimum};
use crate::error::{Error, Result};
use crate::path::{Direction, GridPath};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::Rational;

const MAX_SEQUENCES: u128 = 10_000_000;

/// A finite increment law `P(ΔX = increments[k]) ∝ weights[k]` and a direction.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationInput<T> {
    pub increments: Vec<Vec<T>>,
    pub weights: Vec<Rational>,
    pub eta: Direction<T>,
}

/// Steps `+1` and `-1` with equal weight, `η = (1)`.
pub fn default_increments_1d() -> EnumerationInput<Rational> {
    let r = |x: i64| Rational::from_integer(x);
    EnumerationInput {
        increments: vec![vec![r(1)], vec![r(-1)]],
        weights: vec![r(1), r(1)],
        eta: Direction::new(vec![r(1)]).expect("nonzero"),
    }
}

/// Steps `(1,0)`, `(-1,1)`, `(0,-1)` with equal weight, `η = (1,2)`.
pub fn default_increments_2d() -> EnumerationInput<Rational> {
    let r = |x: i64| Rational::from_integer(x);
    EnumerationInput {
        increments: vec![vec![r(1), r(0)], vec![r(-1), r(1)], vec![r(0), r(-1)]],
        weights: vec![r(1); 3],
        eta: Direction::new(vec![r(1), r(2)]).expect("nonzero"),
    }
}

/// Key of a path pair: the live values of the first and second component.
pub type PairKey<T> = (Vec<T>, Vec<T>);

/// Weighted multisets of `(X↓, X↑)` and of `(-←X, →X)` over all `kⁿ`
/// increment sequences of length `n`.
#[allow(clippy::type_complexity)]
pub fn representation_multisets<T>(
    input: &EnumerationInput<T>,
    n: usize,
) -> Result<(HashMap<PairKey<T>, Rational>, HashMap<PairKey<T>, Rational>)>
where
    T: Scalar + Eq + Hash,
{
    let k = input.increments.len();
    if k == 0 {
        return Err(Error::Empty);
    }
    if input.weights.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: input.weights.len() });
    }
    if input.weights.iter().any(|w| *w <= Rational::zero()) {
        return Err(Error::param("weights", "must be positive"));
    }
    let d = input.eta.dim();
    if let Some(bad) = input.increments.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > MAX_SEQUENCES {
        return Err(Error::EnumerationTooLarge(count));
    }

    let mut construction: HashMap<PairKey<T>, Rational> = HashMap::new();
    let mut split: HashMap<PairKey<T>, Rational> = HashMap::new();
    let mut digits = vec![0usize; n];
    for _ in 0..count {
        let mut data = vec![T::zero(); d];
        let mut weight = Rational::one();
        for &g in &digits {
            let last = data.len() - d;
            for c in 0..d {
                let v = data[last + c] + input.increments[g][c];
                data.push(v);
            }
            weight = weight
                .checked_mul(&input.weights[g])
                .ok_or_else(|| Error::param("weights", "product of weights overflows"))?;
        }
        let path = GridPath::new(T::one(), d, data, None)?;
        let trace = discrete_conditioned_pair(&path, &input.eta)?;
        let pair = split_at_directional_infimum(&path, &input.eta)?;
        let key_c = (trace.down.live_data().to_vec(), trace.up.live_data().to_vec());
        let key_s = (pair.pre.neg().live_data().to_vec(), pair.post.live_data().to_vec());
        *construction.entry(key_c).or_insert_with(Rational::zero) += weight;
        *split.entry(key_s).or_insert_with(Rational::zero) += weight;

        for digit in digits.iter_mut().rev() {
            *digit += 1;
            if *digit < k {
                break;
            }
            *digit = 0;
        }
    }
    Ok((construction, split))
}

#[derive(Serialize)]
struct Params {
    increments: Vec<Vec<String>>,
    weights: Vec<String>,
    eta: Vec<String>,
    n: usize,
}

/// Exhaustive check that `(X↓, X↑)` and `(-←X, →X)` have the same law for
/// i.i.d. increments drawn from `input`, over paths of `n` steps.
///
/// The verdict is exact equality of the two weighted multisets.
pub fn check_representation_enumeration<T>(input: &EnumerationInput<T>, n: usize) -> Result<ExperimentReport>
where
    T: Scalar + Eq + Hash + Display,
{
    let strings = |v: &[T]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
    let params = Params {
        increments: input.increments.iter().map(|v| strings(v)).collect(),
        weights: input.weights.iter().map(ToString::to_string).collect(),
        eta: strings(input.eta.as_slice()),
        n,
    };
    let mut report = ExperimentReport::new("enum", params, &RngStream::new(0, 0));
    let (construction, split) = representation_multisets(input, n)?;
    let mismatched = construction
        .iter()
        .filter(|(key, w)| split.get(*key) != Some(*w))
        .count()
        + split.keys().filter(|key| !construction.contains_key(*key)).count();
    let sequences = input.increments.len().pow(n as u32);
    report.total = sequences;
    report.retained = sequences;
    report.summary("sequences", sequences);
    report.summary("distinct_construction_pairs", construction.len());
    report.summary("distinct_split_pairs", split.len());
    report.summary("mismatched_pairs", mismatched);
    let total: Rational = construction.values().copied().fold(Rational::zero(), |a, b| a + b);
    report.summary("total_weight", total.to_string());
    report.verdict = Some(mismatched == 0);
    Ok(report)
}
