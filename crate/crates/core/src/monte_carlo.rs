//! Monte Carlo estimates of threshold-rule success probabilities.
//!
//! Trials are cut into fixed-size chunks and chunk `i` draws from
//! [`stream_rng`]`(seed, i)`. Chunks run in parallel and only integer
//! success counts are combined, so an estimate depends on
//! `(seed, trials, chunk_size)` and not on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_threshold, Error, Result};
use crate::models::ModelSpec;
use crate::perm::RankDirection;
use crate::sampling::stream_rng;
use crate::secretary::run_threshold_strategy;

pub const DEFAULT_CHUNK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        assert!(trials >= 1 && successes <= trials);
        let p_hat = successes as f64 / trials as f64;
        let std_err = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        MonteCarloEstimate { successes, trials, p_hat, std_err, seed }
    }

    /// `|p_hat − exact| ≤ k · std_err`.
    pub fn agrees_with(&self, exact: f64, k: f64) -> bool {
        (self.p_hat - exact).abs() <= k * self.std_err
    }

    pub fn record(&self, spec: &ModelSpec, m: usize, dir: RankDirection) -> EstimateRecord {
        EstimateRecord {
            family: spec.family().name().to_string(),
            n: spec.n(),
            m,
            direction: dir,
            params: spec.params_label(),
            trials: self.trials,
            successes: self.successes,
            p_hat: self.p_hat,
            std_err: self.std_err,
            seed: self.seed,
        }
    }
}

/// Flat serialization of an estimate and the configuration behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub direction: RankDirection,
    pub params: String,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub seed: u64,
}

pub fn monte_carlo_success(
    spec: &ModelSpec,
    m: usize,
    dir: RankDirection,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    monte_carlo_success_chunked(spec, m, dir, trials, seed, DEFAULT_CHUNK_SIZE)
}

pub fn monte_carlo_success_chunked(
    spec: &ModelSpec,
    m: usize,
    dir: RankDirection,
    trials: u64,
    seed: u64,
    chunk_size: u64,
) -> Result<MonteCarloEstimate> {
    check_threshold(spec.n(), m)?;
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    if chunk_size == 0 {
        return Err(Error::BadParameter("chunk size must be at least 1".into()));
    }
    let chunks = trials.div_ceil(chunk_size);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, chunk);
            let len = chunk_size.min(trials - chunk * chunk_size);
            (0..len)
                .filter(|_| {
                    let perm = spec.sample(&mut rng);
                    run_threshold_strategy(&perm, m, dir).expect("threshold checked").success
                })
                .count() as u64
        })
        .sum();
    Ok(MonteCarloEstimate::from_counts(successes, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_is_zero_or_one() {
        let spec = ModelSpec::uniform(5).unwrap();
        let est = monte_carlo_success(&spec, 2, RankDirection::Max, 1, 3).unwrap();
        assert!(est.p_hat == 0.0 || est.p_hat == 1.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn mallows_two_items_take_first() {
        // success iff σ = 12, probability 1/(1 + q)
        let spec = ModelSpec::mallows(2, 2.0).unwrap();
        let est = monte_carlo_success(&spec, 0, RankDirection::Min, 200_000, 1729).unwrap();
        assert!(est.agrees_with(1.0 / 3.0, 4.0), "{est:?}");
    }

    #[test]
    fn thread_count_does_not_matter() {
        let spec = ModelSpec::mallows(12, 0.8).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_success(&spec, 4, RankDirection::Max, 50_000, 99).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = ModelSpec::uniform(3).unwrap();
        assert!(monte_carlo_success(&spec, 3, RankDirection::Min, 10, 1).is_err());
        assert!(monte_carlo_success(&spec, 1, RankDirection::Min, 0, 1).is_err());
    }
}
