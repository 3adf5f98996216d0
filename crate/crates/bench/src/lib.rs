//! Shared fixtures for the benchmarks.

use stopsmith::{ModelSpec, WeightVector};

/// Model instances covering every sampler, all at size `n`.
pub fn sampler_models(n: usize) -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("uniform", ModelSpec::uniform(n).expect("n >= 1")),
        ("mallows-0.9", ModelSpec::mallows(n, 0.9).expect("valid q")),
        ("mallows-1.1", ModelSpec::mallows(n, 1.1).expect("valid q")),
        ("luce-sukhatme", ModelSpec::luce(WeightVector::sukhatme(n))),
        ("luce-inv-sukhatme", ModelSpec::luce_inv(WeightVector::sukhatme(n))),
        ("p-shifted-rev", ModelSpec::p_shifted(WeightVector::reverse_sukhatme(n))),
    ]
}
