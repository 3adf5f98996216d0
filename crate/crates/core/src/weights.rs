//! Positive weight vectors `θ_1, …, θ_n` for the Luce and p-shifted models.
//!
//! Weights are stored as natural logarithms. Geometric weights `θ_i = q^i`
//! span `n·|log q|` nats, which leaves the `f64` range for moderate `n`;
//! everything downstream (pmfs, closed forms, samplers) works with log
//! weights and log prefix sums so those vectors stay usable.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `log(e^a + e^b)` without overflow.
#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    ln_theta: Vec<f64>,
    ln_total: f64,
    label: Option<String>,
}

#[allow(clippy::len_without_is_empty)]
impl WeightVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        for (i, &t) in theta.iter().enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "weight {} = {t} is not positive and finite",
                    i + 1
                )));
            }
        }
        let label = theta.iter().map(|t| format!("{t}")).collect::<Vec<_>>().join(",");
        Ok(Self::from_ln(theta.iter().map(|t| t.ln()).collect(), Some(label)))
    }

    /// Builds from log weights; every entry must be finite.
    pub fn from_ln_weights(ln_theta: Vec<f64>) -> Result<Self> {
        if ln_theta.is_empty() || ln_theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidWeights("log weights must be finite and non-empty".into()));
        }
        Ok(Self::from_ln(ln_theta, None))
    }

    fn from_ln(ln_theta: Vec<f64>, label: Option<String>) -> Self {
        let ln_total = ln_theta.iter().fold(f64::NEG_INFINITY, |acc, &x| log_add_exp(acc, x));
        WeightVector { ln_theta, ln_total, label }
    }

    /// `θ_i = 1`.
    pub fn unit(n: usize) -> Self {
        Self::from_ln(vec![0.0; n.max(1)], Some("unit".into()))
    }

    /// `θ_i = q^i`; with these weights the p-shifted law is Mallows(q).
    pub fn geometric(q: f64, n: usize) -> Result<Self> {
        crate::error::check_q(q)?;
        let lq = q.ln();
        let ln_theta = (1..=n.max(1)).map(|i| i as f64 * lq).collect();
        Ok(Self::from_ln(ln_theta, Some(format!("geom:{q}"))))
    }

    /// `θ_j = n + 1 − j`, the law of reduced exponential spacings.
    pub fn sukhatme(n: usize) -> Self {
        let n = n.max(1);
        let ln_theta = (1..=n).map(|j| ((n + 1 - j) as f64).ln()).collect();
        Self::from_ln(ln_theta, Some("sukhatme".into()))
    }

    /// `θ_j = j`.
    pub fn reverse_sukhatme(n: usize) -> Self {
        let ln_theta = (1..=n.max(1)).map(|j| (j as f64).ln()).collect();
        Self::from_ln(ln_theta, Some("rev-sukhatme".into()))
    }

    /// Parses `"1,2,3"`, `unit`, `geom:<q>`, `sukhatme` or `rev-sukhatme`.
    /// Shorthands need `n`; an inline list must have exactly `n` entries
    /// when `n` is given.
    pub fn parse(spec: &str, n: Option<usize>) -> Result<Self> {
        let spec = spec.trim();
        let need_n = || {
            n.filter(|&n| n >= 1)
                .ok_or_else(|| Error::InvalidWeights(format!("shorthand {spec:?} needs n")))
        };
        let lower = spec.to_ascii_lowercase();
        let w = match lower.as_str() {
            "unit" => Self::unit(need_n()?),
            "sukhatme" => Self::sukhatme(need_n()?),
            "rev-sukhatme" | "reverse-sukhatme" => Self::reverse_sukhatme(need_n()?),
            "linear" => Self::reverse_sukhatme(need_n()?),
            s if s.starts_with("geom:") => {
                let q: f64 = s[5..]
                    .parse()
                    .map_err(|_| Error::InvalidWeights(format!("bad ratio in {spec:?}")))?;
                Self::geometric(q, need_n()?).map_err(|e| Error::InvalidWeights(e.to_string()))?
            }
            _ => {
                let theta = spec
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidWeights(format!("cannot parse {tok:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::new(theta)?
            }
        };
        if let Some(n) = n {
            if w.len() != n {
                return Err(Error::InvalidWeights(format!(
                    "expected {n} weights, got {}",
                    w.len()
                )));
            }
        }
        Ok(w)
    }

    /// One weight per non-blank line.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidWeights(format!("{}: {e}", path.display())))?;
        let theta = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::InvalidWeights(format!("cannot parse {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(theta)
    }

    pub fn len(&self) -> usize {
        self.ln_theta.len()
    }

    /// Short name for records, e.g. `sukhatme` or `1,2,3`.
    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => self
                .theta()
                .iter()
                .map(|t| format!("{t}"))
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    pub fn ln_theta(&self) -> &[f64] {
        &self.ln_theta
    }

    /// `θ_i` for 1-based `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.ln_theta[i - 1].exp()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.ln_theta.iter().map(|x| x.exp()).collect()
    }

    /// `ω_n = Σ θ_i`.
    pub fn total(&self) -> f64 {
        self.ln_total.exp()
    }

    pub fn ln_total(&self) -> f64 {
        self.ln_total
    }

    /// `log Σ_{i ≤ k} θ_i` for `k = 1..=n` (index `k − 1`).
    pub fn ln_prefix_sums(&self) -> Vec<f64> {
        let mut acc = f64::NEG_INFINITY;
        self.ln_theta
            .iter()
            .map(|&x| {
                acc = log_add_exp(acc, x);
                acc
            })
            .collect()
    }

    /// Weights divided by the largest one, for linear-scale draws.
    pub(crate) fn scaled_to_max(&self) -> Vec<f64> {
        let top = self.ln_theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.ln_theta.iter().map(|x| (x - top).exp()).collect()
    }
}

impl FromStr for WeightVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightVector::parse(s, None)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
