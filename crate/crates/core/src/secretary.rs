//! Threshold stopping rules and the exact, enumeration-based quantities
//! built on them.
//!
//! The rule `S(n, M)` rejects the first `M` items and then takes the first
//! item that beats everything seen so far; if none appears, the last item
//! is taken. It succeeds when the item taken is the overall best.

use serde::Serialize;

use crate::error::{check_threshold, Error, Result};
use crate::models::{enumerate_support, ModelSpec};
use crate::perm::{Permutation, RankDirection};

/// Largest `n` accepted by the record-indicator diagnostics.
pub const RECORD_LAW_LIMIT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Selection {
    /// 1-based position of the item taken.
    pub index: usize,
    pub value: usize,
    pub success: bool,
}

pub fn run_threshold_strategy(p: &Permutation, m: usize, dir: RankDirection) -> Result<Selection> {
    let n = p.len();
    check_threshold(n, m)?;
    let s = p.as_slice();
    let index = if m == 0 {
        1
    } else {
        let mut best = s[0];
        let mut chosen = n;
        for (i, &v) in s.iter().enumerate().skip(1) {
            if dir.beats(v, best) {
                if i >= m {
                    chosen = i + 1;
                    break;
                }
                best = v;
            }
        }
        chosen
    };
    let value = s[index - 1];
    Ok(Selection { index, value, success: value == dir.best(n) })
}

/// Membership in the success event written as a union over the position
/// `j` of the best item: `σ_j` is best and the best of `σ_1..σ_{j−1}` lies
/// among the first `M`.
pub fn in_success_event(p: &Permutation, m: usize, dir: RankDirection) -> Result<bool> {
    let n = p.len();
    check_threshold(n, m)?;
    let s = p.as_slice();
    let best = dir.best(n);
    if m == 0 {
        return Ok(s[0] == best);
    }
    let j = p.position_of(best).expect("best value present");
    if j <= m {
        return Ok(false);
    }
    let pick = |a: usize, b: usize| if dir.beats(a, b) { a } else { b };
    let head = s[..m].iter().copied().reduce(pick).expect("m ≥ 1");
    let before = s[..j - 1].iter().copied().reduce(pick).expect("j ≥ 2");
    Ok(head == before)
}

/// `Σ pmf(σ)` over the success event of `S(n, M)`.
pub fn exact_success_by_enumeration(spec: &ModelSpec, m: usize, dir: RankDirection) -> Result<f64> {
    check_threshold(spec.n(), m)?;
    let mut total = 0.0;
    for (perm, prob) in enumerate_support(spec)? {
        if in_success_event(&perm, m, dir)? {
            total += prob;
        }
    }
    Ok(total)
}

/// Exact joint law of the record indicators `U_2, …, U_n`.
///
/// Outcomes are indexed by bitmask: bit `j − 2` is `U_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordJointLaw {
    n: usize,
    table: Vec<f64>,
}

impl RecordJointLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `P(U_2 … U_n = u)` with `u[k]` standing for `U_{k+2}`.
    pub fn prob(&self, u: &[bool]) -> f64 {
        assert_eq!(u.len() + 1, self.n, "need one flag per index 2..=n");
        let mask = u.iter().enumerate().fold(0usize, |acc, (k, &b)| acc | (usize::from(b) << k));
        self.table[mask]
    }

    /// `P(U_j = 1)` for `j` in `1..=n`; `U_1 = 1` always.
    pub fn marginal(&self, j: usize) -> f64 {
        assert!((1..=self.n).contains(&j));
        if j == 1 {
            return 1.0;
        }
        let bit = 1 << (j - 2);
        self.table.iter().enumerate().filter(|(mask, _)| mask & bit != 0).map(|(_, p)| p).sum()
    }

    /// `P(U_j = 1)` for `j = 2..=n`.
    pub fn marginals(&self) -> Vec<f64> {
        (2..=self.n).map(|j| self.marginal(j)).collect()
    }

    /// `(mask, probability)` for every outcome.
    pub fn outcomes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.table.iter().copied().enumerate()
    }

    /// `max_u |P(U = u) − Π_j P(U_j = u_j)|`.
    pub fn independence_defect(&self) -> f64 {
        let marg = self.marginals();
        self.outcomes()
            .map(|(mask, p)| {
                let product: f64 = marg
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| if mask >> k & 1 == 1 { m } else { 1.0 - m })
                    .product();
                (p - product).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn record_joint_law(spec: &ModelSpec, dir: RankDirection) -> Result<RecordJointLaw> {
    let n = spec.n();
    if n > RECORD_LAW_LIMIT {
        return Err(Error::TooLarge { n, limit: RECORD_LAW_LIMIT });
    }
    let mut table = vec![0.0; 1 << (n - 1)];
    for (perm, prob) in enumerate_support(spec)? {
        let mask = perm
            .record_indicators(dir)
            .iter()
            .skip(1)
            .enumerate()
            .fold(0usize, |acc, (k, &b)| acc | (usize::from(b) << k));
        table[mask] += prob;
    }
    Ok(RecordJointLaw { n, table })
}

pub fn independence_defect(spec: &ModelSpec, dir: RankDirection) -> Result<f64> {
    Ok(record_joint_law(spec, dir)?.independence_defect())
}

/// Odds `r_j = p_j / (1 − p_j)` summed from each index to the end.
///
/// `record_probs[k]` is `p_{k+2}`; entry `k` of the result is
/// `Σ_{j ≥ k+2} r_j`. A probability of exactly 1 has infinite odds.
pub fn odds_suffix_sums(record_probs: &[f64]) -> Result<Vec<f64>> {
    for (k, &p) in record_probs.iter().enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::BadProbability { index: k + 2, value: p });
        }
    }
    let mut out = vec![0.0; record_probs.len()];
    let mut acc = 0.0;
    for (k, &p) in record_probs.iter().enumerate().rev() {
        acc += if p == 1.0 { f64::INFINITY } else { p / (1.0 - p) };
        out[k] = acc;
    }
    Ok(out)
}

/// Threshold prescribed by the odds algorithm for independent record
/// indicators with `P(U_j = 1) = p_j`, `j = 2..n`.
///
/// Summing odds backwards from `n`, `s` is the first index where the sum
/// reaches 1 and the rule stops from `s` on, i.e. `M = s − 1`. Since
/// `U_1 = 1` always, a total below 1 gives `s = 1` and `M = 0`.
pub fn bruss_odds_threshold(record_probs: &[f64]) -> Result<usize> {
    let suffix = odds_suffix_sums(record_probs)?;
    // suffix[k] belongs to index k + 2, so M = s − 1 = k + 1
    Ok(suffix.iter().rposition(|&s| s >= 1.0).map_or(0, |k| k + 1))
}
