//! Permutations of `[n]` in one-line notation, with the transforms and
//! statistics the secretary-problem formulas need.
//!
//! Values are 1-based throughout the public surface: a permutation of size
//! `n` holds each of `1..=n` exactly once. The textual form is the values
//! separated by single spaces, e.g. `"3 1 4 2"`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;

/// Which end of `[n]` is the best item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankDirection {
    /// The value 1 is the best item; records are running minima.
    Min,
    /// The value `n` is the best item; records are running maxima.
    Max,
}

impl RankDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            RankDirection::Min => "min",
            RankDirection::Max => "max",
        }
    }

    /// The best value in a permutation of size `n`.
    pub fn best(self, n: usize) -> usize {
        match self {
            RankDirection::Min => 1,
            RankDirection::Max => n,
        }
    }

    /// True when `a` beats `b` in this direction.
    #[inline]
    pub fn beats(self, a: usize, b: usize) -> bool {
        match self {
            RankDirection::Min => a < b,
            RankDirection::Max => a > b,
        }
    }
}

impl fmt::Display for RankDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "min" | "down" => Ok(RankDirection::Min),
            "max" | "up" => Ok(RankDirection::Max),
            other => Err(Error::BadParameter(format!("unknown rank direction {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    values: Vec<usize>,
}

#[allow(clippy::len_without_is_empty)]
impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidPermutation { n, detail: "empty sequence".into() });
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation { n, detail: format!("value {v} out of range") });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation { n, detail: format!("value {v} repeated") });
            }
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    /// # Panics
    /// Panics if `n == 0`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations have size at least 1");
        Permutation { values: (1..=n).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.values
    }

    /// 1-based position of value `v`.
    pub fn position_of(&self, v: usize) -> Option<usize> {
        self.values.iter().position(|&x| x == v).map(|i| i + 1)
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { values: inv }
    }

    /// `σ_i ↦ n + 1 − σ_i`.
    pub fn complement(&self) -> Permutation {
        let n = self.len();
        Permutation { values: self.values.iter().map(|&v| n + 1 - v).collect() }
    }

    /// `σ_n … σ_1`.
    pub fn reverse(&self) -> Permutation {
        let mut values = self.values.clone();
        values.reverse();
        Permutation { values }
    }

    /// Number of pairs `i < j` with `σ_j < σ_i`, in `O(n log n)`.
    pub fn inversion_count(&self) -> u64 {
        let n = self.len();
        let mut seen = Fenwick::from_values(&vec![0u32; n]);
        let mut total = 0u64;
        for (i, &v) in self.values.iter().enumerate() {
            // earlier entries that are larger than v
            total += (i as u64) - u64::from(seen.prefix(v));
            seen.add(v - 1, 1);
        }
        total
    }

    /// `U_j = 1` iff `σ_j` is a strict running record of the prefix.
    pub fn record_indicators(&self, dir: RankDirection) -> Vec<bool> {
        let mut best = self.values[0];
        let mut out = Vec::with_capacity(self.len());
        out.push(true);
        for &v in &self.values[1..] {
            let rec = dir.beats(v, best);
            if rec {
                best = v;
            }
            out.push(rec);
        }
        out
    }

    /// Lehmer code: `X_j` counts entries smaller than `j` lying to its right.
    pub fn lehmer_code(&self) -> LehmerCode {
        let n = self.len();
        let pos = self.inverse();
        let mut placed = Fenwick::from_values(&vec![0u32; n]);
        let mut digits = Vec::with_capacity(n - 1);
        for (k, &p) in pos.values.iter().enumerate() {
            // k values (1..=k) placed so far; those at or left of p are not to the right
            if k > 0 {
                digits.push(k - placed.prefix(p) as usize);
            }
            placed.add(p - 1, 1);
        }
        LehmerCode { digits }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.values {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| Error::InvalidPermutation {
                    n: 0,
                    detail: format!("cannot parse {tok:?} as a positive integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Insertion code `X_2, …, X_n` with `0 ≤ X_j ≤ j − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LehmerCode {
    digits: Vec<usize>,
}

impl LehmerCode {
    /// `digits[k]` is `X_{k+2}`; the code describes a permutation of size
    /// `digits.len() + 1`.
    pub fn new(digits: Vec<usize>) -> Result<Self> {
        for (k, &x) in digits.iter().enumerate() {
            let j = k + 2;
            if x >= j {
                return Err(Error::InvalidLehmerCode { j, value: x });
            }
        }
        Ok(LehmerCode { digits })
    }

    pub(crate) fn from_digits_unchecked(digits: Vec<usize>) -> Self {
        LehmerCode { digits }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        LehmerCode { digits: vec![0; n - 1] }
    }

    pub fn n(&self) -> usize {
        self.digits.len() + 1
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// `X_j` for `j` in `2..=n`.
    pub fn digit(&self, j: usize) -> usize {
        self.digits[j - 2]
    }

    pub fn total(&self) -> u64 {
        self.digits.iter().map(|&x| x as u64).sum()
    }

    /// Places 1, then each `j = 2..n` so that exactly `X_j` earlier numbers
    /// sit to its right. Runs in `O(n log n)` by filling slots from the
    /// largest value down.
    pub fn decode(&self) -> Permutation {
        let n = self.n();
        let mut free = Fenwick::from_values(&vec![1u32; n]);
        let mut values = vec![0; n];
        for j in (1..=n).rev() {
            let x = if j == 1 { 0 } else { self.digit(j) };
            // among values 1..=j, j sits at 0-based rank j-1-x from the left
            let slot = free.search((j - 1 - x) as u32);
            free.sub(slot, 1);
            values[slot] = j;
        }
        Permutation::from_vec_unchecked(values)
    }
}

/// `Red(a)`: replaces each entry by its rank (1 = smallest).
pub fn reduce_sequence(a: &[f64]) -> Result<Permutation> {
    if a.is_empty() {
        return Err(Error::InvalidPermutation { n: 0, detail: "empty sequence".into() });
    }
    if a.iter().any(|x| x.is_nan()) {
        return Err(Error::BadParameter("sequence contains NaN".into()));
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_unstable_by(|&i, &j| a[i].total_cmp(&a[j]));
    let mut values = vec![0; a.len()];
    for (rank, w) in order.windows(2).enumerate() {
        if a[w[0]] == a[w[1]] {
            return Err(Error::DuplicateEntries);
        }
        values[w[0]] = rank + 1;
    }
    values[order[a.len() - 1]] = a.len();
    Ok(Permutation::from_vec_unchecked(values))
}

/// All of `S_n` in lexicographic order.
pub fn all_permutations(n: usize) -> Permutations {
    assert!(n >= 1);
    Permutations { next: Some((1..=n).collect()) }
}

#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { values: current })
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}
