//! Probability mass functions on `S_n`: Mallows, both Luce types,
//! p-shifted and uniform.
//!
//! All masses are computed as logarithms. Factors `1 − q^k` are evaluated
//! as `−expm1(k·log q)` so that `q = 1 ± c/n` keeps full relative precision.

use std::fmt;

use crate::error::{check_q, Error, Result};
use crate::perm::{all_permutations, Permutation};
use crate::weights::{log_add_exp, WeightVector};

/// Largest `n` accepted by brute-force enumeration (`9! = 362880`).
pub const ENUMERATION_LIMIT: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Mallows { q: f64 },
    Luce(WeightVector),
    LuceInv(WeightVector),
    PShifted(WeightVector),
    Uniform,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Mallows { .. } => "mallows",
            Family::Luce(_) => "luce",
            Family::LuceInv(_) => "luce-inv",
            Family::PShifted(_) => "p-shifted",
            Family::Uniform => "uniform",
        }
    }
}

/// A permutation law on `S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    n: usize,
    family: Family,
}

impl ModelSpec {
    pub fn new(n: usize, family: Family) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParameter("n must be at least 1".into()));
        }
        match &family {
            Family::Mallows { q } => check_q(*q)?,
            Family::Luce(w) | Family::LuceInv(w) | Family::PShifted(w) => {
                if w.len() != n {
                    return Err(Error::BadParameter(format!(
                        "weight vector has {} entries, model has n = {n}",
                        w.len()
                    )));
                }
            }
            Family::Uniform => {}
        }
        Ok(ModelSpec { n, family })
    }

    pub fn mallows(n: usize, q: f64) -> Result<Self> {
        Self::new(n, Family::Mallows { q })
    }

    pub fn luce(w: WeightVector) -> Self {
        ModelSpec { n: w.len(), family: Family::Luce(w) }
    }

    pub fn luce_inv(w: WeightVector) -> Self {
        ModelSpec { n: w.len(), family: Family::LuceInv(w) }
    }

    pub fn p_shifted(w: WeightVector) -> Self {
        ModelSpec { n: w.len(), family: Family::PShifted(w) }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, Family::Uniform)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Parameter description for records: `q` or the weight label.
    pub fn params_label(&self) -> String {
        match &self.family {
            Family::Mallows { q } => format!("{q}"),
            Family::Luce(w) | Family::LuceInv(w) | Family::PShifted(w) => w.label(),
            Family::Uniform => String::new(),
        }
    }

    pub fn ln_pmf(&self, p: &Permutation) -> Result<f64> {
        if p.len() != self.n {
            return Err(Error::BadParameter(format!(
                "permutation has size {}, model has n = {}",
                p.len(),
                self.n
            )));
        }
        Ok(match &self.family {
            Family::Mallows { q } => mallows_ln_pmf(p, *q),
            Family::Luce(w) => luce_ln_pmf(p, w),
            Family::LuceInv(w) => luce_ln_pmf(&p.inverse(), w),
            Family::PShifted(w) => p_shifted_ln_pmf(p, w),
            Family::Uniform => -ln_factorial(self.n),
        })
    }

    pub fn pmf(&self, p: &Permutation) -> Result<f64> {
        self.ln_pmf(p).map(f64::exp)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Uniform => write!(f, "uniform(n={})", self.n),
            Family::Mallows { q } => write!(f, "mallows(n={}, q={q})", self.n),
            other => write!(f, "{}(n={}, w={})", other.name(), self.n, self.params_label()),
        }
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `log((1 − q^k)/(1 − q))`, the log of the q-integer `[k]_q`.
pub(crate) fn ln_q_integer(k: usize, ln_q: f64) -> f64 {
    let k_f = k as f64;
    if ln_q == 0.0 {
        k_f.ln()
    } else if ln_q < 0.0 {
        (-(k_f * ln_q).exp_m1()).ln() - (-ln_q.exp_m1()).ln()
    } else {
        // [k]_q = q^{k-1} (1 − q^{-k}) / (1 − q^{-1})
        (k_f - 1.0) * ln_q + (-(-k_f * ln_q).exp_m1()).ln() - (-(-ln_q).exp_m1()).ln()
    }
}

/// `log Z_n(q)` with `Z_n(q) = Π_{j≤n} (1 − q^j)/(1 − q)` and `Z_n(1) = n!`.
pub fn mallows_ln_normalizer(n: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    let lq = q.ln();
    Ok((1..=n).map(|j| ln_q_integer(j, lq)).sum())
}

/// `Z_n(q)`; infinite when it exceeds the `f64` range (use the log form).
pub fn mallows_normalizer(n: usize, q: f64) -> Result<f64> {
    mallows_ln_normalizer(n, q).map(f64::exp)
}

fn mallows_ln_pmf(p: &Permutation, q: f64) -> f64 {
    let lq = q.ln();
    let inv = p.inversion_count() as f64;
    let ln_z: f64 = (1..=p.len()).map(|j| ln_q_integer(j, lq)).sum();
    let tilt = if inv == 0.0 { 0.0 } else { inv * lq };
    tilt - ln_z
}

/// `q^{I_n(p)} / Z_n(q)`.
pub fn mallows_pmf(p: &Permutation, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(mallows_ln_pmf(p, q).exp())
}

fn luce_ln_pmf(p: &Permutation, w: &WeightVector) -> f64 {
    let lt = w.ln_theta();
    // remaining mass before stage k is the sum of θ over σ_k..σ_n
    let mut remaining = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for &v in p.as_slice().iter().rev() {
        remaining = log_add_exp(remaining, lt[v - 1]);
        acc += lt[v - 1] - remaining;
    }
    acc
}

fn check_weights(p: &Permutation, w: &WeightVector) -> Result<()> {
    if p.len() != w.len() {
        return Err(Error::BadParameter(format!(
            "permutation has size {}, weights have {} entries",
            p.len(),
            w.len()
        )));
    }
    Ok(())
}

/// Weighted draws without replacement: `σ_k` is the `k`-th ball drawn.
pub fn luce_pmf(p: &Permutation, w: &WeightVector) -> Result<f64> {
    check_weights(p, w)?;
    Ok(luce_ln_pmf(p, w).exp())
}

/// The pushforward of the Luce law under `σ ↦ σ^{-1}`.
pub fn luce_inv_pmf(p: &Permutation, w: &WeightVector) -> Result<f64> {
    check_weights(p, w)?;
    Ok(luce_ln_pmf(&p.inverse(), w).exp())
}

fn p_shifted_ln_pmf(p: &Permutation, w: &WeightVector) -> f64 {
    let lt = w.ln_theta();
    let prefix = w.ln_prefix_sums();
    let code = p.lehmer_code();
    code.digits()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let j = k + 2;
            lt[x] - prefix[j - 1]
        })
        .sum()
}

/// Independent Lehmer digits with `P(X_j = i − 1) = θ_i / Σ_{l≤j} θ_l`.
pub fn p_shifted_pmf(p: &Permutation, w: &WeightVector) -> Result<f64> {
    if w.len() < p.len() {
        return Err(Error::BadParameter("p-shifted weights shorter than the permutation".into()));
    }
    let trimmed;
    let w = if w.len() == p.len() {
        w
    } else {
        trimmed = WeightVector::from_ln_weights(w.ln_theta()[..p.len()].to_vec())?;
        &trimmed
    };
    Ok(p_shifted_ln_pmf(p, w).exp())
}

/// Every `σ ∈ S_n` with its probability, in lexicographic order.
pub fn enumerate_support(spec: &ModelSpec) -> Result<impl Iterator<Item = (Permutation, f64)> + '_> {
    if spec.n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n: spec.n, limit: ENUMERATION_LIMIT });
    }
    Ok(all_permutations(spec.n).map(move |p| {
        let prob = spec.pmf(&p).expect("sizes agree by construction");
        (p, prob)
    }))
}
