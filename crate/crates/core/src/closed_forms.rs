//! Exact success probabilities of the threshold rule `S(n, M)`.
//!
//! * [`mallows_up_exact`]: Mallows(q), the value `n` is best.
//! * [`mallows_down_exact`]: Mallows(q), the value 1 is best.
//! * [`luce_inv_down_exact`]: inverse-Luce with weights θ, the value 1 is best.
//! * [`classical_exact`]: uniform order.
//!
//! For `q > 1` the Mallows forms are rewritten in powers of `1/q` so nothing
//! of size `q^n` is ever formed. `q = 1` is routed to [`classical_exact`].
//! [`ExactFamily::profile`] evaluates every `M` at once from suffix sums in
//! `O(n)`, which is what makes `n = 10^5` optimizations cheap.

use serde::Serialize;

use crate::error::{check_q, check_threshold, Error, Result};
use crate::weights::WeightVector;

#[inline]
fn one_minus_pow(k: f64, ln_q: f64) -> f64 {
    -(k * ln_q).exp_m1()
}

/// Success probability under Mallows(q) when the largest value is best.
pub fn mallows_up_exact(n: usize, m: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    check_threshold(n, m)?;
    if q == 1.0 {
        return classical_exact(n, m);
    }
    let lq = q.ln();
    let nf = n as f64;
    let mf = m as f64;
    if lq < 0.0 {
        let head = one_minus_pow(1.0, lq) / one_minus_pow(nf, lq);
        if m == 0 {
            return Ok(head * ((nf - 1.0) * lq).exp());
        }
        let sum: f64 = (m + 1..=n).rev().map(|j| 1.0 / one_minus_pow((j - 1) as f64, lq)).sum();
        Ok(head * ((nf - mf - 1.0) * lq).exp() * one_minus_pow(mf, lq) * sum)
    } else {
        let li = -lq;
        let head = (1.0 - 1.0 / q) / one_minus_pow(nf, li);
        if m == 0 {
            return Ok(head);
        }
        // 1/(q^{j−1} − 1) = q^{−(j−1)} / (1 − q^{−(j−1)})
        let sum: f64 = (m + 1..=n)
            .rev()
            .map(|j| {
                let k = (j - 1) as f64;
                (k * li).exp() / one_minus_pow(k, li)
            })
            .sum();
        Ok(head * one_minus_pow(mf, li) * sum)
    }
}

/// Success probability under Mallows(q) when the smallest value is best.
pub fn mallows_down_exact(n: usize, m: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    check_threshold(n, m)?;
    if q == 1.0 {
        return classical_exact(n, m);
    }
    let lq = q.ln();
    let nf = n as f64;
    let mf = m as f64;
    if lq < 0.0 {
        let head = one_minus_pow(1.0, lq) / one_minus_pow(nf, lq);
        if m == 0 {
            return Ok(head);
        }
        let sum: f64 = (m + 1..=n)
            .rev()
            .map(|j| {
                let k = (j - 1) as f64;
                (k * lq).exp() / one_minus_pow(k, lq)
            })
            .sum();
        Ok(head * one_minus_pow(mf, lq) * sum)
    } else {
        let li = -lq;
        // (q − 1)(q^M − 1)/(q^n − 1) = (q − 1) q^{M−n} (1 − q^{−M})/(1 − q^{−n})
        let ratio = (q - 1.0) / one_minus_pow(nf, li);
        if m == 0 {
            return Ok(ratio * (nf * li).exp());
        }
        let sum: f64 = (m + 1..=n).rev().map(|j| 1.0 / one_minus_pow((j - 1) as f64, li)).sum();
        Ok(ratio * one_minus_pow(mf, li) * ((nf - mf) * li).exp() * sum)
    }
}

/// Success probability under the inverse-Luce law with weights `w` when the
/// smallest value is best. `w` must have exactly `n` entries.
pub fn luce_inv_down_exact(n: usize, m: usize, w: &WeightVector) -> Result<f64> {
    check_threshold(n, m)?;
    if w.len() != n {
        return Err(Error::BadParameter(format!("weight vector has {} entries, n = {n}", w.len())));
    }
    let lt = w.ln_theta();
    let pre = w.ln_prefix_sums();
    let ln_total = pre[n - 1];
    if m == 0 {
        return Ok((lt[0] - ln_total).exp());
    }
    let sum: f64 = (m + 1..=n).rev().map(|j| (lt[j - 1] - pre[j - 2]).exp()).sum();
    Ok((pre[m - 1] - ln_total).exp() * sum)
}

/// Success probability for a uniformly random order.
pub fn classical_exact(n: usize, m: usize) -> Result<f64> {
    check_threshold(n, m)?;
    let nf = n as f64;
    if m == 0 {
        return Ok(1.0 / nf);
    }
    let sum: f64 = (m + 1..=n).rev().map(|j| 1.0 / (j - 1) as f64).sum();
    Ok(m as f64 / nf * sum)
}

/// One of the exact formulas with its parameters fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactFamily {
    MallowsUp { q: f64 },
    MallowsDown { q: f64 },
    LuceInvDown(WeightVector),
    Classical,
}

impl ExactFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ExactFamily::MallowsUp { .. } => "mallows-up",
            ExactFamily::MallowsDown { .. } => "mallows-down",
            ExactFamily::LuceInvDown(_) => "luce-inv-down",
            ExactFamily::Classical => "classical",
        }
    }

    pub fn params_label(&self) -> String {
        match self {
            ExactFamily::MallowsUp { q } | ExactFamily::MallowsDown { q } => format!("{q}"),
            ExactFamily::LuceInvDown(w) => w.label(),
            ExactFamily::Classical => String::new(),
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::BadParameter("n must be at least 1".into()));
        }
        match self {
            ExactFamily::LuceInvDown(w) if w.len() != n => Err(Error::BadParameter(format!(
                "weight vector has {} entries, n = {n}",
                w.len()
            ))),
            ExactFamily::MallowsUp { q } | ExactFamily::MallowsDown { q } => check_q(*q),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, n: usize, m: usize) -> Result<f64> {
        self.check_n(n)?;
        match self {
            ExactFamily::MallowsUp { q } => mallows_up_exact(n, m, *q),
            ExactFamily::MallowsDown { q } => mallows_down_exact(n, m, *q),
            ExactFamily::LuceInvDown(w) => luce_inv_down_exact(n, m, w),
            ExactFamily::Classical => classical_exact(n, m),
        }
    }

    /// Success probability for every `M = 0..n`, in `O(n)`.
    pub fn profile(&self, n: usize) -> Result<Vec<f64>> {
        self.check_n(n)?;
        Ok(match self {
            ExactFamily::Classical => classical_profile(n),
            ExactFamily::MallowsUp { q } if *q == 1.0 => classical_profile(n),
            ExactFamily::MallowsDown { q } if *q == 1.0 => classical_profile(n),
            ExactFamily::MallowsUp { q } => mallows_up_profile(n, *q),
            ExactFamily::MallowsDown { q } => mallows_down_profile(n, *q),
            ExactFamily::LuceInvDown(w) => luce_inv_down_profile(w),
        })
    }
}

/// Suffix sums `out[m] = Σ_{j=m+1}^{n} term(j)` for `m = 1..n` (`out[0]` unused).
fn suffix_sums(n: usize, term: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for m in (1..n).rev() {
        acc += term(m + 1);
        out[m] = acc;
    }
    out
}

fn classical_profile(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let sums = suffix_sums(n, |j| 1.0 / (j - 1) as f64);
    (0..n)
        .map(|m| if m == 0 { 1.0 / nf } else { m as f64 / nf * sums[m] })
        .collect()
}

fn mallows_up_profile(n: usize, q: f64) -> Vec<f64> {
    let lq = q.ln();
    let nf = n as f64;
    if lq < 0.0 {
        let head = one_minus_pow(1.0, lq) / one_minus_pow(nf, lq);
        let sums = suffix_sums(n, |j| 1.0 / one_minus_pow((j - 1) as f64, lq));
        (0..n)
            .map(|m| {
                let mf = m as f64;
                if m == 0 {
                    head * ((nf - 1.0) * lq).exp()
                } else {
                    head * ((nf - mf - 1.0) * lq).exp() * one_minus_pow(mf, lq) * sums[m]
                }
            })
            .collect()
    } else {
        let li = -lq;
        let head = (1.0 - 1.0 / q) / one_minus_pow(nf, li);
        let sums = suffix_sums(n, |j| {
            let k = (j - 1) as f64;
            (k * li).exp() / one_minus_pow(k, li)
        });
        (0..n)
            .map(|m| if m == 0 { head } else { head * one_minus_pow(m as f64, li) * sums[m] })
            .collect()
    }
}

fn mallows_down_profile(n: usize, q: f64) -> Vec<f64> {
    let lq = q.ln();
    let nf = n as f64;
    if lq < 0.0 {
        let head = one_minus_pow(1.0, lq) / one_minus_pow(nf, lq);
        let sums = suffix_sums(n, |j| {
            let k = (j - 1) as f64;
            (k * lq).exp() / one_minus_pow(k, lq)
        });
        (0..n)
            .map(|m| if m == 0 { head } else { head * one_minus_pow(m as f64, lq) * sums[m] })
            .collect()
    } else {
        let li = -lq;
        let ratio = (q - 1.0) / one_minus_pow(nf, li);
        let sums = suffix_sums(n, |j| 1.0 / one_minus_pow((j - 1) as f64, li));
        (0..n)
            .map(|m| {
                let mf = m as f64;
                if m == 0 {
                    ratio * (nf * li).exp()
                } else {
                    ratio * one_minus_pow(mf, li) * ((nf - mf) * li).exp() * sums[m]
                }
            })
            .collect()
    }
}

fn luce_inv_down_profile(w: &WeightVector) -> Vec<f64> {
    let n = w.len();
    let lt = w.ln_theta();
    let pre = w.ln_prefix_sums();
    let ln_total = pre[n - 1];
    let sums = suffix_sums(n, |j| (lt[j - 1] - pre[j - 2]).exp());
    (0..n)
        .map(|m| {
            if m == 0 {
                (lt[0] - ln_total).exp()
            } else {
                (pre[m - 1] - ln_total).exp() * sums[m]
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub m: usize,
    pub value: f64,
}

/// Smallest `M` maximizing the success probability, scanning all of
/// `0..n` through [`ExactFamily::profile`].
pub fn optimize_threshold(family: &ExactFamily, n: usize) -> Result<Optimum> {
    let profile = family.profile(n)?;
    let mut best = Optimum { m: 0, value: profile[0] };
    for (m, &v) in profile.iter().enumerate().skip(1) {
        if v > best.value {
            best = Optimum { m, value: v };
        }
    }
    Ok(best)
}
