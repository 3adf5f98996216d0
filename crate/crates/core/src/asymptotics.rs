//! Large-`n` optimal thresholds and limiting success probabilities.
//!
//! Regimes are indexed by how `q_n` approaches 1: fixed `q ≠ 1`,
//! `q_n = 1 ± c/n` (critical window), `q_n = 1 ± c/n^α` (intermediate)
//! and the uniform case.
//!
//! Everything with fixed `q` is expressed through `r = min(q, 1/q) < 1`.
//! The (Max, q > 1) problem and the (Min, q < 1) problem have the same limit in
//! terms of `r`, with a finite optimal count `M*`. The two remaining cases
//! share a finite deficiency `L = n − M*`.
//!
//! # Sukhatme limit curve
//!
//! Under Sukhatme weights and `M ~ bn` the exact formula converges to
//! `2(1 − (1 − b)²) ∫_b^1 (1 − x)/(1 − (1 − x)²) dx`, which integrates to
//! `−(2b − b²) log(2b − b²)`. A form with prefactor `2b − 2b²` is sometimes
//! quoted. It disagrees with the exact probabilities at `n = 10^5` by more
//! than 0.07 at `b = 1/2`, while `2b − b²` matches to about `10^-5`
//! (`sukhatme_curve_prefactor_is_two_b_minus_b_squared` below). Both forms
//! peak at the same `b*`, so the optimal fraction is unaffected.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::RankDirection;

pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Relative slack under which a defining inequality counts as an equality.
const TIE_TOL: f64 = 1e-12;

const INV_E: f64 = 1.0 / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }

    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" | "+1" => Ok(Sign::Plus),
            "minus" | "-" | "-1" => Ok(Sign::Minus),
            other => Err(Error::BadParameter(format!("unknown sign `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticRegime {
    FixedQ { q: f64 },
    CriticalWindow { c: f64, sign: Sign },
    Intermediate { c: f64, alpha: f64, sign: Sign },
    Uniform,
}

impl AsymptoticRegime {
    pub fn name(&self) -> &'static str {
        match self {
            AsymptoticRegime::FixedQ { .. } => "fixed-q",
            AsymptoticRegime::CriticalWindow { .. } => "critical",
            AsymptoticRegime::Intermediate { .. } => "intermediate",
            AsymptoticRegime::Uniform => "uniform",
        }
    }

    pub fn sign(&self) -> Option<Sign> {
        match self {
            AsymptoticRegime::CriticalWindow { sign, .. } | AsymptoticRegime::Intermediate { sign, .. } => Some(*sign),
            _ => None,
        }
    }

    pub fn params_label(&self) -> String {
        match self {
            AsymptoticRegime::FixedQ { q } => format!("q={q}"),
            AsymptoticRegime::CriticalWindow { c, .. } => format!("c={c}"),
            AsymptoticRegime::Intermediate { c, alpha, .. } => format!("c={c};alpha={alpha}"),
            AsymptoticRegime::Uniform => String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AsymptoticRegime::FixedQ { q } => {
                if !(q.is_finite() && q > 0.0) || q == 1.0 {
                    return Err(Error::BadParameter(format!("fixed q must be positive and not 1, got {q}")));
                }
            }
            AsymptoticRegime::CriticalWindow { c, .. } => check_c(c)?,
            AsymptoticRegime::Intermediate { c, alpha, .. } => {
                check_c(c)?;
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::BadParameter(format!("alpha must lie in (0, 1), got {alpha}")));
                }
            }
            AsymptoticRegime::Uniform => {}
        }
        Ok(())
    }

    /// The parameter `q_n` of the Mallows law at size `n`.
    pub fn q_at(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            AsymptoticRegime::FixedQ { q } => q,
            AsymptoticRegime::CriticalWindow { c, sign } => 1.0 + sign.factor() * c / nf,
            AsymptoticRegime::Intermediate { c, alpha, sign } => 1.0 + sign.factor() * c / nf.powf(alpha),
            AsymptoticRegime::Uniform => 1.0,
        }
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("c must be positive, got {c}")))
    }
}

/// Shape of an asymptotically optimal threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `M* ~ b·n`.
    Fraction(f64),
    /// `M*` is a constant.
    Count(usize),
    /// `M* = n − L` with `L` constant.
    Deficiency(usize),
    /// `M* ~ β·n^α`.
    ScaledCount { beta: f64, alpha: f64 },
    /// `n − M* ~ γ·n^α`.
    ScaledDeficiency { gamma: f64, alpha: f64 },
}

impl Threshold {
    pub fn kind(&self) -> &'static str {
        match self {
            Threshold::Fraction(_) => "fraction",
            Threshold::Count(_) => "count",
            Threshold::Deficiency(_) => "deficiency",
            Threshold::ScaledCount { .. } => "scaled-count",
            Threshold::ScaledDeficiency { .. } => "scaled-deficiency",
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Threshold::Fraction(b) => b,
            Threshold::Count(m) => m as f64,
            Threshold::Deficiency(l) => l as f64,
            Threshold::ScaledCount { beta, .. } => beta,
            Threshold::ScaledDeficiency { gamma, .. } => gamma,
        }
    }

    /// The threshold this shape suggests at size `n`, clamped to `0..n`.
    pub fn at(&self, n: usize) -> usize {
        assert!(n >= 1);
        let nf = n as f64;
        let m = match *self {
            Threshold::Fraction(b) => (b * nf).round(),
            Threshold::Count(m) => m as f64,
            Threshold::Deficiency(l) => nf - l as f64,
            Threshold::ScaledCount { beta, alpha } => (beta * nf.powf(alpha)).round(),
            Threshold::ScaledDeficiency { gamma, alpha } => nf - (gamma * nf.powf(alpha)).round(),
        };
        m.clamp(0.0, nf - 1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitResult {
    pub regime: AsymptoticRegime,
    pub direction: RankDirection,
    pub threshold: Threshold,
    pub limit_prob: f64,
    /// The defining inequality holds with equality, so `M* − 1` is optimal too.
    pub co_optimal: bool,
}

/// Flat serialization of a [`LimitResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRecord {
    pub regime: String,
    pub direction: RankDirection,
    pub sign: Option<Sign>,
    pub params: String,
    pub threshold_kind: String,
    pub threshold_value: f64,
    pub limit_prob: f64,
    pub co_optimal: bool,
}

impl LimitResult {
    pub fn record(&self) -> LimitRecord {
        LimitRecord {
            regime: self.regime.name().to_string(),
            direction: self.direction,
            sign: self.regime.sign(),
            params: self.regime.params_label(),
            threshold_kind: self.threshold.kind().to_string(),
            threshold_value: self.threshold.value(),
            limit_prob: self.limit_prob,
            co_optimal: self.co_optimal,
        }
    }
}

#[inline]
fn tail_term(j: usize, ln_r: f64) -> f64 {
    let x = j as f64 * ln_r;
    x.exp() / -x.exp_m1()
}

/// `Σ_{j≥m} r^j/(1 − r^j)` with `r = min(q, 1/q)`.
///
/// For `q > 1` this is `Σ_{j≥m} 1/(q^j − 1)`, for `q < 1` it is
/// `Σ_{j≥m} q^j/(1 − q^j)`. Summation stops once a term drops below
/// `tol` times the running sum; the remainder is estimated by the
/// geometric series continuing that term.
pub fn tail_sum(q: f64, m: usize, tol: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) || q == 1.0 {
        return Err(Error::BadParameter(format!("tail series needs q > 0, q != 1, got {q}")));
    }
    if m == 0 {
        return Err(Error::BadParameter("tail series starts at m >= 1".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::BadParameter(format!("tolerance must be positive, got {tol}")));
    }
    let ln_r = -q.ln().abs();
    let r = ln_r.exp();
    let mut sum = 0.0;
    let mut j = m;
    loop {
        let term = tail_term(j, ln_r);
        sum += term;
        if term < tol * sum || term == 0.0 {
            return Ok(sum + term * r / (1.0 - r));
        }
        j += 1;
    }
}

/// Optimal fixed threshold for a fixed `q ≠ 1`.
pub fn fixed_q_optimum(q: f64, dir: RankDirection) -> Result<LimitResult> {
    fixed_q_optimum_with_tol(q, dir, DEFAULT_TAIL_TOL)
}

pub fn fixed_q_optimum_with_tol(q: f64, dir: RankDirection, tol: f64) -> Result<LimitResult> {
    let regime = AsymptoticRegime::FixedQ { q };
    regime.validate()?;
    let r = if q > 1.0 { 1.0 / q } else { q };
    let counted = matches!((dir, q > 1.0), (RankDirection::Max, true) | (RankDirection::Min, false));
    let (threshold, limit_prob, co_optimal) = if counted {
        let (m, limit, tie) = count_optimum(r, tol)?;
        (Threshold::Count(m), limit, tie)
    } else {
        let (l, limit, tie) = deficiency_optimum(r);
        (Threshold::Deficiency(l), limit, tie)
    };
    Ok(LimitResult { regime, direction: dir, threshold, limit_prob, co_optimal })
}

/// Largest `M ≥ 1` with `tail(M) ≥ 1/(1 − r)`, or 0 if there is none.
fn count_optimum(r: f64, tol: f64) -> Result<(usize, f64, bool)> {
    // tail_sum works with min(q, 1/q), so passing r itself is fine
    let bar = 1.0 / (1.0 - r);
    let ln_r = r.ln();
    let mut tail = tail_sum(r, 1, tol)?;
    if tail < bar {
        let tie = (bar - tail) <= TIE_TOL * bar;
        return Ok((0, 1.0 - r, tie));
    }
    let mut m = 1;
    loop {
        let next = tail - tail_term(m, ln_r);
        if next < bar {
            break;
        }
        tail = next;
        m += 1;
    }
    let tie = (tail - bar) <= TIE_TOL * bar;
    let limit = (1.0 - r) * -(m as f64 * ln_r).exp_m1() * tail;
    Ok((m, limit, tie))
}

/// The integer `L ∈ [r/(1 − r), 1/(1 − r))` and the limit `(1 − r) r^{L−1} L`.
fn deficiency_optimum(r: f64) -> (usize, f64, bool) {
    let lower = r / (1.0 - r);
    let nearest = lower.round();
    let tie = (lower - nearest).abs() <= TIE_TOL * nearest.max(1.0);
    let l = if tie { nearest } else { lower.ceil() }.max(1.0);
    let limit = (1.0 - r) * ((l - 1.0) * r.ln()).exp() * l;
    (l as usize, limit, tie)
}

/// First form, `(1/c) log(1 + (e^c − 1)/e)`, rising from `1/e` to 1.
fn first_form(c: f64) -> f64 {
    if c <= 1.0 {
        (c.exp_m1() * INV_E).ln_1p() / c
    } else {
        1.0 + (((std::f64::consts::E - 1.0) * (-c).exp()).ln_1p() - 1.0) / c
    }
}

/// Second form, `(1/c) log(1 + (1 − e^{−c})/(e − 1 + e^{−c}))`, falling from `1/e` to 0.
fn second_form(c: f64) -> f64 {
    let e_c = (-c).exp();
    (-(-c).exp_m1() / (std::f64::consts::E - 1.0 + e_c)).ln_1p() / c
}

/// Whether the optimal threshold sits near the end of the sequence.
fn late_side(dir: RankDirection, sign: Sign) -> bool {
    matches!((dir, sign), (RankDirection::Max, Sign::Minus) | (RankDirection::Min, Sign::Plus))
}

/// Optimal fraction `b*` for `q_n = 1 ± c/n`; the limit is always `1/e`.
pub fn critical_window_fraction(c: f64, dir: RankDirection, sign: Sign) -> Result<LimitResult> {
    let regime = AsymptoticRegime::CriticalWindow { c, sign };
    regime.validate()?;
    let b = if late_side(dir, sign) { first_form(c) } else { second_form(c) };
    Ok(LimitResult { regime, direction: dir, threshold: Threshold::Fraction(b), limit_prob: INV_E, co_optimal: false })
}

/// Optimal threshold scale for `q_n = 1 ± c/n^α`; the limit is always `1/e`.
pub fn intermediate_regime(c: f64, alpha: f64, dir: RankDirection, sign: Sign) -> Result<LimitResult> {
    let regime = AsymptoticRegime::Intermediate { c, alpha, sign };
    regime.validate()?;
    let threshold = if late_side(dir, sign) {
        Threshold::ScaledDeficiency { gamma: 1.0 / c, alpha }
    } else {
        Threshold::ScaledCount { beta: (1.0 - (std::f64::consts::E - 1.0).ln()) / c, alpha }
    };
    Ok(LimitResult { regime, direction: dir, threshold, limit_prob: INV_E, co_optimal: false })
}

/// Uniform order: `M* ~ n/e`, limit `1/e`.
pub fn uniform_optimum(dir: RankDirection) -> LimitResult {
    LimitResult {
        regime: AsymptoticRegime::Uniform,
        direction: dir,
        threshold: Threshold::Fraction(INV_E),
        limit_prob: INV_E,
        co_optimal: false,
    }
}

/// Dispatch on the regime.
pub fn solve_regime(regime: AsymptoticRegime, dir: RankDirection) -> Result<LimitResult> {
    match regime {
        AsymptoticRegime::FixedQ { q } => fixed_q_optimum(q, dir),
        AsymptoticRegime::CriticalWindow { c, sign } => critical_window_fraction(c, dir, sign),
        AsymptoticRegime::Intermediate { c, alpha, sign } => intermediate_regime(c, alpha, dir, sign),
        AsymptoticRegime::Uniform => Ok(uniform_optimum(dir)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SukhatmeKind {
    Standard,
    Reverse,
}

/// `b* = 1 − √(1 − 1/e)` for Sukhatme weights, `e^{−1/2}` for the reverse ones.
pub fn sukhatme_optimal_fraction(kind: SukhatmeKind) -> LimitResult {
    let b = match kind {
        SukhatmeKind::Standard => 1.0 - (1.0 - INV_E).sqrt(),
        SukhatmeKind::Reverse => (-0.5f64).exp(),
    };
    LimitResult {
        regime: AsymptoticRegime::Uniform,
        direction: RankDirection::Min,
        threshold: Threshold::Fraction(b),
        limit_prob: INV_E,
        co_optimal: false,
    }
}

/// Limiting success probability as a function of the scaled threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitCurve {
    /// `q_n = 1 ± c/n`, `M ~ bn`, `b ∈ (0, 1)`. Either sign of the
    /// `(dir, sign)` pair is covered: the late side uses `−c`.
    Critical { c: f64, dir: RankDirection, sign: Sign },
    /// `q_n = 1 ± c/n^α`, `M ~ b n^α`, `b > 0`, early side.
    Intermediate { c: f64 },
    /// `q_n = 1 ± c/n^α`, `n − M ~ b n^α`, `b > 0`, late side: `cb·e^{−cb}`.
    IntermediateDeficiency { c: f64 },
    /// Fixed `q`, argument is the count `M`: `G(M) = (1 − r^M) Σ_{j≥M} r^j/(1 − r^j)`, `G(0) = 1`.
    FixedQ { q: f64 },
    /// Sukhatme weights, `M ~ bn`, `b ∈ (0, 1)`.
    Sukhatme,
    /// Reverse Sukhatme weights, `M ~ bn`, `b ∈ (0, 1)`.
    ReverseSukhatme,
}

fn neg_x_ln_x(x: f64) -> f64 {
    -x * x.ln()
}

fn open_unit(b: f64) -> Result<()> {
    if b > 0.0 && b < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("b must lie in (0, 1), got {b}")))
    }
}

fn positive(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("b must be positive, got {b}")))
    }
}

pub fn limit_curve(curve: LimitCurve, x: f64) -> Result<f64> {
    match curve {
        LimitCurve::Critical { c, dir, sign } => {
            check_c(c)?;
            open_unit(x)?;
            let s = if late_side(dir, sign) { -c } else { c };
            Ok(neg_x_ln_x((-x * s).exp_m1() / (-s).exp_m1()))
        }
        LimitCurve::Intermediate { c } => {
            check_c(c)?;
            positive(x)?;
            Ok(neg_x_ln_x(-(-c * x).exp_m1()))
        }
        LimitCurve::IntermediateDeficiency { c } => {
            check_c(c)?;
            positive(x)?;
            Ok(c * x * (-c * x).exp())
        }
        LimitCurve::FixedQ { q } => {
            if x < 0.0 || x.fract() != 0.0 || !x.is_finite() {
                return Err(Error::Domain(format!("M must be a non-negative integer, got {x}")));
            }
            if x == 0.0 {
                return Ok(1.0);
            }
            let ln_r = -q.ln().abs();
            Ok(-(x * ln_r).exp_m1() * tail_sum(q, x as usize, DEFAULT_TAIL_TOL)?)
        }
        LimitCurve::Sukhatme => {
            open_unit(x)?;
            Ok(neg_x_ln_x(x * (2.0 - x)))
        }
        LimitCurve::ReverseSukhatme => {
            open_unit(x)?;
            Ok(-2.0 * x * x * x.ln())
        }
    }
}
