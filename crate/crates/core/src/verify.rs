//! Self-check suite run by `stopsmith verify`.
//!
//! `Quick` keeps every oracle at `n ≤ 5` and Monte Carlo at `10^4` trials.
//! `Full` runs the release grids: enumeration up to `n = 7`, exact
//! formulas at `n = 10^5`, `10^6`-trial simulations and sampler laws on `S_5`.

use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{critical_window_fraction, fixed_q_optimum, Sign, Threshold};
use crate::closed_forms::{optimize_threshold, ExactFamily};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::monte_carlo::monte_carlo_success;
use crate::perm::{Permutation, RankDirection};
use crate::sampling::{self, stream_rng};
use crate::secretary::{bruss_odds_threshold, exact_success_by_enumeration, independence_defect, record_joint_law};
use crate::weights::WeightVector;

use RankDirection::{Max, Min};

const INV_E: f64 = 1.0 / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Quick,
    Full,
}

impl FromStr for VerifyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quick" => Ok(VerifyLevel::Quick),
            "full" => Ok(VerifyLevel::Full),
            other => Err(Error::BadParameter(format!("unknown verify level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome { name: name.to_string(), passed, detail }
    }
}

type Check = fn(VerifyLevel, u64) -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 12] = [
    ("oracle-equivalence", oracle_equivalence),
    ("mallows-luce-coincidence", mallows_luce_coincidence),
    ("duality", duality),
    ("classical-baseline", classical_baseline),
    ("sukhatme-limits", sukhatme_limits),
    ("fixed-q", fixed_q),
    ("critical-window", critical_window),
    ("monte-carlo", monte_carlo),
    ("independence", independence),
    ("sampler-laws", sampler_laws),
    ("odds-agreement", odds_agreement),
    ("boundary-limits", boundary_limits),
];

/// Runs every check in a fixed order; an error inside a check counts as a failure.
pub fn run_suite(level: VerifyLevel, seed: u64) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| match check(level, seed) {
            Ok((passed, detail)) => CheckOutcome::new(name, passed, detail),
            Err(e) => CheckOutcome::new(name, false, format!("error: {e}")),
        })
        .collect()
}

fn max_n(level: VerifyLevel, quick: usize, full: usize) -> usize {
    match level {
        VerifyLevel::Quick => quick,
        VerifyLevel::Full => full,
    }
}

pub(crate) fn weight_families(n: usize) -> Vec<WeightVector> {
    vec![
        WeightVector::unit(n),
        WeightVector::geometric(0.6, n).expect("valid ratio"),
        WeightVector::geometric(2.0, n).expect("valid ratio"),
        WeightVector::sukhatme(n),
        WeightVector::reverse_sukhatme(n),
        WeightVector::new((1..=n).map(|i| i as f64).collect()).expect("positive"),
    ]
}

const Q_GRID: [f64; 4] = [0.3, 0.7, 1.5, 3.0];

fn oracle_equivalence(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let top = max_n(level, 5, 7);
    let mut jobs: Vec<(ModelSpec, ExactFamily, RankDirection)> = Vec::new();
    for n in 2..=top {
        jobs.push((ModelSpec::uniform(n)?, ExactFamily::Classical, Max));
        for q in Q_GRID {
            jobs.push((ModelSpec::mallows(n, q)?, ExactFamily::MallowsUp { q }, Max));
            jobs.push((ModelSpec::mallows(n, q)?, ExactFamily::MallowsDown { q }, Min));
        }
        for w in weight_families(n) {
            jobs.push((ModelSpec::luce_inv(w.clone()), ExactFamily::LuceInvDown(w), Min));
        }
    }
    let gaps = jobs
        .par_iter()
        .map(|(spec, fam, dir)| {
            let n = spec.n();
            (0..n).try_fold(0f64, |acc, m| {
                let oracle = exact_success_by_enumeration(spec, m, *dir)?;
                Ok(acc.max((fam.evaluate(n, m)? - oracle).abs()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = gaps.into_iter().fold(0.0, f64::max);
    Ok((worst <= 1e-12, format!("max gap {worst:.3e} over n <= {top}")))
}

fn coincidence_grid() -> [f64; 4] {
    [0.5, 0.9, 1.1, 2.0]
}

fn mallows_luce_coincidence(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let top = max_n(level, 50, 200);
    let worst = (1..=top)
        .into_par_iter()
        .map(|n| {
            let mut worst = 0f64;
            for q in coincidence_grid() {
                let luce = ExactFamily::LuceInvDown(WeightVector::geometric(q, n)?).profile(n)?;
                let mallows = ExactFamily::MallowsDown { q }.profile(n)?;
                for (a, b) in luce.iter().zip(&mallows) {
                    worst = worst.max((a - b).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("max gap {worst:.3e} over n <= {top}")))
}

fn duality(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let top = max_n(level, 50, 200);
    let mut worst = 0f64;
    for n in 1..=top {
        for q in coincidence_grid() {
            let down = ExactFamily::MallowsDown { q }.profile(n)?;
            let up = ExactFamily::MallowsUp { q: 1.0 / q }.profile(n)?;
            for (a, b) in down.iter().zip(&up) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max gap {worst:.3e} over n <= {top}")))
}

fn classical_baseline(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let n = max_n(level, 1_000, 10_000);
    let best = optimize_threshold(&ExactFamily::Classical, n)?;
    let frac = best.m as f64 / n as f64;
    let ok = (0.36..=0.38).contains(&frac) && (best.value - INV_E).abs() <= 0.01;
    Ok((ok, format!("n={n} M*/n={frac:.5} value={:.6}", best.value)))
}

fn sukhatme_limits(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let n = max_n(level, 10_000, 100_000);
    let std = optimize_threshold(&ExactFamily::LuceInvDown(WeightVector::sukhatme(n)), n)?;
    let rev = optimize_threshold(&ExactFamily::LuceInvDown(WeightVector::reverse_sukhatme(n)), n)?;
    let (fs, fr) = (std.m as f64 / n as f64, rev.m as f64 / n as f64);
    let ok = (fs - 0.204887).abs() <= 0.005
        && (fr - 0.606531).abs() <= 0.005
        && (std.value - INV_E).abs() <= 0.005
        && (rev.value - INV_E).abs() <= 0.005;
    Ok((
        ok,
        format!("n={n} standard {fs:.5} ({:.6}), reverse {fr:.5} ({:.6})", std.value, rev.value),
    ))
}

fn fixed_q(_level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let best = optimize_threshold(&ExactFamily::MallowsUp { q: 2.0 }, 50)?;
    let lim = fixed_q_optimum(2.0, Max)?;
    let ok = best.m == 0
        && (best.value - 0.5).abs() <= 1e-6
        && lim.threshold == Threshold::Count(0)
        && (lim.limit_prob - 0.5).abs() <= 1e-12;
    Ok((ok, format!("M*={} value={:.9} limit={}", best.m, best.value, lim.limit_prob)))
}

fn critical_window(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let n = max_n(level, 10_000, 100_000);
    let q = 1.0 - 1.0 / n as f64;
    let best = optimize_threshold(&ExactFamily::MallowsUp { q }, n)?;
    let frac = best.m as f64 / n as f64;
    let target = critical_window_fraction(1.0, Max, Sign::Minus)?.threshold.value();
    let ok = (frac - target).abs() <= 0.01 && (best.value - INV_E).abs() <= 0.01;
    Ok((ok, format!("n={n} M*/n={frac:.5} (b*={target:.5}) value={:.6}", best.value)))
}

/// Twelve representative simulation settings, all small enough for enumeration.
pub fn monte_carlo_configs() -> Vec<(ModelSpec, usize, RankDirection)> {
    let lin = |n: usize| WeightVector::new((1..=n).map(|i| i as f64).collect()).expect("positive");
    vec![
        (ModelSpec::mallows(8, 0.7).unwrap(), 3, Max),
        (ModelSpec::mallows(8, 1.3).unwrap(), 2, Min),
        (ModelSpec::mallows(6, 2.0).unwrap(), 0, Max),
        (ModelSpec::mallows(7, 0.5).unwrap(), 5, Max),
        (ModelSpec::luce_inv(WeightVector::sukhatme(8)), 2, Min),
        (ModelSpec::luce_inv(WeightVector::reverse_sukhatme(8)), 4, Min),
        (ModelSpec::luce_inv(WeightVector::geometric(0.6, 6).unwrap()), 1, Max),
        (ModelSpec::luce(lin(7)), 3, Max),
        (ModelSpec::luce(WeightVector::geometric(2.0, 6).unwrap()), 2, Min),
        (ModelSpec::p_shifted(WeightVector::reverse_sukhatme(7)), 3, Max),
        (ModelSpec::p_shifted(WeightVector::sukhatme(8)), 2, Min),
        (ModelSpec::uniform(9).unwrap(), 3, Max),
    ]
}

fn monte_carlo(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let (configs, trials) = match level {
        VerifyLevel::Quick => (monte_carlo_configs().into_iter().take(4).collect::<Vec<_>>(), 10_000),
        VerifyLevel::Full => (monte_carlo_configs(), 1_000_000),
    };
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for (i, (spec, m, dir)) in configs.iter().enumerate() {
        let exact = exact_success_by_enumeration(spec, *m, *dir)?;
        let first = monte_carlo_success(spec, *m, *dir, trials, seed)?;
        let est = if first.agrees_with(exact, 4.0) {
            first
        } else {
            monte_carlo_success(spec, *m, *dir, trials, seed.wrapping_add(1 + i as u64))?
        };
        worst = worst.max((est.p_hat - exact).abs() / est.std_err.max(f64::MIN_POSITIVE));
        if !est.agrees_with(exact, 4.0) {
            failures.push(format!("{spec} M={m}"));
        }
    }
    let (spec, m, dir) = &configs[0];
    let repeat = monte_carlo_success(spec, *m, *dir, trials, seed)? == monte_carlo_success(spec, *m, *dir, trials, seed)?;
    let ok = failures.is_empty() && repeat;
    Ok((
        ok,
        format!(
            "{} configs x {trials} trials, worst {worst:.2} sd, repeatable={repeat}{}",
            configs.len(),
            if failures.is_empty() { String::new() } else { format!(", failed: {}", failures.join("; ")) }
        ),
    ))
}

fn independence(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let top = max_n(level, 5, 6);
    let mut worst = 0f64;
    for n in 2..=top {
        for q in Q_GRID {
            let spec = ModelSpec::mallows(n, q)?;
            worst = worst.max(independence_defect(&spec, Min)?);
            worst = worst.max(independence_defect(&spec, Max)?);
        }
        for w in weight_families(n) {
            worst = worst.max(independence_defect(&ModelSpec::luce_inv(w), Min)?);
        }
    }
    let luce = ModelSpec::luce(WeightVector::new(vec![1.0, 2.0, 3.0])?);
    let counter = independence_defect(&luce, Max)?;
    Ok((worst <= 1e-12 && counter > 1e-4, format!("worst defect {worst:.3e}, luce max n=3 defect {counter:.4e}")))
}

/// Lexicographic rank of a permutation in `0..n!`.
fn lex_rank(p: &Permutation) -> usize {
    let v = p.as_slice();
    let n = v.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = v[i + 1..].iter().filter(|&&x| x < v[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

/// Total-variation distance between `draws` samples and `target`, over `S_n`
/// with `n ≤ 9`. Chunk `i` draws from `stream_rng(seed, i)`.
pub fn empirical_tv<F>(target: &ModelSpec, draws: u64, seed: u64, sampler: F) -> Result<f64>
where
    F: Fn(&mut ChaCha8Rng) -> Permutation + Sync,
{
    let n = target.n();
    let support: Vec<(Permutation, f64)> = crate::models::enumerate_support(target)?.collect();
    let cells = support.len();
    const CHUNK: u64 = 1 << 14;
    let chunks = draws.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let mut local = vec![0u64; cells];
            for _ in 0..CHUNK.min(draws - c * CHUNK) {
                let p = sampler(&mut rng);
                debug_assert_eq!(p.len(), n);
                local[lex_rank(&p)] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(0.5
        * support
            .iter()
            .zip(&counts)
            .map(|((_, p), &c)| (c as f64 / draws as f64 - p).abs())
            .sum::<f64>())
}

fn sampler_laws(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let (n, draws, bound) = match level {
        VerifyLevel::Quick => (3, 20_000, 0.03),
        VerifyLevel::Full => (5, 1_000_000, 0.005),
    };
    let w = WeightVector::new((1..=n).map(|i| (i * i) as f64).collect())?;
    let suk = WeightVector::sukhatme(n);
    let q = 0.6;
    let mut rows = Vec::new();
    rows.push((
        "mallows",
        empirical_tv(&ModelSpec::mallows(n, q)?, draws, seed, |r| {
            sampling::mallows_sample(n, q, r).expect("valid q")
        })?,
    ));
    rows.push(("luce", empirical_tv(&ModelSpec::luce(w.clone()), draws, seed, |r| sampling::luce_sample(&w, r))?));
    rows.push((
        "luce-inv",
        empirical_tv(&ModelSpec::luce_inv(w.clone()), draws, seed, |r| sampling::luce_inv_sample(&w, r))?,
    ));
    rows.push((
        "p-shifted",
        empirical_tv(&ModelSpec::p_shifted(w.clone()), draws, seed, |r| sampling::p_shifted_sample(&w, r))?,
    ));
    rows.push((
        "exp-reduce",
        empirical_tv(&ModelSpec::luce_inv(w.clone()), draws, seed, |r| {
            sampling::exponential_reduction_sample(&w, r)
        })?,
    ));
    rows.push((
        "sukhatme-gaps",
        empirical_tv(&ModelSpec::luce_inv(suk), draws, seed, |r| sampling::sukhatme_gap_sample(n, r))?,
    ));
    let ok = rows.iter().all(|(_, tv)| *tv <= bound);
    let detail = rows.iter().map(|(k, tv)| format!("{k}={tv:.4}")).collect::<Vec<_>>().join(" ");
    Ok((ok, format!("S_{n}, {draws} draws, bound {bound}: {detail}")))
}

fn odds_agreement(level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let top = max_n(level, 5, 7);
    let mut cases: Vec<(ModelSpec, RankDirection)> = Vec::new();
    for n in 2..=top {
        for q in Q_GRID {
            cases.push((ModelSpec::mallows(n, q)?, Max));
            cases.push((ModelSpec::mallows(n, q)?, Min));
        }
        for w in weight_families(n) {
            cases.push((ModelSpec::luce_inv(w), Min));
        }
    }
    let misses = cases
        .par_iter()
        .map(|(spec, dir)| {
            let law = record_joint_law(spec, *dir)?;
            let m_odds = bruss_odds_threshold(&law.marginals())?;
            let values = (0..spec.n())
                .map(|m| exact_success_by_enumeration(spec, m, *dir))
                .collect::<Result<Vec<f64>>>()?;
            let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(usize::from(values[m_odds] < best - 1e-12))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok((misses == 0, format!("{} cases, {misses} outside the optimal set", cases.len())))
}

/// Small-`c` limits at `c = 10^-6` and large-`c` limits checked at `c = 1000`,
/// where the `O(1/c)` correction of the late-side fraction is below 0.01.
fn boundary_limits(_level: VerifyLevel, _seed: u64) -> Result<(bool, String)> {
    let cases = [(Max, Sign::Minus), (Max, Sign::Plus), (Min, Sign::Minus), (Min, Sign::Plus)];
    let mut worst_small = 0f64;
    let mut worst_large = 0f64;
    for (dir, sign) in cases {
        let small = critical_window_fraction(1e-6, dir, sign)?.threshold.value();
        worst_small = worst_small.max((small - INV_E).abs());
        let large = critical_window_fraction(1000.0, dir, sign)?.threshold.value();
        let late = matches!((dir, sign), (Max, Sign::Minus) | (Min, Sign::Plus));
        let target = if late { 1.0 } else { 0.0 };
        worst_large = worst_large.max((large - target).abs());
    }
    let ok = worst_small <= 1e-4 && worst_large <= 0.01;
    Ok((ok, format!("c=1e-6 gap {worst_small:.2e}, c=1000 gap {worst_large:.2e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_rank_is_a_bijection() {
        let ranks: Vec<usize> = crate::perm::all_permutations(4).map(|p| lex_rank(&p)).collect();
        assert_eq!(ranks, (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn quick_suite_passes() {
        let rows = run_suite(VerifyLevel::Quick, 7);
        assert_eq!(rows.len(), 12);
        for row in &rows {
            assert!(row.passed, "{}: {}", row.name, row.detail);
        }
    }

    #[test]
    fn level_parsing() {
        assert_eq!("quick".parse::<VerifyLevel>().unwrap(), VerifyLevel::Quick);
        assert_eq!("FULL".parse::<VerifyLevel>().unwrap(), VerifyLevel::Full);
        assert!("medium".parse::<VerifyLevel>().is_err());
    }
}
