//! Exact samplers for the permutation models.
//!
//! Every sampler takes an explicit generator. [`stream_rng`] derives an
//! independent ChaCha stream from `(seed, stream)`, which is how the Monte
//! Carlo driver keeps results independent of the worker count.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{check_q, Error, Result};
use crate::fenwick::Fenwick;
use crate::models::{Family, ModelSpec};
use crate::perm::{reduce_sequence, LehmerCode, Permutation};
use crate::weights::WeightVector;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl ModelSpec {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        match self.family() {
            Family::Mallows { q } => mallows_sample(self.n(), *q, rng).expect("q validated"),
            Family::Luce(w) => luce_sample(w, rng),
            Family::LuceInv(w) => luce_inv_sample(w, rng),
            Family::PShifted(w) => p_shifted_sample(w, rng),
            Family::Uniform => uniform_sample(self.n(), rng),
        }
    }
}

pub fn uniform_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut values: Vec<usize> = (1..=n.max(1)).collect();
    values.shuffle(rng);
    Permutation::from_vec_unchecked(values)
}

/// Online weighted draws without replacement: `σ_k` is the `k`-th ball.
pub fn luce_sample<R: Rng + ?Sized>(w: &WeightVector, rng: &mut R) -> Permutation {
    let n = w.len();
    let weights = w.scaled_to_max();
    let mut tree = Fenwick::from_values(&weights);
    let mut alive = vec![true; n];
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let total = tree.total();
        let mut idx = if total > 0.0 {
            tree.search(rng.random::<f64>() * total)
        } else {
            n
        };
        if idx >= n || !alive[idx] {
            // rounding residue from removals; take the nearest live ball
            idx = nearest_alive(&alive, idx.min(n - 1));
        }
        alive[idx] = false;
        tree.sub(idx, weights[idx]);
        values.push(idx + 1);
    }
    Permutation::from_vec_unchecked(values)
}

fn nearest_alive(alive: &[bool], from: usize) -> usize {
    (0..alive.len())
        .flat_map(|d| [from.checked_sub(d), from.checked_add(d)])
        .flatten()
        .find(|&i| i < alive.len() && alive[i])
        .expect("at least one ball remains")
}

/// Same draws, reported as `σ^{-1}`: the `k`-th ball drawn is `σ^{-1}_k`.
pub fn luce_inv_sample<R: Rng + ?Sized>(w: &WeightVector, rng: &mut R) -> Permutation {
    luce_sample(w, rng).inverse()
}

/// Draws independent Lehmer digits `P(X_j = i − 1) = θ_i / Σ_{l≤j} θ_l`
/// and decodes them. The permutation has size `w.len()`.
pub fn p_shifted_sample<R: Rng + ?Sized>(w: &WeightVector, rng: &mut R) -> Permutation {
    let n = w.len();
    let prefix = w.ln_prefix_sums();
    let mut digits = Vec::with_capacity(n.saturating_sub(1));
    for j in 2..=n {
        // smallest i with C_i > u·C_j
        let target = rng.random::<f64>().ln() + prefix[j - 1];
        let i0 = prefix[..j].partition_point(|&c| c <= target);
        digits.push(i0.min(j - 1));
    }
    LehmerCode::from_digits_unchecked(digits).decode()
}

/// Mallows(q) through the p-shifted route with `θ_i = q^i`. Each digit is
/// drawn in O(1) by inverting `P(X_j ≤ k) = (1 − q^{k+1})/(1 − q^j)`.
pub fn mallows_sample<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<Permutation> {
    check_q(q)?;
    if n == 0 {
        return Err(Error::BadParameter("n must be at least 1".into()));
    }
    let lq = q.ln();
    let mut digits = Vec::with_capacity(n - 1);
    for j in 2..=n {
        let x = if lq == 0.0 {
            rng.random_range(0..j)
        } else if lq < 0.0 {
            truncated_geometric(j, lq, rng)
        } else {
            // P(X_j = k) ∝ q^k is the reflection of the 1/q law
            j - 1 - truncated_geometric(j, -lq, rng)
        };
        digits.push(x);
    }
    Ok(LehmerCode::from_digits_unchecked(digits).decode())
}

/// `P(X = k) ∝ r^k` on `0..j` for `ln_r < 0`.
fn truncated_geometric<R: Rng + ?Sized>(j: usize, ln_r: f64, rng: &mut R) -> usize {
    let mass = -(j as f64 * ln_r).exp_m1();
    let u = 1.0 - rng.random::<f64>();
    let k_plus_one = ((-u * mass).ln_1p() / ln_r).ceil();
    if k_plus_one.is_nan() || k_plus_one >= j as f64 {
        j - 1
    } else if k_plus_one <= 1.0 {
        0
    } else {
        k_plus_one as usize - 1
    }
}

/// `Red(V_1 … V_n)` with independent `V_j ~ Exp(θ_j)` (rate convention).
/// Ranks are taken on `log V_j = log E_j − log θ_j`, an increasing
/// transform, so weights outside the `f64` range still work.
pub fn exponential_reduction_sample<R: Rng + ?Sized>(w: &WeightVector, rng: &mut R) -> Permutation {
    let lt = w.ln_theta();
    loop {
        let keys: Vec<f64> = lt
            .iter()
            .map(|&l| {
                let e: f64 = Exp1.sample(rng);
                e.ln() - l
            })
            .collect();
        if let Ok(p) = reduce_sequence(&keys) {
            return p;
        }
    }
}

/// Reduces the spacings `V_(1), V_(2) − V_(1), …` of `n` iid Exp(1)
/// variables.
pub fn sukhatme_gap_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let n = n.max(1);
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        v.sort_unstable_by(f64::total_cmp);
        let mut prev = 0.0;
        let gaps: Vec<f64> = v
            .iter()
            .map(|&x| {
                let g = x - prev;
                prev = x;
                g
            })
            .collect();
        if let Ok(p) = reduce_sequence(&gaps) {
            return p;
        }
    }
}
