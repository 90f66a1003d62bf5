//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the algorithms under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use paperrank_core::prefs::{PreferencePair, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- Kemeny

/// Directed pair counts: `counts[a][b]` = number of pairs saying `a ≻ b`.
pub fn pair_counts(ids: &[String], pairs: &[PreferencePair]) -> Vec<Vec<u64>> {
    let n = ids.len();
    let pos = |id: &str| ids.iter().position(|x| x == id).expect("id listed");
    let mut c = vec![vec![0; n]; n];
    for p in pairs {
        assert_eq!(p.relation, Relation::Strict);
        c[pos(&p.better)][pos(&p.worse)] += 1;
    }
    c
}

/// Violations of `order` (best first): pairs whose worse item is placed above the better one.
pub fn count_violations(order: &[usize], counts: &[Vec<u64>]) -> u64 {
    let mut v = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            v += counts[order[j]][order[i]];
        }
    }
    v
}

/// Minimum violations over all permutations (Heap's algorithm).
pub fn exhaustive_kemeny(counts: &[Vec<u64>]) -> u64 {
    let n = counts.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = count_violations(&perm, counts);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(count_violations(&perm, counts));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Random strict pairs from `referees` random partial rankings over `n` papers.
pub fn random_strict_pairs(n: usize, referees: usize, rng: &mut ChaCha8Rng) -> (Vec<String>, Vec<PreferencePair>) {
    let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut pairs = Vec::new();
    for e in 0..referees {
        let k = rng.random_range(2..=n.min(5));
        let mut chosen: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            chosen.swap(i, j);
        }
        let scores: Vec<u32> = (0..k).map(|_| rng.random_range(1..=6)).collect();
        for a in 0..k {
            for b in 0..k {
                if scores[a] > scores[b] {
                    pairs.push(PreferencePair {
                        referee_id: format!("e{e}"),
                        better: ids[chosen[a]].clone(),
                        worse: ids[chosen[b]].clone(),
                        relation: Relation::Strict,
                    });
                }
            }
        }
    }
    (ids, pairs)
}

// ---------------------------------------------------------------- Dense GP

fn matern32(a: &[f64], b: &[f64], length_scale: f64) -> f64 {
    let r = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let t = 3f64.sqrt() * r / length_scale;
    (1.0 + t) * (-t).exp()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `(ln Φ(z), d/dz, d²/dz²)`, switching to the continued-fraction form of the
/// Mills ratio in the far lower tail.
fn log_cdf_derivs(z: f64) -> (f64, f64, f64) {
    let (value, ratio) = if z > -20.0 {
        let cdf = std_normal_cdf(z);
        (cdf.ln(), std_normal_pdf(z) / cdf)
    } else {
        // φ(z)/Φ(z) ≈ -z / (1 - 1/z² + 3/z⁴)
        let z2 = z * z;
        let ratio = -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2));
        (-0.5 * z2 - 0.5 * (2.0 * std::f64::consts::PI).ln() - ratio.ln(), ratio)
    };
    (value, ratio, -ratio * (z + ratio))
}

/// One weighted comparison `better ≻ worse` between item indices.
#[derive(Debug, Clone, Copy)]
pub struct Comparison {
    pub better: usize,
    pub worse: usize,
    pub weight: f64,
}

/// Mode of the exact GP preference posterior with a dense Matérn-3/2 prior,
/// found by damped Newton iterations on
/// `Σ w ln Φ((f_b - f_w) / (√2 σ)) - ½ fᵀ K⁻¹ f`.
pub fn dense_gp_posterior_mode(
    points: &[Vec<f64>],
    comparisons: &[Comparison],
    length_scale: f64,
    noise: f64,
) -> Vec<f64> {
    let n = points.len();
    let mut k = DMatrix::from_fn(n, n, |i, j| matern32(&points[i], &points[j], length_scale));
    for i in 0..n {
        k[(i, i)] += 1e-8;
    }
    let k_inv = k.clone().try_inverse().expect("prior covariance invertible");
    let c = std::f64::consts::SQRT_2 * noise;

    let objective = |f: &DVector<f64>| {
        let lik: f64 = comparisons
            .iter()
            .map(|o| o.weight * log_cdf_derivs((f[o.better] - f[o.worse]) / c).0)
            .sum();
        lik - 0.5 * (f.transpose() * &k_inv * f)[(0, 0)]
    };

    let mut f = DVector::zeros(n);
    let mut value = objective(&f);
    for _ in 0..200 {
        let mut grad = DVector::zeros(n);
        let mut w = DMatrix::zeros(n, n);
        for o in comparisons {
            let (_, d1, d2) = log_cdf_derivs((f[o.better] - f[o.worse]) / c);
            grad[o.better] += o.weight * d1 / c;
            grad[o.worse] -= o.weight * d1 / c;
            let h = -o.weight * d2 / (c * c);
            w[(o.better, o.better)] += h;
            w[(o.worse, o.worse)] += h;
            w[(o.better, o.worse)] -= h;
            w[(o.worse, o.better)] -= h;
        }
        // Newton target f* = (K⁻¹ + W)⁻¹ (W f + ∇ log-likelihood)
        let system = &k_inv + &w;
        let target = system
            .lu()
            .solve(&(&w * &f + &grad))
            .expect("K⁻¹ + W is positive definite");
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-10 {
            let candidate = &f + step * (&target - &f);
            let v = objective(&candidate);
            if v >= value {
                let done = (v - value).abs() <= 1e-14 * value.abs().max(1.0);
                f = candidate;
                value = v;
                improved = !done;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    f.iter().copied().collect()
}

// ---------------------------------------------------------------- Metrics

/// Concordance of (positive, negative) pairs, ties worth one half.
pub fn brute_auroc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut credit = 0.0;
    let mut pairs = 0usize;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                pairs += 1;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
    }
    (pairs > 0).then(|| credit / pairs as f64)
}

/// Σ over distinct thresholds t (descending) of (recall(t) - recall(previous)) · precision(t).
pub fn brute_prauc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut previous_recall = 0.0;
    let mut area = 0.0;
    for t in thresholds {
        let predicted = scores.iter().filter(|&&s| s >= t).count();
        let hits = scores.iter().zip(labels).filter(|(&s, &l)| s >= t && l).count();
        let recall = hits as f64 / positives as f64;
        let precision = hits as f64 / predicted as f64;
        area += (recall - previous_recall) * precision;
        previous_recall = recall;
    }
    Some(area)
}

fn brute_rank(values: &[f64], i: usize) -> f64 {
    let below = values.iter().filter(|&&v| v < values[i]).count();
    let equal = values.iter().filter(|&&v| v == values[i]).count();
    below as f64 + (equal as f64 + 1.0) / 2.0
}

/// Pearson correlation of the average ranks, each rank counted from its definition.
pub fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let rx: Vec<f64> = (0..n).map(|i| brute_rank(x, i)).collect();
    let ry: Vec<f64> = (0..n).map(|i| brute_rank(y, i)).collect();
    let mean = (n as f64 + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// Kendall τ-a over all pairs, counting concordant minus discordant.
pub fn brute_kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).signum() as i64 * i64::from(x[i] != x[j]);
            let b = (y[i] - y[j]).signum() as i64 * i64::from(y[i] != y[j]);
            s += a * b;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
