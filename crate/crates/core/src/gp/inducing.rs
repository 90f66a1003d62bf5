use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Picks up to `count` spread-out rows with k-means++ seeding.
///
/// Returns row indices in selection order. Selection stops early once every
/// remaining row coincides with a chosen one, so duplicates are never picked.
pub fn kmeanspp_seeds(points: &[&[f64]], count: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut dist2: Vec<f64> = points.iter().map(|p| sq_dist(p, points[first])).collect();
    while chosen.len() < count.min(n) {
        let total: f64 = dist2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &d) in dist2.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            pick = Some(i);
            if target < d {
                break;
            }
            target -= d;
        }
        let pick = pick.expect("positive total mass");
        chosen.push(pick);
        for (i, d) in dist2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points[i], points[pick]));
        }
    }
    chosen
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
