//! Independent DTW reference: enumerate every monotone warping path.

use beliefsim::analytics::{Dtw, Trajectory};
use beliefsim::vector::BeliefVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimum over all boundary-anchored monotone paths (steps right, down,
/// diagonal) of the summed point costs. `window` restricts cells to
/// `|i - j| <= max(window, |n - m|)`.
pub fn brute_force_dtw(a: &[Vec<f64>], b: &[Vec<f64>], window: Option<usize>) -> f64 {
    let (n, m) = (a.len(), b.len());
    let band = window.map(|w| w.max(n.abs_diff(m)));
    let allowed = |i: usize, j: usize| band.is_none_or(|w| i.abs_diff(j) <= w);
    let mut best = f64::INFINITY;
    let mut stack = vec![(0usize, 0usize, point_cost(&a[0], &b[0]))];
    while let Some((i, j, cost)) = stack.pop() {
        if i == n - 1 && j == m - 1 {
            best = best.min(cost);
            continue;
        }
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if ni < n && nj < m && allowed(ni, nj) {
                stack.push((ni, nj, cost + point_cost(&a[ni], &b[nj])));
            }
        }
    }
    best
}

pub fn trajectory(samples: &[Vec<f64>]) -> Trajectory {
    let positions = samples
        .iter()
        .map(|s| BeliefVector::from_slice(s).unwrap())
        .collect();
    Trajectory::new(0, 0, 1.0, positions).unwrap()
}

pub fn random_sequence(rng: &mut impl Rng, len: usize, dims: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|_| (0..dims).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

/// Compares the library DTW with the brute force on `pairs` random pairs of
/// lengths `1..=max_len` in `1..=max_dims` dimensions. Returns the largest
/// absolute difference and the count above 1e-9.
pub fn check_random_pairs(pairs: usize, max_len: usize, max_dims: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for _ in 0..pairs {
        let d = rng.random_range(1..=max_dims);
        let n = rng.random_range(1..=max_len);
        let m = rng.random_range(1..=max_len);
        let a = random_sequence(&mut rng, n, d);
        let b = random_sequence(&mut rng, m, d);
        let dp = Dtw::new().distance(&trajectory(&a), &trajectory(&b)).unwrap();
        let oracle = brute_force_dtw(&a, &b, None);
        let diff = (dp - oracle).abs();
        worst = worst.max(diff);
        if diff > 1e-9 {
            mismatches += 1;
        }
    }
    (worst, mismatches)
}
