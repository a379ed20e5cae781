//! Distances between two finite multisets of complex points.
//!
//! The distance is the largest pair separation under a one-to-one pairing.
//! Small sets are paired optimally (Hungarian algorithm, minimum total
//! separation); larger ones greedily after sorting by angle then radius.

use num_complex::Complex64;

/// Largest size paired with the exact Hungarian algorithm.
pub const HUNGARIAN_MAX: usize = 64;

/// Exact for `len ≤ HUNGARIAN_MAX`, greedy above.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len().max(b.len()) <= HUNGARIAN_MAX {
        hungarian_distance(a, b)
    } else {
        greedy_distance(a, b)
    }
}

/// Max separation under the minimum-total-cost assignment. Sizes must match.
pub fn hungarian_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "matching needs equal sizes");
    if a.is_empty() {
        return 0.0;
    }
    let assignment = hungarian(a.len(), |i, j| (a[i] - b[j]).norm());
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| (a[i] - b[j]).norm())
        .fold(0.0, f64::max)
}

/// Minimum-cost perfect assignment for an `n × n` cost; returns, for each row,
/// its column. O(n³) shortest augmenting paths with potentials.
pub fn hungarian(n: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if col_owner[j] > 0 {
            assignment[col_owner[j] - 1] = j - 1;
        }
    }
    assignment
}

fn angle_radius_key(z: &Complex64) -> (f64, f64) {
    let angle = z.im.atan2(z.re).rem_euclid(std::f64::consts::TAU);
    (angle, z.norm())
}

/// Sort both sets by (angle, radius) and pair each point of `a`, in order,
/// with the nearest unpaired point of `b`.
pub fn greedy_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "matching needs equal sizes");
    let sorted = |pts: &[Complex64]| {
        let mut keyed: Vec<_> = pts.iter().map(|z| (angle_radius_key(z), *z)).collect();
        keyed.sort_by(|x, y| x.0 .0.total_cmp(&y.0 .0).then(x.0 .1.total_cmp(&y.0 .1)));
        keyed.into_iter().map(|(_, z)| z).collect::<Vec<_>>()
    };
    let a = sorted(a);
    let b = sorted(b);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for za in &a {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, zb) in b.iter().enumerate() {
            if !used[j] {
                let dist = (za - zb).norm();
                if dist < best {
                    best = dist;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}
