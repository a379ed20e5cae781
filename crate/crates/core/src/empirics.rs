//! Statistics of point sets: empirical moments, radial moments, Weyl sums,
//! interior counts, and distances between angular distributions.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::measure::{unit_point, CircleMeasure};

/// Points in polar form with angles as fractions of a turn.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarSet {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    /// Indices of points that were exactly zero and got angle 0 by convention.
    pub zero_points: Vec<usize>,
}

impl PolarSet {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Angle of `z` in `[0, 1)`.
pub fn turn_angle(z: Complex64) -> f64 {
    let a = (z.im.atan2(z.re) / TAU).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if a >= 1.0 {
        0.0
    } else {
        a
    }
}

pub fn to_polar(points: &[Complex64]) -> PolarSet {
    let mut zero_points = Vec::new();
    let mut radii = Vec::with_capacity(points.len());
    let mut angles = Vec::with_capacity(points.len());
    for (i, &z) in points.iter().enumerate() {
        radii.push(z.norm());
        if z.re == 0.0 && z.im == 0.0 {
            zero_points.push(i);
            angles.push(0.0);
        } else {
            angles.push(turn_angle(z));
        }
    }
    PolarSet {
        radii,
        angles,
        zero_points,
    }
}

/// `(1/m) Σ z_j^k`.
pub fn empirical_moment(points: &[Complex64], k: u32) -> Complex64 {
    assert!(!points.is_empty(), "empirical moment of an empty set");
    points.iter().map(|z| z.powu(k)).sum::<Complex64>() / points.len() as f64
}

/// `(1/m) Σ r_j^k`.
pub fn radial_moment(ps: &PolarSet, k: i32) -> f64 {
    assert!(!ps.is_empty(), "radial moment of an empty set");
    ps.radii.iter().map(|r| r.powi(k)).sum::<f64>() / ps.len() as f64
}

/// `(1/m) Σ exp(2πik·φ_j)`.
pub fn weyl_sum(ps: &PolarSet, k: u32) -> Complex64 {
    assert!(!ps.is_empty(), "Weyl sum of an empty set");
    ps.angles
        .iter()
        .map(|&a| unit_point((f64::from(k) * a).rem_euclid(1.0)))
        .sum::<Complex64>()
        / ps.len() as f64
}

/// Fraction of radii in `[1 − ε, ∞)`.
pub fn fraction_near_circle(ps: &PolarSet, eps: f64) -> f64 {
    ps.radii.iter().filter(|&&r| r >= 1.0 - eps).count() as f64 / ps.len() as f64
}

/// `#{j : |y_j| < r}`.
pub fn interior_count(points: &[Complex64], r: f64) -> usize {
    points.iter().filter(|z| z.norm() < r).count()
}

/// Wasserstein-1 distance between the uniform empirical measures on two
/// angle samples, on the circle of circumference 1.
///
/// With `G = F_a − F_b` piecewise constant, the distance is
/// `min_c ∫₀¹ |G(t) − c| dt`, attained at a length-weighted median of `G`.
pub fn circular_w1(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "circular_w1 needs nonempty samples");
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(a.len() + b.len());
    let wa = 1.0 / a.len() as f64;
    let wb = 1.0 / b.len() as f64;
    events.extend(a.iter().map(|&t| (t, wa)));
    events.extend(b.iter().map(|&t| (t, -wb)));
    events.sort_by(|x, y| x.0.total_cmp(&y.0));

    // (value of G, length of the interval on which it holds)
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(events.len() + 1);
    let mut level = 0.0;
    let mut cursor = 0.0;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        if t > cursor {
            pieces.push((level, t - cursor));
            cursor = t;
        }
        while i < events.len() && events[i].0 == t {
            level += events[i].1;
            i += 1;
        }
    }
    if cursor < 1.0 {
        pieces.push((level, 1.0 - cursor));
    }

    let mut by_value = pieces.clone();
    by_value.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = by_value.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut median = by_value.last().map_or(0.0, |p| p.0);
    for &(value, len) in &by_value {
        acc += len;
        if acc >= 0.5 * total {
            median = value;
            break;
        }
    }
    pieces
        .iter()
        .map(|&(value, len)| (value - median).abs() * len)
        .sum::<f64>()
        .clamp(0.0, 0.5)
}

/// `sup_t |F_emp(t) − ν([0, t])|`, checked on both sides of every sample
/// point and atom.
pub fn ks_distance(angles: &[f64], measure: &CircleMeasure) -> f64 {
    assert!(!angles.is_empty(), "ks_distance needs a nonempty sample");
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut candidates = sorted.clone();
    candidates.extend(measure.atom_angles());
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut sup: f64 = 0.0;
    for &t in &candidates {
        let t = t.clamp(0.0, 1.0);
        let below = sorted.partition_point(|&a| a < t) as f64 / m;
        let at = sorted.partition_point(|&a| a <= t) as f64 / m;
        let cdf = measure.angle_cdf(t).unwrap_or(1.0);
        let cdf_left = measure.angle_cdf_left(t).unwrap_or(1.0);
        sup = sup.max((at - cdf).abs()).max((below - cdf_left).abs());
    }
    sup
}
