//! Probability measures on the unit circle, their moments, and seeded sampling.
//!
//! Angles are always fractions of a full turn in `[0, 1)`; the point with
//! angle `θ` is `exp(2πiθ)`.
//!
//! Sampling uses [`LabRng`], the ChaCha stream cipher with 8 rounds
//! (`rand_chacha::ChaCha8Rng`). A 64-bit seed is expanded into the 256-bit key
//! by `SeedableRng::seed_from_u64` (a PCG32 expansion documented by
//! `rand_core`), and uniform variates are the top 53 bits of a `u64` scaled by
//! `2^-53`. Both are portable, so a `(measure, n, seed)` triple produces the
//! same bits on every platform.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The generator behind every random draw in the crate.
pub type LabRng = ChaCha8Rng;

/// Weights may be off from one by this much and still get renormalized.
pub const WEIGHT_RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// Seeds a [`LabRng`] from a 64-bit value.
pub fn rng_from_seed(seed: u64) -> LabRng {
    LabRng::seed_from_u64(seed)
}

/// Draws a uniform variate in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn uniform_variate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// `exp(2πiθ)`.
#[inline]
pub fn unit_point(angle: f64) -> Complex64 {
    let (s, c) = (TAU * angle).sin_cos();
    Complex64::new(c, s)
}

/// A probability law on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub enum CircleMeasure {
    /// Normalized arc length.
    Uniform,
    /// Finitely many atoms at pairwise distinct angles.
    Atomic { angles: Vec<f64>, weights: Vec<f64> },
    /// Uniform on the angular interval `[start, end)`.
    Arc { start: f64, end: f64 },
    /// Convex combination of non-mixture components.
    Mixture {
        components: Vec<CircleMeasure>,
        weights: Vec<f64>,
    },
}

impl CircleMeasure {
    /// Builds and validates an atomic measure from `(angle, weight)` pairs.
    pub fn atomic(atoms: &[(f64, f64)]) -> Result<Self> {
        CircleMeasure::Atomic {
            angles: atoms.iter().map(|a| a.0).collect(),
            weights: atoms.iter().map(|a| a.1).collect(),
        }
        .validate()
    }

    pub fn arc(start: f64, end: f64) -> Result<Self> {
        CircleMeasure::Arc { start, end }.validate()
    }

    pub fn mixture(parts: Vec<(f64, CircleMeasure)>) -> Result<Self> {
        let (weights, components) = parts.into_iter().unzip();
        CircleMeasure::Mixture {
            components,
            weights,
        }
        .validate()
    }

    /// The symmetric two-point measure `atomic{0:½, ½:½}` used throughout the
    /// test suites.
    pub fn antipodal_pair() -> Self {
        CircleMeasure::Atomic {
            angles: vec![0.0, 0.5],
            weights: vec![0.5, 0.5],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CircleMeasure::Uniform => "uniform",
            CircleMeasure::Atomic { .. } => "atomic",
            CircleMeasure::Arc { .. } => "arc",
            CircleMeasure::Mixture { .. } => "mixture",
        }
    }

    /// Checks every invariant, renormalizing weights whose sum is within
    /// [`WEIGHT_RENORMALIZE_TOLERANCE`] of one.
    pub fn validate(self) -> Result<Self> {
        self.validate_at_depth(0)
    }

    fn validate_at_depth(self, depth: usize) -> Result<Self> {
        match self {
            CircleMeasure::Uniform => Ok(CircleMeasure::Uniform),
            CircleMeasure::Atomic { angles, weights } => {
                if angles.is_empty() {
                    return Err(Error::InvalidMeasure("atomic measure has no atoms".into()));
                }
                if angles.len() != weights.len() {
                    return Err(Error::InvalidMeasure(format!(
                        "{} atoms but {} weights",
                        angles.len(),
                        weights.len()
                    )));
                }
                for &a in &angles {
                    if !(0.0..1.0).contains(&a) {
                        return Err(Error::InvalidMeasure(format!(
                            "atom angle {a} outside [0, 1)"
                        )));
                    }
                }
                let mut sorted = angles.clone();
                sorted.sort_by(f64::total_cmp);
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(Error::InvalidMeasure(format!("duplicate atom at angle {}", w[0])));
                }
                let weights = normalize_weights(weights)?;
                Ok(CircleMeasure::Atomic { angles, weights })
            }
            CircleMeasure::Arc { start, end } => {
                if !(start >= 0.0 && start < end && end <= 1.0) {
                    return Err(Error::InvalidMeasure(format!(
                        "arc bounds ({start}, {end}) must satisfy 0 <= a < b <= 1"
                    )));
                }
                Ok(CircleMeasure::Arc { start, end })
            }
            CircleMeasure::Mixture {
                components,
                weights,
            } => {
                if depth > 0 {
                    return Err(Error::InvalidMeasure(
                        "mixtures may not be nested".into(),
                    ));
                }
                if components.is_empty() {
                    return Err(Error::InvalidMeasure("mixture has no components".into()));
                }
                if components.len() != weights.len() {
                    return Err(Error::InvalidMeasure(format!(
                        "{} components but {} weights",
                        components.len(),
                        weights.len()
                    )));
                }
                let components = components
                    .into_iter()
                    .map(|c| c.validate_at_depth(depth + 1))
                    .collect::<Result<Vec<_>>>()?;
                let weights = normalize_weights(weights)?;
                Ok(CircleMeasure::Mixture {
                    components,
                    weights,
                })
            }
        }
    }

    /// `c_k = E[Z^k]` in closed form.
    pub fn moment(&self, k: u32) -> Complex64 {
        assert!(k >= 1, "moments are defined for k >= 1");
        match self {
            CircleMeasure::Uniform => Complex64::new(0.0, 0.0),
            CircleMeasure::Atomic { angles, weights } => angles
                .iter()
                .zip(weights)
                .map(|(&a, &w)| unit_point(turn_fraction(k, a)) * w)
                .sum(),
            CircleMeasure::Arc { start, end } => {
                let kf = f64::from(k);
                let num = unit_point(turn_fraction(k, *end)) - unit_point(turn_fraction(k, *start));
                num / Complex64::new(0.0, TAU * kf * (end - start))
            }
            CircleMeasure::Mixture {
                components,
                weights,
            } => components
                .iter()
                .zip(weights)
                .map(|(c, &w)| c.moment(k) * w)
                .sum(),
        }
    }

    /// `c_1, …, c_kmax`.
    pub fn moments(&self, kmax: usize) -> MomentVector {
        MomentVector {
            entries: (1..=kmax as u32).map(|k| self.moment(k)).collect(),
        }
    }

    /// `ν([0, t])`.
    pub fn angle_cdf(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("angle {t} outside [0, 1]")));
        }
        Ok(self.cdf_closed(t))
    }

    /// `ν([0, t))`, the left limit of [`angle_cdf`](Self::angle_cdf).
    pub fn angle_cdf_left(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("angle {t} outside [0, 1]")));
        }
        Ok(self.cdf_open(t))
    }

    fn cdf_closed(&self, t: f64) -> f64 {
        match self {
            CircleMeasure::Uniform => t,
            CircleMeasure::Atomic { angles, weights } => angles
                .iter()
                .zip(weights)
                .filter(|(&a, _)| a <= t)
                .map(|(_, &w)| w)
                .sum::<f64>()
                .min(1.0),
            CircleMeasure::Arc { start, end } => ((t - start) / (end - start)).clamp(0.0, 1.0),
            CircleMeasure::Mixture {
                components,
                weights,
            } => components
                .iter()
                .zip(weights)
                .map(|(c, &w)| w * c.cdf_closed(t))
                .sum::<f64>()
                .min(1.0),
        }
    }

    fn cdf_open(&self, t: f64) -> f64 {
        match self {
            CircleMeasure::Atomic { angles, weights } => angles
                .iter()
                .zip(weights)
                .filter(|(&a, _)| a < t)
                .map(|(_, &w)| w)
                .sum::<f64>()
                .min(1.0),
            CircleMeasure::Mixture {
                components,
                weights,
            } => components
                .iter()
                .zip(weights)
                .map(|(c, &w)| w * c.cdf_open(t))
                .sum::<f64>()
                .min(1.0),
            _ => self.cdf_closed(t),
        }
    }

    /// Every atom angle, including those of mixture components.
    pub fn atom_angles(&self) -> Vec<f64> {
        match self {
            CircleMeasure::Atomic { angles, .. } => angles.clone(),
            CircleMeasure::Mixture { components, .. } => {
                components.iter().flat_map(|c| c.atom_angles()).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Draws one angle.
    pub fn sample_angle<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            CircleMeasure::Uniform => uniform_variate(rng),
            CircleMeasure::Atomic { angles, weights } => {
                angles[pick_index(weights, uniform_variate(rng))]
            }
            CircleMeasure::Arc { start, end } => {
                let theta = start + (end - start) * uniform_variate(rng);
                if theta < *end {
                    theta
                } else {
                    end.next_down()
                }
            }
            CircleMeasure::Mixture {
                components,
                weights,
            } => components[pick_index(weights, uniform_variate(rng))].sample_angle(rng),
        }
    }

    /// Draws `n` i.i.d. points using an externally managed generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_angle(rng)).collect()
    }

    /// Draws `n ≥ 2` i.i.d. points from a generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<RootSample> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("sample size must be >= 2, got {n}")));
        }
        let mut rng = rng_from_seed(seed);
        let angles = self.sample_with(n, &mut rng);
        Ok(RootSample::from_angles(angles, seed, self.to_string()))
    }
}

/// `k·θ mod 1`, computed so that `exp(2πi·kθ)` stays accurate for large `k`.
fn turn_fraction(k: u32, angle: f64) -> f64 {
    (f64::from(k) * angle).rem_euclid(1.0)
}

fn pick_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn normalize_weights(weights: Vec<f64>) -> Result<Vec<f64>> {
    for &w in &weights {
        if !(w > 0.0 && w <= 1.0) {
            return Err(Error::InvalidMeasure(format!("weight {w} outside (0, 1]")));
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_RENORMALIZE_TOLERANCE {
        return Err(Error::InvalidMeasure(format!("weights sum to {total}, expected 1")));
    }
    if total == 1.0 {
        Ok(weights)
    } else {
        Ok(weights.into_iter().map(|w| w / total).collect())
    }
}

/// Exact moments `c_1..c_K` of a measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    pub entries: Vec<Complex64>,
}

impl MomentVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `c_k`, one-based.
    pub fn get(&self, k: usize) -> Complex64 {
        self.entries[k - 1]
    }
}

/// `n` sampled roots together with their angles and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSample {
    pub points: Vec<Complex64>,
    pub angles: Vec<f64>,
    pub seed: u64,
    pub measure_tag: String,
}

impl RootSample {
    pub fn from_angles(angles: Vec<f64>, seed: u64, measure_tag: String) -> Self {
        RootSample {
            points: angles.iter().map(|&a| unit_point(a)).collect(),
            angles,
            seed,
            measure_tag,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Compact textual form, also accepted by [`FromStr`]:
/// `uniform`, `atomic{0:0.5,0.5:0.5}`, `arc(0,0.5)`,
/// `mixture{0.5*uniform,0.5*arc(0,0.5)}`.
impl fmt::Display for CircleMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleMeasure::Uniform => f.write_str("uniform"),
            CircleMeasure::Atomic { angles, weights } => {
                f.write_str("atomic{")?;
                for (i, (a, w)) in angles.iter().zip(weights).enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}:{w}")?;
                }
                f.write_str("}")
            }
            CircleMeasure::Arc { start, end } => write!(f, "arc({start},{end})"),
            CircleMeasure::Mixture {
                components,
                weights,
            } => {
                f.write_str("mixture{")?;
                for (i, (c, w)) in components.iter().zip(weights).enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}*{c}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl FromStr for CircleMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_measure(s.trim())?.validate()
    }
}

fn bad(s: &str) -> Error {
    Error::InvalidMeasure(format!("cannot parse measure '{s}'"))
}

fn parse_number(s: &str, whole: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(whole))
}

fn parse_measure(s: &str) -> Result<CircleMeasure> {
    if s == "uniform" {
        return Ok(CircleMeasure::Uniform);
    }
    if let Some(body) = s.strip_prefix("arc(").and_then(|r| r.strip_suffix(')')) {
        let (a, b) = body.split_once(',').ok_or_else(|| bad(s))?;
        return Ok(CircleMeasure::Arc {
            start: parse_number(a, s)?,
            end: parse_number(b, s)?,
        });
    }
    if let Some(body) = s.strip_prefix("atomic{").and_then(|r| r.strip_suffix('}')) {
        let mut angles = Vec::new();
        let mut weights = Vec::new();
        for item in body.split(',') {
            let (a, w) = item.split_once(':').ok_or_else(|| bad(s))?;
            angles.push(parse_number(a, s)?);
            weights.push(parse_number(w, s)?);
        }
        return Ok(CircleMeasure::Atomic { angles, weights });
    }
    if let Some(body) = s.strip_prefix("mixture{").and_then(|r| r.strip_suffix('}')) {
        let mut components = Vec::new();
        let mut weights = Vec::new();
        for item in split_top_level(body) {
            let (w, c) = item.split_once('*').ok_or_else(|| bad(s))?;
            weights.push(parse_number(w, s)?);
            components.push(parse_measure(c.trim())?);
        }
        return Ok(CircleMeasure::Mixture {
            components,
            weights,
        });
    }
    Err(bad(s))
}

fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut last = 0;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&body[last..i]);
                last = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[last..]);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn validate_accepts_uniform_and_normalized_atoms() {
        assert_eq!(CircleMeasure::Uniform.validate().unwrap(), CircleMeasure::Uniform);
        let m = CircleMeasure::antipodal_pair().validate().unwrap();
        assert_eq!(m, CircleMeasure::antipodal_pair());
    }

    #[test]
    fn validate_rejects_bad_weights_arcs_and_duplicates() {
        assert!(CircleMeasure::atomic(&[(0.0, 0.3), (0.5, 0.3)]).is_err());
        assert!(CircleMeasure::arc(0.5, 0.5).is_err());
        assert!(CircleMeasure::arc(0.7, 0.2).is_err());
        assert!(CircleMeasure::atomic(&[(0.25, 0.5), (0.25, 0.5)]).is_err());
        assert!(CircleMeasure::atomic(&[(1.0, 1.0)]).is_err());
        let nested = CircleMeasure::mixture(vec![(
            1.0,
            CircleMeasure::Mixture {
                components: vec![CircleMeasure::Uniform],
                weights: vec![1.0],
            },
        )]);
        assert!(nested.is_err());
    }

    #[test]
    fn validate_renormalizes_tiny_drift() {
        let m = CircleMeasure::atomic(&[(0.0, 0.5 + 4e-10), (0.5, 0.5)]).unwrap();
        let CircleMeasure::Atomic { weights, .. } = m else { unreachable!() };
        assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn closed_form_moments() {
        assert_eq!(CircleMeasure::Uniform.moment(3), Complex64::new(0.0, 0.0));
        let pair = CircleMeasure::antipodal_pair();
        assert!(close(pair.moment(1), Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(pair.moment(2), Complex64::new(1.0, 0.0), 1e-15));
        let arc = CircleMeasure::arc(0.0, 0.5).unwrap();
        // midpoint-rule quadrature of 2∫_0^{1/2} exp(2πiθ)dθ
        let steps = 200_000;
        let h = 0.5 / steps as f64;
        let quad: Complex64 = (0..steps)
            .map(|j| unit_point((j as f64 + 0.5) * h) * h)
            .sum::<Complex64>()
            / 0.5;
        assert!(close(arc.moment(1), quad, 1e-9));
        assert!(close(arc.moment(1), Complex64::new(0.0, 0.636_619_772_367_581_3), 1e-12));
    }

    #[test]
    fn mixture_moment_is_weighted_sum() {
        let m = CircleMeasure::mixture(vec![
            (0.25, CircleMeasure::Uniform),
            (0.75, CircleMeasure::antipodal_pair()),
        ])
        .unwrap();
        assert!(close(m.moment(2), Complex64::new(0.75, 0.0), 1e-15));
        assert!(close(m.moment(1), Complex64::new(0.0, 0.0), 1e-15));
    }

    #[test]
    fn angle_cdf_examples() {
        assert_eq!(CircleMeasure::Uniform.angle_cdf(0.25).unwrap(), 0.25);
        assert_eq!(CircleMeasure::antipodal_pair().angle_cdf(0.4).unwrap(), 0.5);
        let arc = CircleMeasure::arc(0.2, 0.7).unwrap();
        assert!((arc.angle_cdf(0.45).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(arc.angle_cdf(1.0).unwrap(), 1.0);
        assert!(arc.angle_cdf(1.5).is_err());
        assert!(arc.angle_cdf(-0.1).is_err());
        let pair = CircleMeasure::antipodal_pair();
        assert_eq!(pair.angle_cdf(0.5).unwrap(), 1.0);
        assert_eq!(pair.angle_cdf_left(0.5).unwrap(), 0.5);
        assert_eq!(pair.angle_cdf(1.0).unwrap(), 1.0);
    }

    #[test]
    fn point_mass_sample_is_exact() {
        let m = CircleMeasure::atomic(&[(0.0, 1.0)]).unwrap();
        for seed in [0, 1, u64::MAX] {
            let s = m.sample(5, seed).unwrap();
            assert!(s.points.iter().all(|&z| z == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn sample_rejects_tiny_n() {
        assert!(CircleMeasure::Uniform.sample(1, 0).is_err());
    }

    #[test]
    fn arc_samples_stay_on_arc() {
        let m = CircleMeasure::arc(0.0, 0.5).unwrap();
        let s = m.sample(10_000, 3).unwrap();
        assert!(s.angles.iter().all(|&a| (0.0..0.5).contains(&a)));
    }

    #[test]
    fn uniform_sample_mean_is_small() {
        // E|mean| ≈ sqrt(π/(4n)) ≈ 0.0089 at n = 10⁴; 0.05 is > 5σ away.
        let good = (0..100)
            .filter(|&seed| {
                let s = CircleMeasure::Uniform.sample(10_000, seed).unwrap();
                let mean: Complex64 = s.points.iter().sum::<Complex64>() / 10_000.0;
                mean.norm() <= 0.05
            })
            .count();
        assert!(good >= 95, "{good}");
    }

    #[test]
    fn sample_points_lie_on_circle() {
        let s = CircleMeasure::Uniform.sample(2000, 11).unwrap();
        for (z, &a) in s.points.iter().zip(&s.angles) {
            assert!((z.norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
            assert!((z - unit_point(a)).norm() <= 1e-12);
        }
    }

    #[test]
    fn repeated_atoms_are_bit_identical() {
        let m = CircleMeasure::atomic(&[(0.1, 0.3), (0.35, 0.7)]).unwrap();
        let s = m.sample(200, 5).unwrap();
        let first = s.points[0];
        let same = s.angles.iter().zip(&s.points).filter(|(&a, _)| a == s.angles[0]);
        for (_, z) in same {
            assert_eq!(z.re.to_bits(), first.re.to_bits());
            assert_eq!(z.im.to_bits(), first.im.to_bits());
        }
    }

    #[test]
    fn display_round_trips() {
        let cases = [
            CircleMeasure::Uniform,
            CircleMeasure::antipodal_pair(),
            CircleMeasure::arc(0.2, 0.7).unwrap(),
            CircleMeasure::mixture(vec![
                (0.5, CircleMeasure::Uniform),
                (0.5, CircleMeasure::arc(0.0, 0.5).unwrap()),
            ])
            .unwrap(),
        ];
        for m in cases {
            let parsed: CircleMeasure = m.to_string().parse().unwrap();
            assert_eq!(parsed, m);
        }
        assert!("atomic{0:0.6,0.5:0.6}".parse::<CircleMeasure>().is_err());
        assert!("gaussian".parse::<CircleMeasure>().is_err());
    }
}
