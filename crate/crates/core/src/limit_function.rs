//! The limit `f(z) = Σ_{k≥0} conj(c_{k+1}) z^k` of the scaled logarithmic
//! derivative `p_n'/(n p_n)` inside the unit disc (up to sign), and a count of
//! its zeros in a disc. For large `n` the number of critical points inside
//! `|z| < r` settles on this count.
//!
//! Since `|c_k| ≤ 1`, truncating after `K` terms at radius `r` leaves a tail of
//! at most `r^K/(1 − r)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{unit_point, CircleMeasure, MomentVector};

/// Contour samples used to check that `f` stays away from zero on `|z| = r`.
pub const CONTOUR_PROBE_POINTS: usize = 4096;

const MAX_CONTOUR_POINTS: usize = 1 << 20;

/// Moments below this bound everywhere mean `f ≡ 0` (the uniform law).
const ZERO_MOMENT_BOUND: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct LimitFunction {
    pub moments: MomentVector,
    pub truncation: usize,
    pub radius: f64,
    pub tail_bound: f64,
}

/// Smallest `K ≥ 1` with `r^K/(1 − r) ≤ tol`.
pub fn truncation_for(radius: f64, tol: f64) -> usize {
    if radius == 0.0 {
        return 1;
    }
    let k = ((tol * (1.0 - radius)).ln() / radius.ln()).ceil();
    (k.max(1.0)) as usize
}

impl LimitFunction {
    /// Truncates the series so the error is at most `tol` on `|z| ≤ radius`.
    pub fn new(measure: &CircleMeasure, radius: f64, tol: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&radius) {
            return Err(Error::InvalidArgument(format!(
                "evaluation radius {radius} must lie in [0, 1)"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(Self::with_truncation(measure, radius, truncation_for(radius, tol)))
    }

    /// Keeps exactly `truncation` terms.
    pub fn with_truncation(measure: &CircleMeasure, radius: f64, truncation: usize) -> Self {
        LimitFunction {
            moments: measure.moments(truncation),
            truncation,
            radius,
            tail_bound: radius.powi(truncation as i32) / (1.0 - radius),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.moments.entries.iter().all(|c| c.norm() <= ZERO_MOMENT_BOUND)
    }

    /// Horner evaluation of the truncated series; `|z|` must not exceed the
    /// construction radius.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "|z| = {} exceeds truncation radius {}",
                z.norm(),
                self.radius
            )));
        }
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        self.moments
            .entries
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.conj())
    }

    /// Winding number of `f` around `|z| = radius`, tracked as a sum of
    /// principal-argument increments between consecutive contour samples.
    /// Returns the count and the number of samples used.
    fn winding_number(&self, min_clearance: f64) -> Result<(i64, usize)> {
        let probe = self.contour_values(CONTOUR_PROBE_POINTS);
        let min_abs = probe.iter().map(|f| f.norm()).fold(f64::INFINITY, f64::min);
        if min_abs <= min_clearance {
            return Err(Error::ContourDegenerate {
                radius: self.radius,
                min_abs,
            });
        }
        let mut values = probe;
        let mut previous: Option<i64> = None;
        loop {
            let (count, max_step, residue) = accumulate_phase(&values);
            let resolved = max_step <= PI / 4.0 && residue <= 0.1;
            if resolved && previous == Some(count) {
                return Ok((count, values.len()));
            }
            if values.len() >= MAX_CONTOUR_POINTS {
                return Err(Error::ContourDegenerate {
                    radius: self.radius,
                    min_abs,
                });
            }
            previous = resolved.then_some(count);
            values = self.contour_values(values.len() * 2);
        }
    }

    fn contour_values(&self, points: usize) -> Vec<Complex64> {
        (0..points)
            .map(|j| self.eval_unchecked(unit_point(j as f64 / points as f64) * self.radius))
            .collect()
    }
}

/// `(round(total/2π), max |increment|, |total/2π − round|)`.
fn accumulate_phase(values: &[Complex64]) -> (i64, f64, f64) {
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for (j, &f) in values.iter().enumerate() {
        let next = values[(j + 1) % values.len()];
        let step = (next / f).arg();
        max_step = max_step.max(step.abs());
        total += step;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    (rounded as i64, max_step, (turns - rounded).abs())
}

/// `f(z)` to within `tol`, truncated at radius `|z|`.
pub fn eval_f(measure: &CircleMeasure, z: Complex64, tol: f64) -> Result<Complex64> {
    let r = z.norm();
    if r >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "limit function is only defined inside the unit disc, |z| = {r}"
        )));
    }
    LimitFunction::new(measure, r, tol)?.eval(z)
}

/// Outcome of counting zeros of `f` in a disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroCount {
    Zeros(usize),
    /// All moments vanish, so `f ≡ 0` and counting is meaningless.
    IdenticallyZero,
}

impl ZeroCount {
    pub fn count(self) -> Option<usize> {
        match self {
            ZeroCount::Zeros(k) => Some(k),
            ZeroCount::IdenticallyZero => None,
        }
    }
}

/// Number of zeros of `f` in `|z| < r` by the argument principle.
pub fn count_zeros_in_disc(measure: &CircleMeasure, r: f64, tol: f64) -> Result<ZeroCount> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("disc radius {r} must lie in (0, 1)")));
    }
    let f = LimitFunction::new(measure, r, tol)?;
    if f.is_identically_zero() {
        return Ok(ZeroCount::IdenticallyZero);
    }
    let (winding, _) = f.winding_number(10.0 * tol)?;
    // f is analytic in the disc, so the winding number is a zero count
    Ok(ZeroCount::Zeros(winding.max(0) as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_limit_vanishes() {
        for z in [c(0.0, 0.0), c(0.3, -0.4), c(-0.9, 0.0)] {
            assert_eq!(eval_f(&CircleMeasure::Uniform, z, 1e-12).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn closed_form_limits() {
        let pair = CircleMeasure::antipodal_pair();
        let got = eval_f(&pair, c(0.5, 0.0), 1e-12).unwrap();
        assert!((got - c(2.0 / 3.0, 0.0)).norm() <= 1e-12);
        let z = c(0.2, 0.6);
        let got = eval_f(&pair, z, 1e-12).unwrap();
        assert!((got - z / (1.0 - z * z)).norm() <= 1e-12);

        let point = CircleMeasure::atomic(&[(0.0, 1.0)]).unwrap();
        let got = eval_f(&point, c(0.5, 0.0), 1e-12).unwrap();
        assert!((got - c(2.0, 0.0)).norm() <= 1e-12);

        assert!(eval_f(&point, c(1.0, 0.0), 1e-12).is_err());
        assert!(eval_f(&point, c(0.0, 0.0), 1e-12).is_ok());
    }

    #[test]
    fn truncation_error_bound_holds() {
        let m = CircleMeasure::arc(0.1, 0.4).unwrap();
        for r in [0.3, 0.7, 0.95] {
            let tol = 1e-10;
            let short = LimitFunction::new(&m, r, tol).unwrap();
            assert!(short.tail_bound <= tol);
            let long = LimitFunction::with_truncation(&m, r, 2 * short.truncation);
            let z = unit_point(0.3) * r;
            assert!((short.eval(z).unwrap() - long.eval(z).unwrap()).norm() <= tol);
        }
    }

    #[test]
    fn zero_counts() {
        assert_eq!(
            count_zeros_in_disc(&CircleMeasure::Uniform, 0.5, 1e-12).unwrap(),
            ZeroCount::IdenticallyZero
        );
        let pair = CircleMeasure::antipodal_pair();
        assert_eq!(count_zeros_in_disc(&pair, 0.5, 1e-12).unwrap(), ZeroCount::Zeros(1));
        let point = CircleMeasure::atomic(&[(0.0, 1.0)]).unwrap();
        assert_eq!(count_zeros_in_disc(&point, 0.5, 1e-12).unwrap(), ZeroCount::Zeros(0));
        assert!(count_zeros_in_disc(&point, 1.0, 1e-12).is_err());
    }

    #[test]
    fn three_atoms_zero_count_matches_polynomial_roots() {
        // atoms at 0, 1/3, 2/3 with equal weight: c_k = 1 if 3 | k else 0,
        // so f(z) = z²/(1 − z³): a double zero at the origin.
        let m = CircleMeasure::atomic(&[(0.0, 1.0 / 3.0), (1.0 / 3.0, 1.0 / 3.0), (2.0 / 3.0, 1.0 / 3.0)]).unwrap();
        assert_eq!(count_zeros_in_disc(&m, 0.6, 1e-12).unwrap(), ZeroCount::Zeros(2));
    }

    #[test]
    fn degenerate_contour_is_rejected() {
        // f(z) = conj(c_1) + conj(c_2) z + … for atoms at 0 (weight 0.6) and
        // 1/2 (weight 0.4): c_k = 1 for even k, 0.2 for odd k, so
        // f(z) = (0.2 + z)/(1 − z²) vanishes at z = −0.2.
        let m = CircleMeasure::atomic(&[(0.0, 0.6), (0.5, 0.4)]).unwrap();
        assert!(matches!(
            count_zeros_in_disc(&m, 0.2, 1e-12),
            Err(Error::ContourDegenerate { .. })
        ));
        assert_eq!(count_zeros_in_disc(&m, 0.3, 1e-12).unwrap(), ZeroCount::Zeros(1));
        assert_eq!(count_zeros_in_disc(&m, 0.1, 1e-12).unwrap(), ZeroCount::Zeros(0));
    }

    #[test]
    fn zero_count_is_rotation_invariant() {
        let base = [(0.05, 0.5), (0.4, 0.3), (0.8, 0.2)];
        let reference = count_zeros_in_disc(&CircleMeasure::atomic(&base).unwrap(), 0.7, 1e-12).unwrap();
        for shift in [0.1, 0.25, 0.61] {
            let rotated: Vec<_> = base.iter().map(|&(a, w)| ((a + shift) % 1.0, w)).collect();
            let m = CircleMeasure::atomic(&rotated).unwrap();
            assert_eq!(count_zeros_in_disc(&m, 0.7, 1e-12).unwrap(), reference);
        }
    }
}
