//! Critical points of a [`RootPoly`].
//!
//! A root `ζ_j` of multiplicity `m_j` is a root of `p'` of multiplicity
//! `m_j − 1`; those copies are emitted exactly. The remaining `d − 1` critical
//! points (for `d` distinct roots) are the zeros of the logarithmic derivative
//! `S(z) = Σ m_j/(z − ζ_j)` and are found by a simultaneous Aberth–Ehrlich
//! iteration on `p'`. With `p''/p' = S + S'/S`, the Newton correction for `p'`
//! is `S/(S² + S')`, and the Aberth sum runs over every other root of `p'`,
//! which includes the deflated copies. Each evaluation is O(d) and never
//! touches coefficients.
//!
//! [`critical_points_dense`] is the cross-check: eigenvalues of the
//! materialized companion matrix.

use std::f64::consts::TAU;

use num_complex::Complex64;
use wide::f64x4;

use crate::companion::{dense_eigenvalues, StructuredCompanion};
use crate::error::{Error, Result};
use crate::measure::{rng_from_seed, uniform_variate, unit_point};
use crate::root_poly::RootPoly;
use crate::ORACLE_MAX_DEGREE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Iterative,
    Dense,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Bound on the scaled residual: `|S(y)| · dist(y, roots) / d`, or the
    /// relative Newton step when that is smaller.
    pub tolerance: f64,
    /// Sweeps per attempt.
    pub max_iterations: usize,
    /// Re-randomized attempts after the first one fails.
    pub restarts: usize,
    /// Seed for restart perturbations.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-12,
            max_iterations: 200,
            restarts: 3,
            seed: 0x5eed_c417_1ca1,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// The `n − 1` critical points, with multiplicity, plus diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalSet {
    pub points: Vec<Complex64>,
    pub method: SolveMethod,
    /// Total sweeps over all attempts (0 for the dense method).
    pub iterations: usize,
    /// Largest scaled residual over the non-deflated points.
    pub max_residual: f64,
    pub converged: bool,
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `p'(z)/p''(z) = S/(S² + S')`.
pub fn newton_correction(p: &RootPoly, z: Complex64) -> Result<Complex64> {
    let (s, ds) = p.log_derivatives(z)?;
    let denom = s * s + ds;
    if denom.re == 0.0 && denom.im == 0.0 {
        return Err(Error::DegenerateNewton { re: z.re, im: z.im });
    }
    Ok(s / denom)
}

/// Roots split into planar arrays for the hot loops.
struct Poles {
    re: Vec<f64>,
    im: Vec<f64>,
    mult: Vec<f64>,
    /// `m_j − 1`, the deflated multiplicity.
    excess: Vec<f64>,
    any_excess: bool,
}

struct Evaluation {
    s: Complex64,
    ds: Complex64,
    /// `Σ (m_j − 1)/(z − ζ_j)`.
    deflated: Complex64,
    min_dist_sq: f64,
}

impl Poles {
    fn new(p: &RootPoly) -> Self {
        let roots = p.distinct_roots();
        let mult: Vec<f64> = p.multiplicities().iter().map(|&m| m as f64).collect();
        let excess: Vec<f64> = mult.iter().map(|m| m - 1.0).collect();
        Poles {
            re: roots.iter().map(|z| z.re).collect(),
            im: roots.iter().map(|z| z.im).collect(),
            any_excess: excess.iter().any(|&e| e > 0.0),
            mult,
            excess,
        }
    }

    fn evaluate(&self, z: Complex64) -> Evaluation {
        let (s, ds, min_dist_sq) = pole_sums(z, &self.re, &self.im, &self.mult);
        let mut deflated = Complex64::new(0.0, 0.0);
        if self.any_excess {
            for ((&rr, &ri), &e) in self.re.iter().zip(&self.im).zip(&self.excess) {
                if e > 0.0 {
                    deflated += Complex64::new(z.re - rr, z.im - ri).inv() * e;
                }
            }
        }
        Evaluation {
            s,
            ds,
            deflated,
            min_dist_sq,
        }
    }
}

/// The smaller of `|S(y)|·dist/d` and the Newton step for `p'` relative to
/// `max(|y|, dist)`. The first is blind to rounding in `y` when two roots
/// nearly coincide (`|S'| ~ dist⁻²` amplifies it); the second never gets small
/// at a multiple zero. Either one being below tolerance means the iterate is
/// as good as double precision allows.
fn scaled_residual(eval: &Evaluation, y: Complex64, distinct: usize) -> f64 {
    let dist = eval.min_dist_sq.sqrt();
    let log_derivative = eval.s.norm() * dist / distinct as f64;
    let denom = eval.s * eval.s + eval.ds;
    let newton = (eval.s / denom).norm() / y.norm().max(dist);
    if newton.is_finite() {
        log_derivative.min(newton)
    } else {
        log_derivative
    }
}

/// `(Σ w/(z − x), −Σ w/(z − x)², min |z − x|²)` over planar points `x`.
/// Four-lane accumulators vectorize the loop while keeping a fixed summation
/// order, so results do not depend on the machine's vector width.
fn pole_sums(z: Complex64, re: &[f64], im: &[f64], w: &[f64]) -> (Complex64, Complex64, f64) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: AVX support was just checked.
        return unsafe { avx::pole_sums(z, re, im, w) };
    }
    pole_sums_portable(z, re, im, w)
}

#[inline(always)]
fn pole_sums_portable(z: Complex64, re: &[f64], im: &[f64], w: &[f64]) -> (Complex64, Complex64, f64) {
    let (zr, zi) = (f64x4::splat(z.re), f64x4::splat(z.im));
    let mut sr = f64x4::ZERO;
    let mut si = f64x4::ZERO;
    let mut dsr = f64x4::ZERO;
    let mut dsi = f64x4::ZERO;
    let mut min_sq = f64x4::splat(f64::INFINITY);
    let lanes = re.chunks_exact(4).zip(im.chunks_exact(4)).zip(w.chunks_exact(4));
    for ((cr, ci), cw) in lanes {
        let dr = zr - f64x4::from(<[f64; 4]>::try_from(cr).unwrap());
        let di = zi - f64x4::from(<[f64; 4]>::try_from(ci).unwrap());
        let m = f64x4::from(<[f64; 4]>::try_from(cw).unwrap());
        let nsq = dr * dr + di * di;
        min_sq = min_sq.fast_min(nsq);
        let q = f64x4::ONE / nsq;
        let ir = dr * q;
        let ii = -(di * q);
        sr += m * ir;
        si += m * ii;
        dsr -= m * (ir * ir - ii * ii);
        dsi -= m * (f64x4::splat(2.0) * ir * ii);
    }
    let mut s = Complex64::new(sr.reduce_add(), si.reduce_add());
    let mut ds = Complex64::new(dsr.reduce_add(), dsi.reduce_add());
    let mut min_sq = min_sq.to_array().into_iter().fold(f64::INFINITY, f64::min);
    let tail = re.len() / 4 * 4;
    for k in tail..re.len() {
        let diff = Complex64::new(z.re - re[k], z.im - im[k]);
        min_sq = min_sq.min(diff.norm_sqr());
        let inv = diff.inv();
        s += inv * w[k];
        ds -= inv * inv * w[k];
    }
    (s, ds, min_sq)
}

/// `Σ 1/(z − x)` over planar points `x`, vectorized like [`pole_sums`].
fn reciprocal_sum(z: Complex64, re: &[f64], im: &[f64]) -> Complex64 {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: AVX support was just checked.
        return unsafe { avx::reciprocal_sum(z, re, im) };
    }
    reciprocal_sum_portable(z, re, im)
}

/// The same kernels compiled for AVX. The operations and their order are
/// unchanged, so results are bit-identical to the portable build.
#[cfg(target_arch = "x86_64")]
mod avx {
    use num_complex::Complex64;

    #[target_feature(enable = "avx")]
    pub(super) unsafe fn pole_sums(z: Complex64, re: &[f64], im: &[f64], w: &[f64]) -> (Complex64, Complex64, f64) {
        super::pole_sums_portable(z, re, im, w)
    }

    #[target_feature(enable = "avx")]
    pub(super) unsafe fn reciprocal_sum(z: Complex64, re: &[f64], im: &[f64]) -> Complex64 {
        super::reciprocal_sum_portable(z, re, im)
    }
}

#[inline(always)]
fn reciprocal_sum_portable(z: Complex64, re: &[f64], im: &[f64]) -> Complex64 {
    let (zr, zi) = (f64x4::splat(z.re), f64x4::splat(z.im));
    let mut ar = f64x4::ZERO;
    let mut ai = f64x4::ZERO;
    for (cr, ci) in re.chunks_exact(4).zip(im.chunks_exact(4)) {
        let dr = zr - f64x4::from(<[f64; 4]>::try_from(cr).unwrap());
        let di = zi - f64x4::from(<[f64; 4]>::try_from(ci).unwrap());
        let q = f64x4::ONE / (dr * dr + di * di);
        ar += dr * q;
        ai -= di * q;
    }
    let mut sum = Complex64::new(ar.reduce_add(), ai.reduce_add());
    for k in re.len() / 4 * 4..re.len() {
        sum += Complex64::new(z.re - re[k], z.im - im[k]).inv();
    }
    sum
}

/// `Σ_{k≠i} 1/(y_i − y_k)`.
fn aberth_sum(re: &[f64], im: &[f64], i: usize) -> Complex64 {
    let y = Complex64::new(re[i], im[i]);
    reciprocal_sum(y, &re[..i], &im[..i]) + reciprocal_sum(y, &re[i + 1..], &im[i + 1..])
}

/// Starting points just inside the circle at the midpoints of the angular gaps
/// between consecutive distinct roots, omitting the widest gap. Each guess is
/// then moved toward the zero of a local model of `S`: the poles bordering its
/// gap exactly, everything else linearized about the guess.
fn initial_guesses(p: &RootPoly, poles: &Poles) -> Vec<Complex64> {
    let d = p.distinct_count();
    let mut order: Vec<(f64, usize)> = p
        .distinct_roots()
        .iter()
        .enumerate()
        .map(|(j, z)| ((z.im.atan2(z.re) / TAU).rem_euclid(1.0), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gap = |j: usize| {
        if j + 1 < d {
            order[j + 1].0 - order[j].0
        } else {
            order[0].0 + 1.0 - order[d - 1].0
        }
    };
    let widest = (0..d)
        .max_by(|&a, &b| gap(a).total_cmp(&gap(b)))
        .unwrap_or(0);
    let shrink = 1.0 - 1.0 / (2.0 * d as f64);
    let reach = LOCAL_POLES.min(d / 2);
    (0..d)
        .filter(|&j| j != widest)
        .map(|j| {
            let start = unit_point(order[j].0 + 0.5 * gap(j)) * shrink;
            if reach == 0 {
                return start;
            }
            let local: Vec<(Complex64, f64)> = (0..2 * reach)
                .map(|t| {
                    let k = order[(j + d + 1 + t - reach) % d].1;
                    (Complex64::new(poles.re[k], poles.im[k]), poles.mult[k])
                })
                .collect();
            local_model_zero(start, &local, poles, 0.5 * TAU * gap(j))
        })
        .collect()
}

/// Poles on each side of a gap kept exact by [`local_model_zero`].
const LOCAL_POLES: usize = 4;

/// Newton on `Σ_local m/(y − ζ) + F + F'·(y − y₀)`, where `F`, `F'` are the
/// far-field part of `S`, `S'` at `y₀`. Falls back to `y₀` if the model's zero
/// wanders off by more than `max_move` or leaves the disc.
fn local_model_zero(y0: Complex64, local: &[(Complex64, f64)], poles: &Poles, max_move: f64) -> Complex64 {
    let (s, ds, _) = pole_sums(y0, &poles.re, &poles.im, &poles.mult);
    let (mut far, mut far_prime) = (s, ds);
    for &(z, m) in local {
        let inv = (y0 - z).inv();
        far -= inv * m;
        far_prime += inv * inv * m;
    }
    let mut y = y0;
    for _ in 0..8 {
        let (mut g, mut dg) = (far + far_prime * (y - y0), far_prime);
        for &(z, m) in local {
            let inv = (y - z).inv();
            g += inv * m;
            dg -= inv * inv * m;
        }
        let step = g / dg;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return y0;
        }
        y -= step;
        if (y - y0).norm() > max_move || y.norm() >= 1.0 {
            return y0;
        }
        if step.norm() <= 1e-3 * max_move {
            break;
        }
    }
    y
}

/// Critical points by deflation plus Aberth–Ehrlich iteration on `S`.
pub fn critical_points(p: &RootPoly, opts: &SolverOptions) -> Result<CriticalSet> {
    opts.validate()?;
    let d = p.distinct_count();
    let mut deflated = Vec::with_capacity(p.degree() - d);
    for (&z, &m) in p.distinct_roots().iter().zip(p.multiplicities()) {
        deflated.extend(std::iter::repeat_n(z, m - 1));
    }
    if d == 1 {
        return Ok(CriticalSet {
            points: deflated,
            method: SolveMethod::Iterative,
            iterations: 0,
            max_residual: 0.0,
            converged: true,
        });
    }

    let poles = Poles::new(p);
    let guesses = initial_guesses(p, &poles);
    let mut re: Vec<f64> = guesses.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = guesses.iter().map(|z| z.im).collect();
    let free = re.len();
    let mut done = vec![false; free];
    // residual of the current position, when it has been evaluated there
    let mut known: Vec<Option<f64>> = vec![None; free];
    let mut iterations = 0;
    let mut rng = rng_from_seed(opts.seed);
    let outer_radius = 1.0 - 1.0 / (2.0 * d as f64);

    for attempt in 0..=opts.restarts {
        if attempt > 0 {
            for i in 0..free {
                if !done[i] {
                    let radius = 0.5 + (outer_radius - 0.5).max(0.0) * uniform_variate(&mut rng);
                    let z = unit_point(uniform_variate(&mut rng)) * radius;
                    re[i] = z.re;
                    im[i] = z.im;
                    known[i] = None;
                }
            }
        }
        for _ in 0..opts.max_iterations {
            let mut active = 0;
            iterations += 1;
            for i in 0..free {
                if done[i] {
                    continue;
                }
                let y = Complex64::new(re[i], im[i]);
                let eval = poles.evaluate(y);
                if eval.min_dist_sq == 0.0 {
                    // sitting on a pole; nudge inward
                    re[i] *= 1.0 - 1e-8;
                    im[i] *= 1.0 - 1e-8;
                    active += 1;
                    continue;
                }
                let residual = scaled_residual(&eval, y, d);
                if residual <= opts.tolerance {
                    done[i] = true;
                    known[i] = Some(residual);
                    continue;
                }
                let denom = eval.s * eval.s + eval.ds;
                if denom.re == 0.0 && denom.im == 0.0 {
                    re[i] += 1e-8;
                    active += 1;
                    continue;
                }
                let newton = eval.s / denom;
                let repulsion = aberth_sum(&re, &im, i) + eval.deflated;
                let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
                if !step.re.is_finite() || !step.im.is_finite() {
                    active += 1;
                    continue;
                }
                let next = y - step;
                re[i] = next.re;
                im[i] = next.im;
                // a Newton step at rounding level: the iterate cannot improve
                let stalled =
                    newton.norm() <= 4.0 * f64::EPSILON * next.norm().max(eval.min_dist_sq.sqrt());
                if stalled {
                    done[i] = true;
                } else {
                    active += 1;
                }
            }
            if active == 0 {
                break;
            }
        }
        if done.iter().all(|&x| x) {
            break;
        }
    }

    let mut max_residual: f64 = 0.0;
    let mut points = Vec::with_capacity(p.degree() - 1);
    for i in 0..free {
        let y = Complex64::new(re[i], im[i]);
        let residual = known[i].unwrap_or_else(|| {
            let eval = poles.evaluate(y);
            if eval.min_dist_sq == 0.0 {
                f64::INFINITY
            } else {
                scaled_residual(&eval, y, d)
            }
        });
        max_residual = max_residual.max(residual);
        points.push(y);
    }
    points.extend(deflated);
    let converged = max_residual <= opts.tolerance && points.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    Ok(CriticalSet {
        points,
        method: SolveMethod::Iterative,
        iterations,
        max_residual,
        converged,
    })
}

/// Critical points as eigenvalues of the materialized companion matrix.
pub fn critical_points_dense(p: &RootPoly) -> Result<CriticalSet> {
    if p.degree() > ORACLE_MAX_DEGREE {
        return Err(Error::OracleScope {
            what: "dense critical points",
            max: ORACLE_MAX_DEGREE,
            got: p.degree(),
        });
    }
    // Repeated roots are exact eigenvalues of the full matrix but make the QR
    // iteration crawl, so they are split off first, as in the iterative path.
    let d = p.distinct_count();
    let mut points = if d == p.degree() {
        dense_eigenvalues(&StructuredCompanion::build(p.distinct_roots())?.materialize()?)?
    } else if d == 1 {
        Vec::new()
    } else {
        let reduced = StructuredCompanion::from_multiset(p.distinct_roots(), p.multiplicities())?;
        dense_eigenvalues(&reduced.materialize()?)?
    };
    let poles = Poles::new(p);
    let max_residual = points
        .iter()
        .map(|&y| (y, poles.evaluate(y)))
        .filter(|(_, e)| e.min_dist_sq > 0.0)
        .map(|(y, e)| scaled_residual(&e, y, d))
        .fold(0.0, f64::max);
    for (&z, &m) in p.distinct_roots().iter().zip(p.multiplicities()) {
        points.extend(std::iter::repeat_n(z, m - 1));
    }
    Ok(CriticalSet {
        points,
        method: SolveMethod::Dense,
        iterations: 0,
        max_residual,
        converged: true,
    })
}
