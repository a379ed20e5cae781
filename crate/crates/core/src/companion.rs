//! The critical-point companion matrix `D(I − J/n) + (z_n/n)J`.
//!
//! Here `D = diag(z_1, …, z_{n−1})` and `J` is the all-ones matrix of order
//! `n − 1`. Its eigenvalues are the critical points of `Π (z − z_i)`. Writing
//! it as `diag(d) + u·1ᵀ` with `d_i = z_i` and `u_i = (z_n − z_i)/n` gives an
//! O(n) matvec, and power sums of the critical points follow from the trace
//! recursion
//!
//! ```text
//! Tr(M^k) = Tr(D^k) + Σ_{j=0}^{k−1} 1ᵀ D^{k−1−j} M^j u
//! ```
//!
//! which costs O(n·k²) instead of an O(n³) eigendecomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ORACLE_MAX_DEGREE;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `diag(d) + u·1ᵀ`, of order `n − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredCompanion {
    diag: Vec<Complex64>,
    update: Vec<Complex64>,
}

impl StructuredCompanion {
    /// Uses the last point as the distinguished root `z_n`.
    pub fn build(points: &[Complex64]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "companion matrix needs at least 2 points, got {n}"
            )));
        }
        let last = points[n - 1];
        let nf = n as f64;
        let diag = points[..n - 1].to_vec();
        let update = diag.iter().map(|&z| (last - z) / nf).collect();
        Ok(StructuredCompanion { diag, update })
    }

    /// The same construction on distinct roots `ζ_1..ζ_d` with
    /// multiplicities: `u_i = m_i (ζ_d − ζ_i)/n`. Its `d − 1` eigenvalues are
    /// the zeros of `Σ m_j/(z − ζ_j)`, i.e. the critical points other than the
    /// repeated roots themselves. With all `m_j = 1` this is [`Self::build`].
    pub fn from_multiset(roots: &[Complex64], multiplicities: &[usize]) -> Result<Self> {
        if roots.len() != multiplicities.len() {
            return Err(Error::SizeMismatch {
                expected: roots.len(),
                got: multiplicities.len(),
            });
        }
        let d = roots.len();
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "companion matrix needs at least 2 distinct roots, got {d}"
            )));
        }
        let n: usize = multiplicities.iter().sum();
        let last = roots[d - 1];
        let diag = roots[..d - 1].to_vec();
        let update = diag
            .iter()
            .zip(multiplicities)
            .map(|(&z, &m)| (last - z) * m as f64 / n as f64)
            .collect();
        Ok(StructuredCompanion { diag, update })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn update(&self) -> &[Complex64] {
        &self.update
    }

    /// `diag ∘ x + u·(Σx)`.
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.order() {
            return Err(Error::SizeMismatch {
                expected: self.order(),
                got: x.len(),
            });
        }
        let mut out = vec![ZERO; x.len()];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    fn matvec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let total: Complex64 = x.iter().sum();
        for ((o, (&d, &u)), &xi) in out.iter_mut().zip(self.diag.iter().zip(&self.update)).zip(x) {
            *o = d * xi + u * total;
        }
    }

    /// Dense copy for oracle work.
    pub fn materialize(&self) -> Result<DMatrix<Complex64>> {
        let order = self.order();
        if order > ORACLE_MAX_DEGREE {
            return Err(Error::OracleScope {
                what: "companion materialization",
                max: ORACLE_MAX_DEGREE,
                got: order,
            });
        }
        Ok(DMatrix::from_fn(order, order, |i, j| {
            if i == j {
                self.diag[i] + self.update[i]
            } else {
                self.update[i]
            }
        }))
    }

    /// `Tr(M^k)`, which equals the k-th power sum of the critical points.
    pub fn power_sum_trace(&self, k: usize) -> Complex64 {
        assert!(k >= 1, "power sums are defined for k >= 1");
        self.power_sum_traces(k)[k - 1]
    }

    /// `Tr(M^k)` for `k = 1..=kmax`, sharing the Krylov vectors `M^j u`.
    pub fn power_sum_traces(&self, kmax: usize) -> Vec<Complex64> {
        let order = self.order();
        // krylov[j] = M^j u
        let mut krylov: Vec<Vec<Complex64>> = Vec::with_capacity(kmax);
        if kmax > 0 {
            krylov.push(self.update.clone());
        }
        for j in 1..kmax {
            let mut next = vec![ZERO; order];
            self.matvec_into(&krylov[j - 1], &mut next);
            krylov.push(next);
        }

        let mut traces = Vec::with_capacity(kmax);
        // scaled[j] = D^{k−1−j} M^j u, advanced one power of D per k
        let mut scaled: Vec<Vec<Complex64>> = Vec::with_capacity(kmax);
        let mut diag_power = vec![Complex64::new(1.0, 0.0); order];
        for k in 1..=kmax {
            for s in scaled.iter_mut() {
                for (v, &d) in s.iter_mut().zip(&self.diag) {
                    *v *= d;
                }
            }
            scaled.push(krylov[k - 1].clone());
            for (p, &d) in diag_power.iter_mut().zip(&self.diag) {
                *p *= d;
            }
            let mut trace: Complex64 = diag_power.iter().sum();
            for s in &scaled {
                trace += s.iter().sum::<Complex64>();
            }
            traces.push(trace);
        }
        traces
    }
}

/// `Tr(M^k)/(n − 1)` for `k = 1..=kmax`: the power-sum averages of the
/// critical points of `Π (z − points_i)`.
pub fn power_sum_averages(points: &[Complex64], kmax: usize) -> Result<Vec<Complex64>> {
    let m = StructuredCompanion::build(points)?;
    let denom = m.order() as f64;
    Ok(m.power_sum_traces(kmax).into_iter().map(|t| t / denom).collect())
}

/// All eigenvalues of a dense complex matrix from a complex Schur
/// decomposition.
pub fn dense_eigenvalues(matrix: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if matrix.nrows() == 0 {
        return Ok(Vec::new());
    }
    let max_sweeps = 1000 * matrix.nrows();
    let schur = nalgebra::Schur::try_new(matrix.clone(), f64::EPSILON, max_sweeps)
        .ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{unit_point, CircleMeasure};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_points(n: usize, seed: u64) -> Vec<Complex64> {
        CircleMeasure::Uniform.sample(n, seed).unwrap().points
    }

    #[test]
    fn multiset_form_reduces_to_build() {
        let pts: Vec<Complex64> = [0.1, 0.45, 0.8].iter().map(|&a| unit_point(a)).collect();
        let plain = StructuredCompanion::build(&pts).unwrap();
        let multi = StructuredCompanion::from_multiset(&pts, &[1, 1, 1]).unwrap();
        assert_eq!(plain, multi);
        assert!(StructuredCompanion::from_multiset(&pts, &[1, 1]).is_err());
        assert!(StructuredCompanion::from_multiset(&pts[..1], &[3]).is_err());
    }

    #[test]
    fn multiset_eigenvalues_are_zeros_of_log_derivative() {
        let roots: Vec<Complex64> = [0.05, 0.3, 0.62, 0.9].iter().map(|&a| unit_point(a)).collect();
        let mult = [3usize, 1, 5, 2];
        let m = StructuredCompanion::from_multiset(&roots, &mult).unwrap();
        let eig = dense_eigenvalues(&m.materialize().unwrap()).unwrap();
        assert_eq!(eig.len(), 3);
        for y in eig {
            let s: Complex64 = roots.iter().zip(&mult).map(|(&z, &k)| k as f64 / (y - z)).sum();
            assert!(s.norm() <= 1e-12 * 11.0 / roots.iter().map(|&z| (y - z).norm()).fold(f64::INFINITY, f64::min), "{s}");
        }
    }

    #[test]
    fn build_two_points() {
        let m = StructuredCompanion::build(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(m.order(), 1);
        assert_eq!(m.diag(), &[c(1.0, 0.0)]);
        assert_eq!(m.update(), &[c(-1.0, 0.0)]);
        assert_eq!(m.materialize().unwrap()[(0, 0)], c(0.0, 0.0));
        assert!(StructuredCompanion::build(&[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn build_three_points() {
        let m = StructuredCompanion::build(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(m.order(), 2);
        assert_eq!(m.diag(), &[c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(m.update(), &[c(-2.0 / 3.0, 0.0), c(-1.0 / 3.0, -1.0 / 3.0)]);
    }

    #[test]
    fn materialize_matches_defining_formula() {
        let pts = random_points(17, 4);
        let n = pts.len();
        let nf = n as f64;
        let last = pts[n - 1];
        let dense = StructuredCompanion::build(&pts).unwrap().materialize().unwrap();
        // D(I − J/n) + (z_n/n)J entrywise
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let identity = if i == j { 1.0 } else { 0.0 };
                let formula = pts[i] * (identity - 1.0 / nf) + last / nf;
                assert!((dense[(i, j)] - formula).norm() <= 1e-15, "({i},{j})");
                let stated = if i == j {
                    pts[i] * (1.0 - 1.0 / nf) + last / nf
                } else {
                    (last - pts[i]) / nf
                };
                assert!((dense[(i, j)] - stated).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn materialize_rejects_large_order() {
        let m = StructuredCompanion::build(&random_points(514, 1)).unwrap();
        assert!(m.materialize().is_err());
    }

    #[test]
    fn matvec_examples() {
        let m = StructuredCompanion::build(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(m.matvec(&[c(1.0, 0.0)]).unwrap(), vec![c(0.0, 0.0)]);
        assert!(m.matvec(&[]).is_err());

        let m = StructuredCompanion::build(&random_points(257, 8)).unwrap();
        let zeros = vec![c(0.0, 0.0); 256];
        assert_eq!(m.matvec(&zeros).unwrap(), zeros);

        let x = random_points(256, 99);
        let fast = m.matvec(&x).unwrap();
        let dense = m.materialize().unwrap() * nalgebra::DVector::from_vec(x);
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn eigenvalues_of_small_cases() {
        let m = StructuredCompanion::build(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(dense_eigenvalues(&m.materialize().unwrap()).unwrap(), vec![c(0.0, 0.0)]);
    }

    #[test]
    fn power_sums_vanish_for_roots_of_unity() {
        let m = StructuredCompanion::build(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        for k in 1..6 {
            assert_eq!(m.power_sum_trace(k), c(0.0, 0.0));
        }
        for n in [5, 12, 100] {
            let pts: Vec<_> = (0..n)
                .map(|j| crate::measure::unit_point(j as f64 / n as f64))
                .collect();
            let m = StructuredCompanion::build(&pts).unwrap();
            for k in 1..=12 {
                assert!(m.power_sum_trace(k).norm() <= 1e-10, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn trace_matches_dense_eigenvalues() {
        for seed in 0..4u64 {
            let pts = random_points(51, seed);
            let m = StructuredCompanion::build(&pts).unwrap();
            let eig = dense_eigenvalues(&m.materialize().unwrap()).unwrap();
            let traces = m.power_sum_traces(10);
            for k in 1..=10 {
                let oracle: Complex64 = eig.iter().map(|l| l.powu(k as u32)).sum();
                let err = (traces[k - 1] - oracle).norm() / oracle.norm().max(1.0);
                assert!(err <= 1e-9, "seed={seed} k={k} err={err}");
            }
        }
    }

    #[test]
    fn trace_matches_dense_matrix_power() {
        // Independent of any eigen solver: Tr(M^k) from repeated dense products.
        let pts = random_points(30, 21);
        let m = StructuredCompanion::build(&pts).unwrap();
        let dense = m.materialize().unwrap();
        let mut power = dense.clone();
        for k in 1..=8 {
            let trace = power.trace();
            assert!((m.power_sum_trace(k) - trace).norm() <= 1e-11 * trace.norm().max(1.0));
            power = &power * &dense;
        }
    }

    #[test]
    fn first_trace_is_scaled_root_sum() {
        for n in [2usize, 10, 1000] {
            let pts = random_points(n, n as u64);
            let m = StructuredCompanion::build(&pts).unwrap();
            let total: Complex64 = pts.iter().sum();
            let expected = total * ((n - 1) as f64 / n as f64);
            assert!((m.power_sum_trace(1) - expected).norm() <= 1e-12 * n as f64);
        }
    }

    #[test]
    fn all_ones_power_identity() {
        // J^m = (n−1)^{m−1} J for the all-ones matrix of order n − 1
        for order in 1..=16usize {
            let j = DMatrix::<f64>::from_element(order, order, 1.0);
            let mut power = j.clone();
            for m in 1..=4u32 {
                let expected = &j * (order as f64).powi(m as i32 - 1);
                assert_eq!(power, expected, "order={order} m={m}");
                power = &power * &j;
            }
        }
    }

    #[test]
    fn power_sum_averages_examples() {
        let avg = power_sum_averages(&[c(1.0, 0.0), c(-1.0, 0.0)], 5).unwrap();
        assert!(avg.iter().all(|&a| a == c(0.0, 0.0)));

        let pair = CircleMeasure::antipodal_pair();
        let s = pair.sample(10_000, 12).unwrap();
        let avg = power_sum_averages(&s.points, 4).unwrap();
        assert!((avg[1] - c(1.0, 0.0)).norm() <= 0.05);

        let s = CircleMeasure::arc(0.0, 0.5).unwrap().sample(300, 2).unwrap();
        let avg = power_sum_averages(&s.points, 1).unwrap();
        let root_mean: Complex64 = s.points.iter().sum::<Complex64>() / 300.0;
        assert!((avg[0] - root_mean).norm() <= 1e-12 * 300.0);
    }
}
