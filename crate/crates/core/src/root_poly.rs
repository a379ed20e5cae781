//! Monic polynomials held as their roots.
//!
//! Nothing here expands coefficients except [`RootPoly::coefficients`], which
//! is a small-degree oracle for tests.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ORACLE_MAX_DEGREE;

/// `p(z) = Π (z − ζ_j)^{m_j}` with bit-distinct `ζ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootPoly {
    distinct_roots: Vec<Complex64>,
    multiplicities: Vec<usize>,
    degree: usize,
}

/// `p(z) = exp(log_magnitude) · phase`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub phase: Complex64,
}

impl LogValue {
    /// True when `z` was one of the roots; `log_magnitude` is then `-inf`.
    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        self.phase * self.log_magnitude.exp()
    }
}

fn bits(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

impl RootPoly {
    /// Groups bit-identical points into `(root, multiplicity)` pairs, keeping
    /// first-occurrence order.
    pub fn from_roots(points: &[Complex64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a root polynomial needs at least 2 roots, got {}",
                points.len()
            )));
        }
        let mut index: HashMap<(u64, u64), usize> = HashMap::with_capacity(points.len());
        let mut distinct_roots = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        for &z in points {
            match index.get(&bits(z)) {
                Some(&i) => multiplicities[i] += 1,
                None => {
                    index.insert(bits(z), distinct_roots.len());
                    distinct_roots.push(z);
                    multiplicities.push(1);
                }
            }
        }
        Ok(RootPoly {
            distinct_roots,
            multiplicities,
            degree: points.len(),
        })
    }

    /// Builds from explicit `(root, multiplicity)` pairs.
    pub fn from_multiset(pairs: &[(Complex64, usize)]) -> Result<Self> {
        let mut points = Vec::new();
        for &(z, m) in pairs {
            if m == 0 {
                return Err(Error::InvalidArgument("zero multiplicity".into()));
            }
            points.extend(std::iter::repeat_n(z, m));
        }
        Self::from_roots(&points)
    }

    /// The `n`-th roots of unity `exp(2πij/n)`.
    pub fn roots_of_unity(n: usize) -> Result<Self> {
        let pts: Vec<_> = (0..n)
            .map(|j| crate::measure::unit_point(j as f64 / n as f64))
            .collect();
        Self::from_roots(&pts)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn distinct_roots(&self) -> &[Complex64] {
        &self.distinct_roots
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn distinct_count(&self) -> usize {
        self.distinct_roots.len()
    }

    /// All roots with multiplicity, in grouping order.
    pub fn expanded_roots(&self) -> Vec<Complex64> {
        self.distinct_roots
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&z, &m)| std::iter::repeat_n(z, m))
            .collect()
    }

    /// Returns the stored root bit-equal to `z`, if any.
    pub fn pole_at(&self, z: Complex64) -> Option<usize> {
        let b = bits(z);
        self.distinct_roots.iter().position(|&r| bits(r) == b)
    }

    pub fn eval(&self, z: Complex64) -> LogValue {
        let mut log_magnitude = 0.0;
        let mut phase = Complex64::new(1.0, 0.0);
        for (&r, &m) in self.distinct_roots.iter().zip(&self.multiplicities) {
            let diff = z - r;
            let modulus = diff.norm();
            if modulus == 0.0 {
                return LogValue {
                    log_magnitude: f64::NEG_INFINITY,
                    phase: Complex64::new(1.0, 0.0),
                };
            }
            log_magnitude += m as f64 * modulus.ln();
            phase *= (diff / modulus).powu(m as u32);
            phase /= phase.norm();
        }
        LogValue {
            log_magnitude,
            phase,
        }
    }

    /// `S(z) = p'(z)/p(z) = Σ m_j/(z − ζ_j)`.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.log_derivatives(z).map(|(s, _)| s)
    }

    /// `S'(z) = −Σ m_j/(z − ζ_j)²`.
    pub fn log_derivative_prime(&self, z: Complex64) -> Result<Complex64> {
        self.log_derivatives(z).map(|(_, ds)| ds)
    }

    /// `(S(z), S'(z))` in one pass.
    pub fn log_derivatives(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for (&r, &m) in self.distinct_roots.iter().zip(&self.multiplicities) {
            let diff = z - r;
            if diff.re == 0.0 && diff.im == 0.0 {
                return Err(Error::EvaluateAtRoot { re: z.re, im: z.im });
            }
            let inv = diff.inv();
            let mf = m as f64;
            s += inv * mf;
            ds -= inv * inv * mf;
        }
        Ok((s, ds))
    }

    /// Monomial coefficients, lowest degree first. Test oracle only.
    pub fn coefficients(&self) -> Result<Vec<Complex64>> {
        if self.degree > ORACLE_MAX_DEGREE {
            return Err(Error::OracleScope {
                what: "coefficient expansion",
                max: ORACLE_MAX_DEGREE,
                got: self.degree,
            });
        }
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for z in self.expanded_roots() {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * z;
            }
            coeffs = next;
        }
        Ok(coeffs)
    }

    /// The polynomial whose roots are `rotation · ζ_j`.
    pub fn rotated(&self, rotation: Complex64) -> Self {
        RootPoly {
            distinct_roots: self.distinct_roots.iter().map(|&z| z * rotation).collect(),
            multiplicities: self.multiplicities.clone(),
            degree: self.degree,
        }
    }

    pub fn conjugated(&self) -> Self {
        RootPoly {
            distinct_roots: self.distinct_roots.iter().map(|z| z.conj()).collect(),
            multiplicities: self.multiplicities.clone(),
            degree: self.degree,
        }
    }
}

/// Evaluates `Σ c_i z^i` by Horner's rule.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Coefficients of the derivative of `Σ c_i z^i`.
pub fn derivative_coefficients(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}
