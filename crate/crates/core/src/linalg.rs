//! Dense complex matrices and state vectors of arbitrary dimension.
//!
//! Dimensions here are tiny (2 for the qubit, a handful of levels for spin
//! systems), so everything is a flat row-major `Vec` with naive products.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{DmcpError, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(DmcpError::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self { dim: N, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (k, &v) in entries.iter().enumerate() {
            m.set(k, k, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&v| v * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn one_norm(&self) -> f64 {
        let n = self.dim;
        (0..n).map(|c| (0..n).map(|r| self.data[r * n + c].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> C64 {
        let n = self.dim;
        if n == 2 {
            return self.data[0] * self.data[3] - self.data[1] * self.data[2];
        }
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot =
                (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm())).unwrap_or(col);
            if a[pivot * n + col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        det
    }

    /// Deviation of `U†U` from the identity (max entrywise modulus).
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().matmul(self).expect("same dimension");
        prod.max_abs_diff(&Self::identity(self.dim)).expect("same dimension")
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn exp(&self) -> Self {
        let n = self.dim;
        let norm = self.one_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let scaled = self.scale(C64::new(0.5f64.powi(squarings), 0.0));

        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=40 {
            term = term.matmul(&scaled).expect("same dimension").scale(C64::new(1.0 / k as f64, 0.0));
            result = result.add(&term).expect("same dimension");
            if term.frobenius_norm() <= f64::EPSILON * 1e-3 * result.frobenius_norm() {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result).expect("same dimension");
        }
        result
    }

    /// Matrix–vector product on raw amplitudes.
    pub fn mul_amplitudes(&self, amps: &[C64]) -> Result<Vec<C64>> {
        if amps.len() != self.dim {
            return Err(DmcpError::DimensionMismatch { expected: self.dim, found: amps.len() });
        }
        let n = self.dim;
        Ok((0..n).map(|r| (0..n).map(|c| self.data[r * n + c] * amps[c]).sum()).collect())
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(DmcpError::DimensionMismatch { expected: self.dim, found: other.dim })
        } else {
            Ok(())
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let v = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Vector of complex probability amplitudes.
///
/// [`StateVector::new`] normalizes; evolved states produced by propagation are
/// kept as-is so that loss from relaxation stays visible in the norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Normalized state from arbitrary nonzero amplitudes.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(DmcpError::InvalidInput("a state needs at least two amplitudes".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(DmcpError::InvalidInput("state amplitudes must be finite".into()));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(DmcpError::InvalidInput("cannot normalize the zero vector".into()));
        }
        Ok(Self { amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Wraps amplitudes without normalizing (used for propagated states).
    pub fn unnormalized(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    /// Computational basis state `|index⟩` in `dim` levels.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(DmcpError::InvalidInput(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(DmcpError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Bloch coordinates `(x, y, z)` of a two-level state.
    pub fn bloch(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(DmcpError::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let coherence = self.amps[0].conj() * self.amps[1];
        Ok([2.0 * coherence.re, 2.0 * coherence.im, self.amps[0].norm_sqr() - self.amps[1].norm_sqr()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp(-i θ/2 σx) = cos(θ/2) − i sin(θ/2) σx
        let theta = 1.234;
        let u = sigma_x().scale(C64::new(0.0, -theta / 2.0)).exp();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let expected =
            ComplexMatrix::from_rows([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]);
        assert!(u.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn exp_of_large_argument() {
        let u = sigma_x().scale(C64::new(0.0, -40.0)).exp();
        assert!(u.unitarity_defect() < 1e-12);
        assert!((u.get(0, 0).re - 40f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn determinant_matches_diagonal_product() {
        let mut m = ComplexMatrix::diagonal(&[C64::new(2.0, 0.0), C64::new(0.0, 3.0), C64::new(-1.0, 1.0)]);
        m.set(0, 2, C64::new(5.0, 5.0));
        let det = m.determinant();
        let expected = C64::new(2.0, 0.0) * C64::new(0.0, 3.0) * C64::new(-1.0, 1.0);
        assert!((det - expected).norm() < 1e-12);
    }

    #[test]
    fn state_normalizes_and_rejects_zero() {
        let s = StateVector::from_real(&[3.0, 4.0]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::from_real(&[0.0, 0.0]).is_err());
        assert!(StateVector::basis(2, 2).is_err());
    }

    #[test]
    fn bloch_of_basis_states() {
        assert_eq!(StateVector::basis(2, 0).unwrap().bloch().unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(StateVector::basis(2, 1).unwrap().bloch().unwrap(), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn mismatched_dimensions_error() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(a.matmul(&b), Err(DmcpError::DimensionMismatch { .. })));
    }
}
