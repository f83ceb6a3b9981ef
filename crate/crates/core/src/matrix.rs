//! Dense complex matrices and unit state vectors.
//!
//! [`ComplexMatrix`] is the single carrier for Hamiltonians, gates,
//! conjugators and generators; structure (Hermitian, unitary, ...) is checked
//! at the operation that needs it, not encoded in the type.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::tolerances;
use crate::error::{QslError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// A square N x N complex matrix with finite entries, N >= 1.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.nrows() != inner.ncols() {
            return Err(QslError::InvalidInput(format!(
                "expected a non-empty square matrix, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QslError::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self(inner))
    }

    /// Builds from row slices. Every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(QslError::InvalidInput("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    /// Real diagonal matrix, e.g. a Hamiltonian in its eigenbasis.
    pub fn from_real_diagonal(diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn from_diagonal(diagonal: &[Complex64]) -> Result<Self> {
        let n = diagonal.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { diagonal[i] } else { ZERO }))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self(DMatrix::zeros(n, n))
    }

    pub(crate) fn from_inner_unchecked(inner: DMatrix<Complex64>) -> Self {
        debug_assert!(inner.nrows() == inner.ncols());
        Self(inner)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.clone().determinant()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |H - H^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |A + A^dagger|`.
    pub fn antihermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] + self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U^dagger U - I|`.
    pub fn unitary_deviation(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > tolerances().hermitian {
            return Err(QslError::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn ensure_antihermitian(&self) -> Result<()> {
        let deviation = self.antihermitian_deviation();
        if deviation > tolerances().hermitian {
            return Err(QslError::NotAntiHermitian { deviation });
        }
        Ok(())
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitary_deviation();
        if deviation > tolerances().unitary {
            return Err(QslError::NotUnitary { deviation });
        }
        Ok(())
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(QslError::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }

    /// Exact Hermitian part `(H + H^dagger)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Exact anti-Hermitian part `(A - A^dagger)/2`.
    pub fn antihermitian_part(&self) -> Self {
        Self((&self.0 - self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `self * state`.
    pub fn apply(&self, state: &StateVector) -> DVector<Complex64> {
        assert_eq!(self.dim(), state.dim(), "dimension mismatch");
        &self.0 * &state.0
    }

    /// `<psi| self |psi>`.
    pub fn expectation(&self, state: &StateVector) -> Complex64 {
        state.0.dotc(&self.apply(state))
    }

    /// Column `k` as a raw vector.
    pub fn column(&self, k: usize) -> DVector<Complex64> {
        self.0.column(k).into_owned()
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut out = DMatrix::zeros(a + b, a + b);
        out.view_mut((0, 0), (a, a)).copy_from(&self.0);
        out.view_mut((a, a), (b, b)).copy_from(&other.0);
        Self(out)
    }

    /// `self * other * self^dagger`.
    pub fn conjugate(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 * self.0.adjoint())
    }

    /// Stable content digest (SHA-256 over the IEEE bits, hex, first 16 chars).
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update((self.dim() as u64).to_le_bytes());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.0[(i, j)];
                hasher.update(z.re.to_bits().to_le_bytes());
                hasher.update(z.im.to_bits().to_le_bytes());
            }
        }
        let bytes = hasher.finalize();
        bytes.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let rows = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| part(&self.0[(i, j)])).collect()).collect()
        };
        MatrixRepr { dim: n, re: rows(|z| z.re), im: rows(|z| z.im) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let n = repr.dim;
        let well_formed = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !well_formed(&repr.re) || !well_formed(&repr.im) {
            return Err(D::Error::custom(format!("\"re\" and \"im\" must both be {n}x{n}")));
        }
        ComplexMatrix::from_fn(n, |i, j| Complex64::new(repr.re[i][j], repr.im[i][j]))
            .map_err(D::Error::custom)
    }
}

/// A unit-norm complex N-vector.
#[derive(Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QslError::InvalidInput("state must have at least one amplitude".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QslError::InvalidInput("state has non-finite amplitudes".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tolerances().norm {
            return Err(QslError::InvalidInput(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self(amplitudes))
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QslError::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// Canonical basis vector `e_k` in C^n.
    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k < n, "basis index out of range");
        let mut v = DVector::zeros(n);
        v[k] = ONE;
        Self(v)
    }

    /// Equal-weight superposition of all basis states.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self(DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(QslError::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector{:?}", self.0.as_slice())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorRepr {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        VectorRepr {
            re: self.0.iter().map(|z| z.re).collect(),
            im: self.0.iter().map(|z| z.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = VectorRepr::deserialize(deserializer)?;
        if repr.re.len() != repr.im.len() {
            return Err(D::Error::custom("\"re\" and \"im\" must have equal length"));
        }
        let amplitudes = repr.re.iter().zip(&repr.im).map(|(&re, &im)| Complex64::new(re, im));
        StateVector::new(DVector::from_iterator(repr.re.len(), amplitudes)).map_err(D::Error::custom)
    }
}
