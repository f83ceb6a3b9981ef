//! Swap gates: the two-level gate `i[[0, e^{-i theta}], [e^{i theta}, 0]]`,
//! its embedding `O_2(theta) ⊕ I_{N-2}`, and conjugates `V O V^dagger`
//! exchanging an arbitrary orthonormal pair of states.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::config::tolerances;
use crate::error::{QslError, Result};
use crate::linalg::{complete_special_unitary, log_unitary_principal};
use crate::matrix::{ComplexMatrix, StateVector, ONE, ZERO};

const DETERMINANT_TOL: f64 = 1e-9;

/// A special-unitary target gate and how it was built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GatePlan {
    pub dim: usize,
    pub theta: f64,
    /// Special-unitary change of basis; `None` means the identity.
    pub conjugator: Option<ComplexMatrix>,
    pub matrix: ComplexMatrix,
}

impl GatePlan {
    /// Wraps an arbitrary special-unitary matrix (`theta = 0`, no conjugator).
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        ensure_special_unitary(&matrix)?;
        Ok(Self { dim: matrix.dim(), theta: 0.0, conjugator: None, matrix })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QslError::InvalidInput("dimension must be positive".into()));
        }
        Self::from_matrix(ComplexMatrix::identity(n))
    }

    /// `V (O_2(theta) ⊕ I) V^dagger` for a supplied special-unitary `V`.
    pub fn conjugated_swap(conjugator: ComplexMatrix, theta: f64) -> Result<Self> {
        ensure_special_unitary(&conjugator)?;
        let base = embedded_swap(conjugator.dim(), theta)?;
        let matrix = conjugator.conjugate(&base.matrix);
        Ok(Self { dim: base.dim, theta, conjugator: Some(conjugator), matrix })
    }
}

/// Fails unless `m` is unitary and `det m` is within 1e-9 of 1.
pub fn ensure_special_unitary(m: &ComplexMatrix) -> Result<()> {
    m.ensure_unitary()?;
    let det = m.determinant();
    if (det - ONE).norm() > DETERMINANT_TOL {
        return Err(QslError::InvalidInput(format!("determinant is {det}, expected 1")));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GatePlanRepr {
    dim: usize,
    theta: f64,
    conjugator: Option<ComplexMatrix>,
    matrix: ComplexMatrix,
}

impl<'de> Deserialize<'de> for GatePlan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = GatePlanRepr::deserialize(deserializer)?;
        if repr.matrix.dim() != repr.dim {
            return Err(D::Error::custom("gate matrix does not match \"dim\""));
        }
        ensure_special_unitary(&repr.matrix).map_err(D::Error::custom)?;
        if let Some(v) = &repr.conjugator {
            ensure_special_unitary(v).map_err(D::Error::custom)?;
        }
        Ok(GatePlan { dim: repr.dim, theta: repr.theta, conjugator: repr.conjugator, matrix: repr.matrix })
    }
}

/// `[[0, i e^{-i theta}], [i e^{i theta}, 0]]`.
pub fn two_level_swap(theta: f64) -> Result<GatePlan> {
    if !theta.is_finite() {
        return Err(QslError::InvalidInput(format!("theta must be finite, got {theta}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let matrix = ComplexMatrix::from_rows(&[
        vec![ZERO, i * Complex64::from_polar(1.0, -theta)],
        vec![i * Complex64::from_polar(1.0, theta), ZERO],
    ])?;
    Ok(GatePlan { dim: 2, theta, conjugator: None, matrix })
}

/// `two_level_swap(theta) ⊕ I_{N-2}`.
pub fn embedded_swap(n: usize, theta: f64) -> Result<GatePlan> {
    if n < 2 {
        return Err(QslError::InvalidInput(format!("swap gates need N >= 2, got {n}")));
    }
    let block = two_level_swap(theta)?.matrix;
    let matrix = if n == 2 { block } else { block.direct_sum(&ComplexMatrix::identity(n - 2)) };
    Ok(GatePlan { dim: n, theta, conjugator: None, matrix })
}

/// The swap exchanging `psi0` and `psi1` (up to phases) and fixing their
/// orthogonal complement.
pub fn conjugate_swap_from_pair(psi0: &StateVector, psi1: &StateVector, theta: f64) -> Result<GatePlan> {
    psi1.ensure_dim(psi0.dim())?;
    let overlap = psi1.inner(psi0).norm();
    if overlap >= tolerances().orthogonal {
        return Err(QslError::NotOrthogonal { overlap });
    }
    let v = complete_special_unitary(&[psi0.clone(), psi1.clone()])?;
    GatePlan::conjugated_swap(v, theta)
}

/// Principal logarithm of the gate matrix.
pub fn gate_log(gate: &GatePlan) -> Result<ComplexMatrix> {
    log_unitary_principal(&gate.matrix)
}
