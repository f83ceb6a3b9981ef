use thiserror::Error;

/// Errors raised by the linear algebra, functional, gate and engine layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not anti-Hermitian (max |A + A^dagger| = {deviation:e})")]
    NotAntiHermitian { deviation: f64 },
    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("vectors are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("states are not orthogonal (|<psi1|psi0>| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },
    #[error("input spans fewer dimensions than supplied (Gram-Schmidt residual {residual:e})")]
    DegenerateInput { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Hermitian eigensolver did not converge")]
    ConvergenceFailure,
    #[error("functional vanishes at the Hamiltonian (F(-iH) = {value:e})")]
    ZeroFunctional { value: f64 },
    #[error("state lies in the ground eigenspace (E_mean - E_0 = {gap:e})")]
    GroundState { gap: f64 },
    #[error("state has zero energy variance (Delta E = {spread:e})")]
    ZeroVariance { spread: f64 },
    #[error("Hamiltonian is a multiple of the identity (E_max - E_0 = {spread:e})")]
    ScalarHamiltonian { spread: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("custom functional `{label}` failed its homogeneity check: F({lambda} A) = {scaled}, expected {expected}")]
    NotHomogeneous {
        label: String,
        lambda: f64,
        scaled: f64,
        expected: f64,
    },
}

pub type Result<T, E = QslError> = std::result::Result<T, E>;
