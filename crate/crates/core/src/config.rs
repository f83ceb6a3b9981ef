//! Numerical tolerances.
//!
//! Every check in the crate reads its threshold from the process-wide
//! [`Tolerances`] value. It defaults to the module constants below and can be
//! replaced once, before any computation, with [`install`].

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Max entry of `|H - H^dagger|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Max entry of `|U^dagger U - I|` accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// `| |psi| - 1 |` accepted as a unit vector.
pub const NORM_TOL: f64 = 1e-12;
/// Pairwise overlap accepted as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_REJECT` are clamped to zero before fractional powers.
pub const PSD_REJECT: f64 = 1e-8;
/// Gram-Schmidt residual below which input vectors are considered dependent.
pub const GRAM_SCHMIDT_RESIDUAL: f64 = 1e-12;
/// Phase gap below which unitary eigenvalues are treated as one cluster.
pub const PHASE_CLUSTER_GAP: f64 = 1e-8;
/// Functional values at or below this are treated as zero.
pub const ZERO_FUNCTIONAL: f64 = 1e-12;
/// Survival amplitude modulus that counts as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Relative slack before an oracle time below a bound counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub norm: f64,
    pub orthogonal: f64,
    pub psd_reject: f64,
    pub gram_schmidt_residual: f64,
    pub phase_cluster_gap: f64,
    pub zero_functional: f64,
    pub orthogonality: f64,
    pub violation_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            unitary: UNITARY_TOL,
            norm: NORM_TOL,
            orthogonal: ORTHOGONAL_TOL,
            psd_reject: PSD_REJECT,
            gram_schmidt_residual: GRAM_SCHMIDT_RESIDUAL,
            phase_cluster_gap: PHASE_CLUSTER_GAP,
            zero_functional: ZERO_FUNCTIONAL,
            orthogonality: ORTHOGONALITY_TOL,
            violation_slack: VIOLATION_SLACK,
        }
    }
}

impl Tolerances {
    /// Defaults with every input-validation threshold (Hermitian, unitary,
    /// norm and orthogonality checks) replaced by `tol`.
    pub fn with_validation(tol: f64) -> Self {
        Self {
            hermitian: tol,
            unitary: tol,
            norm: tol,
            orthogonal: tol,
            ..Self::default()
        }
    }
}

static INSTALLED: OnceLock<Tolerances> = OnceLock::new();

/// Install process-wide tolerances. Returns `false` if tolerances were
/// already fixed (by an earlier install or by a read).
pub fn install(tolerances: Tolerances) -> bool {
    INSTALLED.set(tolerances).is_ok()
}

/// The active tolerances.
pub fn tolerances() -> &'static Tolerances {
    INSTALLED.get_or_init(Tolerances::default)
}
