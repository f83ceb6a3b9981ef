//! Speed-limit engine.
//!
//! For a positive-homogeneous `F` and a time-independent Hamiltonian `H`
//! with `exp(-iTH) = O`, the action of the trajectory can be computed two
//! ways, `T F(-iH)` and `F(log O)`, so `T = F(log O) / F(-iH)`. Under the
//! constraint `F(-iH) = kappa` this gives `T_opt = F(log O) / kappa`. The
//! principal logarithm is used throughout, which selects the smallest such
//! `T`; other branches add whole windings of `2 pi` to some eigenphases.
//!
//! All times use `hbar = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::tolerances;
use crate::error::{QslError, Result};
use crate::functional::{ConstraintLevel, PHFunctional};
use crate::gates::ensure_special_unitary;
use crate::linalg::{eig_hermitian, log_unitary_principal};
use crate::matrix::{ComplexMatrix, StateVector, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Ml,
    Te,
    Opnorm,
    Theorem1,
    GpClosedForm,
}

/// What a bound was computed from. Matrices are recorded by digest.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A reported time bound, or an explicit undefined marker.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: BoundKind,
    pub value: Option<f64>,
    pub undefined_reason: Option<String>,
    pub inputs: BoundInputs,
}

impl BoundReport {
    fn defined(bound: BoundKind, value: f64, inputs: BoundInputs) -> Self {
        Self { bound, value: Some(value), undefined_reason: None, inputs }
    }

    pub fn undefined(bound: BoundKind, reason: impl Into<String>, inputs: BoundInputs) -> Self {
        Self { bound, value: None, undefined_reason: Some(reason.into()), inputs }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }

    /// Defined value; panics on an undefined report.
    pub fn expect_value(&self) -> f64 {
        self.value.expect("bound is undefined")
    }
}

fn state_digest(psi: &StateVector) -> String {
    ComplexMatrix::from_diagonal(psi.amplitudes().as_slice())
        .map(|m| m.digest())
        .unwrap_or_default()
}

/// `T = F(log O) / F(-iH)`.
pub fn theorem1_time(functional: &PHFunctional, gate: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    ensure_special_unitary(gate)?;
    h.ensure_hermitian()?;
    h.ensure_dim(gate.dim())?;
    let denominator = functional.evaluate_hamiltonian(h)?;
    if denominator <= tolerances().zero_functional {
        return Err(QslError::ZeroFunctional { value: denominator });
    }
    let numerator = functional.evaluate(&log_unitary_principal(gate)?)?;
    if !numerator.is_finite() {
        return Err(QslError::InvalidInput("functional is singular at log(gate)".into()));
    }
    Ok(numerator / denominator)
}

/// `T_opt = F(log O) / kappa`.
pub fn optimal_time(functional: &PHFunctional, gate: &ComplexMatrix, kappa: ConstraintLevel) -> Result<BoundReport> {
    ensure_special_unitary(gate)?;
    let numerator = functional.evaluate(&log_unitary_principal(gate)?)?;
    if !numerator.is_finite() {
        return Err(QslError::InvalidInput("functional is singular at log(gate)".into()));
    }
    let p = match functional.kind() {
        crate::functional::FunctionalKind::CentralMoment { p, .. } => Some(*p),
        _ => None,
    };
    Ok(BoundReport::defined(
        BoundKind::Theorem1,
        numerator / kappa.value(),
        BoundInputs {
            functional: Some(functional.label().to_string()),
            p,
            kappa: Some(kappa.value()),
            state: functional.state().map(state_digest),
            gate: Some(gate.digest()),
            ..BoundInputs::default()
        },
    ))
}

/// `pi / (kappa 2^{1/p})`, the optimal time of any swap-family gate under
/// `G_p(-iH) = kappa` with the functional's state being the swapped one.
pub fn swap_time_closed_form(p: f64, kappa: ConstraintLevel) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(QslError::InvalidInput(format!("p must be positive and finite, got {p}")));
    }
    Ok(PI / (kappa.value() * 2f64.powf(1.0 / p)))
}

pub fn swap_time_report(p: f64, kappa: ConstraintLevel) -> Result<BoundReport> {
    let value = swap_time_closed_form(p, kappa)?;
    let note = (p == 2.0).then(|| {
        "distinct from the time-energy bound pi/(2 Delta E): extra factor in the denominator".to_string()
    });
    Ok(BoundReport::defined(
        BoundKind::GpClosedForm,
        value,
        BoundInputs { functional: Some(format!("G_{p}")), p: Some(p), kappa: Some(kappa.value()), note, ..BoundInputs::default() },
    ))
}

fn state_inputs(h: &ComplexMatrix, psi: &StateVector) -> BoundInputs {
    BoundInputs { hamiltonian: Some(h.digest()), state: Some(state_digest(psi)), ..BoundInputs::default() }
}

/// `E_mean - E_0` and `Delta E` of `psi` under `H`.
pub fn energy_moments(h: &ComplexMatrix, psi: &StateVector) -> Result<(f64, f64, f64)> {
    h.ensure_hermitian()?;
    psi.ensure_dim(h.dim())?;
    let h = h.hermitian_part();
    let e0 = eig_hermitian(&h)?.ground_energy();
    let mean = h.expectation(psi).re;
    let centered = h.apply(psi) - psi.amplitudes() * Complex64::new(mean, 0.0);
    Ok((mean, e0, centered.norm()))
}

/// Margolus-Levitin: `t_perp >= pi / (2 (E_mean - E_0))`.
pub fn ml_bound(h: &ComplexMatrix, psi: &StateVector) -> Result<BoundReport> {
    let (mean, e0, _) = energy_moments(h, psi)?;
    let gap = mean - e0;
    if gap <= tolerances().zero_functional {
        return Err(QslError::GroundState { gap });
    }
    Ok(BoundReport::defined(BoundKind::Ml, PI / (2.0 * gap), state_inputs(h, psi)))
}

/// Time-energy relation: `t_perp >= pi / (2 Delta E)`.
pub fn te_bound(h: &ComplexMatrix, psi: &StateVector) -> Result<BoundReport> {
    let (_, _, spread) = energy_moments(h, psi)?;
    if spread <= tolerances().zero_functional {
        return Err(QslError::ZeroVariance { spread });
    }
    Ok(BoundReport::defined(BoundKind::Te, PI / (2.0 * spread), state_inputs(h, psi)))
}

/// Spectral-spread bound `pi / (E_max - E_0)`.
pub fn opnorm_bound(h: &ComplexMatrix) -> Result<BoundReport> {
    let spectrum = eig_hermitian(h)?;
    let spread = spectrum.spread();
    if spread <= tolerances().zero_functional {
        return Err(QslError::ScalarHamiltonian { spread });
    }
    Ok(BoundReport::defined(
        BoundKind::Opnorm,
        PI / spread,
        BoundInputs { hamiltonian: Some(h.digest()), ..BoundInputs::default() },
    ))
}

/// Right-translated functional at base point `U`: `F_U(X) = F(X U^dagger)`.
pub fn right_invariant_evaluate(functional: &PHFunctional, u: &ComplexMatrix, tangent: &ComplexMatrix) -> Result<f64> {
    u.ensure_unitary()?;
    let generator = tangent * &u.adjoint();
    functional.evaluate(&generator.antihermitian_part())
}

/// `S = int_0^T F(-i H_t) dt` by composite Simpson on an odd number of nodes
/// (`quadrature_points` is rounded up to the next odd count).
pub fn action_functional<S>(schedule: S, duration: f64, functional: &PHFunctional, quadrature_points: usize) -> Result<f64>
where
    S: Fn(f64) -> ComplexMatrix,
{
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(QslError::InvalidInput(format!("duration must be finite and non-negative, got {duration}")));
    }
    if quadrature_points < 2 {
        return Err(QslError::InvalidInput("at least two quadrature points are required".into()));
    }
    if duration == 0.0 {
        return Ok(0.0);
    }
    let nodes = if quadrature_points.is_multiple_of(2) { quadrature_points + 1 } else { quadrature_points };
    let intervals = nodes - 1;
    let step = duration / intervals as f64;
    let mut sum = 0.0;
    for k in 0..nodes {
        let t = if k == intervals { duration } else { k as f64 * step };
        let h = schedule(t);
        h.ensure_hermitian()?;
        let value = functional.evaluate(&h.hermitian_part().scale(-I))?;
        let weight = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += weight * value;
    }
    Ok(sum * step / 3.0)
}
