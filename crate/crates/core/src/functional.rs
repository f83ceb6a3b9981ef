//! Positive-homogeneous functionals on su(N).
//!
//! A functional `F` takes an anti-Hermitian generator `A = -iH` to a
//! non-negative real with `F(lambda A) = lambda F(A)` for `lambda > 0`. Two
//! families are built in: the central-moment functional `G_p` attached to a
//! fixed state, and the spectral-spread functional `G_op`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::tolerances;
use crate::error::{QslError, Result};
use crate::linalg::eig_hermitian;
use crate::matrix::{ComplexMatrix, StateVector, I};
use crate::random::{random_antihermitian, rng_for};

/// Resource budget `kappa = F(-iH)`, positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ConstraintLevel(f64);

impl ConstraintLevel {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(QslError::InvalidInput(format!("kappa must be positive and finite, got {kappa}")));
        }
        Ok(Self(kappa))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for ConstraintLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        ConstraintLevel::new(f64::deserialize(deserializer)?).map_err(D::Error::custom)
    }
}

type Evaluator = dyn Fn(&ComplexMatrix) -> Result<f64> + Send + Sync;

/// A user-supplied functional. Only constructible through
/// [`PHFunctional::custom`], which checks homogeneity first.
#[derive(Clone)]
pub struct CustomFunctional {
    dim: usize,
    evaluator: Arc<Evaluator>,
}

impl CustomFunctional {
    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Clone)]
pub enum FunctionalKind {
    /// `G_p(-iH) = <psi|(H - E_0)^p|psi>^(1/p)`.
    CentralMoment { p: f64, state: StateVector },
    /// `G_op(-iH) = E_max - E_0`.
    OperatorNorm,
    Custom(CustomFunctional),
}

#[derive(Clone)]
pub struct PHFunctional {
    kind: FunctionalKind,
    label: String,
}

impl fmt::Debug for PHFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PHFunctional").field("label", &self.label).finish()
    }
}

impl PHFunctional {
    pub fn central_moment(p: f64, state: StateVector) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(QslError::InvalidInput(format!("p must be positive and finite, got {p}")));
        }
        Ok(Self { kind: FunctionalKind::CentralMoment { p, state }, label: format!("G_{p}") })
    }

    pub fn operator_norm() -> Self {
        Self { kind: FunctionalKind::OperatorNorm, label: "G_op".into() }
    }

    /// Registers a custom functional on `dim x dim` generators.
    ///
    /// The homogeneity law is checked on a fixed set of random generators and
    /// scale factors before the functional is returned.
    pub fn custom<F>(label: impl Into<String>, dim: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> Result<f64> + Send + Sync + 'static,
    {
        let label = label.into();
        if dim == 0 {
            return Err(QslError::InvalidInput("custom functional dimension must be positive".into()));
        }
        let mut rng = rng_for(0x5eed_f00d, dim as u64);
        for _ in 0..8 {
            let a = random_antihermitian(&mut rng, dim);
            let base = evaluator(&a)?;
            for lambda in [0.25, 1.0, 3.5, 17.0] {
                let scaled = evaluator(&a.scale_real(lambda))?;
                let expected = lambda * base;
                if !scaled.is_finite() || (scaled - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                    return Err(QslError::NotHomogeneous { label, lambda, scaled, expected });
                }
            }
        }
        Ok(Self {
            kind: FunctionalKind::Custom(CustomFunctional { dim, evaluator: Arc::new(evaluator) }),
            label,
        })
    }

    pub fn kind(&self) -> &FunctionalKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The state a central-moment functional is attached to.
    pub fn state(&self) -> Option<&StateVector> {
        match &self.kind {
            FunctionalKind::CentralMoment { state, .. } => Some(state),
            _ => None,
        }
    }

    /// `F(A)` for anti-Hermitian `A`.
    pub fn evaluate(&self, a: &ComplexMatrix) -> Result<f64> {
        evaluate(self, a)
    }

    /// `F(-iH)` for Hermitian `H`.
    pub fn evaluate_hamiltonian(&self, h: &ComplexMatrix) -> Result<f64> {
        h.ensure_hermitian()?;
        evaluate(self, &h.hermitian_part().scale(-I))
    }
}

/// Central-moment functional `G_p` at `A = -iH`.
pub fn eval_gp(a: &ComplexMatrix, p: f64, psi: &StateVector) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(QslError::InvalidInput(format!("p must be positive and finite, got {p}")));
    }
    a.ensure_antihermitian()?;
    psi.ensure_dim(a.dim())?;
    let h = a.antihermitian_part().scale(I);
    let spectrum = eig_hermitian(&h)?;
    let e0 = spectrum.ground_energy();
    let weights = spectrum.eigenvectors.as_inner().adjoint() * psi.amplitudes();
    let moment: f64 = spectrum
        .eigenvalues
        .iter()
        .zip(weights.iter())
        .map(|(&lambda, w)| w.norm_sqr() * (lambda - e0).max(0.0).powf(p))
        .sum();
    Ok(moment.max(0.0).powf(1.0 / p))
}

/// Spectral-spread functional `G_op(A) = E_max - E_0` of `H = iA`.
pub fn eval_gop(a: &ComplexMatrix) -> Result<f64> {
    a.ensure_antihermitian()?;
    let spectrum = eig_hermitian(&a.antihermitian_part().scale(I))?;
    Ok(spectrum.spread().max(0.0))
}

pub fn evaluate(functional: &PHFunctional, a: &ComplexMatrix) -> Result<f64> {
    match &functional.kind {
        FunctionalKind::CentralMoment { p, state } => eval_gp(a, *p, state),
        FunctionalKind::OperatorNorm => eval_gop(a),
        FunctionalKind::Custom(custom) => {
            a.ensure_antihermitian()?;
            a.ensure_dim(custom.dim)?;
            (custom.evaluator)(a)
        }
    }
}

/// Rescales `H` so that `F(-iH') = kappa`.
pub fn rescale_to_constraint(
    h: &ComplexMatrix,
    functional: &PHFunctional,
    kappa: ConstraintLevel,
) -> Result<ComplexMatrix> {
    let value = functional.evaluate_hamiltonian(h)?;
    if value <= tolerances().zero_functional {
        return Err(QslError::ZeroFunctional { value });
    }
    Ok(h.scale(Complex64::new(kappa.value() / value, 0.0)))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum FunctionalRepr {
    CentralMoment { p: f64, state: StateVector },
    OperatorNorm,
}

impl Serialize for PHFunctional {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.kind {
            FunctionalKind::CentralMoment { p, state } => {
                FunctionalRepr::CentralMoment { p: *p, state: state.clone() }.serialize(serializer)
            }
            FunctionalKind::OperatorNorm => FunctionalRepr::OperatorNorm.serialize(serializer),
            FunctionalKind::Custom(_) => {
                Err(S::Error::custom(format!("custom functional `{}` has no JSON form", self.label)))
            }
        }
    }
}

impl<'de> Deserialize<'de> for PHFunctional {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match FunctionalRepr::deserialize(deserializer)? {
            FunctionalRepr::CentralMoment { p, state } => {
                PHFunctional::central_moment(p, state).map_err(D::Error::custom)
            }
            FunctionalRepr::OperatorNorm => Ok(PHFunctional::operator_norm()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_state};

    fn diag_generator(energies: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(energies).unwrap().scale(-I)
    }

    #[test]
    fn gp_on_uniform_qutrit() {
        let a = diag_generator(&[0.0, 1.0, 2.0]);
        let psi = StateVector::uniform(3);
        assert!((eval_gp(&a, 1.0, &psi).unwrap() - 1.0).abs() < 1e-14);
        assert!((eval_gp(&a, 2.0, &psi).unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gp_vanishes_on_ground_state() {
        let mut rng = rng_for(2, 0);
        let h = random_hermitian(&mut rng, 4);
        let spec = eig_hermitian(&h).unwrap();
        let ground = StateVector::normalized(spec.eigenvectors.column(0)).unwrap();
        for p in [0.5, 1.0, 3.0] {
            assert!(eval_gp(&h.scale(-I), p, &ground).unwrap() < 1e-7);
        }
    }

    #[test]
    fn gp_errors() {
        let a = diag_generator(&[0.0, 1.0]);
        let wrong_dim = StateVector::uniform(3);
        assert!(matches!(eval_gp(&a, 1.0, &wrong_dim), Err(QslError::DimensionMismatch { .. })));
        let hermitian = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            eval_gp(&hermitian, 1.0, &StateVector::uniform(2)),
            Err(QslError::NotAntiHermitian { .. })
        ));
    }

    #[test]
    fn gop_values() {
        assert!((eval_gop(&diag_generator(&[0.0, 1.0, 2.0])).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(eval_gop(&ComplexMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn gop_matches_largest_singular_value() {
        let mut rng = rng_for(17, 0);
        for n in [2, 3, 5] {
            let h = random_hermitian(&mut rng, n);
            let e0 = eig_hermitian(&h).unwrap().ground_energy();
            let shifted = &h - &ComplexMatrix::identity(n).scale_real(e0);
            let sigma_max = shifted.as_inner().clone().singular_values().max();
            assert!((eval_gop(&h.scale(-I)).unwrap() - sigma_max).abs() < 1e-10);
        }
    }

    #[test]
    fn dispatch_examples() {
        let a = diag_generator(&[0.0, 2.0]);
        let g1 = PHFunctional::central_moment(1.0, StateVector::uniform(2)).unwrap();
        assert!((g1.evaluate(&a).unwrap() - 1.0).abs() < 1e-14);
        assert!((PHFunctional::operator_norm().evaluate(&a).unwrap() - 2.0).abs() < 1e-14);
        let doubled = g1.evaluate(&a.scale_real(2.0)).unwrap();
        assert!((doubled - 2.0 * g1.evaluate(&a).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn p1_is_mean_energy_above_ground() {
        let mut rng = rng_for(23, 0);
        let h = random_hermitian(&mut rng, 5);
        let psi = random_state(&mut rng, 5);
        let mean = h.expectation(&psi).re;
        let e0 = eig_hermitian(&h).unwrap().ground_energy();
        assert!((eval_gp(&h.scale(-I), 1.0, &psi).unwrap() - (mean - e0)).abs() < 1e-12);
    }

    #[test]
    fn rescale_examples() {
        let h = ComplexMatrix::from_real_diagonal(&[0.0, 4.0]).unwrap();
        let g1 = PHFunctional::central_moment(1.0, StateVector::uniform(2)).unwrap();
        let kappa = ConstraintLevel::new(1.0).unwrap();
        let r = rescale_to_constraint(&h, &g1, kappa).unwrap();
        assert!(r.max_abs_diff(&h.scale_real(0.5)) < 1e-15);
        let again = rescale_to_constraint(&r, &g1, kappa).unwrap();
        assert!(again.max_abs_diff(&r) < 1e-12);

        let ground = PHFunctional::central_moment(1.0, StateVector::basis(2, 0)).unwrap();
        assert!(matches!(rescale_to_constraint(&h, &ground, kappa), Err(QslError::ZeroFunctional { .. })));
    }

    #[test]
    fn constraint_level_validation() {
        assert!(ConstraintLevel::new(0.0).is_err());
        assert!(ConstraintLevel::new(-1.0).is_err());
        assert!(ConstraintLevel::new(f64::INFINITY).is_err());
        assert!(serde_json::from_str::<ConstraintLevel>("-2").is_err());
    }

    #[test]
    fn custom_functional_registration() {
        let frob = PHFunctional::custom("frobenius", 3, |a| Ok(a.frobenius_norm())).unwrap();
        let a = diag_generator(&[0.0, 3.0, 4.0]);
        assert!((frob.evaluate(&a).unwrap() - 5.0).abs() < 1e-14);
        assert!(matches!(frob.evaluate(&diag_generator(&[1.0, 2.0])), Err(QslError::DimensionMismatch { .. })));

        let squared = PHFunctional::custom("frobenius^2", 3, |a| Ok(a.frobenius_norm().powi(2)));
        assert!(matches!(squared, Err(QslError::NotHomogeneous { .. })));
    }

    #[test]
    fn functional_json() {
        let g = PHFunctional::central_moment(1.5, StateVector::uniform(2)).unwrap();
        let json = serde_json::to_value(&g).unwrap();
        assert_eq!(json["kind"], "central_moment");
        assert_eq!(json["p"], 1.5);
        let back: PHFunctional = serde_json::from_value(json).unwrap();
        assert_eq!(back.label(), "G_1.5");
        let op: PHFunctional = serde_json::from_str(r#"{"kind":"operator_norm"}"#).unwrap();
        assert!(matches!(op.kind(), FunctionalKind::OperatorNorm));
        assert!(serde_json::from_str::<PHFunctional>(r#"{"kind":"central_moment","p":-1,"state":{"re":[1],"im":[0]}}"#).is_err());
        let custom = PHFunctional::custom("c", 2, |a| Ok(a.frobenius_norm())).unwrap();
        assert!(serde_json::to_string(&custom).is_err());
    }
}
