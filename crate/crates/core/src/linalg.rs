//! Small dense complex linear algebra: Hermitian spectra, the unitary
//! exponential and principal logarithm, PSD fractional powers and
//! special-unitary basis completion.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::config::tolerances;
use crate::error::{QslError, Result};
use crate::matrix::{ComplexMatrix, StateVector, I};

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Lowest eigenvalue `E_0`.
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_energy(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum is never empty")
    }

    /// `E_max - E_0`.
    pub fn spread(&self) -> f64 {
        self.max_energy() - self.ground_energy()
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply_fn(&self, mut f: impl FnMut(f64) -> Complex64) -> ComplexMatrix {
        let v = self.eigenvectors.as_inner();
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let factor = f(lambda);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= factor);
        }
        ComplexMatrix::from_inner_unchecked(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|lambda| Complex64::new(lambda, 0.0))
    }
}

/// Hermitian eigendecomposition.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<Spectrum> {
    h.ensure_hermitian()?;
    eig_hermitian_unchecked(&h.hermitian_part())
}

fn eig_hermitian_unchecked(h: &ComplexMatrix) -> Result<Spectrum> {
    let eig = SymmetricEigen::try_new(h.as_inner().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(QslError::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = order.len();
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum { eigenvalues, eigenvectors: ComplexMatrix::from_inner_unchecked(vectors) })
}

/// Time evolution operator `exp(-i t H)` for Hermitian `H`.
pub fn exp_antihermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(QslError::InvalidInput(format!("time must be finite, got {t}")));
    }
    let spectrum = eig_hermitian(h)?;
    Ok(spectrum.apply_fn(|lambda| Complex64::from_polar(1.0, -t * lambda)))
}

/// Unitary diagonalization with eigenphases in (-pi, pi].
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl UnitaryEigen {
    pub fn apply_phase_fn(&self, mut f: impl FnMut(f64) -> Complex64) -> ComplexMatrix {
        let v = self.eigenvectors.as_inner();
        let mut scaled = v.clone();
        for (k, &phi) in self.phases.iter().enumerate() {
            let factor = f(phi);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= factor);
        }
        ComplexMatrix::from_inner_unchecked(scaled * v.adjoint())
    }
}

/// Diagonalizes a unitary through its commuting Hermitian parts
/// `C = (U + U^dagger)/2` and `S = (U - U^dagger)/2i`: `C` is diagonalized
/// first and `S` is diagonalized inside each numerically degenerate block of
/// `C`. Eigenphases closer than the cluster gap are merged to their mean with
/// their eigenvectors re-orthonormalized, and phases within the gap of `-pi`
/// are snapped to `+pi`.
pub fn eig_unitary(u: &ComplexMatrix) -> Result<UnitaryEigen> {
    u.ensure_unitary()?;
    let gap = tolerances().phase_cluster_gap;
    let n = u.dim();
    let cos_part = u.hermitian_part();
    let sin_part = u.antihermitian_part().scale(-I);

    let c_spec = eig_hermitian_unchecked(&cos_part)?;
    let q = c_spec.eigenvectors.as_inner();
    let mut basis = DMatrix::<Complex64>::zeros(n, n);
    for range in clusters(&c_spec.eigenvalues, gap) {
        let w = q.columns(range.start, range.len()).into_owned();
        let block = if range.len() == 1 {
            w
        } else {
            let compressed = ComplexMatrix::from_inner_unchecked(w.adjoint() * sin_part.as_inner() * &w);
            let s_spec = eig_hermitian_unchecked(&compressed.hermitian_part())?;
            w * s_spec.eigenvectors.as_inner()
        };
        basis.columns_mut(range.start, range.len()).copy_from(&block);
    }

    let uv = u.as_inner() * &basis;
    let mut pairs: Vec<(f64, DVector<Complex64>)> = (0..n)
        .map(|k| {
            let v = basis.column(k).into_owned();
            let rayleigh = v.dotc(&uv.column(k));
            let mut phi = rayleigh.arg();
            if phi <= -std::f64::consts::PI + gap {
                phi = std::f64::consts::PI;
            }
            (phi, v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let sorted_phases: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut phases = Vec::with_capacity(n);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for range in clusters(&sorted_phases, gap) {
        let mean = sorted_phases[range.clone()].iter().sum::<f64>() / range.len() as f64;
        let mut accepted: Vec<DVector<Complex64>> = Vec::with_capacity(range.len());
        for (_, v) in &pairs[range.clone()] {
            let mut r = v.clone();
            for _ in 0..2 {
                for a in &accepted {
                    let coeff = a.dotc(&r);
                    r -= a * coeff;
                }
            }
            let norm = r.norm();
            accepted.push(r.unscale(norm));
        }
        for (offset, v) in accepted.into_iter().enumerate() {
            vectors.set_column(range.start + offset, &v);
            phases.push(mean);
        }
    }
    Ok(UnitaryEigen { phases, eigenvectors: ComplexMatrix::from_inner_unchecked(vectors) })
}

/// Maximal runs of a sorted slice whose consecutive gaps are below `gap`.
fn clusters(sorted: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] >= gap {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Principal logarithm of a unitary: anti-Hermitian, with eigenphases of
/// `-i log U` in (-pi, pi]. The eigenvalue -1 maps to `+i pi`.
pub fn log_unitary_principal(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_unitary(u)?;
    Ok(eig.apply_phase_fn(|phi| Complex64::new(0.0, phi)).antihermitian_part())
}

/// `P^p` for Hermitian positive semidefinite `P` and real `p > 0`.
pub fn fractional_power_psd(p_matrix: &ComplexMatrix, power: f64) -> Result<ComplexMatrix> {
    if !(power.is_finite() && power > 0.0) {
        return Err(QslError::InvalidInput(format!("power must be positive and finite, got {power}")));
    }
    let spectrum = eig_hermitian(p_matrix)?;
    let min = spectrum.ground_energy();
    if min < -tolerances().psd_reject {
        return Err(QslError::NotPsd { min_eigenvalue: min });
    }
    Ok(spectrum.apply_fn(|lambda| Complex64::new(lambda.max(0.0).powf(power), 0.0)).hermitian_part())
}

/// Special-unitary matrix whose leading columns are `columns`.
///
/// The remaining columns are Gram-Schmidt completions over canonical basis
/// vectors; `det = 1` is enforced by rephasing the last appended column.
/// When `columns` already has `N` entries the last supplied column is
/// rephased instead (it stays the same ray).
pub fn complete_special_unitary(columns: &[StateVector]) -> Result<ComplexMatrix> {
    let first = columns
        .first()
        .ok_or_else(|| QslError::InvalidInput("at least one column is required".into()))?;
    let n = first.dim();
    for c in columns {
        c.ensure_dim(n)?;
    }
    if columns.len() > n {
        return Err(QslError::InvalidInput(format!("{} columns exceed dimension {n}", columns.len())));
    }
    let tol = tolerances();

    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    for c in columns {
        let residual = project_out(c.amplitudes(), &basis);
        let norm = residual.norm();
        if norm < tol.gram_schmidt_residual {
            return Err(QslError::DegenerateInput { residual: norm });
        }
        basis.push(residual.unscale(norm));
    }
    let mut worst: f64 = 0.0;
    for (a, ca) in columns.iter().enumerate() {
        for cb in &columns[a + 1..] {
            worst = worst.max(ca.inner(cb).norm());
        }
    }
    if worst >= tol.orthogonal {
        return Err(QslError::NotOrthonormal { deviation: worst });
    }

    let mut v = DMatrix::<Complex64>::zeros(n, n);
    for (k, c) in columns.iter().enumerate() {
        v.set_column(k, c.amplitudes());
    }
    for k in columns.len()..n {
        let (residual, norm) = (0..n)
            .map(|j| {
                let r = project_out(&StateVector::basis(n, j).amplitudes().clone(), &basis);
                let norm = r.norm();
                (r, norm)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n > 0");
        let unit = residual.unscale(norm);
        v.set_column(k, &unit);
        basis.push(unit);
    }
    let det = v.clone().determinant();
    let fix = Complex64::new(1.0, 0.0) / det;
    v.column_mut(n - 1).iter_mut().for_each(|z| *z *= fix);
    ComplexMatrix::new(v)
}

fn project_out(v: &DVector<Complex64>, basis: &[DVector<Complex64>]) -> DVector<Complex64> {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = b.dotc(&r);
            r -= b * coeff;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ZERO;
    use crate::random::{random_hermitian, random_special_unitary, rng_for};
    use std::f64::consts::PI;

    /// `exp(-i t H)` by truncated Taylor series with scaling and squaring.
    fn exp_series(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let a = h.scale(Complex64::new(0.0, -t));
        let norm = a.frobenius_norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let a = a.scale_real(0.5f64.powi(squarings as i32));
        let n = h.dim();
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..=30 {
            term = &term * a.as_inner() / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        ComplexMatrix::from_inner_unchecked(sum)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum_is_identity_basis() {
        let h = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0]).unwrap();
        let s = eig_hermitian(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 2.0]);
        for k in 0..3 {
            assert!((s.eigenvectors.get(k, k).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap();
        let s = eig_hermitian(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = rng_for(11, 0);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 6);
            let s = eig_hermitian(&h).unwrap();
            let err = (&s.reconstruct() - &h).frobenius_norm() / h.frobenius_norm();
            assert!(err < 1e-10, "reconstruction error {err}");
            assert!(s.eigenvectors.unitary_deviation() < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(QslError::NotHermitian { .. })));
    }

    #[test]
    fn exp_of_diagonal_and_zero_time() {
        let h = ComplexMatrix::from_real_diagonal(&[0.3, -1.2, 2.0]).unwrap();
        let u = exp_antihermitian(&h, 0.7).unwrap();
        for (k, lambda) in [0.3, -1.2, 2.0].iter().enumerate() {
            assert!((u.get(k, k) - Complex64::from_polar(1.0, -0.7 * lambda)).norm() < 1e-14);
        }
        let mut rng = rng_for(3, 0);
        let h = random_hermitian(&mut rng, 4);
        assert!(exp_antihermitian(&h, 0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-13);
    }

    #[test]
    fn exp_pauli_x_at_pi_is_minus_identity() {
        let x = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap();
        let u = exp_antihermitian(&x, PI).unwrap();
        let series = exp_series(&x, PI);
        let minus_i = ComplexMatrix::identity(2).scale_real(-1.0);
        assert!(series.max_abs_diff(&minus_i) < 1e-12);
        assert!(u.max_abs_diff(&minus_i) < 1e-10);
    }

    #[test]
    fn exp_is_unitary_with_expected_determinant() {
        let mut rng = rng_for(5, 0);
        for n in [2, 3, 5] {
            let h = random_hermitian(&mut rng, n);
            let t = 1.37;
            let u = exp_antihermitian(&h, t).unwrap();
            assert!(u.unitary_deviation() < 1e-10);
            let expected = (h.trace() * c(0.0, -t)).exp();
            assert!((u.determinant() - expected).norm() < 1e-9);
            assert!(u.max_abs_diff(&exp_series(&h, t)) < 1e-10);
        }
    }

    #[test]
    fn log_known_values() {
        assert!(log_unitary_principal(&ComplexMatrix::identity(3)).unwrap().max_abs() < 1e-15);

        let u = ComplexMatrix::from_diagonal(&[c(0., 1.), c(0., -1.)]).unwrap();
        let l = log_unitary_principal(&u).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0., PI / 2.0), c(0., -PI / 2.0)]).unwrap();
        assert!(l.max_abs_diff(&expected) < 1e-14);

        let u = ComplexMatrix::from_real_diagonal(&[-1.0, -1.0, 1.0]).unwrap();
        let l = log_unitary_principal(&u).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0., PI), c(0., PI), c(0., 0.)]).unwrap();
        assert!(l.max_abs_diff(&expected) < 1e-14, "{l:?}");
    }

    #[test]
    fn log_of_conjugated_minus_one_uses_plus_pi() {
        let mut rng = rng_for(8, 0);
        let v = random_special_unitary(&mut rng, 4);
        let d = ComplexMatrix::from_real_diagonal(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        let l = log_unitary_principal(&v.conjugate(&d)).unwrap();
        let expected = v.conjugate(&ComplexMatrix::from_diagonal(&[c(0., PI), c(0., PI), c(0., 0.), c(0., 0.)]).unwrap());
        assert!(l.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn log_rejects_non_unitary() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]).unwrap();
        assert!(matches!(log_unitary_principal(&m), Err(QslError::NotUnitary { .. })));
    }

    #[test]
    fn log_postconditions_on_random_unitaries() {
        let mut rng = rng_for(21, 0);
        for n in [2, 3, 6] {
            let u = random_special_unitary(&mut rng, n);
            let l = log_unitary_principal(&u).unwrap();
            assert!(l.antihermitian_deviation() < 1e-14);
            let generator = l.scale(I);
            let spec = eig_hermitian(&generator.scale_real(-1.0)).unwrap();
            assert!(spec.eigenvalues.iter().all(|&phi| phi > -PI && phi <= PI + 1e-12));
            let back = exp_antihermitian(&generator, 1.0).unwrap();
            assert!(back.max_abs_diff(&u) < 1e-9);
        }
    }

    #[test]
    fn fractional_powers() {
        let p = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 4.0]).unwrap();
        let r = fractional_power_psd(&p, 0.5).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0]).unwrap()) < 1e-14);

        let p = ComplexMatrix::from_real_diagonal(&[0.0, 2.0]).unwrap();
        let cube = fractional_power_psd(&p, 3.0).unwrap();
        let product = &(&p * &p) * &p;
        assert!(cube.max_abs_diff(&product) < 1e-12);
        assert!(cube.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 8.0]).unwrap()) < 1e-12);

        let mut rng = rng_for(4, 0);
        let h = random_hermitian(&mut rng, 4);
        let psd = &h * &h;
        assert!(fractional_power_psd(&psd, 1.0).unwrap().max_abs_diff(&psd) < 1e-9);
        let squared = fractional_power_psd(&psd, 2.0).unwrap();
        assert!(squared.max_abs_diff(&(&psd * &psd)) < 1e-9 * psd.max_abs().powi(2).max(1.0));
    }

    #[test]
    fn fractional_power_clamps_and_rejects() {
        let p = ComplexMatrix::from_real_diagonal(&[-1e-11, 1.0]).unwrap();
        let r = fractional_power_psd(&p, 0.5).unwrap();
        assert_eq!(r.get(0, 0), ZERO);
        let p = ComplexMatrix::from_real_diagonal(&[-1e-6, 1.0]).unwrap();
        assert!(matches!(fractional_power_psd(&p, 0.5), Err(QslError::NotPsd { .. })));
    }

    #[test]
    fn completion_of_canonical_columns_is_identity() {
        let cols = [StateVector::basis(3, 0), StateVector::basis(3, 1)];
        let v = complete_special_unitary(&cols).unwrap();
        assert!(v.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn completion_of_single_qubit_column() {
        let col = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let v = complete_special_unitary(std::slice::from_ref(&col)).unwrap();
        assert!(v.unitary_deviation() < 1e-14);
        assert!((v.determinant() - c(1.0, 0.0)).norm() < 1e-14);
        assert!((v.column(0) - col.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn completion_rejects_degenerate_and_non_orthogonal() {
        let e1 = StateVector::basis(3, 0);
        assert!(matches!(
            complete_special_unitary(&[e1.clone(), e1.clone()]),
            Err(QslError::DegenerateInput { .. })
        ));
        let tilted = StateVector::from_real(&[0.1, 1.0, 0.0]).unwrap();
        assert!(matches!(complete_special_unitary(&[e1, tilted]), Err(QslError::NotOrthonormal { .. })));
    }

    #[test]
    fn completion_preserves_supplied_columns_exactly() {
        let mut rng = rng_for(13, 0);
        let v0 = random_special_unitary(&mut rng, 5);
        let cols: Vec<StateVector> =
            (0..2).map(|k| StateVector::new(v0.column(k)).unwrap()).collect();
        let v = complete_special_unitary(&cols).unwrap();
        assert_eq!(v.column(0), v0.column(0));
        assert_eq!(v.column(1), v0.column(1));
        assert!(v.unitary_deviation() < 1e-12);
        assert!((v.determinant() - c(1.0, 0.0)).norm() < 1e-12);
    }
}
