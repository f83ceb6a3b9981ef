//! Seeded sampling of states, Hamiltonians and special unitaries.
//!
//! Every stream is a ChaCha8 generator keyed by `seed + index`, so sample
//! `k` of a run depends only on `(seed, k)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{ComplexMatrix, StateVector};

pub type SampleRng = ChaCha8Rng;

pub fn rng_for(seed: u64, index: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unit vector (complex Gaussian, normalized).
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StateVector {
    loop {
        let v = nalgebra::DVector::from_fn(n, |_, _| gaussian_complex(rng));
        if let Ok(s) = StateVector::normalized(v) {
            return s;
        }
    }
}

/// Gaussian Hermitian matrix (GUE scaling, trace included).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    ComplexMatrix::new(&g + g.adjoint()).expect("finite gaussian entries").scale_real(0.5)
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase of `R` removed).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    ComplexMatrix::new(q).expect("finite QR factor")
}

/// Haar-random special unitary: a random unitary divided by an N-th root of
/// its determinant.
pub fn random_special_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let det = u.determinant();
    let root = Complex64::from_polar(1.0, -det.arg() / n as f64);
    u.scale(root)
}

/// Random anti-Hermitian matrix `-iH` for Gaussian Hermitian `H`.
pub fn random_antihermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_hermitian(rng, n).scale(Complex64::new(0.0, -1.0))
}
