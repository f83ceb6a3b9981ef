//! Seeded fixtures shared by the benchmarks.

use qslkit::random::{random_hermitian, random_special_unitary, random_state, rng_for};
use qslkit::{ComplexMatrix, GatePlan, StateVector};

pub const FIXTURE_SEED: u64 = 0x5eed;

pub fn hermitian(n: usize) -> ComplexMatrix {
    random_hermitian(&mut rng_for(FIXTURE_SEED, n as u64), n)
}

pub fn state(n: usize) -> StateVector {
    random_state(&mut rng_for(FIXTURE_SEED + 1, n as u64), n)
}

/// A conjugated swap gate together with the state it moves.
pub fn swap_gate(n: usize) -> (GatePlan, StateVector) {
    let v = random_special_unitary(&mut rng_for(FIXTURE_SEED + 2, n as u64), n);
    let psi = StateVector::normalized(v.column(0)).expect("unitary column is a unit vector");
    (GatePlan::conjugated_swap(v, 0.3).expect("special unitary"), psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        for n in [2, 5] {
            hermitian(n).ensure_hermitian().unwrap();
            assert_eq!(state(n).dim(), n);
            let (gate, psi) = swap_gate(n);
            assert_eq!(gate.dim, n);
            assert_eq!(psi.dim(), n);
        }
    }
}
