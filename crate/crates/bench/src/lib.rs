//! Fixed inputs shared by the benchmarks in `benches/`.

use ghzwit_core::{random_density, DensityMatrix, Family};

/// Seeded full-rank random state.
pub fn random_state(nqubits: usize, seed: u64) -> DensityMatrix {
    random_density(seed, nqubits, 1 << nqubits).expect("valid random state")
}

pub fn family_state(family: Family, p: f64) -> DensityMatrix {
    family.state(p).expect("p in range")
}
