//! GHZ symmetry: the group generated by qubit permutations, the global spin flip
//! σx⊗ᴺ and correlated z rotations, the projection (twirl) onto its invariant
//! states, and the two-parameter triangle coordinates of those states.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{apply_local, c, kron_all, pauli, ComplexMatrix};
use crate::states::DensityMatrix;

/// Slack for triangle membership.
pub const TRIANGLE_SLACK: f64 = 1e-9;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

/// Location of a GHZ-symmetric state in its triangle.
///
/// For three qubits `x = ½(ρ₀₀₀,₁₁₁ + ρ₁₁₁,₀₀₀)` and
/// `y = (ρ₀₀₀,₀₀₀ + ρ₁₁₁,₁₁₁ − ¼)/√3`; for two qubits the population shift is
/// ½ and the scale 1/√2. Euclidean distance in (x, y) is Hilbert–Schmidt distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymCoords {
    pub x: f64,
    pub y: f64,
    pub nqubits: usize,
}

impl SymCoords {
    pub fn new(nqubits: usize, x: f64, y: f64) -> Self {
        Self { x, y, nqubits }
    }

    /// The maximally entangled upper-right vertex (GHZ₊ or Φ⁺).
    pub fn ghz_vertex(nqubits: usize) -> Self {
        let [_, right, _] = triangle(nqubits);
        Self::new(nqubits, right.0, right.1)
    }

    pub fn lower_vertex(nqubits: usize) -> Self {
        let [_, _, low] = triangle(nqubits);
        Self::new(nqubits, low.0, low.1)
    }

    /// Barycentric weights with respect to (left, right, lower) vertices.
    pub fn barycentric(&self) -> [f64; 3] {
        let [a, b, l] = triangle(self.nqubits);
        let det = (b.1 - l.1) * (a.0 - l.0) + (l.0 - b.0) * (a.1 - l.1);
        let wa = ((b.1 - l.1) * (self.x - l.0) + (l.0 - b.0) * (self.y - l.1)) / det;
        let wb = ((l.1 - a.1) * (self.x - l.0) + (a.0 - l.0) * (self.y - l.1)) / det;
        [wa, wb, 1.0 - wa - wb]
    }

    pub fn in_triangle(&self) -> bool {
        (2..=3).contains(&self.nqubits)
            && self.x.is_finite()
            && self.y.is_finite()
            && self.barycentric().iter().all(|&w| w >= -TRIANGLE_SLACK)
    }

    pub(crate) fn ensure_in_triangle(&self) -> Result<()> {
        if self.in_triangle() {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "({}, {}) lies outside the {}-qubit triangle",
                self.x, self.y, self.nqubits
            )))
        }
    }

    /// Corner population ρ₀…₀,₀…₀ (= ρ₁…₁,₁…₁) of the symmetric state.
    pub fn corner_population(&self) -> f64 {
        match self.nqubits {
            3 => (sqrt3() * self.y + 0.25) / 2.0,
            _ => (SQRT2 * self.y + 0.5) / 2.0,
        }
    }

    /// ⟨GHZ₊|ρˢ|GHZ₊⟩
    pub fn fidelity(&self) -> f64 {
        self.corner_population() + self.x
    }

    /// Hilbert–Schmidt distance of the symmetric state from GHZ₊.
    pub fn hs_distance_to_ghz(&self) -> f64 {
        let g = Self::ghz_vertex(self.nqubits);
        (self.x - g.x).hypot(self.y - g.y)
    }

    pub fn mirrored(&self) -> Self {
        Self::new(self.nqubits, self.x.abs(), self.y)
    }
}

/// Vertices (left, right, lower) of the triangle of symmetric states.
pub fn triangle(nqubits: usize) -> [(f64, f64); 3] {
    match nqubits {
        3 => {
            let top = sqrt3() / 4.0;
            [(-0.5, top), (0.5, top), (0.0, -sqrt3() / 12.0)]
        }
        _ => {
            let top = SQRT2 / 4.0;
            [(-0.5, top), (0.5, top), (0.0, -top)]
        }
    }
}

/// An element of the GHZ symmetry group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    /// φ₁ … φ_{N−1}; the last qubit rotates by −Σφⱼ.
    pub angles: Vec<f64>,
    /// `permutation[k]` is the position qubit k is moved to.
    pub permutation: Vec<usize>,
    pub flip: bool,
}

impl GroupElement {
    pub fn identity(nqubits: usize) -> Self {
        Self {
            angles: vec![0.0; nqubits - 1],
            permutation: (0..nqubits).collect(),
            flip: false,
        }
    }
}

/// Unitary P·(σx⊗ᴺ)^flip·U_N(φ) implementing a group element.
pub fn group_element(g: &GroupElement) -> Result<ComplexMatrix> {
    let n = g.permutation.len();
    if !(2..=3).contains(&n) || g.angles.len() != n - 1 {
        return Err(Error::InvalidInput(format!(
            "group element needs N in {{2, 3}} and N-1 angles, got N={n} with {} angles",
            g.angles.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in &g.permutation {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidInput(format!(
                "{:?} is not a permutation",
                g.permutation
            )));
        }
    }
    let last = -g.angles.iter().sum::<f64>();
    let rotations: Vec<ComplexMatrix> = g
        .angles
        .iter()
        .chain(std::iter::once(&last))
        .map(|&phi| pauli::z_rotation(phi))
        .collect();
    let mut u = kron_all(&rotations);
    if g.flip {
        u = &kron_all(&vec![pauli::x(); n]) * &u;
    }
    Ok(&permutation_unitary(&g.permutation) * &u)
}

/// Moves qubit k to position `perm[k]`.
pub(crate) fn permutation_unitary(perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let d = 1 << n;
    let mut m = ComplexMatrix::zeros(d, d);
    for src in 0..d {
        let mut dst = 0;
        for (k, &to) in perm.iter().enumerate() {
            let bit = (src >> (n - 1 - k)) & 1;
            dst |= bit << (n - 1 - to);
        }
        m[(dst, src)] = c(1.0, 0.0);
    }
    m
}

fn require_normalized(rho: &DensityMatrix) -> Result<()> {
    if rho.is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "a normalized density matrix is required".into(),
        ))
    }
}

/// Projection onto the GHZ-symmetric states, computed from the orbit averages.
pub fn twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_normalized(rho)?;
    let d = rho.dim();
    let last = d - 1;
    let m = rho.matrix();
    let corner = (m[(0, last)] + m[(last, 0)]) * 0.5;
    let corner_pop = (m[(0, 0)].re + m[(last, last)].re) * 0.5;
    let rest: f64 = (1..last).map(|i| m[(i, i)].re).sum::<f64>() / (d - 2) as f64;

    let mut out = ComplexMatrix::zeros(d, d);
    out[(0, 0)] = c(corner_pop, 0.0);
    out[(last, last)] = c(corner_pop, 0.0);
    out[(0, last)] = c(corner.re, 0.0);
    out[(last, 0)] = c(corner.re, 0.0);
    for i in 1..last {
        out[(i, i)] = c(rest, 0.0);
    }
    Ok(DensityMatrix::from_trusted(out, rho.nqubits(), true))
}

/// Triangle coordinates of ρ (equal to those of its twirl).
pub fn coords(rho: &DensityMatrix) -> Result<SymCoords> {
    require_normalized(rho)?;
    Ok(coords_of_matrix(rho.matrix(), rho.nqubits()))
}

pub(crate) fn coords_of_matrix(m: &ComplexMatrix, nqubits: usize) -> SymCoords {
    let last = (1 << nqubits) - 1;
    let x = (m[(0, last)].re + m[(last, 0)].re) * 0.5;
    let pops = m[(0, 0)].re + m[(last, last)].re;
    coords_from_elements(nqubits, x, pops)
}

/// Coordinates from the corner coherence and the summed corner populations.
pub(crate) fn coords_from_elements(nqubits: usize, x: f64, corner_pops: f64) -> SymCoords {
    let y = match nqubits {
        3 => (corner_pops - 0.25) / sqrt3(),
        _ => (corner_pops - 0.5) / SQRT2,
    };
    SymCoords::new(nqubits, x, y)
}

/// The GHZ-symmetric state at the given coordinates.
pub fn sym_state(nqubits: usize, coords: SymCoords) -> Result<DensityMatrix> {
    if !(2..=3).contains(&nqubits) || coords.nqubits != nqubits {
        return Err(Error::InvalidInput(format!(
            "coordinates for {} qubits requested as {nqubits}-qubit state",
            coords.nqubits
        )));
    }
    coords.ensure_in_triangle()?;
    let d = 1 << nqubits;
    let last = d - 1;
    let a = coords.corner_population();
    let rest = (1.0 - 2.0 * a) / (d - 2) as f64;
    // eigenvalues a ± x and `rest`
    let smallest = (a - coords.x.abs()).min(rest);
    if smallest < -TRIANGLE_SLACK {
        return Err(Error::OutOfDomain(format!(
            "reconstruction has negative eigenvalue {smallest:.3e}"
        )));
    }
    let mut m = ComplexMatrix::zeros(d, d);
    m[(0, 0)] = c(a, 0.0);
    m[(last, last)] = c(a, 0.0);
    m[(0, last)] = c(coords.x, 0.0);
    m[(last, 0)] = c(coords.x, 0.0);
    for i in 1..last {
        m[(i, i)] = c(rest, 0.0);
    }
    Ok(DensityMatrix::from_trusted(m, nqubits, true))
}

/// Result of rotating the corner coherence onto the positive real axis.
#[derive(Clone, Debug)]
pub struct PhaseFix {
    pub state: DensityMatrix,
    /// e^{iθσz} applied to qubit 0.
    pub rotation: ComplexMatrix,
    pub angle: f64,
}

/// Makes ρ₀…₀,₁…₁ real and non-negative with a z rotation on qubit 0.
pub fn fix_phase(rho: &DensityMatrix) -> PhaseFix {
    let n = rho.nqubits();
    let last = rho.dim() - 1;
    let corner = rho.entry(0, last);
    if corner.norm() == 0.0 {
        return PhaseFix {
            state: rho.clone(),
            rotation: pauli::id(),
            angle: 0.0,
        };
    }
    let angle = -corner.arg() / 2.0;
    let rotation = pauli::z_rotation(angle);
    let mut m = apply_local(rho.matrix(), n, 0, &rotation);
    let fixed: Complex64 = c(m[(0, last)].norm(), 0.0);
    m[(0, last)] = fixed;
    m[(last, 0)] = fixed;
    PhaseFix {
        state: DensityMatrix::from_trusted(m, n, rho.is_normalized()),
        rotation,
        angle,
    }
}
