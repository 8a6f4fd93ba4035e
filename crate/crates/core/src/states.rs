//! Density matrices: validation, the named two- and three-qubit states, the
//! one-parameter families used throughout the examples, and seeded random states.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{c, herm_eig, kron_all, pauli, qubits_of, ComplexMatrix};

/// Tolerance for Hermiticity, positivity and trace checks.
pub const STATE_TOL: f64 = 1e-9;

/// A validated 2- or 3-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    nqubits: usize,
    normalized: bool,
}

impl DensityMatrix {
    /// Validates a matrix that should have unit trace.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate(matrix, true)
    }

    /// Validates a positive matrix of arbitrary trace.
    pub fn unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        validate(matrix, false)
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix, nqubits: usize, normalized: bool) -> Self {
        Self {
            matrix,
            nqubits,
            normalized,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let norm = psi.norm_sqr();
        let m = ComplexMatrix::projector(&psi.amplitudes);
        Self {
            matrix: m.scale(1.0 / norm),
            nqubits: psi.nqubits,
            normalized: true,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn dim(&self) -> usize {
        1 << self.nqubits
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Rescales to unit trace.
    pub fn normalize(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(Error::InvalidInput(
                "cannot normalize a zero-trace matrix".into(),
            ));
        }
        Ok(Self {
            matrix: self.matrix.scale(1.0 / t),
            nqubits: self.nqubits,
            normalized: true,
        })
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.matrix)
            .expect("validated density matrix is Hermitian")
            .eigenvalues
    }

    /// Entry ⟨i|ρ|j⟩ in the computational basis.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// tr(O·ρ)
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        (op * &self.matrix).trace()
    }

    /// U·ρ·U† for a unitary of matching dimension.
    pub fn transformed(&self, u: &ComplexMatrix) -> Self {
        Self {
            matrix: self.matrix.conjugate_by(u).hermitian_part(),
            nqubits: self.nqubits,
            normalized: self.normalized,
        }
    }
}

/// Checks dimension, Hermiticity, positivity and (optionally) unit trace.
pub fn validate(matrix: ComplexMatrix, normalized: bool) -> Result<DensityMatrix> {
    let nqubits = qubits_of(&matrix)?;
    if !matrix.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let defect = matrix.hermiticity_defect();
    if defect >= STATE_TOL {
        return Err(Error::NotAState(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let matrix = matrix.hermitian_part();
    let eig = herm_eig(&matrix)?;
    let smallest = *eig.eigenvalues.last().unwrap();
    if smallest < -STATE_TOL {
        return Err(Error::NotAState(format!(
            "smallest eigenvalue {smallest:.3e} is below -1e-9"
        )));
    }
    let trace = matrix.trace().re;
    if normalized && (trace - 1.0).abs() > STATE_TOL {
        return Err(Error::Normalization { trace });
    }
    Ok(DensityMatrix {
        matrix,
        nqubits,
        normalized,
    })
}

/// A pure 2- or 3-qubit state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub amplitudes: Vec<Complex64>,
    pub nqubits: usize,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let nqubits = match amplitudes.len() {
            4 => 2,
            8 => 3,
            n => {
                return Err(Error::InvalidInput(format!(
                    "expected 4 or 8 amplitudes, got {n}"
                )))
            }
        };
        Ok(Self {
            amplitudes,
            nqubits,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-10
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a / n).collect(),
            nqubits: self.nqubits,
        }
    }

    /// Applies an operator of matching dimension.
    pub fn apply(&self, op: &ComplexMatrix) -> Self {
        let d = self.amplitudes.len();
        let amplitudes = (0..d)
            .map(|i| (0..d).map(|j| op[(i, j)] * self.amplitudes[j]).sum())
            .collect();
        Self {
            amplitudes,
            nqubits: self.nqubits,
        }
    }

    pub fn ghz(nqubits: usize) -> Self {
        let d = 1 << nqubits;
        let mut a = vec![c(0.0, 0.0); d];
        a[0] = c(FRAC_1_SQRT_2, 0.0);
        a[d - 1] = c(FRAC_1_SQRT_2, 0.0);
        Self {
            amplitudes: a,
            nqubits,
        }
    }

    /// (|001⟩+|010⟩+|100⟩)/√3
    pub fn w() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let mut a = vec![c(0.0, 0.0); 8];
        for i in [1, 2, 4] {
            a[i] = c(s, 0.0);
        }
        Self {
            amplitudes: a,
            nqubits: 3,
        }
    }

    pub fn basis(nqubits: usize, index: usize) -> Self {
        let mut a = vec![c(0.0, 0.0); 1 << nqubits];
        a[index] = c(1.0, 0.0);
        Self {
            amplitudes: a,
            nqubits,
        }
    }

    fn bell(pairs: [(usize, f64); 2]) -> Self {
        let mut a = vec![c(0.0, 0.0); 4];
        for (i, s) in pairs {
            a[i] = c(s * FRAC_1_SQRT_2, 0.0);
        }
        Self {
            amplitudes: a,
            nqubits: 2,
        }
    }
}

/// Named states and the parametrized families ρ₁, ρ₂, ρ₃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CanonicalState {
    GhzPlus,
    GhzMinus,
    W,
    WBar,
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    Basis {
        nqubits: usize,
        index: usize,
    },
    /// p·GHZ₊ + (1−p)·W
    Rho1(f64),
    /// p·GHZ₊ + (1−p)/2·(W + W̄)
    Rho2(f64),
    /// p·GHZ₊ + (1−p)·|001⟩⟨001|
    Rho3(f64),
    MaxMixed(usize),
}

/// Builds one of the named states as a normalized density matrix.
pub fn canonical_state(name: CanonicalState) -> Result<DensityMatrix> {
    use CanonicalState::*;
    let check_p = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(Error::InvalidInput(format!("p = {p} outside [0, 1]")))
        }
    };
    let pure = |psi: PureState| Ok(DensityMatrix::from_pure(&psi));
    let mix = |terms: &[(f64, PureState)]| {
        let d = terms[0].1.amplitudes.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, psi) in terms {
            m = &m + &ComplexMatrix::projector(&psi.amplitudes).scale(*w);
        }
        DensityMatrix::new(m)
    };
    match name {
        GhzPlus => pure(PureState::ghz(3)),
        GhzMinus => {
            let mut psi = PureState::ghz(3);
            psi.amplitudes[7] = -psi.amplitudes[7];
            pure(psi)
        }
        W => pure(PureState::w()),
        WBar => pure(w_bar()),
        PhiPlus => pure(PureState::bell([(0, 1.0), (3, 1.0)])),
        PhiMinus => pure(PureState::bell([(0, 1.0), (3, -1.0)])),
        PsiPlus => pure(PureState::bell([(1, 1.0), (2, 1.0)])),
        PsiMinus => pure(PureState::bell([(1, 1.0), (2, -1.0)])),
        Basis { nqubits, index } => {
            if !(2..=3).contains(&nqubits) || index >= 1 << nqubits {
                return Err(Error::InvalidInput(format!(
                    "basis index {index} invalid for {nqubits} qubits"
                )));
            }
            pure(PureState::basis(nqubits, index))
        }
        Rho1(p) => {
            let p = check_p(p)?;
            mix(&[(p, PureState::ghz(3)), (1.0 - p, PureState::w())])
        }
        Rho2(p) => {
            let p = check_p(p)?;
            let q = (1.0 - p) / 2.0;
            mix(&[(p, PureState::ghz(3)), (q, PureState::w()), (q, w_bar())])
        }
        Rho3(p) => {
            let p = check_p(p)?;
            mix(&[(p, PureState::ghz(3)), (1.0 - p, PureState::basis(3, 1))])
        }
        MaxMixed(n) => {
            if !(2..=3).contains(&n) {
                return Err(Error::InvalidInput(format!("{n} qubits not supported")));
            }
            let d = 1 << n;
            DensityMatrix::new(ComplexMatrix::identity(d).scale(1.0 / d as f64))
        }
    }
}

/// σx⊗³|W⟩
fn w_bar() -> PureState {
    let flip = kron_all(&[pauli::x(), pauli::x(), pauli::x()]);
    PureState::w().apply(&flip)
}

/// The three mixtures used to probe the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rho1,
    Rho2,
    Rho3,
}

/// Known three-tangle information for a family member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReference {
    /// Exact three-tangle where it is known in closed form.
    pub exact: Option<f64>,
    /// Open interval bracketing the exact value.
    pub interval: Option<(f64, f64)>,
    pub note: Option<String>,
}

impl Family {
    pub fn state(self, p: f64) -> Result<DensityMatrix> {
        canonical_state(match self {
            Family::Rho1 => CanonicalState::Rho1(p),
            Family::Rho2 => CanonicalState::Rho2(p),
            Family::Rho3 => CanonicalState::Rho3(p),
        })
    }

    pub fn reference(self, p: f64) -> FamilyReference {
        match self {
            Family::Rho3 => FamilyReference {
                exact: Some(p),
                interval: None,
                note: None,
            },
            Family::Rho2 => FamilyReference {
                exact: Some((4.0 * p - 3.0).max(0.0)),
                interval: None,
                note: None,
            },
            Family::Rho1 if p > 0.70 - 1e-12 && p < 0.74 + 1e-12 => FamilyReference {
                exact: None,
                interval: Some((0.19, 0.31)),
                note: Some(
                    "known underestimate: the exact three-tangle lies in (0.19, 0.31) for \
                     0.70 < p < 0.74, but the optimized symmetric image stays in the W region"
                        .into(),
                ),
            },
            Family::Rho1 => FamilyReference {
                exact: None,
                interval: None,
                note: None,
            },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Rho1 => "rho1",
            Family::Rho2 => "rho2",
            Family::Rho3 => "rho3",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho1" => Ok(Family::Rho1),
            "rho2" => Ok(Family::Rho2),
            "rho3" => Ok(Family::Rho3),
            other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
        }
    }
}

/// Draws `count` complex Gaussian numbers, real part then imaginary part.
fn gaussians(rng: &mut ChaCha8Rng, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        })
        .collect()
}

/// Seeded random state ρ = GG†/tr(GG†) with G a 2ᴺ×rank complex Gaussian matrix.
///
/// The generator is ChaCha8 seeded with `seed_from_u64(seed)`; entries of G are
/// drawn row-major from the standard normal distribution, real part first.
pub fn random_density(seed: u64, nqubits: usize, rank: usize) -> Result<DensityMatrix> {
    if !(2..=3).contains(&nqubits) {
        return Err(Error::InvalidInput(format!(
            "{nqubits} qubits not supported"
        )));
    }
    let d = 1 << nqubits;
    if rank == 0 || rank > d {
        return Err(Error::InvalidInput(format!("rank {rank} outside 1..={d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_row_major(d, rank, gaussians(&mut rng, d * rank))?;
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    Ok(DensityMatrix::from_trusted(
        m.scale(1.0 / t).hermitian_part(),
        nqubits,
        true,
    ))
}

/// Seeded random unit vector with Gaussian amplitudes.
pub fn random_pure(seed: u64, nqubits: usize) -> Result<PureState> {
    if !(2..=3).contains(&nqubits) {
        return Err(Error::InvalidInput(format!(
            "{nqubits} qubits not supported"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(PureState::new(gaussians(&mut rng, 1 << nqubits))?.normalized())
}
