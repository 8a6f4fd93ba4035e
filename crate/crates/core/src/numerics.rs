//! Small dense complex linear algebra.
//!
//! Everything here works on matrices of dimension at most 8, which is all the
//! witness pipeline ever needs (three qubits). The eigensolver is a cyclic
//! Jacobi iteration on Hermitian matrices with a fixed sweep order, so the
//! output is a deterministic function of the input.
//!
//! Qubit 0 is the most significant bit of a computational-basis index.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest matrix dimension the pipeline supports.
pub const MAX_DIM: usize = 8;

const HERMITIAN_TOL: f64 = 1e-9;
const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c(d, 0.0);
        }
        m
    }

    /// Outer product |v⟩⟨v|.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |H - H†| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (H + H†)/2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Similarity transform U·self·U†.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// ⟨a|self|b⟩
    pub fn sandwich(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let mut acc = c(0.0, 0.0);
        for i in 0..self.rows {
            let mut row = c(0.0, 0.0);
            for j in 0..self.cols {
                row += self[(i, j)] * b[j];
            }
            acc += a[i].conj() * row;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEigResult {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermEigResult {
    /// V·f(Λ)·V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices of dimension ≤ 8.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermEigResult> {
    if !h.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigensolver needs a square matrix, got {}x{}",
            h.rows, h.cols
        )));
    }
    let n = h.rows;
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "eigensolver dimension {n} outside 1..=8"
        )));
    }
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }

    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let threshold = JACOBI_REL_TOL * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermEigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// One complex Jacobi rotation annihilating a[p][q].
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible relative to both diagonals: rotation would be a no-op in floating point.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = c(0.0, 0.0);
        a[(q, p)] = c(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;

    // G = diag-phase ∘ real rotation; columns p, q.
    let g_pp = c(cs, 0.0);
    let g_pq = c(sn, 0.0);
    let g_qp = -phase.conj() * sn;
    let g_qq = phase.conj() * cs;

    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = c(0.0, 0.0);
    a[(q, p)] = c(0.0, 0.0);
    a[(p, p)] = c(a[(p, p)].re, 0.0);
    a[(q, q)] = c(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Kronecker product with index convention (i_A i_B, j_A j_B).
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("tensor factors must be finite".into()));
    }
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "tensor product {rows}x{cols} exceeds 8x8"
        )));
    }
    Ok(kron(a, b))
}

pub(crate) fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// ⊗ of a list of single-qubit operators, qubit 0 first.
pub fn kron_all(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = ops[0].clone();
    for op in &ops[1..] {
        out = kron(&out, op);
    }
    out
}

/// Number of qubits for a 2ᴺ-dimensional square matrix with N ∈ {2, 3}.
pub(crate) fn qubits_of(m: &ComplexMatrix) -> Result<usize> {
    match (m.rows, m.cols) {
        (4, 4) => Ok(2),
        (8, 8) => Ok(3),
        (r, cc) => Err(Error::InvalidInput(format!(
            "expected a 4x4 or 8x8 matrix, got {r}x{cc}"
        ))),
    }
}

/// Reduced 2×2 matrix of qubit `party`, tracing out every other qubit.
pub fn partial_trace(rho: &ComplexMatrix, party: usize) -> Result<ComplexMatrix> {
    let n = qubits_of(rho)?;
    if party >= n {
        return Err(Error::InvalidInput(format!(
            "party {party} out of range for {n} qubits"
        )));
    }
    Ok(marginal(rho, n, party))
}

pub(crate) fn marginal(rho: &ComplexMatrix, n: usize, party: usize) -> ComplexMatrix {
    let shift = n - 1 - party;
    let bit = 1usize << shift;
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..dim {
        if i & bit != 0 {
            continue;
        }
        for a in 0..2 {
            for b in 0..2 {
                let row = i | (a << shift);
                let col = i | (b << shift);
                out[(a, b)] += rho[(row, col)];
            }
        }
    }
    out
}

/// Applies a 2×2 operator to one qubit by similarity: (…⊗A⊗…)·ρ·(…⊗A⊗…)†.
pub(crate) fn apply_local(
    rho: &ComplexMatrix,
    n: usize,
    party: usize,
    a: &ComplexMatrix,
) -> ComplexMatrix {
    let shift = n - 1 - party;
    let bit = 1usize << shift;
    let dim = 1usize << n;
    // left multiply
    let mut left = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        let rb = (r >> shift) & 1;
        let r0 = r & !bit;
        for col in 0..dim {
            let mut acc = c(0.0, 0.0);
            for k in 0..2 {
                acc += a[(rb, k)] * rho[(r0 | (k << shift), col)];
            }
            left[(r, col)] = acc;
        }
    }
    // right multiply by A†
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            let cb = (col >> shift) & 1;
            let c0 = col & !bit;
            let mut acc = c(0.0, 0.0);
            for k in 0..2 {
                acc += left[(row, c0 | (k << shift))] * a[(cb, k)].conj();
            }
            out[(row, col)] = acc;
        }
    }
    out
}

/// Determinant of a 2×2 matrix.
pub fn det2(m: &ComplexMatrix) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Inverse square root of a PD matrix; eigenvalues below `singular` are rejected.
pub(crate) fn inv_sqrt_psd(m: &ComplexMatrix, singular: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(&m.hermitian_part())?;
    let smallest = *eig.eigenvalues.last().expect("non-empty spectrum");
    if smallest < singular {
        return Err(Error::InvalidInput(format!(
            "matrix is singular (smallest eigenvalue {smallest:.3e})"
        )));
    }
    Ok(eig.reconstruct_with(|l| 1.0 / l.sqrt()))
}

pub mod pauli {
    use super::{c, ComplexMatrix};

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(0.0, -1.0);
        m[(1, 0)] = c(0.0, 1.0);
        m
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// e^{iφσz} = diag(e^{iφ}, e^{-iφ})
    pub fn z_rotation(phi: f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = c(phi.cos(), phi.sin());
        m[(1, 1)] = c(phi.cos(), -phi.sin());
        m
    }

    /// σx, σy, σz in order.
    pub fn all() -> [ComplexMatrix; 3] {
        [x(), y(), z()]
    }
}
