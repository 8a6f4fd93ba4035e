//! Local-unitary alignment of a normal form before it is twirled.
//!
//! Two qubits have a closed-form answer: rotate the correlation matrix to
//! diagonal form and order the Bell weights. Three qubits are handled with
//! Nelder–Mead over Euler angles, restarted from a fixed roster of discrete
//! seeds and from seeded random points.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{apply_local, c, herm_eig, kron, marginal, pauli, ComplexMatrix};
use crate::states::DensityMatrix;
use crate::symmetry::{coords, coords_from_elements, fix_phase, SymCoords};
use crate::tangle::sym_measure_signed;

/// Quantity maximized over local unitaries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Concurrence or three-tangle of the twirled state.
    #[default]
    Measure,
    /// ⟨GHZ₊|ρˢ|GHZ₊⟩
    Fidelity,
    /// Re ρ₀…₀,₁…₁
    CornerElement,
    /// Hilbert–Schmidt distance of ρˢ from GHZ₊, minimized (reported negated).
    HsDistance,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Measure => "measure",
            Objective::Fidelity => "fidelity",
            Objective::CornerElement => "corner-element",
            Objective::HsDistance => "hs-distance",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measure" => Ok(Objective::Measure),
            "fidelity" => Ok(Objective::Fidelity),
            "corner-element" => Ok(Objective::CornerElement),
            "hs-distance" => Ok(Objective::HsDistance),
            other => Err(Error::InvalidInput(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Simplex spread in objective value at which a restart stops.
    pub tolerance: f64,
    pub objective: Objective,
    /// Edge length of the initial simplex, in radians.
    pub step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_evals: 2000,
            tolerance: 1e-9,
            objective: Objective::Measure,
            step: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptResult {
    /// (⊗Uⱼ)·ρ·(⊗Uⱼ)† with a real, non-negative corner element.
    pub optimized: DensityMatrix,
    pub applied_unitaries: Vec<ComplexMatrix>,
    /// Objective at `optimized`; for `Measure` the clipped measure.
    pub objective_value: f64,
    pub restarts_run: usize,
    pub evaluations: usize,
    pub seed: u64,
}

impl OptResult {
    pub fn coords(&self) -> SymCoords {
        coords(&self.optimized).expect("optimized state is normalized")
    }
}

/// Score used by the search; for `Measure` it is the unclipped continuation.
fn search_score(obj: Objective, c: SymCoords) -> f64 {
    match obj {
        Objective::Measure => sym_measure_signed(c),
        Objective::Fidelity => c.fidelity(),
        Objective::CornerElement => c.x,
        Objective::HsDistance => -c.hs_distance_to_ghz(),
    }
}

fn reported_score(obj: Objective, c: SymCoords) -> f64 {
    match obj {
        Objective::Measure => search_score(obj, c).max(0.0),
        _ => search_score(obj, c),
    }
}

/// Rz(α)·Ry(β)·Rz(γ)
pub(crate) fn euler(a: f64, b: f64, g: f64) -> [[Complex64; 2]; 2] {
    let (sb, cb) = (b / 2.0).sin_cos();
    let e = |phi: f64| Complex64::from_polar(1.0, phi);
    [
        [e(-(a + g) / 2.0) * cb, -e(-(a - g) / 2.0) * sb],
        [e((a - g) / 2.0) * sb, e((a + g) / 2.0) * cb],
    ]
}

fn to_matrix(u: &[[Complex64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| u[i][j])
}

/// Row `r` of U₀⊗…⊗U_{N−1}, for r = 0…0 (`bit` = 0) or 1…1 (`bit` = 1).
fn product_row(us: &[[[Complex64; 2]; 2]], bit: usize, out: &mut [Complex64]) {
    let n = us.len();
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut acc = c(1.0, 0.0);
        for (j, u) in us.iter().enumerate() {
            acc *= u[bit][(idx >> (n - 1 - j)) & 1];
        }
        *slot = acc;
    }
}

/// Coordinates of the phase-fixed state (⊗Uⱼ)ρ(⊗Uⱼ)†, read from two rows of ⊗Uⱼ.
fn rotated_coords(rho: &ComplexMatrix, n: usize, us: &[[[Complex64; 2]; 2]]) -> SymCoords {
    let d = 1 << n;
    let mut u0 = [c(0.0, 0.0); 8];
    let mut u1 = [c(0.0, 0.0); 8];
    product_row(us, 0, &mut u0[..d]);
    product_row(us, 1, &mut u1[..d]);
    // ⟨k|U ρ U†|l⟩ = Σ u_k[a] ρ[a,b] conj(u_l[b])
    let mut r0 = [c(0.0, 0.0); 8];
    let mut r1 = [c(0.0, 0.0); 8];
    for a in 0..d {
        for b in 0..d {
            let m = rho[(a, b)];
            r0[b] += u0[a] * m;
            r1[b] += u1[a] * m;
        }
    }
    let (mut corner, mut p0, mut p1) = (c(0.0, 0.0), 0.0, 0.0);
    for b in 0..d {
        corner += r0[b] * u1[b].conj();
        p0 += (r0[b] * u0[b].conj()).re;
        p1 += (r1[b] * u1[b].conj()).re;
    }
    coords_from_elements(n, corner.norm(), p0 + p1)
}

fn unitaries_from(angles: &[f64]) -> Vec<[[Complex64; 2]; 2]> {
    angles.chunks(3).map(|e| euler(e[0], e[1], e[2])).collect()
}

/// Starting points: identity, single-qubit Paulis and Hadamard, then global moves.
fn roster(n: usize) -> Vec<Vec<f64>> {
    // σx, σy, σz, H up to phase
    let singles = [
        [0.0, PI, PI],
        [0.0, PI, 0.0],
        [PI, 0.0, 0.0],
        [0.0, FRAC_PI_2, PI],
    ];
    let globals = [
        [0.0, FRAC_PI_2, PI],
        [0.0, PI, PI],
        [FRAC_PI_2, 0.0, 0.0],
        [0.0, FRAC_PI_2, 0.0],
    ];
    let mut out = vec![vec![0.0; 3 * n]];
    for q in 0..n {
        for s in &singles {
            let mut v = vec![0.0; 3 * n];
            v[3 * q..3 * q + 3].copy_from_slice(s);
            out.push(v);
        }
    }
    for g in &globals {
        out.push(g.iter().copied().cycle().take(3 * n).collect());
    }
    out
}

struct Minimum {
    x: Vec<f64>,
    f: f64,
    evals: usize,
}

/// Nelder–Mead minimization with the usual coefficients (1, 2, ½, ½).
fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    tol: f64,
) -> Minimum {
    let dim = x0.len();
    let evals = Cell::new(0);
    let mut eval = |x: &[f64]| {
        if evals.get() >= max_evals {
            return f64::INFINITY;
        }
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0);
    pts.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x);
        pts.push((x, fx));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&p, &q)| p + t * (q - p)).collect()
    };
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = pts[dim].1 - pts[0].1;
        if evals.get() >= max_evals || spread <= tol {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &pts[..dim] {
            for (cj, xj) in centroid.iter_mut().zip(x) {
                *cj += xj / dim as f64;
            }
        }
        let worst = pts[dim].clone();
        let xr = lerp(&centroid, &worst.0, -1.0);
        let fr = eval(&xr);
        if fr < pts[0].1 {
            let xe = lerp(&centroid, &worst.0, -2.0);
            let fe = eval(&xe);
            pts[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[dim - 1].1 {
            pts[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = lerp(&centroid, &xr, 0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = lerp(&centroid, &worst.0, 0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            pts[dim] = (xc, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            p.0 = lerp(&best, &p.0, 0.5);
            p.1 = eval(&p.0);
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = pts.swap_remove(0);
    Minimum {
        x,
        f,
        evals: evals.get(),
    }
}

/// Applies ⊗Uⱼ, then fixes the corner phase and folds that rotation into U₀.
fn finish(
    rho: &DensityMatrix,
    mut us: Vec<ComplexMatrix>,
    obj: Objective,
    restarts_run: usize,
    evaluations: usize,
    seed: u64,
) -> OptResult {
    let n = rho.nqubits();
    let mut m = rho.matrix().clone();
    for (party, u) in us.iter().enumerate() {
        m = apply_local(&m, n, party, u);
    }
    let rotated = DensityMatrix::from_trusted(m.hermitian_part(), n, true);
    let fixed = fix_phase(&rotated);
    us[0] = &fixed.rotation * &us[0];
    let optimized = fixed.state;
    let value = reported_score(obj, coords(&optimized).expect("normalized"));
    OptResult {
        optimized,
        applied_unitaries: us,
        objective_value: value,
        restarts_run,
        evaluations,
        seed,
    }
}

fn require_normalized(rho: &DensityMatrix) -> Result<()> {
    if rho.is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "local-unitary optimization needs a normalized state".into(),
        ))
    }
}

/// Seeded multi-start search over SU(2)⊗ᴺ maximizing `obj` of the twirled state.
///
/// Restart k starts from the k-th roster entry while the roster lasts and from
/// uniformly random Euler angles afterwards. The best restart wins; ties go to
/// the lower index.
pub fn optimize_local_unitaries(
    nf: &DensityMatrix,
    obj: Objective,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    require_normalized(nf)?;
    let n = nf.nqubits();
    let rho = nf.matrix();
    let restarts = cfg.restarts.max(1);
    let mut starts = roster(n);
    starts.truncate(restarts);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < restarts {
        starts.push(
            (0..3 * n)
                .map(|i| match i % 3 {
                    1 => rng.random_range(0.0..PI),
                    _ => rng.random_range(0.0..2.0 * PI),
                })
                .collect(),
        );
    }

    let objective = |x: &[f64]| -search_score(obj, rotated_coords(rho, n, &unitaries_from(x)));
    let mut best: Option<Minimum> = None;
    let mut evaluations = 0;
    for start in &starts {
        let found = nelder_mead(objective, start, cfg.step, cfg.max_evals, cfg.tolerance);
        evaluations += found.evals;
        if best.as_ref().is_none_or(|b| found.f < b.f) {
            best = Some(found);
        }
    }
    let best = best.expect("at least one restart");
    let us = unitaries_from(&best.x).iter().map(to_matrix).collect();
    Ok(finish(nf, us, obj, starts.len(), evaluations, cfg.seed))
}

type Mat3 = [[f64; 3]; 3];
type Vec3 = [f64; 3];

fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| (0..3).map(|k| m[i][k] * v[k]).sum())
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(v: Vec3) -> Vec3 {
    let len = dot(&v, &v).sqrt();
    v.map(|x| x / len)
}

/// Component of `v` orthogonal to the unit vector `u`, normalized; completed
/// with a coordinate axis when `v` is (nearly) parallel to `u` or zero.
fn orthonormal_to(u: &Vec3, v: &Vec3) -> Vec3 {
    let w: Vec3 = std::array::from_fn(|i| v[i] - dot(u, v) * u[i]);
    if dot(&w, &w).sqrt() > 1e-12 {
        return normalized(w);
    }
    let k = (0..3)
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .expect("three axes");
    let mut e = [0.0; 3];
    e[k] = 1.0;
    orthonormal_to(u, &e)
}

/// Matrix with the given vectors as columns.
fn columns(a: Vec3, b: Vec3, c: Vec3) -> Mat3 {
    std::array::from_fn(|i| [a[i], b[i], c[i]])
}

fn transpose(m: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

/// SU(2) element whose adjoint action U σᵢ U† = Σₖ Rₖᵢ σₖ realizes the rotation R.
pub(crate) fn su2_from_rotation(r: &Mat3) -> ComplexMatrix {
    let tr = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z) = if tr > 0.0 {
        let s = 2.0 * (tr + 1.0).sqrt();
        (
            s / 4.0,
            (r[2][1] - r[1][2]) / s,
            (r[0][2] - r[2][0]) / s,
            (r[1][0] - r[0][1]) / s,
        )
    } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
        let s = 2.0 * (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt();
        (
            (r[2][1] - r[1][2]) / s,
            s / 4.0,
            (r[0][1] + r[1][0]) / s,
            (r[0][2] + r[2][0]) / s,
        )
    } else if r[1][1] > r[2][2] {
        let s = 2.0 * (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt();
        (
            (r[0][2] - r[2][0]) / s,
            (r[0][1] + r[1][0]) / s,
            s / 4.0,
            (r[1][2] + r[2][1]) / s,
        )
    } else {
        let s = 2.0 * (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt();
        (
            (r[1][0] - r[0][1]) / s,
            (r[0][2] + r[2][0]) / s,
            (r[1][2] + r[2][1]) / s,
            s / 4.0,
        )
    };
    let [sx, sy, sz] = pauli::all();
    let generator = &(&sx.scale(x) + &sy.scale(y)) + &sz.scale(z);
    let i = c(0.0, 1.0);
    ComplexMatrix::from_fn(2, 2, |a, b| {
        let id = if a == b { w } else { 0.0 };
        c(id, 0.0) - i * generator[(a, b)]
    })
}

/// Tᵢⱼ = tr(ρ σᵢ⊗σⱼ)
fn correlation_matrix(rho: &DensityMatrix) -> Mat3 {
    let s = pauli::all();
    std::array::from_fn(|i| std::array::from_fn(|j| rho.expectation(&kron(&s[i], &s[j])).re))
}

/// Bell weights (Φ⁺, Φ⁻, Ψ⁺, Ψ⁻) of a diagonal correlation matrix.
fn bell_weights(t: &Vec3) -> [f64; 4] {
    [
        (1.0 + t[0] - t[1] + t[2]) / 4.0,
        (1.0 - t[0] + t[1] + t[2]) / 4.0,
        (1.0 + t[0] + t[1] - t[2]) / 4.0,
        (1.0 - t[0] - t[1] - t[2]) / 4.0,
    ]
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];
const EVEN_SIGNS: [Vec3; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];
const WEIGHT_TIE: f64 = 1e-12;

/// Rotates a two-qubit state to Bell-diagonal form with the Bell weights ordered
/// Φ⁺ ≥ Ψ⁺ ≥ Ψ⁻ ≥ Φ⁻ (maximal Φ⁺ first, then minimal Φ⁻).
pub fn bell_diagonalize(nf: &DensityMatrix) -> Result<OptResult> {
    if nf.nqubits() != 2 {
        return Err(Error::InvalidInput(
            "Bell diagonalization needs two qubits".into(),
        ));
    }
    require_normalized(nf)?;
    for party in 0..2 {
        let mut r = marginal(nf.matrix(), 2, party);
        r[(0, 0)].re -= 0.5;
        r[(1, 1)].re -= 0.5;
        let defect = r.frobenius_norm();
        if defect > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "marginal of qubit {party} is {defect:.3e} away from I/2"
            )));
        }
    }
    Ok(bell_align(nf))
}

/// Bell diagonalization without the marginal check. States with non-zero local
/// Bloch vectors are only approximately Bell-diagonal afterwards.
pub(crate) fn bell_align(rho: &DensityMatrix) -> OptResult {
    let t = correlation_matrix(rho);
    let tt = mat_mul(&transpose(&t), &t);
    let eig = herm_eig(&ComplexMatrix::from_fn(3, 3, |i, j| c(tt[i][j], 0.0)))
        .expect("TᵀT is real symmetric");
    let col = |k: usize| -> Vec3 { std::array::from_fn(|i| eig.eigenvectors[(i, k)].re) };
    let v1 = normalized(col(0));
    let v2 = orthonormal_to(&v1, &col(1));
    let v3 = cross(&v1, &v2);

    let tv1 = mat_vec(&t, &v1);
    let (u1, u2) = if dot(&tv1, &tv1).sqrt() < 1e-14 {
        (v1, v2)
    } else {
        let u1 = normalized(tv1);
        (u1, orthonormal_to(&u1, &mat_vec(&t, &v2)))
    };
    let u3 = cross(&u1, &u2);
    let d = [
        dot(&u1, &mat_vec(&t, &v1)),
        dot(&u2, &mat_vec(&t, &v2)),
        dot(&u3, &mat_vec(&t, &v3)),
    ];
    let u_t = transpose(&columns(u1, u2, u3));
    let v_t = transpose(&columns(v1, v2, v3));

    // 24 rotations mapping diagonals to diagonals: permutations of d with an
    // even number of sign changes.
    let mut best: Option<(usize, [f64; 4], Mat3, Mat3)> = None;
    let mut index = 0;
    for perm in PERMUTATIONS {
        let odd = (perm[0] > perm[1]) ^ (perm[1] > perm[2]) ^ (perm[0] > perm[2]);
        let p: Mat3 = std::array::from_fn(|i| {
            std::array::from_fn(|j| match (perm[i] == j, i == 0 && odd) {
                (false, _) => 0.0,
                (true, false) => 1.0,
                (true, true) => -1.0,
            })
        });
        for signs in EVEN_SIGNS {
            let diag: Vec3 = std::array::from_fn(|i| signs[i] * d[perm[i]]);
            let w = bell_weights(&diag);
            let better = match &best {
                None => true,
                Some((_, bw, _, _)) => {
                    if (w[0] - bw[0]).abs() > WEIGHT_TIE {
                        w[0] > bw[0]
                    } else if (w[1] - bw[1]).abs() > WEIGHT_TIE {
                        w[1] < bw[1]
                    } else {
                        w[2] > bw[2] + WEIGHT_TIE
                    }
                }
            };
            if better {
                let s: Mat3 = std::array::from_fn(|i| {
                    std::array::from_fn(|j| if i == j { signs[i] } else { 0.0 })
                });
                let r1 = mat_mul(&mat_mul(&s, &p), &u_t);
                let r2 = mat_mul(&p, &v_t);
                best = Some((index, w, r1, r2));
            }
            index += 1;
        }
    }
    let (_, _, r1, r2) = best.expect("non-empty candidate set");
    let us = vec![su2_from_rotation(&r1), su2_from_rotation(&r2)];
    finish(rho, us, Objective::Measure, 1, index, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::kron_all;
    use crate::states::{canonical_state, random_density, CanonicalState};
    use crate::symmetry::sym_state;
    use crate::tangle::{concurrence_sym, tau3_sym};

    fn bell_mixture(weights: [(CanonicalState, f64); 4]) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (s, w) in weights {
            m = &m + &canonical_state(s).unwrap().matrix().scale(w);
        }
        DensityMatrix::new(m).unwrap()
    }

    fn assert_consistent(input: &DensityMatrix, r: &OptResult) {
        let u = kron_all(&r.applied_unitaries);
        let back = input.matrix().conjugate_by(&u);
        assert!(back.max_abs_diff(r.optimized.matrix()) < 1e-9);
        let corner = r.optimized.entry(0, r.optimized.dim() - 1);
        assert!(corner.im == 0.0 && corner.re >= -1e-12);
    }

    #[test]
    fn euler_angles_cover_discrete_moves() {
        let phase_equal = |u: &[[Complex64; 2]; 2], v: &ComplexMatrix| {
            let m = to_matrix(u);
            let ip = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].conj() * v[(i, j)])
                .sum::<Complex64>();
            (ip.norm() - 2.0).abs() < 1e-12
        };
        let [x, y, z] = pauli::all();
        let h = ComplexMatrix::from_fn(2, 2, |i, j| {
            c(if i == 1 && j == 1 { -1.0 } else { 1.0 } / 2f64.sqrt(), 0.0)
        });
        let targets = [x, y, z, h];
        for (angles, target) in roster(1)[1..5].iter().zip(&targets) {
            assert!(phase_equal(&euler(angles[0], angles[1], angles[2]), target));
        }
    }

    #[test]
    fn rotation_lift_matches_adjoint_action() {
        let u = to_matrix(&euler(0.3, 1.1, -2.0));
        let s = pauli::all();
        let r: Mat3 = std::array::from_fn(|k| {
            std::array::from_fn(|i| (&s[k] * &s[i].conjugate_by(&u)).trace().re / 2.0)
        });
        let lifted = su2_from_rotation(&r);
        for i in 0..3 {
            let lhs = s[i].conjugate_by(&lifted);
            let mut rhs = ComplexMatrix::zeros(2, 2);
            for k in 0..3 {
                rhs = &rhs + &s[k].scale(r[k][i]);
            }
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn psi_minus_becomes_phi_plus() {
        let psi = canonical_state(CanonicalState::PsiMinus).unwrap();
        let r = bell_diagonalize(&psi).unwrap();
        let phi = canonical_state(CanonicalState::PhiPlus).unwrap();
        assert!(r.optimized.matrix().max_abs_diff(phi.matrix()) < 1e-12);
        assert!((r.objective_value - 1.0).abs() < 1e-12);
        assert_consistent(&psi, &r);
    }

    #[test]
    fn largest_weight_moves_to_phi_plus() {
        use CanonicalState::*;
        let rho = bell_mixture([
            (PsiPlus, 0.6),
            (PhiPlus, 0.3),
            (PhiMinus, 0.05),
            (PsiMinus, 0.05),
        ]);
        let r = bell_diagonalize(&rho).unwrap();
        let phi = canonical_state(PhiPlus).unwrap();
        assert!((r.optimized.expectation(phi.matrix()).re - 0.6).abs() < 1e-12);
        assert_consistent(&rho, &r);
    }

    #[test]
    fn ordered_bell_state_is_fixed() {
        use CanonicalState::*;
        let rho = bell_mixture([
            (PhiPlus, 0.7),
            (PsiPlus, 0.2),
            (PsiMinus, 0.1),
            (PhiMinus, 0.0),
        ]);
        let r = bell_diagonalize(&rho).unwrap();
        assert!(r.optimized.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn bell_diagonalize_checks_marginals() {
        let b = canonical_state(CanonicalState::Basis {
            nqubits: 2,
            index: 0,
        })
        .unwrap();
        assert!(matches!(bell_diagonalize(&b), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn concurrence_of_bell_diagonal_output() {
        use crate::normal_form::{normal_form, NormalFormConfig};
        let rho = random_density(5, 2, 4).unwrap();
        let nf = normal_form(&rho, &NormalFormConfig::default()).unwrap();
        let nfn = nf.normalized().unwrap();
        let r = bell_diagonalize(&nfn).unwrap();
        assert_consistent(&nfn, &r);
        let mut a = r.optimized.eigenvalues();
        let mut b = nfn.eigenvalues();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-9));
        let phi = canonical_state(CanonicalState::PhiPlus).unwrap();
        let lam = r.optimized.expectation(phi.matrix()).re;
        let cr = r.coords();
        let lhs = 2.0 * cr.x + std::f64::consts::SQRT_2 * cr.y - 0.5;
        assert!((lhs - (2.0 * lam - 1.0)).abs() < 1e-9);
        assert!((concurrence_sym(cr).unwrap() - (2.0 * lam - 1.0).max(0.0)).abs() < 1e-9);
    }

    #[test]
    fn ghz_minus_is_rotated_to_ghz_plus() {
        let gm = canonical_state(CanonicalState::GhzMinus).unwrap();
        let r =
            optimize_local_unitaries(&gm, Objective::Measure, &OptimizerConfig::default()).unwrap();
        let cr = r.coords();
        assert!((cr.x - 0.5).abs() < 1e-12 && (cr.y - 3f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((r.objective_value - 1.0).abs() < 1e-12);
        assert_consistent(&gm, &r);
    }

    #[test]
    fn never_below_identity_and_deterministic() {
        let cfg = OptimizerConfig {
            restarts: 20,
            seed: 9,
            ..OptimizerConfig::default()
        };
        let rho = random_density(3, 3, 2).unwrap();
        let a = optimize_local_unitaries(&rho, Objective::Measure, &cfg).unwrap();
        let b = optimize_local_unitaries(&rho, Objective::Measure, &cfg).unwrap();
        assert_eq!(a.objective_value, b.objective_value);
        assert_eq!(
            a.optimized.matrix().entries(),
            b.optimized.matrix().entries()
        );
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.restarts_run, 20);
        let base = tau3_sym(coords(&fix_phase(&rho).state).unwrap()).unwrap();
        assert!(a.objective_value >= base - 1e-12);
        assert_consistent(&rho, &a);
    }

    #[test]
    fn symmetric_input_keeps_its_value() {
        let c0 = SymCoords::new(3, 0.35, 0.35);
        let rho = sym_state(3, c0).unwrap();
        let r = optimize_local_unitaries(&rho, Objective::Measure, &OptimizerConfig::default())
            .unwrap();
        assert!(r.objective_value >= tau3_sym(c0).unwrap() - 1e-12);
    }

    #[test]
    fn alternative_objectives_run() {
        let rho = canonical_state(CanonicalState::GhzMinus).unwrap();
        let cfg = OptimizerConfig {
            restarts: 4,
            ..OptimizerConfig::default()
        };
        for obj in [
            Objective::Fidelity,
            Objective::CornerElement,
            Objective::HsDistance,
        ] {
            let r = optimize_local_unitaries(&rho, obj, &cfg).unwrap();
            let cr = r.coords();
            assert!((cr.x - 0.5).abs() < 1e-9, "{obj}: {cr:?}");
            assert_eq!(obj.to_string().parse::<Objective>().unwrap(), obj);
        }
    }
}
