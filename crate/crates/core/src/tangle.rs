//! Closed-form entanglement measures.
//!
//! * the pure-state three-tangle,
//! * the Wootters concurrence of an arbitrary two-qubit state (used as oracle),
//! * concurrence and three-tangle of GHZ-symmetric states as functions of the
//!   triangle coordinates.
//!
//! The symmetric three-tangle interpolates linearly between the GHZ/W line,
//! where it vanishes, and the vertex GHZ₊, where it is 1: a point on the ray from
//! GHZ₊ that reaches the GHZ/W line at ray parameter t = 1 has τ₃ = max(0, 1 − t).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, kron, pauli, ComplexMatrix};
use crate::states::{DensityMatrix, PureState};
use crate::symmetry::{SymCoords, TRIANGLE_SLACK};

/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-12;
const BRACKET_SCAN: usize = 64;
const VERTEX_RADIUS: f64 = 1e-9;
const EDGE_DISTANCE: f64 = 2.0 * TRIANGLE_SLACK;

fn ghz_point() -> (f64, f64) {
    (0.5, 3f64.sqrt() / 4.0)
}

/// Three-tangle 2√|d₁ − 2d₂ + 4d₃| of a three-qubit vector (not renormalized).
pub fn tau3_pure(psi: &PureState) -> Result<f64> {
    if psi.nqubits != 3 {
        return Err(Error::InvalidInput(
            "three-tangle needs 8 amplitudes".into(),
        ));
    }
    let a = |j: usize, k: usize, l: usize| psi.amplitudes[4 * j + 2 * k + l];
    let sq = |z: Complex64| z * z;
    let d1 = sq(a(0, 0, 0)) * sq(a(1, 1, 1))
        + sq(a(0, 0, 1)) * sq(a(1, 1, 0))
        + sq(a(0, 1, 0)) * sq(a(1, 0, 1))
        + sq(a(0, 1, 1)) * sq(a(1, 0, 0));
    let d2 = a(0, 0, 0) * a(0, 0, 1) * a(1, 1, 0) * a(1, 1, 1)
        + a(0, 0, 0) * a(0, 1, 0) * a(1, 0, 1) * a(1, 1, 1)
        + a(0, 0, 0) * a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 1)
        + a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 1) * a(1, 1, 0)
        + a(0, 0, 1) * a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 0)
        + a(0, 1, 0) * a(0, 1, 1) * a(1, 0, 0) * a(1, 0, 1);
    let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1)
        + a(1, 0, 0) * a(0, 1, 0) * a(0, 0, 1) * a(1, 1, 1);
    Ok(2.0 * (d1 - d2 * 2.0 + d3 * 4.0).norm().sqrt())
}

/// Wootters concurrence max(0, λ₁ − λ₂ − λ₃ − λ₄) of a normalized two-qubit state.
///
/// The λᵢ are the singular values of Vᵀ(σy⊗σy)V where ρ = VV† comes from the
/// eigendecomposition; they coincide with the eigenvalues of √(√ρ ρ̃ √ρ). The
/// singular values are read off the Hermitian dilation [[0, M], [M†, 0]] so that
/// no square root of a near-zero eigenvalue is ever taken.
pub fn concurrence_wootters(rho: &DensityMatrix) -> Result<f64> {
    if rho.nqubits() != 2 {
        return Err(Error::InvalidInput(
            "concurrence needs a two-qubit state".into(),
        ));
    }
    let eig = herm_eig(rho.matrix())?;
    let v = ComplexMatrix::from_fn(4, 4, |i, k| {
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt()
    });
    let yy = kron(&pauli::y(), &pauli::y());
    let m = &(&v.transpose() * &yy) * &v;
    let dilation = ComplexMatrix::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, false) => m[(i, j - 4)],
        (false, true) => m[(j, i - 4)].conj(),
        _ => Complex64::new(0.0, 0.0),
    });
    let sv = herm_eig(&dilation)?.eigenvalues;
    Ok((sv[0] - sv[1] - sv[2] - sv[3]).max(0.0))
}

/// max(0, 2|x| + √2·y − ½) for a two-qubit symmetric state.
pub fn concurrence_sym(c: SymCoords) -> Result<f64> {
    if c.nqubits != 2 {
        return Err(Error::InvalidInput("two-qubit coordinates expected".into()));
    }
    c.ensure_in_triangle()?;
    Ok(concurrence_sym_signed(c).max(0.0))
}

pub(crate) fn concurrence_sym_signed(c: SymCoords) -> f64 {
    2.0 * c.x.abs() + std::f64::consts::SQRT_2 * c.y - 0.5
}

/// A point of the GHZ/W line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WLinePoint {
    pub v: f64,
    pub x_w: f64,
    pub y_w: f64,
}

fn wline_unchecked(v: f64) -> WLinePoint {
    let v2 = v * v;
    let v3 = v2 * v;
    let denom = 4.0 - v2;
    WLinePoint {
        v,
        x_w: (v3 * v2 + 8.0 * v3) / (8.0 * denom),
        y_w: 3f64.sqrt() / 4.0 * (4.0 - v2 - v2 * v2) / denom,
    }
}

/// Point of the GHZ/W line for v ∈ [−1, 1].
pub fn wline(v: f64) -> Result<WLinePoint> {
    if !(-1.0..=1.0).contains(&v) {
        return Err(Error::OutOfDomain(format!("v = {v} outside [-1, 1]")));
    }
    Ok(wline_unchecked(v))
}

/// Where the ray from GHZ₊ through a query point meets the GHZ/W line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Intersection {
    pub wpoint: WLinePoint,
    /// Query = GHZ₊ + t·(wpoint − GHZ₊).
    pub t: f64,
    pub tau3: f64,
    /// The query sits on the GHZ₊ vertex, where the ray direction is undefined.
    pub degenerate: bool,
}

/// Ray–line intersection without domain checks. `None` if no bracket exists.
fn intersect_ray(x: f64, y: f64) -> Option<Intersection> {
    let (gx, gy) = ghz_point();
    let (qx, qy) = (x - gx, y - gy);
    if qx.hypot(qy) < VERTEX_RADIUS {
        return Some(Intersection {
            wpoint: wline_unchecked(1.0),
            t: 0.0,
            tau3: 1.0,
            degenerate: true,
        });
    }
    let g = |v: f64| {
        let w = wline_unchecked(v);
        (w.x_w - gx) * qy - (w.y_w - gy) * qx
    };

    let mut root = None;
    let mut lo = 0.0;
    let mut g_lo = g(lo);
    if g_lo == 0.0 {
        root = Some(lo);
    } else {
        for k in 1..=BRACKET_SCAN {
            let hi = k as f64 / BRACKET_SCAN as f64;
            let g_hi = g(hi);
            if g_hi == 0.0 {
                root = Some(hi);
                break;
            }
            if g_lo.signum() != g_hi.signum() {
                let (mut a, mut b, mut ga) = (lo, hi, g_lo);
                while b - a > ROOT_TOL {
                    let mid = 0.5 * (a + b);
                    let gm = g(mid);
                    if gm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if gm.signum() == ga.signum() {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                root = Some(0.5 * (a + b));
                break;
            }
            lo = hi;
            g_lo = g_hi;
        }
    }
    // Rays along the triangle edges touch the line at an endpoint, where
    // rounding can hide the sign change.
    let root = root.or_else(|| {
        [0.0, 1.0]
            .into_iter()
            .map(|v| {
                let w = wline_unchecked(v);
                // distance of the query from the ray through W(v)
                (v, g(v).abs() / (w.x_w - gx).hypot(w.y_w - gy))
            })
            .filter(|&(_, dist)| dist <= EDGE_DISTANCE)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(v, _)| v)
    });
    let v = root?;
    let w = wline_unchecked(v);
    let (dx, dy) = (w.x_w - gx, w.y_w - gy);
    let t = (qx * dx + qy * dy) / (dx * dx + dy * dy);
    Some(Intersection {
        wpoint: w,
        t,
        tau3: (1.0 - t).clamp(0.0, 1.0),
        degenerate: false,
    })
}

/// Intersection of the GHZ₊ ray through `c` with the GHZ/W line (v ∈ [0, 1]).
pub fn wline_intersection(c: SymCoords) -> Result<Intersection> {
    if c.nqubits != 3 {
        return Err(Error::InvalidInput(
            "three-qubit coordinates expected".into(),
        ));
    }
    c.ensure_in_triangle()?;
    if c.x < -TRIANGLE_SLACK {
        return Err(Error::OutOfDomain(format!(
            "x = {} is negative; mirror the point first",
            c.x
        )));
    }
    intersect_ray(c.x.max(0.0), c.y).ok_or_else(|| {
        Error::Geometry(format!(
            "no sign change of the ray/W-line cross product for ({}, {})",
            c.x, c.y
        ))
    })
}

/// Exact three-tangle of the GHZ-symmetric state at `c`.
pub fn tau3_sym(c: SymCoords) -> Result<f64> {
    Ok(wline_intersection(c.mirrored())?.tau3)
}

/// 1 − t without clipping: negative below the GHZ/W line, equal to τ₃ above it.
///
/// Continuous across the line, so a search that starts inside the W region
/// still sees a slope.
pub(crate) fn tau3_sym_signed(c: SymCoords) -> f64 {
    let m = c.mirrored();
    match intersect_ray(m.x, m.y) {
        Some(hit) => 1.0 - hit.t,
        None => f64::NEG_INFINITY,
    }
}

/// Concurrence (N=2) or three-tangle (N=3) of the symmetric state at `c`.
pub fn sym_measure(c: SymCoords) -> Result<f64> {
    match c.nqubits {
        2 => concurrence_sym(c),
        3 => tau3_sym(c),
        n => Err(Error::InvalidInput(format!("{n} qubits not supported"))),
    }
}

/// Unclipped continuation of [`sym_measure`], used as a search objective.
pub(crate) fn sym_measure_signed(c: SymCoords) -> f64 {
    match c.nqubits {
        2 => concurrence_sym_signed(c),
        _ => tau3_sym_signed(c),
    }
}
