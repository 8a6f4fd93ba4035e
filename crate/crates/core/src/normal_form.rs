//! SLOCC normal form by iterated determinant-one local filtering.
//!
//! Each update replaces one qubit's marginal ρⱼ by a multiple of the identity
//! with the filter Aⱼ = det(ρⱼ)^{1/4} ρⱼ^{−1/2}. By the AM–GM inequality the
//! trace never increases; states whose orbit closure contains 0 (the W class,
//! product states) drive it to zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{apply_local, det2, inv_sqrt_psd, marginal, ComplexMatrix};
use crate::states::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalFormConfig {
    /// Largest accepted ‖ρⱼ/tr ρ − I/2‖_F over all marginals.
    pub marginal_tol: f64,
    /// Traces below this count as the zero normal form.
    pub zero_threshold: f64,
    /// Budget of single-party updates.
    pub max_iterations: usize,
    /// det(ρⱼ)/tr(ρⱼ)² below this counts as a singular marginal.
    pub singular_threshold: f64,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        Self {
            marginal_tol: 1e-10,
            zero_threshold: 1e-12,
            max_iterations: 10_000,
            singular_threshold: 1e-14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalFormStatus {
    Converged,
    Zero,
    IterationLimit,
}

impl std::fmt::Display for NormalFormStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormalFormStatus::Converged => "converged",
            NormalFormStatus::Zero => "zero",
            NormalFormStatus::IterationLimit => "iteration-limit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormResult {
    /// Unnormalized normal form (the zero matrix when `status` is `Zero`).
    pub nf: DensityMatrix,
    /// Accumulated determinant-one filter per party.
    pub filters: Vec<ComplexMatrix>,
    /// tr ρᴺᶠ
    pub trace_factor: f64,
    /// Single-party updates performed.
    pub iterations: usize,
    pub status: NormalFormStatus,
    /// Trace at the start of every sweep over the parties, plus the final trace.
    pub trace_history: Vec<f64>,
}

impl NormalFormResult {
    /// nf / tr nf, or `None` for the zero normal form.
    pub fn normalized(&self) -> Option<DensityMatrix> {
        match self.status {
            NormalFormStatus::Zero => None,
            _ => Some(DensityMatrix::from_trusted(
                self.nf.matrix().scale(1.0 / self.trace_factor),
                self.nf.nqubits(),
                true,
            )),
        }
    }

    /// Largest Frobenius distance of a marginal of nf/tr nf from I/2.
    pub fn marginal_defect(&self) -> f64 {
        marginal_defect(self.nf.matrix(), self.nf.nqubits())
    }
}

fn marginal_defect(m: &ComplexMatrix, n: usize) -> f64 {
    let t = m.trace().re;
    (0..n)
        .map(|j| {
            let mut r = marginal(m, n, j).scale(1.0 / t);
            r[(0, 0)].re -= 0.5;
            r[(1, 1)].re -= 0.5;
            r.frobenius_norm()
        })
        .fold(0.0, f64::max)
}

/// Computes the normal form of a normalized two- or three-qubit state.
pub fn normal_form(rho: &DensityMatrix, cfg: &NormalFormConfig) -> Result<NormalFormResult> {
    if !rho.is_normalized() {
        return Err(Error::InvalidInput(
            "normal form needs a normalized density matrix".into(),
        ));
    }
    let n = rho.nqubits();
    let mut m = rho.matrix().clone();
    let mut filters = vec![ComplexMatrix::identity(2); n];
    let mut history = Vec::new();
    let mut iterations = 0;

    let finish = |m: ComplexMatrix, filters, iterations, status, mut history: Vec<f64>| {
        let (m, trace) = match status {
            NormalFormStatus::Zero => (ComplexMatrix::zeros(1 << n, 1 << n), 0.0),
            _ => {
                let t = m.trace().re;
                (m, t)
            }
        };
        history.push(trace);
        NormalFormResult {
            nf: DensityMatrix::from_trusted(m, n, false),
            filters,
            trace_factor: trace,
            iterations,
            status,
            trace_history: history,
        }
    };

    loop {
        let trace = m.trace().re;
        if trace < cfg.zero_threshold {
            return Ok(finish(
                m,
                filters,
                iterations,
                NormalFormStatus::Zero,
                history,
            ));
        }
        if marginal_defect(&m, n) <= cfg.marginal_tol {
            return Ok(finish(
                m,
                filters,
                iterations,
                NormalFormStatus::Converged,
                history,
            ));
        }
        history.push(trace);
        for party in 0..n {
            if iterations >= cfg.max_iterations {
                return Ok(finish(
                    m,
                    filters,
                    iterations,
                    NormalFormStatus::IterationLimit,
                    history,
                ));
            }
            let r = marginal(&m, n, party).hermitian_part();
            let det = det2(&r).re;
            let tr = r.trace().re;
            if det <= cfg.singular_threshold * tr * tr {
                return Ok(finish(
                    m,
                    filters,
                    iterations,
                    NormalFormStatus::Zero,
                    history,
                ));
            }
            let a = inv_sqrt_psd(&r, 0.0)?.scale(det.powf(0.25));
            m = apply_local(&m, n, party, &a).hermitian_part();
            let f = &a * &filters[party];
            // keep det = 1 exactly despite rounding in the long products
            let scale = det2(&f).sqrt().inv();
            filters[party] = ComplexMatrix::from_fn(2, 2, |i, k| f[(i, k)] * scale);
            iterations += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::kron_all;
    use crate::states::{canonical_state, random_density, CanonicalState};

    fn reconstruct(rho: &DensityMatrix, r: &NormalFormResult) -> ComplexMatrix {
        rho.matrix().conjugate_by(&kron_all(&r.filters))
    }

    #[test]
    fn ghz_is_already_normal() {
        let ghz = canonical_state(CanonicalState::GhzPlus).unwrap();
        let r = normal_form(&ghz, &NormalFormConfig::default()).unwrap();
        assert_eq!(r.status, NormalFormStatus::Converged);
        assert_eq!(r.iterations, 0);
        assert!((r.trace_factor - 1.0).abs() < 1e-15);
        assert!(r.nf.matrix().max_abs_diff(ghz.matrix()) < 1e-15);
    }

    #[test]
    fn w_state_has_zero_normal_form() {
        let w = canonical_state(CanonicalState::W).unwrap();
        let r = normal_form(&w, &NormalFormConfig::default()).unwrap();
        assert_eq!(r.status, NormalFormStatus::Zero);
        assert_eq!(r.trace_factor, 0.0);
        assert!(r.trace_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(r.normalized().is_none());
    }

    #[test]
    fn product_state_is_zero() {
        let b = canonical_state(CanonicalState::Basis {
            nqubits: 3,
            index: 5,
        })
        .unwrap();
        let r = normal_form(&b, &NormalFormConfig::default()).unwrap();
        assert_eq!(r.status, NormalFormStatus::Zero);
    }

    #[test]
    fn random_full_rank_converges() {
        let rho = random_density(7, 3, 8).unwrap();
        let r = normal_form(&rho, &NormalFormConfig::default()).unwrap();
        assert_eq!(r.status, NormalFormStatus::Converged);
        assert!(r.marginal_defect() < 1e-8);
        for f in &r.filters {
            assert!((det2(f) - crate::numerics::c(1.0, 0.0)).norm() < 1e-10);
        }
        let back = reconstruct(&rho, &r);
        assert!(back.max_abs_diff(r.nf.matrix()) < 1e-8 * r.trace_factor);
        assert!(r.trace_factor <= 1.0);
        assert!(r.trace_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn idempotent() {
        let rho = random_density(11, 2, 3).unwrap();
        let cfg = NormalFormConfig::default();
        let first = normal_form(&rho, &cfg).unwrap();
        let again = normal_form(&first.normalized().unwrap(), &cfg).unwrap();
        assert_eq!(again.status, NormalFormStatus::Converged);
        assert!(again.iterations <= 4);
        for f in &again.filters {
            assert!(f.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-6);
        }
    }

    #[test]
    fn iteration_limit_is_reported() {
        let rho = canonical_state(CanonicalState::Rho3(0.3)).unwrap();
        let cfg = NormalFormConfig {
            max_iterations: 7,
            ..NormalFormConfig::default()
        };
        let r = normal_form(&rho, &cfg).unwrap();
        assert_eq!(r.status, NormalFormStatus::IterationLimit);
        assert_eq!(r.iterations, 7);
        assert!(r.trace_factor > 0.0 && r.trace_factor < 1.0);
    }

    #[test]
    fn rejects_unnormalized() {
        let m = DensityMatrix::unnormalized(ComplexMatrix::identity(4)).unwrap();
        assert!(normal_form(&m, &NormalFormConfig::default()).is_err());
    }
}
