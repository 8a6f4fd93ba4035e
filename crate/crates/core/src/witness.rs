//! The full pipeline and the cheaper witnesses derived from it.
//!
//! Every candidate listed in a report is a lower bound on its own: the raw
//! twirl of the phase-fixed input, the signed linear witness, and the optimized
//! image of the normal form rescaled by tr ρᴺᶠ. The reported value is their
//! maximum.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal_form::{normal_form, NormalFormConfig, NormalFormResult, NormalFormStatus};
use crate::optimize::{bell_align, bell_diagonalize, optimize_local_unitaries, OptimizerConfig};
use crate::states::{canonical_state, CanonicalState, DensityMatrix, Family, FamilyReference};
use crate::symmetry::{coords, fix_phase, SymCoords};
use crate::tangle::sym_measure;

/// Which stages of the pipeline run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Full,
    NoNormalForm,
    NoUnitaryOpt,
    /// Four matrix elements of the phase-fixed input, nothing else.
    Fast,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::NoNormalForm => "no-normal-form",
            Mode::NoUnitaryOpt => "no-unitary-opt",
            Mode::Fast => "fast",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "no-normal-form" => Ok(Mode::NoNormalForm),
            "no-unitary-opt" => Ok(Mode::NoUnitaryOpt),
            "fast" => Ok(Mode::Fast),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub normal_form: NormalFormConfig,
    pub optimizer: OptimizerConfig,
    /// Also list the no-normal-form and no-unitary-opt candidates in full mode.
    pub ablations: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub label: String,
    pub value: f64,
    /// Coordinates of the twirled state behind the value, if there is one.
    pub coords: Option<SymCoords>,
}

impl Candidate {
    fn new(label: &str, value: f64, coords: Option<SymCoords>) -> Self {
        Self {
            label: label.into(),
            value,
            coords,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    /// Certified lower bound (exact concurrence for two qubits).
    pub value: f64,
    pub nqubits: usize,
    pub mode: Mode,
    pub trace_factor: f64,
    /// Coordinates of the twirled, phase-fixed input.
    pub coords_raw: SymCoords,
    /// Coordinates behind the winning candidate.
    pub coords_opt: SymCoords,
    pub candidates: Vec<Candidate>,
    pub normal_form_status: Option<NormalFormStatus>,
    pub normal_form_iterations: usize,
    pub seed: u64,
    pub evaluations: usize,
    pub notes: Vec<String>,
}

impl WitnessReport {
    pub fn candidate(&self, label: &str) -> Option<f64> {
        self.candidates
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.value)
    }
}

/// The two signed linear witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LinearWitness {
    /// −2·tr(𝒲₂ρ), 𝒲₂ = I/2 − |Φ⁺⟩⟨Φ⁺|
    W2,
    /// −4·tr(𝒲₃ρ), 𝒲₃ = (3/4)I − |GHZ₊⟩⟨GHZ₊|
    W3,
}

impl LinearWitness {
    pub fn for_qubits(nqubits: usize) -> Result<Self> {
        match nqubits {
            2 => Ok(LinearWitness::W2),
            3 => Ok(LinearWitness::W3),
            n => Err(Error::InvalidInput(format!("{n} qubits not supported"))),
        }
    }

    fn nqubits(self) -> usize {
        match self {
            LinearWitness::W2 => 2,
            LinearWitness::W3 => 3,
        }
    }
}

/// Signed value of a linear witness; negative values mean "not detected".
pub fn linear_witness(rho: &DensityMatrix, which: LinearWitness) -> Result<f64> {
    if rho.nqubits() != which.nqubits() {
        return Err(Error::InvalidInput(format!(
            "{which:?} acts on {} qubits, state has {}",
            which.nqubits(),
            rho.nqubits()
        )));
    }
    let (target, shift, scale) = match which {
        LinearWitness::W2 => (CanonicalState::PhiPlus, 0.5, 2.0),
        LinearWitness::W3 => (CanonicalState::GhzPlus, 0.75, 4.0),
    };
    let proj = canonical_state(target)?;
    let overlap = rho.expectation(proj.matrix()).re;
    Ok(-scale * (shift * rho.trace() - overlap))
}

/// Linear lower bound 4x + 2√3·y − 5/2 on the symmetric three-tangle, i.e.
/// −4·tr(𝒲₃ρˢ) written in triangle coordinates.
pub fn plane_bound(c: SymCoords) -> f64 {
    4.0 * c.x + 2.0 * 3f64.sqrt() * c.y - 2.5
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

/// Measure of the twirl of the phase-fixed state, from its four corner elements.
pub fn fast_bound(rho: &DensityMatrix) -> Result<f64> {
    require_normalized(rho)?;
    sym_measure(coords(&fix_phase(rho).state)?)
}

struct Aligned {
    coords: SymCoords,
    evaluations: usize,
}

/// Local-unitary step: Bell alignment for two qubits, search for three.
fn align(state: &DensityMatrix, checked: bool, cfg: &OptimizerConfig) -> Result<Aligned> {
    let r = match state.nqubits() {
        2 if checked => bell_diagonalize(state)?,
        2 => bell_align(state),
        _ => optimize_local_unitaries(state, cfg.objective, cfg)?,
    };
    Ok(Aligned {
        coords: r.coords(),
        evaluations: r.evaluations,
    })
}

/// Runs the pipeline in `cfg.mode` on a two- or three-qubit state.
pub fn evaluate(rho: &DensityMatrix, cfg: &PipelineConfig) -> Result<WitnessReport> {
    require_normalized(rho)?;
    let n = rho.nqubits();
    let coords_raw = coords(&fix_phase(rho).state)?;
    let raw = sym_measure(coords_raw)?;
    let mut report = WitnessReport {
        value: raw,
        nqubits: n,
        mode: cfg.mode,
        trace_factor: 1.0,
        coords_raw,
        coords_opt: coords_raw,
        candidates: Vec::new(),
        normal_form_status: None,
        normal_form_iterations: 0,
        seed: cfg.optimizer.seed,
        evaluations: 0,
        notes: Vec::new(),
    };
    if cfg.mode == Mode::Fast {
        report
            .candidates
            .push(Candidate::new("fast", raw, Some(coords_raw)));
        return Ok(report);
    }

    let wants = |m: Mode| cfg.mode == m || (cfg.ablations && cfg.mode == Mode::Full);
    let nf: Option<NormalFormResult> = if cfg.mode != Mode::NoNormalForm || cfg.ablations {
        Some(normal_form(rho, &cfg.normal_form)?)
    } else {
        None
    };
    if let Some(nf) = &nf {
        report.normal_form_status = Some(nf.status);
        report.normal_form_iterations = nf.iterations;
        report.trace_factor = nf.trace_factor;
        match nf.status {
            NormalFormStatus::Zero if cfg.mode == Mode::Full => {
                report.value = 0.0;
                report.candidates = vec![Candidate::new("zero-normal-form", 0.0, None)];
                report
                    .notes
                    .push("normal form is zero; the measure vanishes".into());
                return Ok(report);
            }
            NormalFormStatus::IterationLimit => report.notes.push(format!(
                "normal form stopped at the iteration limit ({} updates, marginal defect {:.2e}); \
                 the bound stays valid but may be loose",
                nf.iterations,
                nf.marginal_defect()
            )),
            _ => {}
        }
    }
    let nf_state = nf.as_ref().and_then(NormalFormResult::normalized);
    let converged = nf.as_ref().map(|r| r.status) == Some(NormalFormStatus::Converged);

    let mut candidates = Vec::new();
    if cfg.mode == Mode::Full {
        let state = nf_state.as_ref().expect("non-zero normal form");
        let a = align(state, converged, &cfg.optimizer)?;
        report.evaluations += a.evaluations;
        let value = sym_measure(a.coords)? * report.trace_factor;
        candidates.push(Candidate::new("full", value, Some(a.coords)));
    }
    if wants(Mode::NoNormalForm) {
        let a = align(rho, false, &cfg.optimizer)?;
        report.evaluations += a.evaluations;
        candidates.push(Candidate::new(
            "no-normal-form",
            sym_measure(a.coords)?,
            Some(a.coords),
        ));
    }
    if wants(Mode::NoUnitaryOpt) {
        candidates.push(match &nf_state {
            Some(state) => {
                let cn = coords(&fix_phase(state).state)?;
                Candidate::new(
                    "no-unitary-opt",
                    sym_measure(cn)? * report.trace_factor,
                    Some(cn),
                )
            }
            None => Candidate::new("no-unitary-opt", 0.0, None),
        });
    }
    candidates.push(Candidate::new("raw", raw, Some(coords_raw)));
    let linear = linear_witness(rho, LinearWitness::for_qubits(n)?)?;
    candidates.push(Candidate::new("linear", linear, None));

    let mut best = &candidates[0];
    for cand in &candidates[1..] {
        if cand.value > best.value {
            best = cand;
        }
    }
    report.value = best.value.clamp(0.0, 1.0);
    report.coords_opt = best.coords.unwrap_or(coords_raw);
    report.candidates = candidates;
    if n == 3 {
        report
            .notes
            .push("three-qubit value is a lower bound on the three-tangle".into());
    }
    Ok(report)
}

/// Lower bound on the three-tangle of a three-qubit state.
pub fn ghz_tangle_bound(rho: &DensityMatrix, cfg: &PipelineConfig) -> Result<WitnessReport> {
    if rho.nqubits() != 3 {
        return Err(Error::InvalidInput(
            "three-tangle bound needs three qubits".into(),
        ));
    }
    evaluate(rho, cfg)
}

/// Concurrence of a two-qubit state through normal form and Bell alignment.
pub fn concurrence_bound(rho: &DensityMatrix, cfg: &PipelineConfig) -> Result<WitnessReport> {
    if rho.nqubits() != 2 {
        return Err(Error::InvalidInput(
            "concurrence bound needs two qubits".into(),
        ));
    }
    evaluate(rho, cfg)
}

/// Runs the pipeline on a member of a test family and attaches its known value.
pub fn family_bound(
    family: Family,
    p: f64,
    cfg: &PipelineConfig,
) -> Result<(WitnessReport, FamilyReference)> {
    let rho = family.state(p)?;
    let mut report = ghz_tangle_bound(&rho, cfg)?;
    let reference = family.reference(p);
    if let Some(note) = &reference.note {
        report.notes.push(note.clone());
    }
    Ok((report, reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random_density;
    use crate::tangle::concurrence_wootters;

    #[test]
    fn linear_witness_examples() {
        let ghz = canonical_state(CanonicalState::GhzPlus).unwrap();
        assert!((linear_witness(&ghz, LinearWitness::W3).unwrap() - 1.0).abs() < 1e-15);
        let mixed = canonical_state(CanonicalState::MaxMixed(3)).unwrap();
        assert!((linear_witness(&mixed, LinearWitness::W3).unwrap() + 2.5).abs() < 1e-15);
        let w = canonical_state(CanonicalState::W).unwrap();
        assert!((linear_witness(&w, LinearWitness::W3).unwrap() + 3.0).abs() < 1e-15);
        let phi = canonical_state(CanonicalState::PhiPlus).unwrap();
        assert!((linear_witness(&phi, LinearWitness::W2).unwrap() - 1.0).abs() < 1e-15);
        assert!(linear_witness(&phi, LinearWitness::W3).is_err());
    }

    #[test]
    fn plane_bound_matches_witness_on_symmetric_states() {
        let c0 = SymCoords::new(3, 0.2, 0.1);
        let s = crate::symmetry::sym_state(3, c0).unwrap();
        let lw = linear_witness(&s, LinearWitness::W3).unwrap();
        assert!((plane_bound(c0) - lw).abs() < 1e-14);
    }

    #[test]
    fn fast_bound_examples() {
        let ghz = canonical_state(CanonicalState::GhzPlus).unwrap();
        assert!((fast_bound(&ghz).unwrap() - 1.0).abs() < 1e-12);
        for p in [0.0, 0.5, 0.8, 0.95] {
            let r = canonical_state(CanonicalState::Rho3(p)).unwrap();
            assert!((fast_bound(&r).unwrap() - (4.0 * p - 3.0).max(0.0)).abs() < 1e-9);
        }
        let b = canonical_state(CanonicalState::Basis {
            nqubits: 3,
            index: 2,
        })
        .unwrap();
        assert_eq!(fast_bound(&b).unwrap(), 0.0);
    }

    #[test]
    fn ghz_and_w() {
        let cfg = PipelineConfig::default();
        let ghz = canonical_state(CanonicalState::GhzPlus).unwrap();
        let r = ghz_tangle_bound(&ghz, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let w = canonical_state(CanonicalState::W).unwrap();
        let r = ghz_tangle_bound(&w, &cfg).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.normal_form_status, Some(NormalFormStatus::Zero));
    }

    #[test]
    fn psi_minus_is_rescued() {
        let psi = canonical_state(CanonicalState::PsiMinus).unwrap();
        let r = concurrence_bound(&psi, &PipelineConfig::default()).unwrap();
        assert_eq!(r.candidate("raw"), Some(0.0));
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_two_qubit_matches_wootters() {
        let rho = random_density(3, 2, 4).unwrap();
        let r = concurrence_bound(&rho, &PipelineConfig::default()).unwrap();
        assert!((r.value - concurrence_wootters(&rho).unwrap()).abs() < 1e-6);
        let sep = DensityMatrix::new(crate::numerics::ComplexMatrix::from_real_diagonal(&[
            0.5, 0.0, 0.0, 0.5,
        ]))
        .unwrap();
        assert_eq!(
            concurrence_bound(&sep, &PipelineConfig::default())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn modes_and_ablations() {
        let rho = random_density(21, 3, 3).unwrap();
        let mut cfg = PipelineConfig {
            ablations: true,
            ..PipelineConfig::default()
        };
        cfg.optimizer.restarts = 6;
        let full = evaluate(&rho, &cfg).unwrap();
        for label in ["full", "no-normal-form", "no-unitary-opt", "raw", "linear"] {
            let v = full.candidate(label).unwrap();
            assert!(v <= full.value, "{label}");
        }
        let max = full
            .candidates
            .iter()
            .map(|c| c.value)
            .fold(f64::MIN, f64::max);
        assert_eq!(full.value, max.max(0.0));
        for mode in [Mode::NoNormalForm, Mode::NoUnitaryOpt, Mode::Fast] {
            let r = evaluate(
                &rho,
                &PipelineConfig {
                    mode,
                    ablations: false,
                    ..cfg
                },
            )
            .unwrap();
            assert_eq!(r.mode, mode);
            assert!(r.value <= full.value + 1e-12, "{mode}");
            assert_eq!(mode.to_string().parse::<Mode>().unwrap(), mode);
        }
    }

    #[test]
    fn family_notes() {
        let cfg = PipelineConfig::default();
        let (report, reference) = family_bound(Family::Rho1, 0.72, &cfg).unwrap();
        assert!(report.value < 1e-9, "{}", report.value);
        assert_eq!(reference.interval, Some((0.19, 0.31)));
        assert!(report.notes.iter().any(|n| n.contains("underestimate")));
    }
}
