//! Command-line front end for the GHZ witness pipeline.
//!
//! State files are JSON objects `{"nqubits": 3, "matrix": [[[re, im], ...], ...], "label": "..."}`
//! with the matrix stored row-major. Sweeps are written as CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ghzwit_core::{
    canonical_state, concurrence_wootters, evaluate, fast_bound, linear_witness, random_density,
    validate, CanonicalState, ComplexMatrix, DensityMatrix, Family, FamilyReference, LinearWitness,
    Mode, Objective, OptimizerConfig, PipelineConfig, WitnessReport,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The input is well formed but violates a requirement (exit 2).
    #[error("{0}")]
    Semantic(String),
    /// Reading, writing or parsing failed (exit 3).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantic(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ghzwit_core::Error> for CliError {
    fn from(e: ghzwit_core::Error) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// On-disk form of a density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub nqubits: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix, nqubits: usize, label: Option<String>) -> Self {
        let matrix = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        Self {
            nqubits,
            matrix,
            label,
        }
    }

    pub fn from_state(rho: &DensityMatrix, label: Option<String>) -> Self {
        Self::from_matrix(rho.matrix(), rho.nqubits(), label)
    }

    /// The raw matrix, after shape checks only.
    pub fn to_matrix(&self) -> CliResult<ComplexMatrix> {
        if !(2..=3).contains(&self.nqubits) {
            return Err(CliError::Io(format!(
                "nqubits must be 2 or 3, got {}",
                self.nqubits
            )));
        }
        let d = 1usize << self.nqubits;
        if self.matrix.len() != d || self.matrix.iter().any(|row| row.len() != d) {
            return Err(CliError::Io(format!(
                "matrix must be {d}x{d} for {} qubits",
                self.nqubits
            )));
        }
        let data = self
            .matrix
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Ok(ComplexMatrix::from_row_major(d, d, data)?)
    }

    /// Parses and validates as a normalized density matrix.
    pub fn to_state(&self) -> CliResult<DensityMatrix> {
        Ok(validate(self.to_matrix()?, true)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Io(format!("malformed state file: {e}")))
    }
}

pub fn read_state_file(path: &Path) -> CliResult<StateFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    StateFile::parse(&text)
}

pub fn read_state(path: &Path) -> CliResult<DensityMatrix> {
    read_state_file(path)?.to_state().map_err(|e| match e {
        CliError::Semantic(msg) => CliError::Semantic(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_state_file(path: &Path, file: &StateFile) -> CliResult<()> {
    fs::write(path, file.to_json() + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(
    name = "ghzwit",
    version,
    about = "GHZ-type entanglement bounds for 2- and 3-qubit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    Full,
    Fast,
    /// Signed value of the linear GHZ (or Φ⁺) fidelity witness only.
    Witness,
    NoNormalForm,
    NoUnitaryOpt,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SearchArgs {
    /// Local-unitary search objective.
    #[arg(long, default_value = "measure")]
    pub objective: Objective,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report the ablated pipeline candidates.
    #[arg(long)]
    pub ablations: bool,
}

impl SearchArgs {
    fn pipeline(&self, mode: Mode) -> PipelineConfig {
        PipelineConfig {
            mode,
            optimizer: OptimizerConfig {
                restarts: self.restarts,
                seed: self.seed,
                objective: self.objective,
                ..OptimizerConfig::default()
            },
            ablations: self.ablations,
            ..PipelineConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NamedState {
    Ghz,
    GhzMinus,
    W,
    WBar,
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    Rho1,
    Rho2,
    Rho3,
    /// Two-qubit Werner state p·|Ψ⁻⟩⟨Ψ⁻| + (1−p)·I/4.
    Werner,
    Mixed2,
    Mixed3,
    /// Seeded random state (see --nqubits, --rank, --seed).
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a state file.
    Eval {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: EvalMode,
        #[command(flatten)]
        search: SearchArgs,
        /// Print a single JSON line instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the full pipeline on a member of a test family.
    Demo {
        family: Family,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
    },
    /// Sweep a family over p and write CSV.
    Scan {
        family: Family,
        #[arg(long, default_value_t = 0.0)]
        pmin: f64,
        #[arg(long, default_value_t = 1.0)]
        pmax: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Compare the two-qubit pipeline with the Wootters concurrence.
    Oracle {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a named state to a state file.
    Export {
        state: NamedState,
        #[arg(long)]
        out: PathBuf,
        /// Mixing parameter for rho1, rho2, rho3 and werner.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        nqubits: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// One line of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub fast: f64,
    pub raw: f64,
    pub full: f64,
    pub linear: f64,
    pub oracle: Option<f64>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Eval {
            path,
            mode,
            search,
            json,
        } => cmd_eval(&path, mode, &search, json, out),
        Command::Demo {
            family,
            p,
            search,
            json,
        } => cmd_demo(family, p, &search, json, out),
        Command::Scan {
            family,
            pmin,
            pmax,
            steps,
            out: path,
            search,
        } => {
            let rows = scan(family, pmin, pmax, steps, &search)?;
            match path {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| {
                        CliError::Io(format!("cannot write {}: {e}", path.display()))
                    })?;
                    write_csv(&rows, file)?;
                    writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
                    Ok(())
                }
                None => write_csv(&rows, out),
            }
        }
        Command::Oracle { path, json } => cmd_oracle(&path, json, out),
        Command::Export {
            state,
            out: path,
            p,
            nqubits,
            rank,
            seed,
        } => {
            let rho = named_state(state, p, nqubits, rank, seed)?;
            let label = state.to_possible_value().unwrap().get_name().to_string();
            write_state_file(&path, &StateFile::from_state(&rho, Some(label)))?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(())
        }
    }
}

pub fn named_state(
    state: NamedState,
    p: f64,
    nqubits: usize,
    rank: Option<usize>,
    seed: u64,
) -> CliResult<DensityMatrix> {
    use NamedState::*;
    let name = match state {
        Ghz => CanonicalState::GhzPlus,
        GhzMinus => CanonicalState::GhzMinus,
        W => CanonicalState::W,
        WBar => CanonicalState::WBar,
        PhiPlus => CanonicalState::PhiPlus,
        PhiMinus => CanonicalState::PhiMinus,
        PsiPlus => CanonicalState::PsiPlus,
        PsiMinus => CanonicalState::PsiMinus,
        Rho1 => CanonicalState::Rho1(p),
        Rho2 => CanonicalState::Rho2(p),
        Rho3 => CanonicalState::Rho3(p),
        Mixed2 => CanonicalState::MaxMixed(2),
        Mixed3 => CanonicalState::MaxMixed(3),
        Werner => {
            check_p(p)?;
            let singlet = canonical_state(CanonicalState::PsiMinus)?;
            let noise = ComplexMatrix::identity(4).scale((1.0 - p) / 4.0);
            return Ok(DensityMatrix::new(&singlet.matrix().scale(p) + &noise)?);
        }
        Random => {
            let rank = rank.unwrap_or(1 << nqubits);
            return Ok(random_density(seed, nqubits, rank)?);
        }
    };
    Ok(canonical_state(name)?)
}

fn check_p(p: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(CliError::Semantic(format!("p = {p} outside [0, 1]")))
    }
}

#[derive(Serialize)]
struct WitnessOnly {
    mode: &'static str,
    nqubits: usize,
    witness: LinearWitness,
    value: f64,
}

pub fn cmd_eval(
    path: &Path,
    mode: EvalMode,
    search: &SearchArgs,
    json: bool,
    out: &mut dyn Write,
) -> CliResult<()> {
    let rho = read_state(path)?;
    let mode = match mode {
        EvalMode::Witness => {
            let witness = LinearWitness::for_qubits(rho.nqubits())?;
            let w = WitnessOnly {
                mode: "witness",
                nqubits: rho.nqubits(),
                witness,
                value: linear_witness(&rho, witness)?,
            };
            if json {
                writeln!(out, "{}", to_json_line(&w))?;
            } else {
                writeln!(out, "mode: witness")?;
                writeln!(out, "nqubits: {}", w.nqubits)?;
                writeln!(out, "witness: {:?}", w.witness)?;
                writeln!(out, "value: {}", w.value)?;
            }
            return Ok(());
        }
        EvalMode::Full => Mode::Full,
        EvalMode::Fast => Mode::Fast,
        EvalMode::NoNormalForm => Mode::NoNormalForm,
        EvalMode::NoUnitaryOpt => Mode::NoUnitaryOpt,
    };
    let report = evaluate(&rho, &search.pipeline(mode))?;
    if json {
        writeln!(out, "{}", to_json_line(&report))?;
    } else {
        write_report(&report, out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DemoOutput<'a> {
    family: Family,
    p: f64,
    report: &'a WitnessReport,
    reference: &'a FamilyReference,
}

pub fn cmd_demo(
    family: Family,
    p: f64,
    search: &SearchArgs,
    json: bool,
    out: &mut dyn Write,
) -> CliResult<()> {
    check_p(p)?;
    let (report, reference) = ghzwit_core::family_bound(family, p, &search.pipeline(Mode::Full))?;
    if json {
        let d = DemoOutput {
            family,
            p,
            report: &report,
            reference: &reference,
        };
        writeln!(out, "{}", to_json_line(&d))?;
        return Ok(());
    }
    writeln!(out, "family: {family}")?;
    writeln!(out, "p: {p}")?;
    write_report(&report, out)?;
    match (reference.exact, reference.interval) {
        (Some(v), _) => writeln!(out, "reference: {v}")?,
        (None, Some((lo, hi))) => writeln!(out, "reference: ({lo}, {hi})")?,
        (None, None) => writeln!(out, "reference: unknown")?,
    }
    Ok(())
}

/// Evaluates `steps` evenly spaced members of a family.
pub fn scan(
    family: Family,
    pmin: f64,
    pmax: f64,
    steps: usize,
    search: &SearchArgs,
) -> CliResult<Vec<ScanRow>> {
    if !(0.0 <= pmin && pmin <= pmax && pmax <= 1.0) {
        return Err(CliError::Semantic(format!(
            "need 0 <= pmin <= pmax <= 1, got pmin = {pmin}, pmax = {pmax}"
        )));
    }
    if steps < 2 {
        return Err(CliError::Semantic(format!("need steps >= 2, got {steps}")));
    }
    let cfg = search.pipeline(Mode::Full);
    (0..steps)
        .map(|k| {
            let p = if k + 1 == steps {
                pmax
            } else {
                pmin + (pmax - pmin) * k as f64 / (steps - 1) as f64
            };
            let rho = family.state(p)?;
            let report = evaluate(&rho, &cfg)?;
            let fast = fast_bound(&rho)?;
            Ok(ScanRow {
                p,
                fast,
                raw: fast,
                full: report.value,
                linear: linear_witness(&rho, LinearWitness::W3)?,
                oracle: family.reference(p).exact,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[ScanRow], sink: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    wootters: f64,
    pipeline: f64,
    diff: f64,
}

pub fn cmd_oracle(path: &Path, json: bool, out: &mut dyn Write) -> CliResult<()> {
    let rho = read_state(path)?;
    if rho.nqubits() != 2 {
        return Err(CliError::Semantic(format!(
            "oracle needs a two-qubit state, {} has {} qubits",
            path.display(),
            rho.nqubits()
        )));
    }
    let wootters = concurrence_wootters(&rho)?;
    let pipeline = evaluate(&rho, &PipelineConfig::default())?.value;
    let o = OracleOutput {
        wootters,
        pipeline,
        diff: (pipeline - wootters).abs(),
    };
    if json {
        writeln!(out, "{}", to_json_line(&o))?;
    } else {
        writeln!(out, "wootters: {}", o.wootters)?;
        writeln!(out, "pipeline: {}", o.pipeline)?;
        writeln!(out, "diff: {:.3e}", o.diff)?;
    }
    Ok(())
}

fn to_json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes")
}

pub fn write_report(r: &WitnessReport, out: &mut dyn Write) -> CliResult<()> {
    writeln!(out, "value: {}", r.value)?;
    writeln!(out, "nqubits: {}", r.nqubits)?;
    writeln!(out, "mode: {}", r.mode)?;
    if let Some(status) = r.normal_form_status {
        writeln!(out, "normal_form_status: {status}")?;
        writeln!(out, "normal_form_iterations: {}", r.normal_form_iterations)?;
        writeln!(out, "trace_factor: {}", r.trace_factor)?;
    }
    writeln!(out, "coords_raw: ({}, {})", r.coords_raw.x, r.coords_raw.y)?;
    writeln!(out, "coords_opt: ({}, {})", r.coords_opt.x, r.coords_opt.y)?;
    for c in &r.candidates {
        writeln!(out, "candidate {}: {}", c.label, c.value)?;
    }
    writeln!(out, "seed: {}", r.seed)?;
    writeln!(out, "evaluations: {}", r.evaluations)?;
    for note in &r.notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}
