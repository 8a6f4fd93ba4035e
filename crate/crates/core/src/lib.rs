//! Quantitative witness for GHZ-type entanglement in two- and three-qubit states.
//!
//! The pipeline brings a state to its SLOCC normal form, rotates it with local
//! unitaries, projects it onto the GHZ-symmetric family and evaluates the exact
//! measure of that family, rescaled by the normal-form trace. For two qubits the
//! result is the exact concurrence; for three qubits it is a lower bound on the
//! three-tangle that is exact for states locally equivalent to symmetric ones.

pub mod error;
pub mod normal_form;
pub mod numerics;
pub mod optimize;
pub mod states;
pub mod symmetry;
pub mod tangle;
pub mod witness;

pub use error::{Error, Result};
pub use normal_form::{normal_form, NormalFormConfig, NormalFormResult, NormalFormStatus};
pub use numerics::{herm_eig, partial_trace, tensor, ComplexMatrix, HermEigResult};
pub use optimize::{
    bell_diagonalize, optimize_local_unitaries, Objective, OptResult, OptimizerConfig,
};
pub use states::{
    canonical_state, random_density, random_pure, validate, CanonicalState, DensityMatrix, Family,
    FamilyReference, PureState,
};
pub use symmetry::{
    coords, fix_phase, group_element, sym_state, triangle, twirl, GroupElement, SymCoords,
};
pub use tangle::{
    concurrence_sym, concurrence_wootters, tau3_pure, tau3_sym, wline, wline_intersection,
    Intersection, WLinePoint,
};
pub use witness::{
    concurrence_bound, evaluate, family_bound, fast_bound, ghz_tangle_bound, linear_witness,
    plane_bound, Candidate, LinearWitness, Mode, PipelineConfig, WitnessReport,
};
