//! Parity-enhanced optimal measurements for quantum phase estimation.
//!
//! The crate covers the whole pipeline: qubit-sector decomposition of a
//! phase-shift generator, equatorial input states, quantum Fisher
//! information (closed form and an eigendecomposition oracle), the compound
//! parity / generator-squared measurement, per-sector maximum-likelihood
//! estimation with optimal weights, and two physical realizations: a
//! nonlinear two-mode interferometer and an ancilla-based nondemolition
//! parity readout. Dynamical decoupling against a small explicit bath is
//! simulated as well.

pub mod ancilla;
pub mod decoupling;
pub mod error;
pub mod estimation;
pub mod fisher;
pub mod interferometer;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod sampling;
pub mod spectrum;
pub mod states;

pub use error::{Error, Result};
pub use fisher::{qfi_mixed_es, qfi_oracle, qfi_pure, QfiResult};
pub use measurement::{Measurable, OutcomeCounts, OutcomeDistribution, Parity};
pub use spectrum::{build_spectrum, generator_matrix, sz_spectrum, GeneratorSpectrum, Sector};
pub use states::{DensityMatrix, MixedES, PhaseEncode, PureState, SectorState};
