use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families: input validation (bad spectra, bad
/// configs, states that break an invariant) and numerical failures that
/// only show up during a run (non-adiabatic ramps, degenerate inversions).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("non-finite eigenvalue {0}")]
    NonFinite(f64),

    #[error("eigenvalue {0} has no partner -{0} (spectrum must satisfy g_m = -g_-m)")]
    SpectrumAsymmetric(f64),

    #[error("eigenvalue magnitude {0} appears in more than one sector")]
    SpectrumDegenerate(f64),

    #[error("particle number must be at least 1, got {0}")]
    InvalidN(usize),

    #[error("state is not normalized: total probability {0}")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sector parameter: {0}")]
    InvalidSector(String),

    #[error("coherence bound violated between sectors {m} and {n}: |gamma|^2 = {value} > p_m p_n = {bound}")]
    CoherenceBound { m: usize, n: usize, value: f64, bound: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPsd(f64),

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("zero-sector amplitude is spread over {0} basis vectors; a pure state carries a single zero amplitude")]
    ZeroSectorAmbiguous(usize),

    #[error("sector {0} received no counts")]
    EmptySector(u32),

    #[error("Fisher information is zero; weights and bounds are undefined")]
    AllZero,

    #[error("estimate and weight index sets differ")]
    IndexMismatch,

    #[error("sector {sector}: phase {phase} is within 1e-6 of a multiple of pi/2, inversion is ill-conditioned")]
    DegenerateTheta { sector: u32, phase: f64 },

    #[error("state is not equatorial")]
    NotEquatorial,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time step too coarse: dt * |H| = {0} > 10")]
    StepTooCoarse(f64),

    #[error("ramp is not adiabatic: dominant component weight {weight} < 0.99 for m_x = {m_x}")]
    NotAdiabatic { m_x: f64, weight: f64 },

    #[error("adjacent adiabatic levels approach within {gap} at b_x = {bx}")]
    DegenerateCrossing { bx: f64, gap: f64 },

    #[error("pulse count T/tau must be a positive even integer, got T/tau = {0}")]
    InvalidInterval(f64),

    #[error("matrix is not Hermitian (deviation {0})")]
    NotHermitian(f64),

    #[error("bath operators are linearly dependent (Gram min eigenvalue {0})")]
    BathDependent(f64),

    #[error("controlled-X construction differs from its projector form by {0}")]
    ConstructionMismatch(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by invalid user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NotAdiabatic { .. }
                | Error::DegenerateCrossing { .. }
                | Error::StepTooCoarse(_)
                | Error::DegenerateTheta { .. }
                | Error::ConstructionMismatch(_)
                | Error::AllZero
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
