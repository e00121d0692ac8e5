use thiserror::Error;

/// Errors produced by the scattering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radial mesh needs at least 3 points, got {0}")]
    MeshTooSmall(usize),

    #[error("radial mesh bounds invalid: r_min = {r_min}, r_max = {r_max}")]
    MeshBoundsInvalid { r_min: f64, r_max: f64 },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    EigenNonConvergence { index: usize, iterations: usize },

    #[error("state index {index} out of range for basis of size {size}")]
    StateIndexOutOfRange { index: usize, size: usize },

    #[error("initial state {index} is not a bound state (bound states: 0..{n_bound})")]
    NotBoundState { index: usize, n_bound: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not Hermitian: max |H - H^dag| = {0:.3e}")]
    NotHermitian(f64),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("dense unitary requested for {requested} qubits, limit is {limit}")]
    CircuitTooLarge { requested: usize, limit: usize },

    #[error("statevector has {state} qubits but circuit needs {circuit}")]
    QubitCountMismatch { state: usize, circuit: usize },

    #[error("impact parameter b = {b} must be smaller than r_max = {r_max}")]
    ImpactParameterTooLarge { b: f64, r_max: f64 },

    #[error("shots must be positive")]
    ZeroShots,

    #[error("basis contains no continuum (positive-energy) states")]
    NoContinuumStates,

    #[error("quadrature grid needs at least 2 points, got {0}")]
    QuadratureGridTooSmall(usize),

    #[error("grid values must be strictly ascending")]
    GridNotAscending,

    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
