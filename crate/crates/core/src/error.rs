use thiserror::Error;

use crate::sft::Symbol;

#[derive(Debug, Error, PartialEq)]
pub enum SftError {
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,
    #[error("empty system")]
    Empty,
    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: usize },
    #[error("cannot parse word {0:?}")]
    BadWord(String),
    #[error("transition table has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("equilibrium data requires primitivity")]
    NotPrimitive,
    #[error("empty system")]
    Empty,
    #[error("potential range must be at least 1")]
    BadRange,
    #[error("potential word {0:?} does not have length equal to the range")]
    BadPotentialWord(String),
    #[error("non-finite potential value for word {0:?}")]
    NonFinite(String),
    #[error("potential table is {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error(transparent)]
    Sft(#[from] SftError),
}

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("word length {len} is shorter than block length {n}")]
    TooShort { len: usize, n: usize },
    #[error("word is not admissible")]
    Inadmissible,
    #[error("sample has {got} bits but the block index has {expected} words")]
    SizeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum RepeatsError {
    #[error("intervals must be non-empty, sorted and disjoint")]
    BadIntervals,
    #[error("pattern has {got} symbols but its domain has {expected} positions")]
    LengthMismatch { expected: usize, got: usize },
    #[error("decomposition requires 0 not in A")]
    ZeroInArea,
    #[error("repeat area leaves [0, {0})")]
    AreaOutOfRange(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("tolerance too small: the entropy-typical set is empty")]
    EmptyTypicalSet,
    #[error("need k >= n >= 1, got n = {n}, k = {k}")]
    BadLengths { n: usize, k: usize },
    #[error("delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("alpha must exceed gamma0 = {gamma0} for the default tolerance, got {alpha}")]
    AlphaBelowGamma { alpha: f64, gamma0: f64 },
    #[error("|B_k| = {size} exceeds the enumeration guard {guard}; use monte_carlo_moments")]
    GuardExceeded { size: usize, guard: usize },
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sft(#[from] SftError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Repeats(#[from] RepeatsError),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}
