use thiserror::Error;

/// Malformed text input (matrices, circuits, detector error models, configs).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error{}: {message}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
pub struct ParseError {
    pub message: String,
    pub line: Option<usize>,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        ParseError { message: message.into(), line: None }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("polynomial {poly} has colliding monomials {first} and {second}")]
    CollidingMonomials { poly: char, first: String, second: String },
    #[error("torus dimensions must be at least 2, got ell={ell}, m={m}")]
    TorusTooSmall { ell: usize, m: usize },
    #[error("polynomial {poly} must have {expected} terms, got {got}")]
    TermCount { poly: char, expected: &'static str, got: usize },
    #[error("rotated surface code distance must be odd and >= 3, got {0}")]
    BadSurfaceDistance(usize),
    #[error("stabilizers do not commute: hx * hz^T != 0")]
    NonCommuting,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("layout does not match the code: {0}")]
    Mismatch(String),
    #[error("removing coupler {ancilla}-{data} leaves no length-4 detour")]
    NoDetour { ancilla: usize, data: usize },
    #[error("scheme {scheme} cannot be applied to a {layout} layout")]
    SchemeMismatch { scheme: String, layout: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("instruction {index} ({name}) is not allowed here: {reason}")]
    Unsupported { index: usize, name: String, reason: String },
    #[error("record reference rec[-{back}] reaches before the first measurement")]
    RecordOutOfRange { back: usize },
    #[error("CX targets must be distinct, got {0} twice")]
    RepeatedTarget(usize),
    #[error("qubit {qubit} is used twice in layer {layer}")]
    LayerConflict { qubit: usize, layer: usize },
    #[error("schedule uses coupler {0}-{1} which is absent from the connectivity graph")]
    MissingCoupler(usize, usize),
    #[error("{0}")]
    Schedule(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("noise strength {p} outside [0, {max}] for the {model} model")]
    OutOfRange { model: &'static str, p: f64, max: f64 },
    #[error("circuit already contains noise channels")]
    AlreadyNoisy,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DemError {
    #[error("{kind} {index} is not deterministic in the absence of noise")]
    NonDeterministic { kind: &'static str, index: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("syndrome lies outside the column space of the check matrix")]
    Unsatisfiable,
    #[error("syndrome has length {got}, expected {expected}")]
    SyndromeLength { expected: usize, got: usize },
    #[error("brute-force decoding refused: {mechanisms} mechanisms exceeds the limit of {limit}")]
    TooLarge { mechanisms: usize, limit: usize },
    #[error("invalid decoder configuration: {0}")]
    Config(String),
}

/// Crate-level error used by the experiment front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Dem(#[from] DemError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
