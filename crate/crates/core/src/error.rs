use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("oracle `{0}` has no binding")]
    UnboundOracle(String),
    #[error("qubit {qubit} is out of range for a {num_qubits}-qubit circuit")]
    TargetOutOfRange { qubit: usize, num_qubits: usize },
    #[error("gate matrix is not unitary (deviation {0:e})")]
    NonUnitaryGate(f64),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("qubit {qubit} is used twice in layer {layer}")]
    LayerConflict { layer: usize, qubit: usize },
    #[error("gate class {class} does not admit {kind} gates")]
    GateClassViolation {
        class: &'static str,
        kind: &'static str,
    },
    #[error("expected {expected} qubits, found {found}")]
    QubitCountMismatch { expected: usize, found: usize },
    #[error("{requested} qubits exceed the simulation cap of {cap}")]
    TooManyQubits { requested: usize, cap: usize },
    #[error("sparse support of {0} amplitudes exceeds the configured limit")]
    SupportLimitExceeded(usize),
    #[error("input matrix is not unitary (deviation {0:e})")]
    NonUnitaryInput(f64),
    #[error("map is not a bijection on {0}-bit strings")]
    NotABijection(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("qRAM property violated (worst deviation {0:e})")]
    QramPropertyViolated(f64),
    #[error("state is not normalized (norm deviation {0:e})")]
    UnnormalizedState(f64),
    #[error("malformed oracle: {0}")]
    MalformedOracle(String),
    #[error("teleportation did not terminate within {0} rounds")]
    RoundCapExceeded(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
