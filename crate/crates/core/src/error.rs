use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("non-finite complex value ({re}, {im})")]
    NonFinite { re: f64, im: f64 },
    #[error("state is not normalized: squared norm {0}")]
    Unnormalized(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DdError {
    #[error("child {child} has level {found}, expected {expected}")]
    ChildLevel { child: usize, found: i32, expected: i32 },
    #[error("operand levels differ: {0} vs {1}")]
    LevelMismatch(i32, i32),
    #[error("index has {found} bits, diagram covers {expected} qubits")]
    IndexLength { found: usize, expected: usize },
    #[error("dense input of length {0} is not a power of two")]
    DenseLength(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {width}-qubit circuit")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("qubit {0} used more than once in one gate")]
    DuplicateQubit(usize),
    #[error("{kind} takes {expected} parameter(s), got {found}")]
    ParamCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{kind} takes {expected} target(s), got {found}")]
    TargetCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("rank count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{global} global qubits exceed {total} total qubits")]
    TooManyRanks { global: usize, total: usize },
    #[error("expected a diagram over {expected} qubits, got {found}")]
    Width { expected: usize, found: usize },
    #[error("expected {expected} parts, got {found}")]
    PartCount { expected: usize, found: usize },
    #[error("rank index {index} out of range for {ranks} ranks")]
    RankIndex { index: usize, ranks: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("offset {offset}: {message}")]
    Decode { offset: usize, message: String },
    #[error("diagram exceeds wire format capacity: {0}")]
    Capacity(String),
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("rank {peer} disconnected")]
    Disconnected { peer: usize },
    #[error("invalid rank {0}")]
    InvalidRank(usize),
    #[error("collective misuse: {0}")]
    Protocol(String),
    #[error("socket error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("circuit has {circuit} qubits but the plan expects {plan}")]
    Width { circuit: usize, plan: usize },
    #[error("unsupported configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("rank worker panicked")]
    WorkerPanic,
}
