use std::fmt;

/// Severity of a parser diagnostic. Errors abort parsing, warnings accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// A positioned message produced by one of the text parsers. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line,
            column,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line,
            column,
            message: message.into(),
            severity: Severity::Warning,
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at line {}, column {}: {}",
            self.severity, self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("graph contains a cycle")]
    CycleDetected,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("cardinality mismatch for `{variable}`: {left} vs {right}")]
    CardinalityMismatch {
        variable: String,
        left: usize,
        right: usize,
    },
    #[error("state {state} out of range for `{variable}` (cardinality {cardinality})")]
    StateOutOfRange {
        variable: String,
        state: usize,
        cardinality: usize,
    },
    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },
    #[error("factor has zero total mass")]
    ZeroMass,
    #[error("state space of {size} entries exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },
    #[error("partially directed graph has no consistent DAG extension")]
    NotExtendable,
    #[error("invalid variable: {0}")]
    InvalidVariable(String),
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("invalid conditional probability table for `{child}`: {reason}")]
    InvalidCpd { child: String, reason: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("invalid structure constraints: {0}")]
    InvalidConstraints(String),
    #[error("edge weights are not comparable (NaN between `{0}` and `{1}`)")]
    DisconnectedWeights(String, String),
    #[error("data contains missing values in `{0}`; use EM estimation for incomplete data")]
    MissingDataPresent(String),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("no observed data")]
    NoObservedData,
    #[error("invalid elimination order: {0}")]
    InvalidFixedOrder(String),
    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),
    #[error("evidence has zero probability under the model")]
    ImpossibleEvidence,
    #[error("junction tree has not been calibrated")]
    NotCalibrated,
    #[error("incompatible simulation spec: {0}")]
    IncompatibleSpec(String),
    #[error("graph has no edge `{exposure}` -> `{outcome}`")]
    NoDirectedEdge { exposure: String, outcome: String },
    #[error("invalid causal query: {0}")]
    InvalidQuery(String),
    #[error("data rows {rows:?} have zero probability under the model")]
    LogZero { rows: Vec<usize> },
    #[error("{0}")]
    Parse(ParseDiagnostic),
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("UAI file describes a Markov network; only BAYES files are supported")]
    NotBayes { line: usize },
    #[error("row at line {line} has {found} fields, expected {expected}")]
    RaggedRow { line: usize, found: usize, expected: usize },
    #[error("negative or non-finite weight on row {row}")]
    NegativeWeight { row: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Line/column of the failure, for errors raised by the text parsers.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            Error::Parse(d) => Some((d.line, d.column)),
            Error::Semantic { line, .. } => Some((*line, 1)),
            Error::RaggedRow { line, .. } => Some((*line, 1)),
            Error::NotBayes { line } => Some((*line, 1)),
            _ => None,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CycleDetected => "CycleDetected",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::CardinalityMismatch { .. } => "CardinalityMismatch",
            Error::StateOutOfRange { .. } => "StateOutOfRange",
            Error::UnknownState { .. } => "UnknownState",
            Error::ZeroMass => "ZeroMass",
            Error::StateSpaceTooLarge { .. } => "StateSpaceTooLarge",
            Error::NotExtendable => "NotExtendable",
            Error::InvalidVariable(_) => "InvalidVariable",
            Error::InvalidFactor(_) => "InvalidFactor",
            Error::InvalidCpd { .. } => "InvalidCpd",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidData(_) => "InvalidData",
            Error::InsufficientData(_) => "InsufficientData",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::InvalidConstraints(_) => "InvalidConstraints",
            Error::DisconnectedWeights(..) => "DisconnectedWeights",
            Error::MissingDataPresent(_) => "MissingDataPresent",
            Error::InvalidPrior(_) => "InvalidPrior",
            Error::NoObservedData => "NoObservedData",
            Error::InvalidFixedOrder(_) => "InvalidFixedOrder",
            Error::InvalidEvidence(_) => "InvalidEvidence",
            Error::ImpossibleEvidence => "ImpossibleEvidence",
            Error::NotCalibrated => "NotCalibrated",
            Error::IncompatibleSpec(_) => "IncompatibleSpec",
            Error::NoDirectedEdge { .. } => "NoDirectedEdge",
            Error::InvalidQuery(_) => "InvalidQuery",
            Error::LogZero { .. } => "LogZero",
            Error::Parse(_) => "ParseError",
            Error::Semantic { .. } => "SemanticError",
            Error::NotBayes { .. } => "NotBayes",
            Error::RaggedRow { .. } => "RaggedRow",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
