use thiserror::Error;

use crate::grid::Position;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("two robots at {0}")]
    DuplicatePosition(Position),
    #[error("no robot at {0}")]
    NotARobot(Position),
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("invalid color label {0:?}")]
    InvalidColorLabel(String),
    #[error("a phi={phi} ball cannot have {cells} cells")]
    BallShape { phi: u32, cells: usize },
    #[error("the center cell must hold the observing robot")]
    CenterNotOccupied,
}

/// Structural problems with a rule set (independent of well-definedness).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleSetError {
    #[error("visibility range must be positive")]
    ZeroPhi,
    #[error("color ids must be dense 0..{expected}, found {found} at index {index}")]
    SparseColorIds {
        index: usize,
        expected: usize,
        found: u8,
    },
    #[error("duplicate color label {0}")]
    DuplicateLabel(String),
    #[error("color {0} is not declared by the rule set")]
    UnknownColor(String),
    #[error("rule {rule}: pattern has phi={found}, rule set has phi={expected}")]
    PhiMismatch {
        rule: usize,
        expected: u32,
        found: u32,
    },
    #[error("rule {0}: color change in a rule set with fixed lights")]
    ColorChangeWithFixedLights(usize),
    #[error("rule set is not well-defined: {conflicts} conflicts, {symmetric} adversary-controlled rules")]
    NotWellDefined { conflicts: usize, symmetric: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("view has phi={found}, rules expect phi={expected}")]
    PhiMismatch { expected: u32, found: u32 },
    #[error("view matches rules {first} and {second} with different outputs")]
    Ambiguous { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("round {round}: robots from {sources:?} collide at {target}")]
    NodeCollision {
        round: u64,
        target: Position,
        sources: Vec<Position>,
    },
    #[error("round {round}: color {label} at {position} is not part of the rule set")]
    UnknownColor {
        round: u64,
        position: Position,
        label: String,
    },
    #[error("round {round}: {source}")]
    Match { round: u64, source: MatchError },
    #[error(transparent)]
    RuleSet(#[from] RuleSetError),
}

impl EngineError {
    pub fn is_collision(&self) -> bool {
        matches!(self, EngineError::NodeCollision { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("phase {0} never reached within the trace")]
    PhaseMissing(u64),
    #[error("phase {phase} boundary needs phase {next} to be detected first", next = phase + 1)]
    TraceTooShort { phase: u64 },
    #[error("distance divergence needs at least 3 detected phases, got {0}")]
    TooFewPhases(usize),
    #[error("node {witness} still unvisited after {budget} rounds")]
    BudgetExhausted { budget: u64, witness: Position },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A rule-file or trace-file syntax error, with 1-based location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected {0:?}")]
    Unexpected(String),
    #[error("missing header field {0}")]
    MissingHeader(&'static str),
    #[error("duplicate header field {0}")]
    DuplicateHeader(&'static str),
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("unknown color label {0:?}")]
    UnknownColor(String),
    #[error("pattern row {row} needs {expected} cells, found {found}")]
    RowArity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("rule block ended after {found} of {expected} pattern rows")]
    MissingRows { expected: usize, found: usize },
    #[error("pattern center must be a color label")]
    CenterNotOccupied,
    #[error("{0}")]
    Invalid(String),
}
