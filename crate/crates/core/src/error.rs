use thiserror::Error;

use crate::hyperorder::AxiomReport;
use crate::stability::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("universe mismatch: expected {expected} contracts, got {found}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("universe of {size} contracts exceeds the supported maximum of {max}")]
    UniverseTooLarge { size: usize, max: usize },
    #[error("set bits {bits:#x} fall outside a universe of {universe_size}")]
    OutOfUniverse { universe_size: usize, bits: u64 },
    #[error("duplicate contract label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown contract `{0}`")]
    UnknownContract(String),
    #[error("universe of {size} contracts exceeds the exhaustive cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("empty list of choice functions")]
    EmptyList,
    #[error("invalid choice function: {0}")]
    InvalidChoice(String),
    #[error("choice function is not path-independent: {0}")]
    NotPlott(String),
    #[error("side {0} is not path-independent")]
    SideNotPlott(Side),
    #[error("side {0} is not certified path-independent")]
    NotCertified(Side),
    #[error("extensional relation table is incomplete: {missing} ordered pairs missing")]
    TableIncomplete { missing: usize },
    #[error("relation violates the Lehmann axioms")]
    AxiomsFail(Box<AxiomReport>),
    #[error("pair is not semi-stable: {0}")]
    NotSemiStable(String),
    #[error("set is not stable: {0}")]
    NotStable(String),
    #[error("stability precondition failed: {0}")]
    S1Violated(String),
    #[error("weakened choice does not dominate the original at subset {witness:#x}")]
    NotDominated { witness: u64 },
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown agent `{name}`")]
    UnknownAgent { line: usize, name: String },
    #[error("line {line}: contract `{contract}` is outside the block of agent `{agent}`")]
    ContractOutsideBlock { line: usize, agent: String, contract: String },
    #[error("line {line}: explicit table for agent `{agent}` is partial: {missing} subsets missing")]
    PartialTable { line: usize, agent: String, missing: usize },
    #[error("agent `{0}` has no choice specification")]
    MissingChoice(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
