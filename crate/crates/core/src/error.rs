use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("element {elem} does not belong to group {group}")]
    WrongGroup { elem: String, group: String },

    #[error("mixed-group operands: {0}")]
    MixedGroups(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("semigroup membership budget exceeded at {elem}; increase the window radius or --budget-slack")]
    Budget { elem: String },

    #[error("{elem} is outside the domain of the piecewise translation")]
    OutsideDomain { elem: String },

    #[error("{elem} lies in {count} pieces of the piecewise translation")]
    PieceOverlap { elem: String, count: usize },

    #[error("composition undefined: {elem} maps outside the domain of the outer map")]
    NotComposable { elem: String },

    #[error("not injective: {first} and {second} both map to {image}")]
    NotInjective { first: String, second: String, image: String },

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation left the validated region at {elem}: {reason}")]
    LeftWindow { elem: String, reason: String },

    #[error("enumeration bound exhausted: {0}")]
    Exhausted(String),

    #[error("incomplete action table: no entry for {r} . {x}")]
    IncompleteTable { r: String, x: String },

    #[error("malformed certificate: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}
