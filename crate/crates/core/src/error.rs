use thiserror::Error;

/// Errors raised by the toolkit. Validation failures name the invariant that broke.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown group family `{0}`")]
    UnknownFamily(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("element {element} does not belong to the group model ({reason})")]
    BadElement { element: String, reason: String },

    #[error("Følner index {index} is out of range: {reason}")]
    FolnerIndex { index: usize, reason: String },

    #[error("enumeration bound exceeded: {size} elements requested, limit is {limit}")]
    EnumerationBound { size: usize, limit: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("action index {index} out of range (system has {d} actions)")]
    ActionIndex { index: usize, d: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid index sequence: {0}")]
    IndexSequence(String),

    #[error("cube dimension {k} exceeds the configured bound {max}")]
    CubeTooLarge { k: usize, max: usize },

    #[error("broken joining: {0}")]
    BrokenJoining(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
