use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building schemas, decoding
/// designations, parsing notation or touching a registry file.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("new factor must sit at position {expected}, got {found}")]
    PositionNotNext { expected: u64, found: u64 },
    #[error("factor name {0:?} is already used in this schema")]
    DuplicateName(String),
    #[error("schema already holds the maximum of {max} factors")]
    TooManyFactors { max: usize },
    #[error("{position} is not a factor position in schema {schema}")]
    UnknownPosition { position: u64, schema: String },

    #[error("{value} is out of range for schema {schema} (must be below {limit})")]
    OutOfRange {
        value: String,
        limit: u64,
        schema: String,
    },
    #[error("choices are incomplete: no answer for position(s) {missing:?}")]
    IncompleteChoices { missing: Vec<u64> },
    #[error("position {0} answered more than once")]
    DuplicatePosition(u64),
    #[error("stream has {found} characters, schema needs exactly {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("unexpected character {ch:?} at offset {offset}")]
    BadChar { ch: char, offset: usize },

    #[error("choice must be 0 or 1, got {0}")]
    BadChoice(i64),

    #[error("unrecognized notation: {0:?}")]
    UnrecognizedSyntax(String),
    #[error("position {0} is constrained to both 0 and 1")]
    ConflictingConstraint(u64),
    #[error("style {style} cannot render {item}")]
    StyleMismatch {
        style: &'static str,
        item: &'static str,
    },
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("record id {0:?} already exists")]
    DuplicateId(String),
    #[error("rationale key {0} is not a factor position")]
    InvalidRationaleKey(u64),
    #[error("schema {new} is not an extension of {old}")]
    NotAnExtension { old: String, new: String },
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-friendly name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidFactor(_) => "InvalidFactor",
            Error::InvalidSchema(_) => "InvalidSchema",
            Error::PositionNotNext { .. } => "PositionNotNext",
            Error::DuplicateName(_) => "DuplicateName",
            Error::TooManyFactors { .. } => "TooManyFactors",
            Error::UnknownPosition { .. } => "UnknownPosition",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::IncompleteChoices { .. } => "IncompleteChoices",
            Error::DuplicatePosition(_) => "DuplicatePosition",
            Error::BadLength { .. } => "BadLength",
            Error::BadChar { .. } => "BadChar",
            Error::BadChoice(_) => "BadChoice",
            Error::UnrecognizedSyntax(_) => "UnrecognizedSyntax",
            Error::ConflictingConstraint(_) => "ConflictingConstraint",
            Error::StyleMismatch { .. } => "StyleMismatch",
            Error::SchemaMismatch { .. } => "SchemaMismatch",
            Error::DuplicateId(_) => "DuplicateId",
            Error::InvalidRationaleKey(_) => "InvalidRationaleKey",
            Error::NotAnExtension { .. } => "NotAnExtension",
            Error::MalformedDocument(_) => "MalformedDocument",
            Error::Io { .. } => "IoFailure",
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
